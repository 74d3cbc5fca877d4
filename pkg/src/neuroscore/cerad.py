"""CERAD-NB subtests 1, 2, 3, 4, 6 and 7, the total score and z-values."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import ConfigError, ContractError, ParseError
from .lexicon import DATA_DIR, LexiconSet, MmseItem, TargetItem, TargetList, normalize
from .matching import ONE_BEST, EditCosts, RankPolicy, match_targets, weighted_levenshtein
from .transcript import RecognitionResponse, Segment, SubjectMetadata

DEFAULT_RECIPE = DATA_DIR / "chandler_recipe.tsv"
MMSE_MAX = 30
MMSE_COSTS = EditCosts(substitution_cost=1.0, omission_cost=1.0, extra_token_cost=0.0)
TRANSFORMS = ("identity", "recognition_from_d")


# -- formulas ---------------------------------------------------------------

def savings_pct(recall_score: int, pass3_score: int) -> float | None:
    """Word List Savings; undefined (None) when the third learning pass scored 0."""
    if pass3_score == 0:
        return None
    return recall_score / pass3_score * 100


def discriminability_pct(hits: int, correct_rejections: int) -> float:
    """Discriminability exactly as printed: ((10 - hits) + (10 - CR)) / 20 * 100.

    Note that this grows with errors; ``100 - D`` is the conventional direction.
    """
    return ((10 - hits) + (10 - correct_rejections)) / 20 * 100


def _round_half_up(x: float, digits: int = 1) -> float:
    q = Decimal(1).scaleb(-digits)
    return float(Decimal(repr(x)).quantize(q, rounding=ROUND_HALF_UP))


# -- fluency, naming --------------------------------------------------------

def fluency_animals(segment: Segment, lex: LexiconSet,
                    policy: RankPolicy = ONE_BEST) -> list[str]:
    """Distinct animal lemmas in order of first mention.

    Each token contributes its best-ranked alternative whose lemma is an animal.
    """
    seen: list[str] = []
    for token in segment.tokens:
        for alt in policy.consulted(token):
            lemma = lex.lemma_of(alt.surface)
            if lex.animals.is_animal(lemma):
                if lemma not in seen:
                    seen.append(lemma)
                break
    return seen


def score_fluency(segment: Segment, lex: LexiconSet, policy: RankPolicy = ONE_BEST) -> int:
    return len(fluency_animals(segment, lex, policy))


def score_bnt(segment: Segment, targets: TargetList, lex: LexiconSet,
              policy: RankPolicy = ONE_BEST) -> int:
    return len(match_targets(segment, targets, lex, policy))


# -- MMSE -------------------------------------------------------------------

@dataclass
class MmseResult:
    scorable_points: int
    scorable_max: int
    scaled_score: float
    per_item: dict = field(default_factory=dict)


def _item_hypothesis(segment: Segment, item: MmseItem, lex: LexiconSet,
                     policy: RankPolicy) -> list[frozenset]:
    hyp = []
    for token in segment.tokens:
        forms = set()
        for alt in policy.consulted(token):
            form = normalize(alt.surface)
            if item.item_type == "spell_backwards":
                form = lex.letter_of(form) or form
            forms.add(form)
        hyp.append(frozenset(forms))
    return hyp


def score_mmse(segment: Segment, items: Sequence[MmseItem], lex: LexiconSet,
               policy: RankPolicy = ONE_BEST, item_segments: Mapping[str, Segment] | None = None,
               costs: EditCosts = MMSE_COSTS) -> MmseResult:
    """Score the speech-scorable MMSE items and scale them to 30 points.

    Items are scored on their own sub-segment when ``item_segments`` has one,
    otherwise on the whole MMSE segment.
    """
    if not items:
        raise ConfigError("MMSE item inventory is empty")
    item_segments = item_segments or {}
    points = maximum = 0
    per_item = {}
    for item in items:
        if not item.scorable:
            per_item[item.item_id] = {"type": item.item_type, "scored": False}
            continue
        seg = item_segments.get(item.item_id, segment)
        if item.item_type == "word_count":
            targets = TargetList(f"CERAD3:{item.item_id}", tuple(
                TargetItem(alts[0], frozenset(alts)) for alts in item.targets))
            ml = match_targets(seg, targets, lex, policy)
            earned = min(item.points, len(ml.matches))
            detail = {"matched": ml.canonicals}
        else:
            distance = weighted_levenshtein(item.reference(),
                                            _item_hypothesis(seg, item, lex, policy), costs)
            earned = item.points if distance <= item.tolerance else 0
            detail = {"distance": distance}
        points += earned
        maximum += item.points
        per_item[item.item_id] = {"type": item.item_type, "scored": True, "points": earned,
                                  "max": item.points, **detail}
    if maximum == 0:
        raise ConfigError("MMSE item inventory has no scorable points")
    return MmseResult(points, maximum, mmse_scaled(points, maximum), per_item)


def mmse_scaled(points: int, scorable_max: int) -> float:
    return _round_half_up(points * MMSE_MAX / scorable_max, 1)


# -- word list --------------------------------------------------------------

def _intrusions(segment: Segment, ml) -> list[str]:
    out: list[str] = []
    for i in ml.unmatched_content_tokens:
        form = normalize(segment.tokens[i].surface)
        if form not in out:
            out.append(form)
    return out


@dataclass
class LearningResult:
    pass_scores: tuple[int, int, int]
    learning_total: int
    intrusions: tuple[list[str], list[str], list[str]]

    @property
    def intrusion_count(self) -> int:
        return sum(len(x) for x in self.intrusions)


def score_word_list_learning(segments: Sequence[Segment], targets: TargetList, lex: LexiconSet,
                             policy: RankPolicy = ONE_BEST) -> LearningResult:
    if len(segments) != 3:
        raise ContractError(f"word list learning needs 3 recall segments, got {len(segments)}")
    scores, intrusions = [], []
    for seg in segments:
        ml = match_targets(seg, targets, lex, policy)
        scores.append(len(ml.matches))
        intrusions.append(_intrusions(seg, ml))
    return LearningResult(tuple(scores), sum(scores), tuple(intrusions))


@dataclass
class RecallResult:
    recall_score: int
    savings_pct: float | None
    intrusions: list[str]


def score_word_list_recall(segment: Segment, targets: TargetList, lex: LexiconSet,
                           policy: RankPolicy = ONE_BEST,
                           pass3_score: int | None = None) -> RecallResult:
    ml = match_targets(segment, targets, lex, policy)
    recall = len(ml.matches)
    savings = savings_pct(recall, pass3_score) if pass3_score is not None else None
    return RecallResult(recall, savings, _intrusions(segment, ml))


@dataclass
class RecognitionResult:
    hits: int
    correct_rejections: int
    discriminability_pct: float
    complement_pct: float | None = None


def score_recognition(responses: Iterable, targets: TargetList, distractors: TargetList,
                      report_complement: bool = False) -> RecognitionResult:
    """Score structured yes/no answers over the 10 list words and 10 distractors."""
    answers: dict[tuple[str, str], bool] = {}
    for r in responses:
        word, answer = (r.word, r.answer) if isinstance(r, RecognitionResponse) else r
        if isinstance(answer, str):
            answer = answer.strip().lower() in ("yes", "ja", "y", "j")
        form = normalize(word)
        if targets.accepts(form):
            key = ("target", targets.items[targets.lookup(form)].canonical)
        elif distractors.accepts(form):
            key = ("distractor", distractors.items[distractors.lookup(form)].canonical)
        else:
            raise ContractError(f"recognition response for unknown word {word!r}")
        if key in answers:
            raise ContractError(f"two responses for {key[1]!r}")
        answers[key] = bool(answer)
    expected = {("target", c) for c in targets.canonicals} | {
        ("distractor", c) for c in distractors.canonicals}
    if set(answers) != expected:
        missing = sorted(c for _, c in expected - set(answers))
        raise ContractError(f"recognition responses do not cover all words; missing {missing}")
    hits = sum(1 for (kind, _), yes in answers.items() if kind == "target" and yes)
    rejections = sum(1 for (kind, _), yes in answers.items() if kind == "distractor" and not yes)
    d = discriminability_pct(hits, rejections)
    return RecognitionResult(hits, rejections, d, 100 - d if report_complement else None)


# -- total and z ------------------------------------------------------------

@dataclass(frozen=True)
class RecipeComponent:
    component: str
    max_points: float
    cap: float
    transform: str
    if_absent: str


@dataclass(frozen=True)
class ChandlerRecipe:
    components: tuple[RecipeComponent, ...]
    source: str = ""

    @property
    def full_max(self) -> float:
        return sum(c.max_points for c in self.components)

    def describe(self) -> list[dict]:
        return [c.__dict__.copy() for c in self.components]


def load_recipe(path=None) -> ChandlerRecipe:
    path = Path(path) if path is not None else DEFAULT_RECIPE
    if not path.exists():
        raise ConfigError(f"recipe file {path} not found")
    comps = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = [f.strip() for f in line.split("\t")]
        if len(fields) != 5:
            raise ParseError("expected 5 tab-separated fields", path, lineno)
        name, mx, cap, transform, if_absent = fields
        try:
            mx_v, cap_v = float(mx), float(cap)
        except ValueError:
            raise ParseError("max and cap must be numbers", path, lineno) from None
        if transform not in TRANSFORMS:
            raise ParseError(f"unknown transform {transform!r}", path, lineno)
        if if_absent not in ("required", "rescale"):
            raise ParseError("if_absent must be 'required' or 'rescale'", path, lineno)
        comps.append(RecipeComponent(name, mx_v, cap_v, transform, if_absent))
    if not comps:
        raise ConfigError(f"recipe {path} has no components")
    return ChandlerRecipe(tuple(comps), str(path))


@dataclass
class CeradTotal:
    total: float
    unscaled_total: float
    included_max: float
    full_max: float
    contributions: dict
    omitted: list[str]
    recipe: list[dict]


def cerad_total(scores: Mapping[str, float], recipe: ChandlerRecipe) -> CeradTotal:
    """Capped sum of the recipe components, rescaled when optional ones are absent.

    ``scores["CERAD7"]`` is the printed discriminability D when the recipe uses
    ``recognition_from_d``.
    """
    contributions, omitted = {}, []
    included = 0.0
    for c in recipe.components:
        value = scores.get(c.component)
        if value is None:
            if c.if_absent == "required":
                raise ContractError(f"CERAD total needs a score for {c.component}")
            omitted.append(c.component)
            continue
        if c.transform == "recognition_from_d":
            value = 10 * (1 - value / 100)
        contributions[c.component] = min(value, c.cap)
        included += c.max_points
    if included == 0:
        raise ContractError("no CERAD total component present")
    unscaled = sum(contributions.values())
    total = unscaled * recipe.full_max / included if omitted else unscaled
    return CeradTotal(total, unscaled, included, recipe.full_max, contributions, omitted,
                      recipe.describe())


@dataclass(frozen=True)
class ZModel:
    b0: float
    b_age: float
    b_edu: float
    b_sex: float
    sd: float

    def __post_init__(self):
        if not self.sd > 0:
            raise ConfigError(f"z model sd must be positive, got {self.sd}")


def load_z_models(path) -> dict[str, ZModel]:
    """Read ``subtest,b0,b_age,b_edu,b_sex,sd`` rows; '#' lines are comments."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"z model file {path} not found")
    lines = [ln for ln in path.read_text(encoding="utf-8").splitlines()
             if ln.strip() and not ln.lstrip().startswith("#")]
    models = {}
    for row in csv.DictReader(io.StringIO("\n".join(lines))):
        try:
            models[row["subtest"]] = ZModel(*(float(row[k]) for k in
                                              ("b0", "b_age", "b_edu", "b_sex", "sd")))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"{path}: malformed z model row {row} ({exc})") from None
    return models


def cerad_z(raw: float, model: ZModel, meta: SubjectMetadata) -> float:
    """z = (raw - predicted mean) / sd; the sex indicator is 1 for male subjects."""
    sex = 1.0 if meta.sex == "m" else 0.0
    predicted = model.b0 + model.b_age * meta.age + model.b_edu * meta.education_years + model.b_sex * sex
    return (raw - predicted) / model.sd
