"""Synthetic screening sessions with known scores, and ASR-style error injection.

Randomness: every stream is Python's ``random.Random`` (MT19937, seeded with
``init_by_array`` over the 32-bit words of the seed) and only ``random()`` (a
53-bit double from two 32-bit outputs) is drawn; integers and shuffles are
derived from it explicitly so another implementation can reproduce a corpus.
Stream seeds are the first 8 bytes (big-endian) of
``sha256("/".join(labels))``, e.g. ``(profile_seed, "SKT3")``.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Mapping, Sequence

from . import cerad, skt
from .errors import ContractError, ParseError
from .evaluation import CohortMember, dump_expert_scores
from .lexicon import LexiconSet, MmseItem
from .pipeline import Resources
from .transcript import (Alternative, RecognitionResponse, Session, SubjectMetadata, SubtestSpan,
                         TimedToken, dump_session, parse_session)

GENERATOR_ID = "mt19937-python-random/sha256-labels/v1"
TOKEN_DURATION_S = 0.4
EXAMINER_INTERVAL_S = 0.5
SPAN_GAP_S = 1.0
RECALL_KEYS = ("SKT2", "SKT8", "SKT9", "CERAD1", "CERAD2", "CERAD3", "CERAD4", "CERAD6", "CERAD7")
FLUENCY_TRIALS = 24
SKT3_NUMBERS = 10
SKT7_LETTERS = 20

FILLERS = ("äh", "ähm", "also", "und", "hm")
EXAMINER_WORDS = ("bitte", "jetzt", "weiter", "danke", "gut", "nennen", "sie", "noch")
ONE_DIGIT_WORDS = ("eins", "zwei", "drei", "vier", "fünf", "sechs", "sieben", "acht", "neun")
# words no scorer reacts to: confabulations, intrusions and ASR substitutions
DISTRACTOR_WORDS = (
    "sonnig", "gestern", "schnell", "morgen", "laufen", "fahren", "wasser", "himmel", "wolke",
    "regen", "garten", "straße", "zimmer", "keller", "küche", "nachbar", "doktor", "schwester",
    "bruder", "tochter", "enkel", "urlaub", "arbeit", "zeitung", "radio", "fernseher", "bahnhof",
    "kino", "theater", "sommer", "winter", "frühling", "herbst", "montag", "dienstag", "sonntag",
    "januar", "februar", "mittag", "abend", "nacht", "farbe", "rot", "grün", "blau", "gelb",
    "groß", "klein", "lang", "kurz", "warm", "kalt", "neu", "hell", "dunkel", "rund", "eckig",
    "leise", "laut", "stark", "schwach", "tief", "weit", "früh", "spät", "schön", "holz",
    "eisen", "glas", "papier", "stein", "sand", "erde", "feuer", "luft", "eis",
)


def derive_seed(*labels) -> int:
    digest = hashlib.sha256("/".join(str(x) for x in labels).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


class Stream:
    """Seeded random stream drawing only ``random()`` from MT19937."""

    def __init__(self, seed: int):
        self._rng = random.Random(seed)

    def uniform(self) -> float:
        return self._rng.random()

    def chance(self, p: float) -> bool:
        return self._rng.random() < p

    def below(self, n: int) -> int:
        return int(self._rng.random() * n)

    def pick(self, seq):
        return seq[self.below(len(seq))]

    def shuffled(self, seq) -> list:
        out = list(seq)
        for i in range(len(out) - 1, 0, -1):
            j = self.below(i + 1)
            out[i], out[j] = out[j], out[i]
        return out


def distractor_pool(lex: LexiconSet | None = None) -> tuple[str, ...]:
    if lex is None:
        return DISTRACTOR_WORDS
    taken = lex.all_lexical_forms()
    return tuple(w for w in DISTRACTOR_WORDS if w not in taken)


@dataclass(frozen=True)
class ImpairmentProfile:
    recall_prob: Mapping[str, float]
    speech_rate: float = 1.5
    confabulation_rate: float = 0.1
    seed: int = 0
    filler_rate: float = 0.1

    def __post_init__(self):
        probs = dict(self.recall_prob)
        for k, p in probs.items():
            if not 0 <= p <= 1:
                raise ContractError(f"recall_prob[{k}] = {p} outside [0, 1]")
        for name in ("confabulation_rate", "filler_rate"):
            if not 0 <= getattr(self, name) <= 1:
                raise ContractError(f"{name} outside [0, 1]")
        if not self.speech_rate > 0:
            raise ContractError("speech_rate must be positive")
        object.__setattr__(self, "recall_prob", probs)

    @classmethod
    def uniform(cls, p: float, **kw) -> "ImpairmentProfile":
        return cls({k: p for k in RECALL_KEYS}, **kw)

    def p(self, key: str) -> float:
        return self.recall_prob.get(key, 1.0)


@dataclass(frozen=True)
class NoiseModel:
    substitution_prob: float = 0.0
    deletion_prob: float = 0.0
    alternative_recovery_prob: float = 0.0
    max_alternatives: int = 5
    seed: int = 0

    def __post_init__(self):
        for name in ("substitution_prob", "deletion_prob", "alternative_recovery_prob"):
            if not 0 <= getattr(self, name) <= 1:
                raise ContractError(f"{name} outside [0, 1]")
        if self.substitution_prob + self.deletion_prob > 1 + 1e-12:
            raise ContractError("substitution_prob + deletion_prob must not exceed 1")
        if self.max_alternatives < 1:
            raise ContractError("max_alternatives must be >= 1")


@dataclass
class GroundTruth:
    """Raw scores the session was built to have, keyed like expert-score files."""

    scores: dict[str, float]
    detail: dict = field(default_factory=dict)


class _Timeline:
    def __init__(self, start_s: float = 0.5):
        self.t = start_s
        self.tokens: list[TimedToken] = []
        self.spans: list[SubtestSpan] = []
        self._open: list[tuple[str, str | None, float]] = []

    def say(self, surface: str, speaker: str, interval: float) -> TimedToken:
        start = round(self.t, 2)
        tok = TimedToken(surface, start, round(start + TOKEN_DURATION_S, 2), speaker)
        self.tokens.append(tok)
        self.t = start + interval
        return tok

    def open(self, subtest: str, part: str | None = None) -> float:
        start = round(self.t, 2)
        self._open.append((subtest, part, start))
        return start

    def close(self) -> None:
        subtest, part, start = self._open.pop()
        last_end = max((t.end_s for t in self.tokens if t.start_s >= start), default=start)
        end = round(max(last_end, self.t) + 0.5, 2)
        self.spans.append(SubtestSpan(subtest, start, end, part))
        self.t = end + SPAN_GAP_S


class _Speaker:
    """Patient speech with fillers and optional confabulations."""

    def __init__(self, tl: _Timeline, profile: ImpairmentProfile, rng: Stream,
                 fillers: Sequence[str], distractors: Sequence[str]):
        self.tl, self.profile, self.rng = tl, profile, rng
        self.fillers, self.distractors = fillers, distractors
        self.interval = 1.0 / profile.speech_rate
        self.count = 0

    def word(self, surface: str) -> TimedToken:
        if self.count and self.fillers and self.rng.chance(self.profile.filler_rate):
            self.tl.say(self.rng.pick(self.fillers), "patient", self.interval)
        self.count += 1
        return self.tl.say(surface, "patient", self.interval)

    def maybe_confabulate(self) -> None:
        if self.distractors and self.rng.chance(self.profile.confabulation_rate):
            self.word(self.rng.pick(self.distractors))

    def examiner(self, n: int = 2) -> None:
        for _ in range(n):
            self.tl.say(self.rng.pick(EXAMINER_WORDS), "examiner", EXAMINER_INTERVAL_S)


def _surface(item, rng: Stream, alt_prob: float) -> str:
    alts = sorted(item.accepted_surfaces - {item.canonical})
    if alts and rng.chance(alt_prob):
        return rng.pick(alts)
    return item.canonical


def _duration(tokens: Sequence[TimedToken]) -> float:
    return min(tokens[-1].end_s - tokens[0].start_s, skt.TIME_LIMIT_S)


def generate_session(profile: ImpairmentProfile, lex: LexiconSet, form: str = "A",
                     subject_id: str = "S001", metadata: SubjectMetadata | None = None,
                     mmse_items: Sequence[MmseItem] | None = None,
                     skt7_alphabet: Sequence[str] = ("a", "b")) -> tuple[Session, GroundTruth]:
    """Build a clean session and the scores it encodes; a pure function of the arguments."""
    meta = metadata or SubjectMetadata(72, "f", "avg", 12, skt_form=form)
    if meta.skt_form != form:
        meta = replace(meta, skt_form=form)
    items = tuple(mmse_items if mmse_items is not None else lex.mmse_items)
    fillers = tuple(f for f in FILLERS if f in lex.stoplist)
    pool = distractor_pool(lex)
    tl = _Timeline()
    gt: dict[str, float] = {}
    detail: dict = {}

    def speaker(label: str) -> _Speaker:
        return _Speaker(tl, profile, Stream(derive_seed(profile.seed, label)), fillers, pool)

    objects = lex.skt_targets(form)

    # SKT1: all objects named in display order
    sp = speaker("SKT1")
    tl.open("SKT1")
    sp.examiner()
    named = [sp.word(_surface(item, sp.rng, 0.2)) for item in objects]
    tl.close()
    gt["SKT1"] = _duration(named)

    def memory(subtest: str) -> None:
        sp = speaker(subtest)
        tl.open(subtest)
        sp.examiner()
        recalled = [item for item in objects if sp.rng.chance(profile.p(subtest))]
        said = []
        for item in sp.rng.shuffled(recalled):
            sp.word(_surface(item, sp.rng, 0.2))
            said.append(item)
            if len(said) > 1 and sp.rng.chance(0.1):
                sp.word(sp.rng.pick(said[:-1]).canonical)
            sp.maybe_confabulate()
        if not recalled:
            sp.word("weiß")
            sp.word("nicht")
        tl.close()
        gt[subtest] = len(objects) - len(recalled)

    memory("SKT2")

    sp = speaker("SKT3")
    tl.open("SKT3")
    sp.examiner()
    numbers = []
    for _ in range(SKT3_NUMBERS):
        value = 10 + sp.rng.below(90)
        surface = str(value) if sp.rng.chance(0.3) else lex.numbers.words_for(value)[0]
        numbers.append(sp.word(surface))
    tl.close()
    gt["SKT3"] = _duration(numbers)

    sp = speaker("SKT6")
    span_start = tl.open("SKT6")
    sp.examiner()
    target = 10 + sp.rng.below(16)
    for w in ONE_DIGIT_WORDS:
        sp.word(w)
    last = None
    for value in range(10, target + 1):
        last = sp.word(lex.numbers.words_for(value)[0])
    tl.close()
    gt["SKT6"] = min(last.end_s - span_start, skt.TIME_LIMIT_S)
    detail["SKT6_count"] = target

    sp = speaker("SKT7")
    tl.open("SKT7")
    sp.examiner()
    letters = [sp.word(sp.rng.pick(list(skt7_alphabet))) for _ in range(SKT7_LETTERS)]
    tl.close()
    gt["SKT7"] = _duration(letters)

    memory("SKT8")
    memory("SKT9")

    # CERAD1: distinct animals, some inflected or repeated
    sp = speaker("CERAD1")
    tl.open("CERAD1")
    sp.examiner()
    animals = sorted(lex.animals.members)
    k = sum(1 for _ in range(FLUENCY_TRIALS) if sp.rng.chance(profile.p("CERAD1")))
    inflections: dict[str, list[str]] = {}
    for surface, lemma in sorted(lex.lemma_table.items()):
        inflections.setdefault(lemma, []).append(surface)
    chosen = sp.rng.shuffled(animals)[:k]
    for i, lemma in enumerate(chosen):
        forms = inflections.get(lemma, [])
        sp.word(sp.rng.pick(forms) if forms and sp.rng.chance(0.2) else lemma)
        if i and sp.rng.chance(0.1):
            sp.word(sp.rng.pick(chosen[:i]))
        sp.maybe_confabulate()
    if not chosen:
        sp.word("weiß")
        sp.word("nicht")
    tl.close()
    gt["CERAD1"] = k

    sp = speaker("CERAD2")
    tl.open("CERAD2")
    named_bnt = 0
    for item in lex.bnt:
        sp.examiner(1)
        if sp.rng.chance(profile.p("CERAD2")):
            sp.word(_surface(item, sp.rng, 0.25))
            named_bnt += 1
        elif sp.rng.chance(0.5):
            sp.word("weiß")
            sp.word("nicht")
        else:
            sp.word(sp.rng.pick(pool))
    tl.close()
    gt["CERAD2"] = named_bnt

    sp = speaker("CERAD3")
    tl.open("CERAD3")
    earned = maximum = 0
    item_points = {}
    for item in items:
        if not item.scorable:
            continue
        tl.open("CERAD3", item.item_id)
        sp.examiner()
        ok = sp.rng.chance(profile.p("CERAD3"))
        if item.item_type == "word_count":
            got = 0
            for alts in item.targets:
                if sp.rng.chance(profile.p("CERAD3")):
                    sp.word(alts[0] if len(alts) == 1 or not sp.rng.chance(0.2)
                            else sp.rng.pick(alts[1:]))
                    got += 1
            if not got:
                sp.word("weiß")
                sp.word("nicht")
            pts = min(item.points, got)
        elif item.item_type == "repeat":
            words = item.reference()
            if not ok:
                drop = sp.rng.below(len(words))
                words = words[:drop] + words[drop + 1:]
            for w in words:
                sp.word(w)
            pts = item.points if ok else 0
        else:
            sp.word(item.targets[0][0])
            letters_ref = item.reference()
            if ok:
                for ch in letters_ref:
                    names = sorted(n for n, c in lex.letter_names.items() if c == ch and len(n) > 3)
                    sp.word(ch)
                    if names and sp.rng.chance(0.2):
                        sp.word("wie")
                        sp.word(sp.rng.pick(names))
            else:
                wrong = list(letters_ref)
                i = sp.rng.below(len(wrong) - 1) if len(wrong) > 1 else 0
                if len(wrong) > 1 and wrong[i] != wrong[i + 1]:
                    wrong[i], wrong[i + 1] = wrong[i + 1], wrong[i]
                else:
                    del wrong[i]
                for ch in wrong:
                    sp.word(ch)
            pts = item.points if ok else 0
        tl.close()
        item_points[item.item_id] = pts
        earned += pts
        maximum += item.points
    tl.close()
    if maximum:
        gt["CERAD3"] = cerad.mmse_scaled(earned, maximum)
    detail["CERAD3_items"] = item_points

    sp = speaker("CERAD4")
    words = list(lex.cerad_wordlist)
    passes = []
    for n in (1, 2, 3):
        sp.examiner()
        for item in sp.rng.shuffled(words):
            sp.word(item.canonical)
        tl.t += SPAN_GAP_S
        tl.open("CERAD4", str(n))
        sp.examiner(1)
        # learning curve: p**2, p**1.5, p over the three passes
        p = profile.p("CERAD4") ** (1 + 0.5 * (3 - n))
        recalled = [item for item in words if sp.rng.chance(p)]
        for item in sp.rng.shuffled(recalled):
            sp.word(item.canonical)
            sp.maybe_confabulate()
        if not recalled:
            sp.word("weiß")
            sp.word("nicht")
        tl.close()
        passes.append(len(recalled))
    gt["CERAD4"] = sum(passes)
    detail["CERAD4_passes"] = passes

    sp = speaker("CERAD6")
    tl.open("CERAD6")
    sp.examiner()
    recalled = [item for item in words if sp.rng.chance(profile.p("CERAD6"))]
    for item in sp.rng.shuffled(recalled):
        sp.word(item.canonical)
        sp.maybe_confabulate()
    if not recalled:
        sp.word("weiß")
        sp.word("nicht")
    tl.close()
    gt["CERAD6"] = len(recalled)

    sp = speaker("CERAD7")
    tl.open("CERAD7")
    presented = [(item.canonical, True) for item in words] + [
        (item.canonical, False) for item in lex.cerad_distractors]
    responses = []
    hits = rejections = 0
    for word, is_target in sp.rng.shuffled(presented):
        tl.say(word, "examiner", EXAMINER_INTERVAL_S)
        correct = sp.rng.chance(profile.p("CERAD7"))
        yes = is_target == correct
        sp.word("ja" if yes else "nein")
        responses.append(RecognitionResponse(word, yes))
        hits += is_target and yes
        rejections += (not is_target) and (not yes)
    tl.close()
    if lex.cerad_distractors and words:
        gt["CERAD7"] = cerad.discriminability_pct(hits, rejections)

    session = Session(subject_id, tuple(tl.tokens), tuple(tl.spans), meta, tuple(responses))
    return session, GroundTruth(gt, detail)


def expert_view(gt: GroundTruth, meta: SubjectMetadata, res: Resources) -> dict[str, float]:
    """Ground truth plus the summary scores derived from it, in expert-score keys."""
    scores = dict(gt.scores)
    norms = {}
    for st in skt.SPEECH_SUBTESTS:
        if st in scores:
            kind = "missing_count" if st in skt.MEMORY_SUBTESTS else "duration_s"
            norms[st] = skt.raw_to_norm(skt.SktRaw(st, kind, scores[st]), meta, res.norm_table)
    if len(norms) == len(skt.SPEECH_SUBTESTS):
        summary = skt.skt_summary(norms)
        scores.update(SKT_attention=summary.attention_score, SKT_memory=summary.memory_score,
                      SKT_total=summary.total_score)
    parts = {k: scores[k] for k in ("CERAD1", "CERAD2", "CERAD3", "CERAD4", "CERAD6", "CERAD7")
             if k in scores}
    try:
        scores["CERAD_total"] = cerad.cerad_total(parts, res.recipe).total
    except ContractError:
        pass
    return scores


def inject_errors(session: Session, noise: NoiseModel, lex: LexiconSet | None = None) -> Session:
    """Delete and substitute tokens; substituted tokens may keep the true word at rank 2..N."""
    rng = Stream(derive_seed(noise.seed, session.subject_id, "noise"))
    pool = distractor_pool(lex)
    n_alt = noise.max_alternatives
    out = []
    for token in session.tokens:
        u = rng.uniform()
        if u < noise.deletion_prob:
            continue
        if u >= noise.deletion_prob + noise.substitution_prob:
            out.append(token)
            continue
        true = token.surface
        choices = [w for w in pool if w != true]
        wrong = rng.pick(choices)
        slots: list[str | None] = [None] * (n_alt - 1)
        if n_alt > 1 and rng.chance(noise.alternative_recovery_prob):
            slots[rng.below(n_alt - 1)] = true
        used = {wrong, true}
        for i, s in enumerate(slots):
            if s is None:
                fill = rng.pick([w for w in choices if w not in used])
                used.add(fill)
                slots[i] = fill
        alts = (Alternative(wrong, 1),) + tuple(Alternative(s, r) for r, s in enumerate(slots, start=2))
        out.append(TimedToken(wrong, token.start_s, token.end_s, token.speaker, alts))
    return replace(session, tokens=tuple(out))


# -- cohorts ----------------------------------------------------------------

@dataclass(frozen=True)
class ProfileSpec:
    """Maps a severity in [0, 1] to an impairment profile."""

    best_recall: float = 0.97
    worst_recall: float = 0.25
    fastest_rate: float = 2.0
    slowest_rate: float = 0.6
    max_confabulation: float = 0.3
    jitter: float = 0.1
    form: str = "A"
    age_range: tuple[int, int] = (59, 88)

    @classmethod
    def from_dict(cls, doc: Mapping) -> "ProfileSpec":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(doc) - known
        if unknown:
            raise ContractError(f"unknown profile spec fields: {sorted(unknown)}")
        doc = dict(doc)
        if "age_range" in doc:
            doc["age_range"] = tuple(doc["age_range"])
        return cls(**doc)

    def profile(self, severity: float, seed: int) -> ImpairmentProfile:
        rng = Stream(derive_seed(seed, "profile"))
        base = self.best_recall - severity * (self.best_recall - self.worst_recall)
        probs = {}
        for key in RECALL_KEYS:
            bonus = 0.1 if key in ("SKT9", "CERAD7") else 0.0
            p = base + bonus + (rng.uniform() * 2 - 1) * self.jitter
            probs[key] = round(min(1.0, max(0.0, p)), 6)
        rate = self.fastest_rate - severity * (self.fastest_rate - self.slowest_rate)
        return ImpairmentProfile(probs, speech_rate=round(rate, 6),
                                 confabulation_rate=round(severity * self.max_confabulation, 6),
                                 seed=seed)


@dataclass
class SyntheticSubject:
    subject_id: str
    seed: int
    severity: float
    profile: ImpairmentProfile
    noise: NoiseModel | None
    manual: Session
    asr: Session
    truth: GroundTruth

    @property
    def member(self) -> CohortMember:
        return CohortMember(self.subject_id, self.manual, self.asr)


def generate_cohort(count: int, master_seed: int, lex: LexiconSet,
                    spec: ProfileSpec = ProfileSpec(), noise: NoiseModel | None = None,
                    noisy_fraction: float = 0.0, noisy_factor: float = 2.0,
                    mmse_items: Sequence[MmseItem] | None = None) -> list[SyntheticSubject]:
    """``count`` subjects; a ``noisy_fraction`` of them get ``noisy_factor`` times the substitutions."""
    if count < 0:
        raise ContractError("count must be >= 0")
    order = Stream(derive_seed(master_seed, "noisy")).shuffled(range(count))
    noisy = set(order[:round(noisy_fraction * count)])
    subjects = []
    for i in range(count):
        sid = f"S{i + 1:03d}"
        seed = derive_seed(master_seed, sid) % (2 ** 32)
        rng = Stream(derive_seed(seed, "subject"))
        severity = round(rng.uniform(), 6)
        lo, hi = spec.age_range
        meta = SubjectMetadata(age=lo + rng.below(hi - lo + 1), sex="f" if i % 2 == 0 else "m",
                               iq_band=rng.pick(["below_avg", "avg", "avg", "above_avg"]),
                               education_years=8 + rng.below(11), skt_form=spec.form)
        profile = spec.profile(severity, seed)
        manual, truth = generate_session(profile, lex, spec.form, sid, meta, mmse_items)
        subject_noise = None
        asr = manual
        if noise is not None:
            subject_noise = replace(noise, seed=derive_seed(noise.seed, master_seed, sid) % (2 ** 32))
            if i in noisy:
                sub = min(noise.substitution_prob * noisy_factor, 1 - noise.deletion_prob)
                subject_noise = replace(subject_noise, substitution_prob=sub)
            asr = inject_errors(manual, subject_noise, lex)
        subjects.append(SyntheticSubject(sid, seed, severity, profile, subject_noise,
                                         manual, asr, truth))
    return subjects


def write_corpus(out_dir, subjects: Sequence[SyntheticSubject], res: Resources,
                 master_seed: int, spec: ProfileSpec, noise: NoiseModel | None) -> Path:
    """Write session files, ``ground_truth.csv`` and ``manifest.json``; returns the manifest path."""
    out = Path(out_dir)
    (out / "sessions").mkdir(parents=True, exist_ok=True)
    entries = []
    truth = {}
    for s in subjects:
        manual_rel = f"sessions/{s.subject_id}_manual.jsonl"
        asr_rel = f"sessions/{s.subject_id}_asr.jsonl"
        (out / manual_rel).write_text(dump_session(s.manual), encoding="utf-8")
        (out / asr_rel).write_text(dump_session(s.asr), encoding="utf-8")
        truth[s.subject_id] = expert_view(s.truth, s.manual.metadata, res)
        entries.append({
            "subject_id": s.subject_id, "seed": s.seed, "severity": s.severity,
            "profile": asdict(s.profile),
            "noise": asdict(s.noise) if s.noise is not None else None,
            "manual": manual_rel, "asr": asr_rel,
        })
    (out / "ground_truth.csv").write_text(dump_expert_scores(truth), encoding="utf-8")
    manifest = {
        "format": "neuroscore-corpus/1",
        "generator": GENERATOR_ID,
        "master_seed": master_seed,
        "profile_spec": asdict(spec),
        "noise": asdict(noise) if noise is not None else None,
        "ground_truth": "ground_truth.csv",
        "sessions": entries,
    }
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, indent=1, ensure_ascii=False, sort_keys=True) + "\n",
                    encoding="utf-8")
    return path


def load_manifest(path, max_alternatives: int = 5) -> tuple[list[CohortMember], dict]:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON ({exc.msg})", path, exc.lineno) from None
    if not isinstance(doc, dict) or not isinstance(doc.get("sessions"), list):
        raise ParseError("manifest needs a 'sessions' list", path)
    members = []
    for entry in doc["sessions"]:
        try:
            sid = entry["subject_id"]
            manual = entry.get("manual")
            asr = entry.get("asr")
        except (KeyError, TypeError, AttributeError):
            raise ParseError(f"malformed session entry {entry!r}", path) from None
        members.append(CohortMember(
            sid,
            parse_session(path.parent / manual, max_alternatives) if manual else None,
            parse_session(path.parent / asr, max_alternatives) if asr else None,
        ))
    return members, doc
