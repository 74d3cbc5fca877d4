"""Target matching over ranked word alternatives, number/letter spotting, weighted edit distance."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Collection, Sequence

from .errors import ContractError
from .lexicon import LexiconSet, TargetList, normalize
from .transcript import Segment, TimedToken

try:
    from . import _editdistance as _fast
except ImportError:
    _fast = None


@dataclass(frozen=True)
class RankPolicy:
    """Which alternatives of a token are consulted: ranks 1..max_rank, or rank 1 only."""

    use_alternatives: bool = True
    max_rank: int = 5

    def __post_init__(self):
        if self.max_rank < 1:
            raise ContractError("max_rank must be >= 1")

    @property
    def effective_rank(self) -> int:
        return self.max_rank if self.use_alternatives else 1

    def consulted(self, token: TimedToken):
        return token.consulted(self.effective_rank)


ONE_BEST = RankPolicy(use_alternatives=False, max_rank=1)


def _tokens(segment) -> Sequence[TimedToken]:
    return segment.tokens if isinstance(segment, Segment) else tuple(segment)


@dataclass(frozen=True)
class Match:
    target_canonical: str
    token_index: int
    matched_surface: str
    matched_rank: int
    time_s: tuple[float, float]


@dataclass
class MatchList:
    matches: list[Match] = field(default_factory=list)
    duplicates: list[Match] = field(default_factory=list)
    unmatched_content_tokens: list[int] = field(default_factory=list)

    def __len__(self):
        return len(self.matches)

    @property
    def canonicals(self) -> list[str]:
        return [m.target_canonical for m in self.matches]


def best_target(token: TimedToken, targets: TargetList, lex: LexiconSet,
                policy: RankPolicy) -> tuple[int, str, int] | None:
    """(target index, surface, rank) of the lowest-rank alternative hitting a target."""
    for alt in policy.consulted(token):
        form = normalize(alt.surface)
        idx = targets.lookup(lex.lemma_of(form))
        if idx is None:
            idx = targets.lookup(form)
        if idx is not None:
            return idx, alt.surface, alt.rank
    return None


def match_targets(segment, targets: TargetList, lex: LexiconSet,
                  policy: RankPolicy = ONE_BEST) -> MatchList:
    """Scan tokens in time order; the first mention of a target counts, later ones are duplicates."""
    if len(targets) == 0:
        raise ContractError(f"empty target list for {targets.subtest_id}")
    result = MatchList()
    found = set()
    for i, token in enumerate(_tokens(segment)):
        hit = best_target(token, targets, lex, policy)
        if hit is None:
            form = normalize(token.surface)
            if form and form not in lex.stoplist:
                result.unmatched_content_tokens.append(i)
            continue
        idx, surface, rank = hit
        m = Match(targets.items[idx].canonical, i, surface, rank, (token.start_s, token.end_s))
        if idx in found:
            result.duplicates.append(m)
        else:
            found.add(idx)
            result.matches.append(m)
    return result


@dataclass(frozen=True)
class NumberHit:
    value: int
    start_s: float
    end_s: float
    token_index: int
    rank: int = 1


def find_numbers(segment, lex: LexiconSet, policy: RankPolicy = ONE_BEST) -> list[NumberHit]:
    hits = []
    for i, token in enumerate(_tokens(segment)):
        for alt in policy.consulted(token):
            value = lex.parse_number(alt.surface)
            if value is not None:
                hits.append(NumberHit(value, token.start_s, token.end_s, i, alt.rank))
                break
    return hits


@dataclass(frozen=True)
class LetterHit:
    letter: str
    start_s: float
    end_s: float
    token_index: int
    rank: int = 1


def find_letters(segment, alphabet: Collection[str], lex: LexiconSet,
                 policy: RankPolicy = ONE_BEST) -> list[LetterHit]:
    if not alphabet:
        raise ContractError("alphabet must be non-empty")
    wanted = {normalize(a) for a in alphabet}
    hits = []
    for i, token in enumerate(_tokens(segment)):
        for alt in policy.consulted(token):
            letter = lex.letter_of(alt.surface)
            if letter is not None and letter in wanted:
                hits.append(LetterHit(letter, token.start_s, token.end_s, i, alt.rank))
                break
    return hits


@dataclass(frozen=True)
class EditCosts:
    substitution_cost: float = 1.0
    omission_cost: float = 1.0
    extra_token_cost: float = 0.0

    def __post_init__(self):
        for name in ("substitution_cost", "omission_cost", "extra_token_cost"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ContractError(f"{name} must be finite and non-negative, got {value}")


def _same(ref_symbol, hyp_symbol) -> bool:
    if isinstance(hyp_symbol, (set, frozenset)):
        return ref_symbol in hyp_symbol
    return ref_symbol == hyp_symbol


def weighted_levenshtein(reference: Sequence, hypothesis: Sequence,
                         costs: EditCosts = EditCosts()) -> float:
    """Minimal cost of turning ``reference`` into ``hypothesis``.

    Substituting a symbol costs ``substitution_cost``, leaving a reference
    symbol out costs ``omission_cost`` and each extra hypothesis symbol costs
    ``extra_token_cost``. A hypothesis position may be a set of alternatives,
    which matches any reference symbol it contains.
    """
    sub, omit, extra = costs.substitution_cost, costs.omission_cost, costs.extra_token_cost
    if _fast is not None:
        return _fast.weighted_levenshtein(reference, hypothesis, sub, omit, extra)
    return _weighted_levenshtein_py(reference, hypothesis, sub, omit, extra)


def _weighted_levenshtein_py(reference, hypothesis, sub, omit, extra) -> float:
    hyp = list(hypothesis)
    prev = [j * extra for j in range(len(hyp) + 1)]
    for i, r in enumerate(reference, start=1):
        cur = [i * omit]
        for j, h in enumerate(hyp, start=1):
            diag = prev[j - 1] + (0.0 if _same(r, h) else sub)
            cur.append(min(diag, prev[j] + omit, cur[j - 1] + extra))
        prev = cur
    return float(prev[-1])


def matched_count(reference: Sequence, hypothesis: Sequence) -> int:
    """Largest number of reference symbols alignable in order with hypothesis positions.

    Bit-parallel LCS (Hyyro 2004); hypothesis positions may be sets of alternatives.
    Equals ``len(reference) - weighted_levenshtein(reference, hypothesis, EditCosts(1, 1, 0))``.
    """
    hyp = list(hypothesis)
    masks: dict = {}
    for j, h in enumerate(hyp):
        for sym in (h if isinstance(h, (set, frozenset)) else (h,)):
            masks[sym] = masks.get(sym, 0) | (1 << j)
    full = (1 << len(hyp)) - 1
    v = full
    for r in reference:
        u = v & masks.get(r, 0)
        v = ((v + u) | (v - u)) & full
    return len(hyp) - bin(v).count("1")
