"""SKT subtests 1, 2, 3, 6, 7, 8 and 9: raw scores, norm conversion and summary bands."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from .errors import ConfigError, ParseError, UnscorableError
from .lexicon import DATA_DIR, LexiconSet, TargetList, normalize
from .matching import ONE_BEST, RankPolicy, find_letters, find_numbers, match_targets
from .transcript import Segment, SubjectMetadata

TIME_LIMIT_S = 60.0
DEFAULT_REINSTRUCTION_GAP_S = 10.0
DEFAULT_NORM_TABLE = DATA_DIR / "skt_norms_synthetic.json"

MEMORY_SUBTESTS = ("SKT2", "SKT8", "SKT9")
ATTENTION_SUBTESTS = ("SKT1", "SKT3", "SKT6", "SKT7")
NON_VERBAL_SUBTESTS = ("SKT4", "SKT5")
SPEECH_SUBTESTS = ("SKT1", "SKT2", "SKT3", "SKT6", "SKT7", "SKT8", "SKT9")

# inclusive upper bounds of each severity band on the 0-27 total
SEVERITY_BANDS = (
    (4, "none"),
    (8, "mci"),
    (13, "mild"),
    (18, "moderate"),
    (23, "severe"),
    (27, "very_severe"),
)


@dataclass
class SktRaw:
    subtest_id: str
    kind: str  # "duration_s" or "missing_count"
    value: float
    confabulations: list[str] = field(default_factory=list)
    clamped: bool = False
    evidence: dict = field(default_factory=dict)


def _duration(subtest: str, seconds: float, evidence: dict) -> SktRaw:
    clamped = seconds > TIME_LIMIT_S
    return SktRaw(subtest, "duration_s", min(max(seconds, 0.0), TIME_LIMIT_S),
                  clamped=clamped, evidence=evidence)


def score_skt1(segment: Segment, targets: TargetList, lex: LexiconSet,
               policy: RankPolicy = ONE_BEST,
               reinstruction_gap_s: float = DEFAULT_REINSTRUCTION_GAP_S) -> SktRaw:
    """Naming time: start of the first named object to the end of the last.

    Repeat mentions count towards the end point unless they look like answers to
    a re-instruction: they come after an examiner utterance, or more than
    ``reinstruction_gap_s`` after the last object was first named.
    """
    ml = match_targets(segment, targets, lex, policy)
    if not ml.matches:
        raise UnscorableError("SKT1: no object named")
    first_start = ml.matches[0].time_s[0]
    all_tokens = list(segment.tokens) + list(segment.context)
    examiner_times = sorted(t.start_s for t in all_tokens
                            if t.speaker == "examiner" and t.start_s > first_start)
    complete_at = ml.matches[-1].time_s[1] if len(ml.matches) == len(targets) else None

    def reinstructed(m) -> bool:
        start = m.time_s[0]
        if complete_at is not None and start - complete_at > reinstruction_gap_s:
            return True
        return any(e < start for e in examiner_times)

    kept_repeats = [d for d in ml.duplicates if not reinstructed(d)]
    last_end = max(m.time_s[1] for m in ml.matches + kept_repeats)
    evidence = {
        "matched": ml.canonicals,
        "repeats": len(ml.duplicates),
        "repeats_ignored": len(ml.duplicates) - len(kept_repeats),
        "first_start_s": first_start,
        "last_end_s": last_end,
    }
    return _duration("SKT1", last_end - first_start, evidence)


def score_skt_memory(segment: Segment, targets: TargetList, lex: LexiconSet,
                     policy: RankPolicy = ONE_BEST, subtest: str = "SKT2") -> SktRaw:
    """Missing objects for SKT2/8/9; confabulations are reported, never scored."""
    if subtest not in MEMORY_SUBTESTS:
        raise ValueError(f"{subtest} is not an SKT memory subtest")
    ml = match_targets(segment, targets, lex, policy)
    confabulations = []
    for i in ml.unmatched_content_tokens:
        form = normalize(segment.tokens[i].surface)
        if form not in confabulations:
            confabulations.append(form)
    missing = len(targets) - len(ml.matches)
    return SktRaw(subtest, "missing_count", missing, confabulations=confabulations,
                  evidence={"matched": ml.canonicals, "repeats": len(ml.duplicates)})


def score_skt3(segment: Segment, lex: LexiconSet, policy: RankPolicy = ONE_BEST) -> SktRaw:
    hits = find_numbers(segment, lex, policy)
    if len(hits) < 2:
        raise UnscorableError(f"SKT3: {len(hits)} two-digit number(s) found, need 2")
    evidence = {"hit_count": len(hits), "low_evidence": len(hits) < 10,
                "numbers": [h.value for h in hits]}
    return _duration("SKT3", hits[-1].end_s - hits[0].start_s, evidence)


def score_skt6(segment: Segment, lex: LexiconSet, policy: RankPolicy = ONE_BEST,
               expected_count: int | None = None) -> SktRaw:
    """Counting time, from the span start to the end of the last two-digit number.

    The counted total is kept as evidence only.
    """
    hits = find_numbers(segment, lex, policy)
    if not hits:
        raise UnscorableError("SKT6: no two-digit number found")
    evidence = {"reported_count": hits[-1].value, "hit_count": len(hits)}
    if expected_count is not None:
        evidence["expected_count"] = expected_count
        evidence["count_correct"] = hits[-1].value == expected_count
    return _duration("SKT6", hits[-1].end_s - segment.span.start_s, evidence)


def score_skt7(segment: Segment, alphabet: Sequence[str], lex: LexiconSet,
               policy: RankPolicy = ONE_BEST) -> SktRaw:
    hits = find_letters(segment, alphabet, lex, policy)
    if len(hits) < 2:
        raise UnscorableError(f"SKT7: {len(hits)} letter(s) found, need 2")
    evidence = {"hit_count": len(hits)}
    return _duration("SKT7", hits[-1].end_s - hits[0].start_s, evidence)


# -- norms ------------------------------------------------------------------

@dataclass(frozen=True)
class NormCell:
    """Breakpoints (b, n): raw values above b (up to the next breakpoint) map to n.

    A raw value equal to a breakpoint stays in the band below it.
    """

    breakpoints: tuple[tuple[float, int], ...]

    def __post_init__(self):
        prev_b, prev_n = None, 0
        for b, n in self.breakpoints:
            if prev_b is not None and not b > prev_b:
                raise ConfigError(f"breakpoints not strictly increasing: {self.breakpoints}")
            if not (prev_n < n <= 3):
                raise ConfigError(f"norm values must increase within 1..3: {self.breakpoints}")
            prev_b, prev_n = b, n

    def lookup(self, raw: float) -> int:
        norm = 0
        for b, n in self.breakpoints:
            if raw > b:
                norm = n
            else:
                break
        return norm


@dataclass(frozen=True)
class NormTable:
    provenance: str
    age_bands: tuple[tuple[str, float], ...]
    cells: Mapping[tuple[str, str, str], NormCell]

    def age_band(self, age: float) -> str:
        band = None
        for name, min_age in self.age_bands:
            if age >= min_age:
                band = name
        if band is None:
            raise ConfigError(f"age {age} below every age band of the norm table")
        return band

    def cell(self, subtest: str, age: float, iq_band: str) -> NormCell:
        key = (subtest, self.age_band(age), iq_band)
        try:
            return self.cells[key]
        except KeyError:
            raise ConfigError(f"norm table has no cell for {key}") from None


def load_norm_table(path=None) -> NormTable:
    path = Path(path) if path is not None else DEFAULT_NORM_TABLE
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"norm table {path} not found") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON ({exc.msg})", path, exc.lineno) from None
    provenance = doc.get("provenance")
    if provenance not in ("SYNTHETIC", "CLINICAL"):
        raise ConfigError(f"{path}: header field 'provenance' must be SYNTHETIC or CLINICAL")
    try:
        bands = tuple(sorted(((b["name"], float(b["min_age"])) for b in doc["age_bands"]),
                             key=lambda x: x[1]))
        cells = {}
        for subtest, by_age in doc["subtests"].items():
            for age_band, by_iq in by_age.items():
                for iq, pairs in by_iq.items():
                    cells[(subtest, age_band, iq)] = NormCell(
                        tuple((float(b), int(n)) for b, n in pairs))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: malformed norm table ({exc})") from None
    return NormTable(provenance, bands, cells)


def raw_to_norm(raw: SktRaw, meta: SubjectMetadata, table: NormTable) -> int:
    return table.cell(raw.subtest_id, meta.age, meta.iq_band).lookup(raw.value)


def severity_band(total: int) -> str:
    if not 0 <= total <= 27:
        raise ValueError(f"SKT total {total} outside 0-27")
    for upper, name in SEVERITY_BANDS:
        if total <= upper:
            return name
    raise AssertionError("unreachable")


@dataclass
class SktSummary:
    attention_score: int
    memory_score: int
    total_score: int
    severity: str
    unscored_subtests: list[str]

    @property
    def partial(self) -> bool:
        return bool(self.unscored_subtests)


def skt_summary(norms: Mapping[str, int], unscored: Sequence[str] = (),
                external: Mapping[str, int] | None = None) -> SktSummary:
    """Sum norm values into memory, attention and total scores.

    ``external`` supplies norms for the non-verbal SKT4/SKT5; without them the
    summary is partial.
    """
    merged = dict(norms)
    for k, v in (external or {}).items():
        if k in NON_VERBAL_SUBTESTS:
            merged[k] = v
    missing = [s for s in (*SPEECH_SUBTESTS, *NON_VERBAL_SUBTESTS) if s not in merged]
    missing += [s for s in unscored if s not in missing]
    memory = sum(merged[s] for s in MEMORY_SUBTESTS if s in merged)
    attention = sum(merged[s] for s in (*ATTENTION_SUBTESTS, *NON_VERBAL_SUBTESTS) if s in merged)
    total = attention + memory
    return SktSummary(attention, memory, total, severity_band(total), missing)
