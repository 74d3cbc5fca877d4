"""Timed-token session model, session file I/O and subtest slicing.

A session file is UTF-8 text with one JSON object per line::

    {"kind": "header", "subject_id": "S01", "age": 74, "sex": "f",
     "iq_band": "avg", "education_years": 12}
    {"kind": "token", "surface": "hund", "start_s": 12.30, "end_s": 12.70,
     "speaker": "patient", "alts": [{"surface": "hund", "rank": 1}]}
    {"kind": "span", "subtest": "CERAD1", "start_s": 10.00, "end_s": 70.00}

Optional extensions: the header may carry ``skt_form`` (A-E, default A) and
``expert`` (a mapping of score keys to values); spans may carry ``part`` to
label sub-segments (the three CERAD4 recall passes, MMSE items); and
``{"kind": "recognition", "word": ..., "answer": "yes"|"no"}`` records hold the
structured CERAD7 responses.
"""

from __future__ import annotations

import bisect
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import NotPresentError, ParseError, StructuralError

SUBTESTS = (
    "SKT1", "SKT2", "SKT3", "SKT6", "SKT7", "SKT8", "SKT9",
    "CERAD1", "CERAD2", "CERAD3", "CERAD4", "CERAD6", "CERAD7",
)
SPEAKERS = ("patient", "examiner")
SEXES = ("f", "m")
IQ_BANDS = ("below_avg", "avg", "above_avg")
SKT_FORMS = ("A", "B", "C", "D", "E")

DEFAULT_MAX_ALTERNATIVES = 5
DEFAULT_OVERLAP_SLACK_S = 2.0


@dataclass(frozen=True)
class Alternative:
    surface: str
    rank: int


@dataclass(frozen=True)
class TimedToken:
    """One recognized word. ``alternatives`` defaults to the surface alone."""

    surface: str
    start_s: float
    end_s: float
    speaker: str = "patient"
    alternatives: tuple[Alternative, ...] = ()

    def __post_init__(self):
        if not self.alternatives:
            object.__setattr__(self, "alternatives", (Alternative(self.surface, 1),))
        else:
            object.__setattr__(self, "alternatives", tuple(self.alternatives))
        if self.start_s < 0:
            raise StructuralError(f"token {self.surface!r}: negative start time")
        if self.end_s < self.start_s:
            raise StructuralError(f"token {self.surface!r}: end_s < start_s")
        if self.speaker not in SPEAKERS:
            raise StructuralError(f"token {self.surface!r}: unknown speaker {self.speaker!r}")
        alts = self.alternatives
        if alts[0].rank != 1 or alts[0].surface != self.surface:
            raise StructuralError(f"token {self.surface!r}: rank-1 alternative must equal surface")
        for prev, cur in zip(alts, alts[1:]):
            if cur.rank <= prev.rank:
                raise StructuralError(f"token {self.surface!r}: alternative ranks not increasing")

    def consulted(self, max_rank: int) -> tuple[Alternative, ...]:
        return tuple(a for a in self.alternatives if a.rank <= max_rank)

    def truncated(self, max_rank: int) -> "TimedToken":
        if self.alternatives[-1].rank <= max_rank:
            return self
        return TimedToken(self.surface, self.start_s, self.end_s, self.speaker,
                          self.consulted(max_rank))


@dataclass(frozen=True)
class SubtestSpan:
    subtest: str
    start_s: float
    end_s: float
    part: str | None = None

    def __post_init__(self):
        if self.subtest not in SUBTESTS:
            raise StructuralError(f"unknown subtest {self.subtest!r}")
        if not self.end_s > self.start_s:
            raise StructuralError(f"span {self.subtest}: end_s must exceed start_s")

    @property
    def key(self) -> tuple[str, str | None]:
        return (self.subtest, self.part)


@dataclass(frozen=True)
class RecognitionResponse:
    word: str
    answer: bool


@dataclass(frozen=True)
class SubjectMetadata:
    age: float
    sex: str
    iq_band: str
    education_years: float
    skt_form: str = "A"
    expert_scores: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if not self.age > 0:
            raise StructuralError("age must be positive")
        if self.sex not in SEXES:
            raise StructuralError(f"sex must be one of {SEXES}")
        if self.iq_band not in IQ_BANDS:
            raise StructuralError(f"iq_band must be one of {IQ_BANDS}")
        if self.skt_form not in SKT_FORMS:
            raise StructuralError(f"skt_form must be one of {SKT_FORMS}")


@dataclass(frozen=True)
class Session:
    subject_id: str
    tokens: tuple[TimedToken, ...]
    spans: tuple[SubtestSpan, ...]
    metadata: SubjectMetadata
    responses: tuple[RecognitionResponse, ...] = ()
    _starts: tuple[float, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        object.__setattr__(self, "spans", tuple(self.spans))
        object.__setattr__(self, "responses", tuple(self.responses))
        if not self.subject_id:
            raise StructuralError("subject_id must be non-empty")
        starts = tuple(t.start_s for t in self.tokens)
        for i in range(1, len(starts)):
            if starts[i] < starts[i - 1]:
                raise StructuralError(
                    f"tokens not sorted: token {i} starts at {starts[i]} "
                    f"before previous start {starts[i - 1]}")
        seen = set()
        for span in self.spans:
            if span.key in seen:
                raise StructuralError(f"duplicate span {span.key}")
            seen.add(span.key)
        object.__setattr__(self, "_starts", starts)

    def span(self, subtest: str, part: str | None = None) -> SubtestSpan:
        for s in self.spans:
            if s.subtest == subtest and s.part == part:
                return s
        label = subtest if part is None else f"{subtest}/{part}"
        raise NotPresentError(f"session {self.subject_id} has no span for {label}")

    def has_span(self, subtest: str, part: str | None = None) -> bool:
        return any(s.subtest == subtest and s.part == part for s in self.spans)

    def parts(self, subtest: str) -> list[str]:
        return [s.part for s in self.spans if s.subtest == subtest and s.part is not None]


@dataclass(frozen=True)
class Segment:
    """Tokens of one span; ``context`` holds the span's tokens removed by the speaker filter."""

    span: SubtestSpan
    tokens: tuple[TimedToken, ...]
    context: tuple[TimedToken, ...] = ()

    def __len__(self):
        return len(self.tokens)


def check_overlaps(spans: Sequence[SubtestSpan], slack_s: float = DEFAULT_OVERLAP_SLACK_S) -> None:
    """Reject overlaps longer than ``slack_s`` between spans of different subtests."""
    ordered = sorted(spans, key=lambda s: (s.start_s, s.end_s))
    for i, a in enumerate(ordered):
        for b in ordered[i + 1:]:
            if b.start_s >= a.end_s:
                break
            if a.subtest == b.subtest:
                continue
            overlap = min(a.end_s, b.end_s) - b.start_s
            if overlap > slack_s:
                raise StructuralError(
                    f"spans {a.subtest} and {b.subtest} overlap by {overlap:.2f} s "
                    f"(slack {slack_s:.2f} s)")


def slice_segment(session: Session, subtest: str, speaker_filter: str | None = None,
                  part: str | None = None) -> Segment:
    """Tokens starting inside the half-open span, optionally one speaker only.

    Where the span overlaps an earlier span of another subtest, the overlapping
    tokens stay with the earlier span.
    """
    span = session.span(subtest, part)
    lo = span.start_s
    for other in session.spans:
        if other.subtest != subtest and other.start_s < span.start_s < other.end_s:
            lo = max(lo, other.end_s)
    i = bisect.bisect_left(session._starts, lo)
    j = bisect.bisect_left(session._starts, span.end_s)
    inside = session.tokens[i:j]
    if speaker_filter is None:
        return Segment(span, inside)
    kept = tuple(t for t in inside if t.speaker == speaker_filter)
    dropped = tuple(t for t in inside if t.speaker != speaker_filter)
    return Segment(span, kept, dropped)


# -- file format ----------------------------------------------------------

def _fmt_time(t: float) -> str:
    s = f"{t:.2f}"
    if float(s) != t:
        s = repr(float(t))
    return s


def _require(rec: dict, key: str, path, lineno: int):
    if key not in rec:
        raise ParseError(f"{rec.get('kind', 'record')} record missing field {key!r}", path, lineno)
    return rec[key]


def _number(value, name: str, path, lineno: int) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"field {name!r} must be a number", path, lineno)
    return float(value)


def _text(value, name: str, path, lineno: int) -> str:
    if not isinstance(value, str):
        raise ParseError(f"field {name!r} must be a string", path, lineno)
    return value


def parse_session_lines(lines: Iterable[str], max_alternatives: int = DEFAULT_MAX_ALTERNATIVES,
                        overlap_slack_s: float = DEFAULT_OVERLAP_SLACK_S,
                        path=None) -> Session:
    if max_alternatives < 1:
        raise ValueError("max_alternatives must be >= 1")
    header = None
    tokens: list[TimedToken] = []
    spans: list[SubtestSpan] = []
    responses: list[RecognitionResponse] = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON ({exc.msg})", path, lineno) from None
        if not isinstance(rec, dict):
            raise ParseError("record must be a JSON object", path, lineno)
        kind = rec.get("kind")
        if header is None and kind != "header":
            raise ParseError("first record must be the header", path, lineno)
        try:
            if kind == "header":
                if header is not None:
                    raise ParseError("duplicate header", path, lineno)
                expert = rec.get("expert", {})
                if not isinstance(expert, dict):
                    raise ParseError("field 'expert' must be an object", path, lineno)
                meta = SubjectMetadata(
                    age=_number(_require(rec, "age", path, lineno), "age", path, lineno),
                    sex=_text(_require(rec, "sex", path, lineno), "sex", path, lineno),
                    iq_band=_text(_require(rec, "iq_band", path, lineno), "iq_band", path, lineno),
                    education_years=_number(_require(rec, "education_years", path, lineno),
                                            "education_years", path, lineno),
                    skt_form=_text(rec.get("skt_form", "A"), "skt_form", path, lineno),
                    expert_scores={str(k): _number(v, f"expert.{k}", path, lineno)
                                   for k, v in expert.items()},
                )
                header = (_text(_require(rec, "subject_id", path, lineno), "subject_id", path, lineno), meta)
            elif kind == "token":
                surface = _text(_require(rec, "surface", path, lineno), "surface", path, lineno)
                start = _number(_require(rec, "start_s", path, lineno), "start_s", path, lineno)
                end = _number(_require(rec, "end_s", path, lineno), "end_s", path, lineno)
                speaker = _text(_require(rec, "speaker", path, lineno), "speaker", path, lineno)
                alts_raw = rec.get("alts") or [{"surface": surface, "rank": 1}]
                if not isinstance(alts_raw, list):
                    raise ParseError("field 'alts' must be a list", path, lineno)
                alts = []
                for a in alts_raw:
                    if not isinstance(a, dict):
                        raise ParseError("alternative must be an object", path, lineno)
                    rank = _require(a, "rank", path, lineno)
                    if isinstance(rank, bool) or not isinstance(rank, int) or rank < 1:
                        raise ParseError("alternative rank must be an integer >= 1", path, lineno)
                    alts.append(Alternative(_text(_require(a, "surface", path, lineno), "surface",
                                                  path, lineno), rank))
                alts = [a for a in alts if a.rank <= max_alternatives]
                tokens.append(TimedToken(surface, start, end, speaker, tuple(alts)))
            elif kind == "span":
                part = rec.get("part")
                spans.append(SubtestSpan(
                    _text(_require(rec, "subtest", path, lineno), "subtest", path, lineno),
                    _number(_require(rec, "start_s", path, lineno), "start_s", path, lineno),
                    _number(_require(rec, "end_s", path, lineno), "end_s", path, lineno),
                    None if part is None else str(part),
                ))
            elif kind == "recognition":
                answer = _text(_require(rec, "answer", path, lineno), "answer", path, lineno)
                if answer not in ("yes", "no"):
                    raise ParseError("recognition answer must be 'yes' or 'no'", path, lineno)
                responses.append(RecognitionResponse(
                    _text(_require(rec, "word", path, lineno), "word", path, lineno), answer == "yes"))
            else:
                raise ParseError(f"unknown record kind {kind!r}", path, lineno)
        except StructuralError as exc:
            # a record violating its own type invariants is a malformed field
            raise ParseError(str(exc), path, lineno) from None
        if kind == "token" and len(tokens) > 1 and tokens[-1].start_s < tokens[-2].start_s:
            raise StructuralError(
                f"{path or '<session>'}:{lineno}: token starts at {tokens[-1].start_s} "
                f"before previous token start {tokens[-2].start_s}")
    if header is None:
        raise ParseError("empty session file (no header)", path)
    check_overlaps(spans, overlap_slack_s)
    subject_id, meta = header
    return Session(subject_id, tuple(tokens), tuple(spans), meta, tuple(responses))


def parse_session(path, max_alternatives: int = DEFAULT_MAX_ALTERNATIVES,
                  overlap_slack_s: float = DEFAULT_OVERLAP_SLACK_S) -> Session:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"not UTF-8 ({exc.reason})", path) from None
    return parse_session_lines(text.splitlines(), max_alternatives, overlap_slack_s, path)


def _plain(x: float):
    return int(x) if float(x).is_integer() else x


def session_records(session: Session) -> list[dict]:
    meta = session.metadata
    header = {"kind": "header", "subject_id": session.subject_id, "age": _plain(meta.age),
              "sex": meta.sex, "iq_band": meta.iq_band,
              "education_years": _plain(meta.education_years),
              "skt_form": meta.skt_form}
    if meta.expert_scores:
        header["expert"] = dict(sorted(meta.expert_scores.items()))
    records = [header]
    for t in session.tokens:
        records.append({"kind": "token", "surface": t.surface, "start_s": t.start_s,
                        "end_s": t.end_s, "speaker": t.speaker,
                        "alts": [{"surface": a.surface, "rank": a.rank} for a in t.alternatives]})
    for s in session.spans:
        rec = {"kind": "span", "subtest": s.subtest, "start_s": s.start_s, "end_s": s.end_s}
        if s.part is not None:
            rec["part"] = s.part
        records.append(rec)
    for r in session.responses:
        records.append({"kind": "recognition", "word": r.word, "answer": "yes" if r.answer else "no"})
    return records


def _dump_record(rec: dict) -> str:
    # times keep at least two fractional digits
    parts = []
    for key, value in rec.items():
        if key in ("start_s", "end_s"):
            text = _fmt_time(value)
        else:
            text = json.dumps(value, ensure_ascii=False)
        parts.append(f"{json.dumps(key)}: {text}")
    return "{" + ", ".join(parts) + "}"


def dump_session(session: Session) -> str:
    return "".join(_dump_record(r) + "\n" for r in session_records(session))


def write_session(session: Session, path) -> None:
    Path(path).write_text(dump_session(session), encoding="utf-8")
