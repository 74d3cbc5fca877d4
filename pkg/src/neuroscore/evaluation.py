"""Agreement between automatic and expert scores across a cohort."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import ContractError, ParseError, UndefinedCorrelationError
from .lexicon import normalize
from .matching import ONE_BEST, RankPolicy, matched_count
from .pipeline import SCORE_KEYS, Resources, score_session
from .transcript import Session

SOURCES = ("manual", "asr1", "asrN")
COLUMNS = ("manual", "asr1", "asrN", "filtered")
MIN_PAIRS = 3
DEFAULT_THRESHOLD_PCT = 20.0


@dataclass(frozen=True)
class AccuracyRecord:
    subject_id: str
    percent_correct: float
    source: str


def word_accuracy(reference: Sequence, hypothesis: Sequence) -> float:
    """Percent of reference words recovered in order by the hypothesis.

    Insertions are free, so this is the share of the reference covered by the
    best alignment; hypothesis positions may be sets of word alternatives.
    """
    if len(reference) == 0:
        raise ContractError("reference must be non-empty")
    return matched_count(reference, hypothesis) / len(reference) * 100


def session_accuracy(reference: Session, hypothesis: Session, max_rank: int = 1) -> float:
    ref = [normalize(t.surface) for t in reference.tokens]
    if max_rank == 1:
        hyp = [normalize(t.surface) for t in hypothesis.tokens]
    else:
        hyp = [frozenset(normalize(a.surface) for a in t.consulted(max_rank))
               for t in hypothesis.tokens]
    return word_accuracy(ref, hyp)


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    if len(xs) != len(ys):
        raise ContractError(f"length mismatch: {len(xs)} vs {len(ys)}")
    if len(xs) < MIN_PAIRS:
        raise ContractError(f"need at least {MIN_PAIRS} pairs, got {len(xs)}")
    n = len(xs)
    mx = math.fsum(xs) / n
    my = math.fsum(ys) / n
    dx = [x - mx for x in xs]
    dy = [y - my for y in ys]
    sxx = math.fsum(d * d for d in dx)
    syy = math.fsum(d * d for d in dy)
    if sxx == 0 or syy == 0:
        raise UndefinedCorrelationError("correlation undefined for a constant vector")
    r = math.fsum(a * b for a, b in zip(dx, dy)) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def filter_by_accuracy(records: Iterable[AccuracyRecord], threshold_pct: float) -> list[AccuracyRecord]:
    """Subjects whose accuracy is strictly above the threshold."""
    return [r for r in records if r.percent_correct > threshold_pct]


@dataclass
class CorrelationCell:
    r: float | None
    n: int
    status: str  # ok | unstable | undefined | missing


@dataclass
class CorrelationTable:
    rows: list[str]
    columns: list[str]
    cells: dict[tuple[str, str], CorrelationCell]
    labels: dict[str, str] = field(default_factory=dict)

    def cell(self, row: str, column: str) -> CorrelationCell:
        return self.cells[(row, column)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["row", "column", "label", "r", "n", "status"])
        for row in self.rows:
            for col in self.columns:
                c = self.cells[(row, col)]
                w.writerow([row, col, self.labels.get(col, col),
                            "" if c.r is None else f"{c.r:.6f}", c.n, c.status])
        return buf.getvalue()

    def to_text(self) -> str:
        heads = ["Score"] + [self.labels.get(c, c) for c in self.columns]
        body = []
        for row in self.rows:
            line = [row]
            for col in self.columns:
                c = self.cells[(row, col)]
                line.append(f"{c.r:.2f} ({c.n})" if c.r is not None else f"{c.status} ({c.n})")
            body.append(line)
        widths = [max(len(r[i]) for r in [heads] + body) for i in range(len(heads))]
        fmt = lambda cells: " | ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip()
        sep = "-+-".join("-" * w for w in widths)
        return "\n".join([fmt(heads), sep] + [fmt(b) for b in body]) + "\n"


@dataclass
class CohortMember:
    subject_id: str
    manual: Session | None
    asr: Session | None = None


@dataclass
class EvaluationResult:
    table: CorrelationTable
    accuracies: list[AccuracyRecord]
    scores: dict[str, dict[str, dict[str, float]]]
    kept_subjects: list[str]


def correlation_cell(auto: Mapping[str, float], expert: Mapping[str, float]) -> CorrelationCell:
    subjects = sorted(s for s in auto if s in expert)
    n = len(subjects)
    if n < MIN_PAIRS:
        return CorrelationCell(None, n, "unstable")
    try:
        r = pearson([auto[s] for s in subjects], [expert[s] for s in subjects])
    except UndefinedCorrelationError:
        return CorrelationCell(None, n, "undefined")
    return CorrelationCell(r, n, "ok")


def score_cohort(members: Sequence[CohortMember], res: Resources, max_alternatives: int = 5,
                 speaker_filter: str | None = "patient") -> dict[str, dict[str, dict[str, float]]]:
    """source -> subject -> flat scores, for the manual, 1-best and N-alternative sources."""
    policies = {"asr1": ONE_BEST, "asrN": RankPolicy(True, max_alternatives)}
    out: dict[str, dict[str, dict[str, float]]] = {s: {} for s in SOURCES}
    for m in sorted(members, key=lambda m: m.subject_id):
        if m.manual is not None:
            out["manual"][m.subject_id] = score_session(m.manual, res, ONE_BEST, speaker_filter).scores()
        if m.asr is not None:
            for source, policy in policies.items():
                out[source][m.subject_id] = score_session(m.asr, res, policy, speaker_filter).scores()
    return out


def cohort_accuracies(members: Sequence[CohortMember], source: str = "asr1",
                      max_alternatives: int = 5) -> list[AccuracyRecord]:
    rank = 1 if source == "asr1" else max_alternatives
    records = []
    for m in sorted(members, key=lambda m: m.subject_id):
        if m.manual is None or m.asr is None or not m.manual.tokens:
            continue
        records.append(AccuracyRecord(m.subject_id, session_accuracy(m.manual, m.asr, rank), source))
    return records


def evaluate_batch(members: Sequence[CohortMember], expert_scores: Mapping[str, Mapping[str, float]],
                   res: Resources, max_alternatives: int = 5,
                   threshold_pct: float | None = DEFAULT_THRESHOLD_PCT,
                   speaker_filter: str | None = "patient", accuracy_source: str = "asr1",
                   rows: Sequence[str] = SCORE_KEYS) -> EvaluationResult:
    """Per-score Pearson correlations for each transcript source plus the filtered cohort.

    Unscorable results drop out pairwise per cell. With ``threshold_pct=None``
    the filtered column is skipped and no accuracies are computed.
    """
    if not members:
        raise ContractError("empty cohort")
    scores = score_cohort(members, res, max_alternatives, speaker_filter)
    columns = list(SOURCES)
    labels = {"manual": "Trans.", "asr1": "ASR-1", "asrN": f"ASR-{max_alternatives}"}
    accuracies: list[AccuracyRecord] = []
    kept: list[str] = []
    if threshold_pct is not None:
        accuracies = cohort_accuracies(members, accuracy_source, max_alternatives)
        kept = [r.subject_id for r in filter_by_accuracy(accuracies, threshold_pct)]
        scores["filtered"] = {s: scores["asrN"][s] for s in kept if s in scores["asrN"]}
        columns.append("filtered")
        labels["filtered"] = f"Top-{len(kept)}"

    cells = {}
    for row in rows:
        expert = {s: v[row] for s, v in expert_scores.items() if row in v}
        for col in columns:
            if not expert:
                cells[(row, col)] = CorrelationCell(None, 0, "missing")
                continue
            auto = {s: v[row] for s, v in scores[col].items() if row in v}
            cells[(row, col)] = correlation_cell(auto, expert)
    return EvaluationResult(CorrelationTable(list(rows), columns, cells, labels),
                            accuracies, scores, kept)


# -- expert score files -----------------------------------------------------

def load_expert_scores(path) -> dict[str, dict[str, float]]:
    """CSV with columns subject_id, key (or subtest_id), value."""
    path = Path(path)
    out: dict[str, dict[str, float]] = {}
    with path.open(encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        fields = reader.fieldnames or []
        key_col = "key" if "key" in fields else "subtest_id"
        if "subject_id" not in fields or key_col not in fields or "value" not in fields:
            raise ParseError("expected columns subject_id, key, value", path, 1)
        for lineno, row in enumerate(reader, start=2):
            try:
                value = float(row["value"])
            except (TypeError, ValueError):
                raise ParseError(f"bad value {row['value']!r}", path, lineno) from None
            out.setdefault(row["subject_id"], {})[row[key_col]] = value
    return out


def dump_expert_scores(scores: Mapping[str, Mapping[str, float]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["subject_id", "key", "value"])
    order = {k: i for i, k in enumerate(SCORE_KEYS)}
    for subject in sorted(scores):
        for key in sorted(scores[subject], key=lambda k: (order.get(k, len(order)), k)):
            w.writerow([subject, key, repr(float(scores[subject][key]))])
    return buf.getvalue()


def dump_accuracies(records: Sequence[AccuracyRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["subject_id", "source", "percent_correct"])
    for r in records:
        w.writerow([r.subject_id, r.source, f"{r.percent_correct:.6f}"])
    return buf.getvalue()
