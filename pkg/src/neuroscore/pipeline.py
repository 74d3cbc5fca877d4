"""Score a whole session: every speech subtest, SKT norms and summary, CERAD total and z-values."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from . import cerad, skt
from .errors import ContractError, NotPresentError, UnscorableError
from .lexicon import LexiconSet, MmseItem, load_lexicons, load_mmse_items
from .matching import ONE_BEST, RankPolicy
from .transcript import SUBTESTS, Session, slice_segment

SKT_SUMMARY_KEYS = ("SKT_attention", "SKT_memory", "SKT_total")
CERAD_SUMMARY_KEYS = ("CERAD_total",)
SCORE_KEYS = (*SUBTESTS[:7], *SKT_SUMMARY_KEYS, *SUBTESTS[7:], *CERAD_SUMMARY_KEYS)
COUNT_KEYS = ("SKT2", "SKT8", "SKT9", "CERAD1", "CERAD2", "CERAD3", "CERAD4", "CERAD6")
DURATION_KEYS = ("SKT1", "SKT3", "SKT6", "SKT7")
DEFAULT_SKT7_ALPHABET = ("a", "b")


@dataclass
class Resources:
    lexicons: LexiconSet
    norm_table: skt.NormTable
    recipe: cerad.ChandlerRecipe
    mmse_items: tuple[MmseItem, ...]
    z_models: Mapping[str, cerad.ZModel] | None = None
    skt7_alphabet: tuple[str, ...] = DEFAULT_SKT7_ALPHABET


def load_resources(lexicon_dir=None, norm_table_path=None, mmse_items_path=None,
                   recipe_path=None, z_model_path=None) -> Resources:
    lex = load_lexicons(lexicon_dir)
    items = load_mmse_items(mmse_items_path) if mmse_items_path else lex.mmse_items
    return Resources(
        lexicons=lex,
        norm_table=skt.load_norm_table(norm_table_path),
        recipe=cerad.load_recipe(recipe_path),
        mmse_items=items,
        z_models=cerad.load_z_models(z_model_path) if z_model_path else None,
    )


@dataclass
class SubtestOutcome:
    subtest: str
    value: float | None = None
    norm: int | None = None
    reason: str = ""
    detail: dict = field(default_factory=dict)

    @property
    def scored(self) -> bool:
        return self.value is not None


@dataclass
class SessionReport:
    subject_id: str
    outcomes: dict[str, SubtestOutcome]
    skt: skt.SktSummary | None
    cerad_total: cerad.CeradTotal | None
    cerad_total_reason: str = ""
    z_values: dict[str, float] = field(default_factory=dict)

    def scores(self) -> dict[str, float]:
        """Flat score keys as used in expert-score files; unscored keys are absent."""
        out = {k: o.value for k, o in self.outcomes.items() if o.scored}
        if self.skt is not None and set(self.skt.unscored_subtests) <= set(skt.NON_VERBAL_SUBTESTS):
            out["SKT_attention"] = self.skt.attention_score
            out["SKT_memory"] = self.skt.memory_score
            out["SKT_total"] = self.skt.total_score
        if self.cerad_total is not None:
            out["CERAD_total"] = self.cerad_total.total
        return out

    def unscored(self) -> list[str]:
        return [k for k, o in self.outcomes.items() if not o.scored]


def _attempt(outcomes, subtest, fn):
    try:
        value, detail = fn()
    except (NotPresentError, UnscorableError, ContractError) as exc:
        outcomes[subtest] = SubtestOutcome(subtest, reason=str(exc))
        return None
    outcomes[subtest] = SubtestOutcome(subtest, value, detail=detail)
    return outcomes[subtest]


def score_session(session: Session, res: Resources, policy: RankPolicy = ONE_BEST,
                  speaker_filter: str | None = "patient",
                  reinstruction_gap_s: float = skt.DEFAULT_REINSTRUCTION_GAP_S,
                  external_skt_norms: Mapping[str, int] | None = None,
                  report_complement: bool = False) -> SessionReport:
    lex = res.lexicons
    meta = session.metadata
    outcomes: dict[str, SubtestOutcome] = {}

    def seg(subtest, part=None):
        return slice_segment(session, subtest, speaker_filter, part)

    def skt_raw(raw: skt.SktRaw):
        detail = dict(raw.evidence)
        if raw.confabulations:
            detail["confabulations"] = raw.confabulations
        if raw.clamped:
            detail["clamped"] = True
        return raw.value, detail

    objects = lex.skt_targets(meta.skt_form)
    _attempt(outcomes, "SKT1", lambda: skt_raw(skt.score_skt1(
        seg("SKT1"), objects, lex, policy, reinstruction_gap_s)))
    _attempt(outcomes, "SKT2", lambda: skt_raw(skt.score_skt_memory(
        seg("SKT2"), objects, lex, policy, "SKT2")))
    _attempt(outcomes, "SKT3", lambda: skt_raw(skt.score_skt3(seg("SKT3"), lex, policy)))
    _attempt(outcomes, "SKT6", lambda: skt_raw(skt.score_skt6(seg("SKT6"), lex, policy)))
    _attempt(outcomes, "SKT7", lambda: skt_raw(skt.score_skt7(
        seg("SKT7"), res.skt7_alphabet, lex, policy)))
    for st in ("SKT8", "SKT9"):
        _attempt(outcomes, st, lambda st=st: skt_raw(skt.score_skt_memory(
            seg(st), objects, lex, policy, st)))

    norms = {}
    for st in skt.SPEECH_SUBTESTS:
        o = outcomes[st]
        if o.scored:
            kind = "duration_s" if st in DURATION_KEYS else "missing_count"
            o.norm = skt.raw_to_norm(skt.SktRaw(st, kind, o.value), meta, res.norm_table)
            norms[st] = o.norm
    summary = skt.skt_summary(norms, [st for st in skt.SPEECH_SUBTESTS if st not in norms],
                              external_skt_norms)

    def fluency():
        animals = cerad.fluency_animals(seg("CERAD1"), lex, policy)
        return len(animals), {"animals": animals}
    _attempt(outcomes, "CERAD1", fluency)
    _attempt(outcomes, "CERAD2", lambda: (cerad.score_bnt(seg("CERAD2"), lex.bnt, lex, policy), {}))

    def mmse():
        whole = seg("CERAD3")
        parts = {p: seg("CERAD3", p) for p in session.parts("CERAD3")}
        r = cerad.score_mmse(whole, res.mmse_items, lex, policy, parts)
        return r.scaled_score, {"scorable_points": r.scorable_points,
                                "scorable_max": r.scorable_max, "items": r.per_item}
    _attempt(outcomes, "CERAD3", mmse)

    def learning():
        parts = sorted(session.parts("CERAD4"))
        r = cerad.score_word_list_learning([seg("CERAD4", p) for p in parts],
                                           lex.cerad_wordlist, lex, policy)
        return r.learning_total, {"pass_scores": list(r.pass_scores),
                                  "intrusions": [list(x) for x in r.intrusions]}
    learn = _attempt(outcomes, "CERAD4", learning)
    pass3 = learn.detail["pass_scores"][2] if learn is not None else None

    def recall():
        r = cerad.score_word_list_recall(seg("CERAD6"), lex.cerad_wordlist, lex, policy, pass3)
        return r.recall_score, {"savings_pct": r.savings_pct, "intrusions": r.intrusions}
    rec = _attempt(outcomes, "CERAD6", recall)
    if learn is not None:
        learn.detail["intrusions_total"] = sum(len(x) for x in learn.detail["intrusions"]) + (
            len(rec.detail["intrusions"]) if rec is not None else 0)

    def recognition():
        if not session.responses:
            raise NotPresentError("no CERAD7 recognition responses in session")
        r = cerad.score_recognition(session.responses, lex.cerad_wordlist,
                                    lex.cerad_distractors, report_complement)
        detail = {"hits": r.hits, "correct_rejections": r.correct_rejections}
        if r.complement_pct is not None:
            detail["complement_pct"] = r.complement_pct
        return r.discriminability_pct, detail
    _attempt(outcomes, "CERAD7", recognition)

    cerad_scores = {k: outcomes[k].value for k in ("CERAD1", "CERAD2", "CERAD3", "CERAD4",
                                                    "CERAD6", "CERAD7") if outcomes[k].scored}
    total, total_reason = None, ""
    try:
        total = cerad.cerad_total(cerad_scores, res.recipe)
    except ContractError as exc:
        total_reason = str(exc)

    z_values = {}
    if res.z_models:
        for key, model in res.z_models.items():
            if key in cerad_scores:
                z_values[key] = cerad.cerad_z(cerad_scores[key], model, meta)

    ordered = {k: outcomes[k] for k in SUBTESTS}
    return SessionReport(session.subject_id, ordered, summary, total, total_reason, z_values)


def report_rows(report: SessionReport) -> list[dict]:
    """One row per subtest and summary score, for CSV / JSON-lines / table output."""
    rows = []
    for key, o in report.outcomes.items():
        rows.append({"subject_id": report.subject_id, "item": key,
                     "value": o.value, "norm": o.norm,
                     "status": "scored" if o.scored else "unscored",
                     "detail": o.detail if o.scored else {"reason": o.reason}})
    s = report.skt
    if s is not None:
        flag = {"partial": s.partial, "unscored_subtests": s.unscored_subtests}
        rows.append({"subject_id": report.subject_id, "item": "SKT_attention",
                     "value": s.attention_score, "norm": None, "status": "scored", "detail": flag})
        rows.append({"subject_id": report.subject_id, "item": "SKT_memory",
                     "value": s.memory_score, "norm": None, "status": "scored", "detail": flag})
        rows.append({"subject_id": report.subject_id, "item": "SKT_total",
                     "value": s.total_score, "norm": None, "status": "scored",
                     "detail": {**flag, "severity": s.severity}})
    t = report.cerad_total
    if t is not None:
        rows.append({"subject_id": report.subject_id, "item": "CERAD_total", "value": t.total,
                     "norm": None, "status": "scored",
                     "detail": {"unscaled_total": t.unscaled_total, "included_max": t.included_max,
                                "full_max": t.full_max, "omitted": t.omitted,
                                "contributions": t.contributions, "recipe": t.recipe}})
    else:
        rows.append({"subject_id": report.subject_id, "item": "CERAD_total", "value": None,
                     "norm": None, "status": "unscored",
                     "detail": {"reason": report.cerad_total_reason}})
    for key, z in report.z_values.items():
        rows.append({"subject_id": report.subject_id, "item": f"z_{key}", "value": z,
                     "norm": None, "status": "scored", "detail": {}})
    return rows
