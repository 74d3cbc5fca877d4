import json

import pytest
from hypothesis import given, settings, strategies as st

from neuroscore import skt
from neuroscore.errors import ConfigError, UnscorableError
from neuroscore.matching import RankPolicy
from neuroscore.transcript import SubjectMetadata, SubtestSpan, slice_segment

from conftest import segment, session, tok, words

@pytest.fixture
def objects(lex):
    return lex.skt_targets("A")


def test_skt1_endpoints(lex, objects):
    names = objects.canonicals
    toks = [tok(names[0], 5.0, 5.5)] + [tok(n, 6.0 + i, 6.4 + i) for i, n in enumerate(names[1:-1])]
    toks.append(tok(names[-1], 42.0, 42.5))
    raw = skt.score_skt1(segment(toks, "SKT1"), objects, lex)
    assert raw.value == pytest.approx(37.5) and not raw.clamped


def test_skt1_single_match(lex, objects):
    raw = skt.score_skt1(segment([tok(objects.canonicals[0], 5.0, 5.8)], "SKT1"), objects, lex)
    assert raw.value == pytest.approx(0.8)


def test_skt1_clamped(lex, objects):
    toks = [tok(objects.canonicals[0], 5.0, 5.4), tok(objects.canonicals[1], 70.6, 71.0)]
    raw = skt.score_skt1(segment(toks, "SKT1", start=5.0), objects, lex)
    assert raw.value == 60.0 and raw.clamped


def test_skt1_no_objects(lex, objects):
    with pytest.raises(UnscorableError):
        skt.score_skt1(segment(words("äh", "hm"), "SKT1"), objects, lex)


def test_skt1_repeat_counts_unless_reinstructed(lex, objects):
    names = objects.canonicals
    base = [tok(n, 1.0 + i, 1.4 + i) for i, n in enumerate(names)]
    # immediate repeat extends the end point
    raw = skt.score_skt1(segment(base + [tok(names[0], 14.0, 14.4)], "SKT1"), objects, lex)
    assert raw.value == pytest.approx(13.4)
    # a repeat long after completion is an answer to a re-instruction
    raw = skt.score_skt1(segment(base + [tok(names[0], 40.0, 40.4)], "SKT1"), objects, lex)
    assert raw.value == pytest.approx(11.4)
    assert raw.evidence["repeats_ignored"] == 1
    # a repeat after an examiner prompt is ignored too, even when not complete
    s = session(base[:5] + [tok("nochmal", 7.0, speaker="examiner"), tok(names[0], 8.0)],
                [SubtestSpan("SKT1", 0, 20)])
    raw = skt.score_skt1(slice_segment(s, "SKT1", "patient"), objects, lex)
    assert raw.value == pytest.approx(4.4)


def test_memory_missing(lex, objects):
    names = objects.canonicals
    raw = skt.score_skt_memory(segment(words(*names[:9])), objects, lex)
    assert raw.value == 3
    raw = skt.score_skt_memory(segment(words(*names, names[0], names[3])), objects, lex, subtest="SKT8")
    assert raw.value == 0
    raw = skt.score_skt_memory(segment(words(names[0], "giraffe", "äh")), objects, lex, subtest="SKT9")
    assert raw.confabulations == ["giraffe"] and raw.value == 11


def test_memory_rejects_other_subtests(lex, objects):
    with pytest.raises(ValueError):
        skt.score_skt_memory(segment([]), objects, lex, subtest="SKT3")


def test_skt3(lex):
    nums = ["23", "47", "dreizehn", "88", "19", "vierundfünfzig", "31", "62", "75", "90"]
    toks = [tok(n, 3.2 + 2 * i) for i, n in enumerate(nums)]
    toks[-1] = tok(nums[-1], 21.3, 21.7)
    raw = skt.score_skt3(segment(toks, "SKT3"), lex)
    assert raw.value == pytest.approx(18.5) and not raw.evidence["low_evidence"]


def test_skt3_low_evidence_and_unscorable(lex):
    raw = skt.score_skt3(segment([tok("23", 1.0), tok("äh", 2.0), tok("47", 5.0, 5.5)], "SKT3"), lex)
    assert raw.value == pytest.approx(4.5)
    assert raw.evidence == {"hit_count": 2, "low_evidence": True, "numbers": [23, 47]}
    with pytest.raises(UnscorableError):
        skt.score_skt3(segment([tok("23", 1.0)], "SKT3"), lex)


def test_skt6(lex):
    raw = skt.score_skt6(segment([tok("zwölf", 120.0), tok("siebzehn", 135.0, 135.4)], "SKT6", 100.0), lex)
    assert raw.value == pytest.approx(35.4)


def test_skt6_counting_aloud(lex):
    count = [str(i) for i in range(1, 10)]
    toks = [tok(c, 1.0 + i) for i, c in enumerate(count)] + [tok("17", 11.0, 11.5)]
    raw = skt.score_skt6(segment(toks, "SKT6", 0.0), lex, expected_count=17)
    assert raw.value == pytest.approx(11.5)
    assert raw.evidence["count_correct"]


def test_skt6_examiner_numbers_ignored(lex):
    s = session([tok("zwanzig", 2.0), tok("dreißig", 9.0, speaker="examiner")],
                [SubtestSpan("SKT6", 0.0, 20.0)])
    raw = skt.score_skt6(slice_segment(s, "SKT6", "patient"), lex)
    assert raw.value == pytest.approx(2.4)


def test_skt7(lex):
    toks = [tok("a", 2.0)] + [tok(x, 3.0 + i) for i, x in enumerate("babab")] + [tok("und", 20.0), tok("b", 43.6, 44.0)]
    raw = skt.score_skt7(segment(toks, "SKT7"), ("a", "b"), lex)
    assert raw.value == pytest.approx(42.0)
    assert raw.evidence["hit_count"] == 7
    with pytest.raises(UnscorableError):
        skt.score_skt7(segment(words("äh", "und"), "SKT7"), ("a", "b"), lex)


def test_norm_bands(res):
    meta = SubjectMetadata(age=70, sex="f", iq_band="avg", education_years=12)
    cell = res.norm_table.cell("SKT1", 70, "avg")
    bps = [b for b, _ in cell.breakpoints]
    assert bps == [15.0, 22.0, 30.0]
    norm = lambda v: skt.raw_to_norm(skt.SktRaw("SKT1", "duration_s", v), meta, res.norm_table)
    assert norm(3.0) == 0
    assert norm(59.0) == 3
    assert [norm(b) for b in bps] == [0, 1, 2]
    assert [norm(b + 0.01) for b in bps] == [1, 2, 3]


def test_norm_table_age_bands(res):
    t = res.norm_table
    assert t.age_band(64.9) == "under_65" and t.age_band(65) == "65_to_74" and t.age_band(90) == "75_plus"
    assert t.provenance == "SYNTHETIC"


def test_norm_table_requires_provenance(tmp_path):
    p = tmp_path / "t.json"
    p.write_text(json.dumps({"age_bands": [], "subtests": {}}))
    with pytest.raises(ConfigError):
        skt.load_norm_table(p)
    with pytest.raises(ConfigError):
        skt.load_norm_table(tmp_path / "missing.json")


def test_norm_cell_validation():
    with pytest.raises(ConfigError):
        skt.NormCell(((5.0, 1), (4.0, 2)))
    with pytest.raises(ConfigError):
        skt.NormCell(((5.0, 2), (6.0, 1)))


@settings(max_examples=200)
@given(st.sampled_from(["SKT1", "SKT2", "SKT3", "SKT6", "SKT7", "SKT8", "SKT9"]),
       st.sampled_from([50, 70, 80]), st.sampled_from(["below_avg", "avg", "above_avg"]),
       st.floats(0, 60), st.floats(0, 60))
def test_norm_monotone(res, subtest, age, iq, a, b):
    cell = res.norm_table.cell(subtest, age, iq)
    lo, hi = sorted((a, b))
    assert cell.lookup(lo) <= cell.lookup(hi)


def test_severity_bands_partition():
    expected = ["none"] * 5 + ["mci"] * 4 + ["mild"] * 5 + ["moderate"] * 5 + ["severe"] * 5 + ["very_severe"] * 4
    assert [skt.severity_band(t) for t in range(28)] == expected
    for bad in (-1, 28):
        with pytest.raises(ValueError):
            skt.severity_band(bad)


def test_summary():
    all_speech = dict.fromkeys(skt.SPEECH_SUBTESTS, 0)
    s = skt.skt_summary(all_speech, external={"SKT4": 0, "SKT5": 0})
    assert (s.total_score, s.severity, s.partial) == (0, "none", False)
    s = skt.skt_summary(dict.fromkeys(skt.SPEECH_SUBTESTS, 3), external={"SKT4": 3, "SKT5": 3})
    assert (s.total_score, s.severity) == (27, "very_severe")
    assert (s.memory_score, s.attention_score) == (9, 18)
    norms = {"SKT1": 3, "SKT2": 3, "SKT3": 3, "SKT6": 3, "SKT7": 2}
    s = skt.skt_summary(norms)
    assert (s.total_score, s.severity) == (14, "moderate")
    assert s.partial and set(s.unscored_subtests) == {"SKT4", "SKT5", "SKT8", "SKT9"}


names_or_fillers = st.lists(st.sampled_from(["brille", "schlüssel", "äh", "giraffe", "also", "ähm"]), max_size=15)


@settings(max_examples=100, deadline=None)
@given(names_or_fillers, st.lists(st.tuples(st.integers(0, 15), st.sampled_from(["äh", "hm", "also"])), max_size=5))
def test_memory_invariants(lex, said, fillers):
    objects = lex.skt_targets("A")
    seg = segment(words(*said))
    raw = skt.score_skt_memory(seg, objects, lex)
    matched = len(raw.evidence["matched"])
    assert raw.value + matched == 12
    padded = list(said)
    for pos, f in fillers:
        padded.insert(min(pos, len(padded)), f)
    assert skt.score_skt_memory(segment(words(*padded)), objects, lex).value == raw.value


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0, 200), min_size=2, max_size=10))
def test_durations_bounded(lex, starts):
    toks = [tok(str(10 + i), s) for i, s in enumerate(sorted(starts))]
    raw = skt.score_skt3(segment(toks, "SKT3"), lex, RankPolicy(True, 5))
    assert 0 <= raw.value <= 60
    assert raw.clamped == (toks[-1].end_s - toks[0].start_s > 60)
