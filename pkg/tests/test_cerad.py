import pytest
from hypothesis import given, strategies as st

from neuroscore import cerad
from neuroscore.errors import ConfigError, ContractError
from neuroscore.lexicon import MmseItem
from neuroscore.matching import RankPolicy
from neuroscore.transcript import RecognitionResponse, SubjectMetadata

from conftest import segment, tok, words


def test_savings():
    assert cerad.savings_pct(8, 10) == 80.0
    assert cerad.savings_pct(10, 10) == 100.0
    assert cerad.savings_pct(6, 0) is None


def test_discriminability_printed_values():
    assert cerad.discriminability_pct(10, 10) == 0.0
    assert cerad.discriminability_pct(0, 0) == 100.0
    assert cerad.discriminability_pct(8, 6) == 30.0


@given(st.integers(0, 10), st.integers(0, 10))
def test_discriminability_symmetric_affine(h, cr):
    d = cerad.discriminability_pct(h, cr)
    assert d == cerad.discriminability_pct(cr, h)
    assert d == pytest.approx((20 - h - cr) / 20 * 100, abs=1e-12)


def test_fluency(lex):
    assert cerad.score_fluency(segment(words("hund", "katze", "maus", "hund")), lex) == 3
    assert cerad.score_fluency(segment(words("hunde", "hund")), lex) == 1
    seg = segment([tok("hunt", 1.0, alts=["hund"])])
    assert cerad.score_fluency(seg, lex) == 0
    assert cerad.score_fluency(seg, lex, RankPolicy(True, 5)) == 1


def test_fluency_ignores_non_animals(lex):
    assert cerad.fluency_animals(segment(words("äh", "tisch", "Löwen", "also", "löwe")), lex) == ["löwe"]


@given(st.lists(st.sampled_from(["hund", "katze", "hunde", "esel", "tisch"]), max_size=10),
       st.lists(st.tuples(st.integers(0, 10), st.sampled_from(["äh", "und", "also"])), max_size=4))
def test_fluency_invariant_under_duplicates_and_fillers(lex, said, fillers):
    base = cerad.score_fluency(segment(words(*said)), lex)
    doubled = [w for x in said for w in (x, x)]
    assert cerad.score_fluency(segment(words(*doubled)), lex) == base
    padded = list(said)
    for pos, f in fillers:
        padded.insert(min(pos, len(padded)), f)
    assert cerad.score_fluency(segment(words(*padded)), lex) == base


def test_bnt(lex):
    names = lex.bnt.canonicals
    assert cerad.score_bnt(segment(words(*names)), lex.bnt, lex) == 15
    assert cerad.score_bnt(segment(words("dromedar")), lex.bnt, lex) == 1
    assert cerad.score_bnt(segment(words("äh", "weiß", "nicht")), lex.bnt, lex) == 0


def custom_items():
    return (
        MmseItem("place", "word_count", 3, 0, (("deutschland",), ("bayern",), ("nürnberg", "nuernberg"))),
        MmseItem("spell", "spell_backwards", 5, 0, (("preis",),)),
        MmseItem("repeat", "repeat", 1, 0, (("kein",), ("wenn",), ("und",), ("aber",))),
        MmseItem("naming", "word_count", 12, 0, tuple((f"w{i}",) for i in range(12))),
        MmseItem("time", "unscorable", 9, 0, ()),
    )


def test_mmse_all_correct_scales_to_30(lex):
    items = custom_items()
    assert sum(i.points for i in items if i.scorable) == 21
    parts = {
        "place": segment(words("deutschland", "bayern", "nuernberg")),
        "spell": segment(words("preis", "s", "i", "e", "r", "p")),
        "repeat": segment(words("kein", "wenn", "und", "aber")),
        "naming": segment(words(*[f"w{i}" for i in range(12)])),
    }
    r = cerad.score_mmse(segment([]), items, lex, item_segments=parts)
    assert (r.scorable_points, r.scorable_max, r.scaled_score) == (21, 21, 30.0)
    assert r.per_item["time"]["scored"] is False


def test_mmse_spelling_with_fillers_and_names(lex):
    item = MmseItem("spell", "spell_backwards", 5, 0, (("preis",),))
    seg = segment(words("äh", "S", "wie", "Siegfried", "I", "also", "E", "R", "wie", "Richard", "P"))
    assert cerad.score_mmse(seg, [item], lex).scorable_points == 5
    seg = segment(words("s", "i", "r", "e", "p"))
    r = cerad.score_mmse(seg, [item], lex)
    assert r.scorable_points == 0 and r.per_item["spell"]["distance"] == 1


def test_mmse_half_points(lex):
    items = (MmseItem("a", "word_count", 4, 0, tuple((f"w{i}",) for i in range(4))),)
    r = cerad.score_mmse(segment(words("w0", "w2")), items, lex)
    assert r.scaled_score == 15.0


def test_mmse_tolerance(lex):
    item = MmseItem("r", "repeat", 1, 1, (("kein",), ("wenn",), ("und",), ("aber",)))
    assert cerad.score_mmse(segment(words("kein", "und", "aber")), [item], lex).scorable_points == 1
    assert cerad.score_mmse(segment(words("kein", "aber")), [item], lex).scorable_points == 0


def test_mmse_needs_scorable_items(lex):
    with pytest.raises(ConfigError):
        cerad.score_mmse(segment([]), [MmseItem("t", "unscorable", 5, 0, ())], lex)
    with pytest.raises(ConfigError):
        cerad.score_mmse(segment([]), [], lex)


@given(st.integers(1, 40).flatmap(lambda m: st.tuples(st.integers(0, m), st.integers(0, m), st.just(m))))
def test_mmse_scaled_exact_and_monotone(args):
    a, b, m = args
    lo, hi = sorted((a, b))
    assert abs(cerad.mmse_scaled(lo, m) - 30 * lo / m) <= 0.05 + 1e-12
    assert cerad.mmse_scaled(lo, m) <= cerad.mmse_scaled(hi, m)


def test_mmse_rounding_half_up():
    assert cerad.mmse_scaled(1, 16) == 1.9   # 1.875
    assert cerad.mmse_scaled(1, 80) == 0.4   # 0.375


def test_word_list_learning(lex):
    wl = lex.cerad_wordlist.canonicals
    r = cerad.score_word_list_learning(
        [segment(words(*wl[:4])), segment(words(*wl[:6])), segment(words(*wl[:8], "zigarette"))],
        lex.cerad_wordlist, lex)
    assert r.pass_scores == (4, 6, 8) and r.learning_total == 18
    assert r.intrusions == ([], [], ["zigarette"])
    perfect = cerad.score_word_list_learning([segment(words(*wl))] * 3, lex.cerad_wordlist, lex)
    assert perfect.learning_total == 30
    with pytest.raises(ContractError):
        cerad.score_word_list_learning([segment([])] * 2, lex.cerad_wordlist, lex)


def test_word_list_recall(lex):
    wl = lex.cerad_wordlist.canonicals
    r = cerad.score_word_list_recall(segment(words(*wl[:8], wl[0])), lex.cerad_wordlist, lex, pass3_score=10)
    assert (r.recall_score, r.savings_pct) == (8, 80.0)
    r = cerad.score_word_list_recall(segment(words(*wl[:6])), lex.cerad_wordlist, lex, pass3_score=0)
    assert r.savings_pct is None


def responses(lex, hits, rejections):
    out = [RecognitionResponse(w, i < hits) for i, w in enumerate(lex.cerad_wordlist.canonicals)]
    out += [RecognitionResponse(w, i >= rejections) for i, w in enumerate(lex.cerad_distractors.canonicals)]
    return out


@pytest.mark.parametrize("h, cr, d", [(10, 10, 0.0), (0, 0, 100.0), (8, 6, 30.0)])
def test_recognition(lex, h, cr, d):
    r = cerad.score_recognition(responses(lex, h, cr), lex.cerad_wordlist, lex.cerad_distractors, True)
    assert (r.hits, r.correct_rejections, r.discriminability_pct) == (h, cr, d)
    assert r.complement_pct == 100 - d


def test_recognition_coverage(lex):
    with pytest.raises(ContractError):
        cerad.score_recognition(responses(lex, 5, 5)[:-1], lex.cerad_wordlist, lex.cerad_distractors)
    with pytest.raises(ContractError):
        cerad.score_recognition(responses(lex, 5, 5) + [("xyzzy", "yes")], lex.cerad_wordlist,
                                lex.cerad_distractors)


def test_total_all_max(res):
    scores = {"CERAD1": 24, "CERAD2": 15, "CERAD4": 30, "CERAD6": 10, "CERAD7": 0.0}
    t = cerad.cerad_total(scores, res.recipe)
    assert t.unscaled_total == pytest.approx(100 * t.included_max / t.full_max)
    assert t.total == pytest.approx(100.0)
    assert t.omitted == ["CERAD5"]


def test_total_zeros_and_cap(res):
    zeros = {"CERAD1": 0, "CERAD2": 0, "CERAD4": 0, "CERAD6": 0, "CERAD7": 100.0}
    assert cerad.cerad_total(zeros, res.recipe).total == 0.0
    capped = cerad.cerad_total({**zeros, "CERAD1": 30}, res.recipe)
    assert capped.contributions["CERAD1"] == 24


def test_total_required_component(res):
    with pytest.raises(ContractError):
        cerad.cerad_total({"CERAD1": 10}, res.recipe)


def test_z_values(tmp_path):
    model = cerad.ZModel(b0=10, b_age=0.1, b_edu=0.5, b_sex=1.0, sd=2.0)
    meta = SubjectMetadata(age=70, sex="m", iq_band="avg", education_years=12)
    mean = 10 + 7 + 6 + 1
    assert cerad.cerad_z(mean, model, meta) == 0
    assert cerad.cerad_z(mean + 2.0, model, meta) == pytest.approx(1.0)
    p = tmp_path / "z.csv"
    p.write_text("subtest,b0,b_age,b_edu,b_sex,sd\nCERAD1,1,0,0,0,0\n")
    with pytest.raises(ConfigError):
        cerad.load_z_models(p)
