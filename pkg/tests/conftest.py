import pytest

from neuroscore.lexicon import load_lexicons
from neuroscore.pipeline import load_resources
from neuroscore.transcript import Alternative, Segment, Session, SubjectMetadata, SubtestSpan, TimedToken


@pytest.fixture(scope="session")
def res():
    return load_resources()


@pytest.fixture(scope="session")
def lex(res):
    return res.lexicons


def tok(surface, start, end=None, speaker="patient", alts=()):
    """Token with optional lower-ranked alternatives given as plain strings."""
    end = start + 0.4 if end is None else end
    alternatives = ()
    if alts:
        alternatives = (Alternative(surface, 1),) + tuple(
            Alternative(a, r) for r, a in enumerate(alts, start=2))
    return TimedToken(surface, start, end, speaker, alternatives)


def words(*surfaces, start=1.0, step=1.0, speaker="patient"):
    return [tok(w, start + i * step, speaker=speaker) for i, w in enumerate(surfaces)]


def segment(tokens, subtest="SKT2", start=0.0, end=1000.0):
    return Segment(SubtestSpan(subtest, start, end), tuple(tokens))


META = SubjectMetadata(age=70, sex="f", iq_band="avg", education_years=12)


def session(tokens, spans, responses=(), subject_id="T1", meta=META):
    return Session(subject_id, tuple(tokens), tuple(spans), meta, tuple(responses))
