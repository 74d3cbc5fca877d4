"""Transcript-based scoring of the speech subtests of the SKT and CERAD-NB batteries."""

from .errors import (ConfigError, ContractError, NeuroscoreError, NotPresentError, ParseError,
                     StructuralError, UndefinedCorrelationError, UnscorableError)
from .lexicon import LexiconSet, load_lexicons, normalize
from .matching import ONE_BEST, EditCosts, RankPolicy, weighted_levenshtein
from .pipeline import Resources, SessionReport, load_resources, score_session
from .transcript import Session, SubjectMetadata, TimedToken, parse_session

__version__ = "0.1.0"
