"""Incremental sentence understanding with retained alternatives and
garden-path repair: one control loop over separate syntactic and semantic
knowledge sources."""

from .kb import (KbError, KnowledgeBase, LexicalEntry, UnknownWordError,
                 load_default_kb, load_kb, load_kb_dir)
from .engine import (EngineConfig, Engine, Interpretation, PreferenceVector,
                     process_sentence, tokenize)
from .oracle import OracleParse, enumerate_parses, semantically_clean
from .structures import (Alternative, Counters, MeaningInstance, ParseNode,
                         ParseState, RoleNode)

__all__ = [
    "Alternative",
    "Counters",
    "Engine",
    "EngineConfig",
    "Interpretation",
    "KbError",
    "KnowledgeBase",
    "LexicalEntry",
    "MeaningInstance",
    "OracleParse",
    "ParseNode",
    "ParseState",
    "PreferenceVector",
    "RoleNode",
    "UnknownWordError",
    "enumerate_parses",
    "load_default_kb",
    "load_kb",
    "load_kb_dir",
    "process_sentence",
    "semantically_clean",
    "tokenize",
]
