"""Deterministic question answering over controlled-English facts,
frame knowledge, and a city plan, with justification trails."""

from .cityplan import (
    CityPlan,
    Path,
    PlanLoadError,
    SpeedTable,
    UnreachableError,
    UnresolvedPlaceError,
    load_plan,
    load_speeds,
)
from .cnl import (
    CnlParser,
    Question,
    QuestionParseError,
    SentenceParseError,
    render_answer,
    render_fact,
)
from .engine import (
    AmbiguousBasicFactError,
    Answer,
    BasicFact,
    Engine,
    Step,
    UnknownOperationError,
    format_trail,
    verify_trail,
)
from .errors import KbqaError
from .facts import (
    Fact,
    FactFilter,
    FactStore,
    Place,
    TimeWindow,
    Timestamp,
    ingest,
    time_intersects,
)
from .frames import (
    ActionFrame,
    DiseaseFrame,
    DictionaryParseError,
    FrameParseError,
    KnowledgeBase,
    OperationFrame,
    ScriptFrame,
    VerbDictionary,
    VerbEntry,
)

__version__ = "0.1.0"

__all__ = [
    "ActionFrame",
    "AmbiguousBasicFactError",
    "Answer",
    "BasicFact",
    "CityPlan",
    "CnlParser",
    "DictionaryParseError",
    "DiseaseFrame",
    "Engine",
    "Fact",
    "FactFilter",
    "FactStore",
    "FrameParseError",
    "KbqaError",
    "KnowledgeBase",
    "OperationFrame",
    "Path",
    "Place",
    "PlanLoadError",
    "Question",
    "QuestionParseError",
    "ScriptFrame",
    "SentenceParseError",
    "SpeedTable",
    "Step",
    "TimeWindow",
    "Timestamp",
    "UnknownOperationError",
    "UnreachableError",
    "UnresolvedPlaceError",
    "VerbDictionary",
    "VerbEntry",
    "ingest",
    "load_plan",
    "load_speeds",
    "render_answer",
    "render_fact",
    "format_trail",
    "time_intersects",
    "verify_trail",
]
