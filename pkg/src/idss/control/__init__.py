"""Control loop, experience log, A/B testing, Greedy-Fine and reporting."""

from idss.control.abtest import ABResult, ab_test
from idss.control.evaluators import CacheConfigObjective, CacheSimEvaluator
from idss.control.experience import (
    ExperienceDB,
    ExperienceError,
    ExperienceRecord,
    UnknownVersion,
    record_experience,
    rollback,
)
from idss.control.greedy import GreedyResult, Param, ParamSpace, greedy_fine
from idss.control.loop import ClientInput, LoopError, LoopReport, run_loop
from idss.control.report import (
    NormalizedReport,
    NormalizedRow,
    ReportError,
    geometric_mean,
    normalize_report,
)

__all__ = [
    "ABResult", "ab_test", "CacheConfigObjective", "CacheSimEvaluator",
    "ExperienceDB", "ExperienceError", "ExperienceRecord", "UnknownVersion",
    "record_experience", "rollback", "GreedyResult", "Param", "ParamSpace",
    "greedy_fine", "ClientInput", "LoopError", "LoopReport", "run_loop",
    "NormalizedReport", "NormalizedRow", "ReportError", "geometric_mean",
    "normalize_report",
]
