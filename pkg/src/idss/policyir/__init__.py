"""Typed, vendor-neutral configuration plans, guardrails and backends."""

from idss.policyir.actions import (
    ACTION_TYPES,
    Action,
    CapBandwidth,
    DisableServerCache,
    PlanError,
    PolicyPlan,
    ReserveBandwidth,
    SetCachePolicy,
    SetCacheSize,
    SetFsParam,
    SetIOScheduler,
    SetQoSClass,
    SetReadAhead,
    action_from_dict,
)
from idss.policyir.guardrails import (
    Guardrail,
    GuardrailError,
    ValidationResult,
    Violation,
    load_guardrails,
    parse_guardrails,
    to_base_units,
    validate,
)
from idss.policyir.translate import (
    BACKENDS,
    CommandScript,
    UnsupportedAction,
    parse_commands,
    translate,
)

__all__ = [
    "ACTION_TYPES", "Action", "CapBandwidth", "DisableServerCache", "PlanError",
    "PolicyPlan", "ReserveBandwidth", "SetCachePolicy", "SetCacheSize", "SetFsParam",
    "SetIOScheduler", "SetQoSClass", "SetReadAhead", "action_from_dict",
    "Guardrail", "GuardrailError", "ValidationResult", "Violation", "load_guardrails",
    "parse_guardrails", "to_base_units", "validate",
    "BACKENDS", "CommandScript", "UnsupportedAction", "parse_commands", "translate",
]
