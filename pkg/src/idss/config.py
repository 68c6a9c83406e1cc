"""Loop configuration files.

A loop config is one JSON object; relative paths resolve against the
config file's directory::

    {
      "clients": [
        {"telemetry": "b.telem", "trace": "b.csv", "intent": "web cache", "prefix": 400},
        {"telemetry": "s.telem", "trace": {"synthetic": "C", "seed": 1}}
      ],
      "server": {"links": {"nic0": 1.5e9}, "cache_segments": {"b": "seg-b"}},
      "constraints": {"max_stream_bps": 4e8},
      "objective": {"goal_text": "maximize aggregate hit rate"},
      "guardrails": "guardrails.json",
      "advisor": "mock",
      "backend": "mockvendor",
      "evaluator": {"kind": "cachesim", "trace": "b.csv", "capacity_frac": 0.001},
      "experience": "experience.ndjson",
      "experience_seed": "stable.json",
      "knowledge": null,
      "whitelist": null,
      "audit": null,
      "threshold": 0.05
    }
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from idss.advisor import Advisor, AuditLog, KnowledgeStore, Objective, load_knowledge, make_advisor
from idss.control.evaluators import CacheSimEvaluator
from idss.control.experience import ExperienceDB
from idss.control.loop import DEFAULT_REGRESSION, ClientInput
from idss.policyir import Guardrail, load_guardrails
from idss.telemetry import DEFAULT_WHITELIST, ServerState, load_telemetry, load_whitelist
from idss.trace import AccessTrace, FormatSpec, gen_synthetic, load_trace


class ConfigError(ValueError):
    pass


def load_trace_ref(ref: Any, base: Path) -> AccessTrace:
    """A trace path, or ``{"synthetic": kind, "seed": n}``, or
    ``{"path": ..., "format": "csv"|"plain"|{FormatSpec fields}}``."""
    if isinstance(ref, str):
        p = base / ref
        return load_trace(p, "plain" if p.suffix == ".txt" else "csv")
    if isinstance(ref, dict) and "synthetic" in ref:
        return gen_synthetic(ref["synthetic"], seed=int(ref.get("seed", 0)))
    if isinstance(ref, dict) and "path" in ref:
        fmt = ref.get("format", "csv")
        if isinstance(fmt, dict):
            fmt = FormatSpec(**fmt)
        return load_trace(base / ref["path"], fmt)
    raise ConfigError(f"cannot interpret trace reference {ref!r}")


@dataclass
class LoopConfig:
    clients: list[ClientInput]
    server: ServerState
    constraints: dict
    objective: Objective
    guardrails: list[Guardrail]
    advisor: Advisor
    backend: str
    evaluator: CacheSimEvaluator
    db: ExperienceDB
    knowledge: KnowledgeStore
    whitelist: frozenset = DEFAULT_WHITELIST
    audit: AuditLog | None = None
    threshold: float = DEFAULT_REGRESSION
    raw: dict = field(default_factory=dict)


def load_loop_config(path: str | Path, advisor: Advisor | None = None) -> LoopConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read loop config {path}: {exc}") from exc
    base = path.parent

    def rel(key):
        v = raw.get(key)
        return None if v is None else base / v

    try:
        clients = []
        for c in raw.get("clients", []):
            clients.append(ClientInput(load_telemetry(base / c["telemetry"]),
                                       load_trace_ref(c["trace"], base),
                                       c.get("intent", ""), int(c.get("prefix", 400))))
        ev = raw.get("evaluator") or {}
        if ev.get("kind", "cachesim") != "cachesim":
            raise ConfigError(f"unknown evaluator kind {ev.get('kind')!r}")
        if "trace" in ev:
            ev_trace = load_trace_ref(ev["trace"], base)
        elif clients:
            ev_trace = clients[0].trace
        else:
            raise ConfigError("evaluator needs a trace when there are no clients")
        evaluator = CacheSimEvaluator(ev_trace, float(ev.get("capacity_frac", 0.001)),
                                      int(ev.get("block_size", 4096)), ev.get("target"))
        db = ExperienceDB(rel("experience"))
        if raw.get("experience_seed") and not db.records():
            db.seed(rel("experience_seed"))
    except KeyError as exc:
        raise ConfigError(f"loop config missing key {exc}") from exc

    return LoopConfig(
        clients=clients,
        server=ServerState.from_dict(raw.get("server", {})),
        constraints=dict(raw.get("constraints", {})),
        objective=Objective.from_dict(raw.get("objective", {})),
        guardrails=load_guardrails(rel("guardrails")) if raw.get("guardrails") else [],
        advisor=advisor or make_advisor(raw.get("advisor", "mock")),
        backend=raw.get("backend", "mockvendor"),
        evaluator=evaluator,
        db=db,
        knowledge=load_knowledge(rel("knowledge")),
        whitelist=load_whitelist(rel("whitelist")),
        audit=AuditLog(rel("audit")) if raw.get("audit") else None,
        threshold=float(raw.get("threshold", DEFAULT_REGRESSION)),
        raw=raw,
    )
