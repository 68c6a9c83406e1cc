"""Reasoning layer: prompts, advisors, knowledge retrieval, answer parsing."""

from __future__ import annotations

import json
import re
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol, Sequence

from idss.advisor.knowledge import KnowledgeDoc, KnowledgeStore, load_knowledge, retrieve
from idss.advisor.live import (
    AdvisorAmbiguous,
    AdvisorError,
    AdvisorUnavailable,
    GenerationSettings,
    LiveAdvisor,
)
from idss.advisor.mock import MockAdvisor
from idss.advisor.prompts import (
    SYSTEM_PROMPT,
    Objective,
    build_plan_prompt,
    build_policy_prompt,
    section,
    CANDIDATES_MARK,
)
from idss.cachesim.policies import POLICY_ORDER, PolicyKind
from idss.policyir.actions import PlanError, PolicyPlan
from idss.telemetry import SystemStateDoc

__all__ = [
    "Advisor", "AdvisorAmbiguous", "AdvisorError", "AdvisorUnavailable", "AuditLog",
    "GenerationSettings", "KnowledgeDoc", "KnowledgeStore", "LiveAdvisor", "MockAdvisor",
    "Objective", "PolicyChoice", "UnknownClientError", "advise_cache_policy",
    "advise_plan", "build_plan_prompt", "build_policy_prompt", "load_knowledge",
    "make_advisor", "parse_policy", "retrieve",
]


class Advisor(Protocol):
    name: str

    def complete(self, messages: list[dict], settings: GenerationSettings | None = None) -> str:
        ...


class UnknownClientError(PlanError):
    pass


@dataclass(frozen=True)
class PolicyChoice:
    policy: PolicyKind
    rationale: str = ""
    confident: bool = True


class AuditLog:
    """Appends one JSON record per advisor call."""

    def __init__(self, path: str | Path | None, clock=time.time):
        self.path = Path(path) if path else None
        self.clock = clock

    def write(self, advisor: str, kind: str, messages: list[dict], responses: list[str]):
        if self.path is None:
            return
        rec = {"ts": self.clock(), "advisor": advisor, "kind": kind,
               "messages": messages, "responses": responses}
        with self.path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(rec, sort_keys=True, ensure_ascii=False) + "\n")


def make_advisor(kind: str, **kw) -> Advisor:
    if kind == "mock":
        return MockAdvisor(**kw)
    if kind == "live":
        return LiveAdvisor.from_env(**kw)
    raise ValueError(f"unknown advisor kind {kind!r}; expected mock or live")


def parse_policy(text: str, candidates: Sequence[PolicyKind]) -> PolicyKind | None:
    """The single candidate named in ``text`` (whole word, any case), else None."""
    found = [k for k in candidates
             if re.search(rf"(?<![\w-]){re.escape(k.value)}(?![\w-])", text, re.IGNORECASE)]
    return found[0] if len(found) == 1 else None


def _candidates_from_prompt(prompt: str) -> list[PolicyKind]:
    raw = section(prompt, CANDIDATES_MARK)
    if not raw:
        return list(POLICY_ORDER)
    return [PolicyKind.parse(c) for c in raw.split(",") if c.strip()]


def advise_cache_policy(advisor: Advisor, prompt: str,
                        settings: GenerationSettings | None = None,
                        audit: AuditLog | None = None) -> PolicyChoice:
    """Ask for one policy; at most one clarification turn if the answer names
    zero or several candidates."""
    candidates = _candidates_from_prompt(prompt)
    messages = [{"role": "system", "content": SYSTEM_PROMPT},
                {"role": "user", "content": prompt}]
    responses = []
    try:
        answer = advisor.complete(messages, settings)
        responses.append(answer)
        choice = parse_policy(answer, candidates)
        if choice is not None:
            return PolicyChoice(choice, answer.strip(), True)
        messages = messages + [
            {"role": "assistant", "content": answer},
            {"role": "user", "content": "Your answer did not name exactly one candidate. "
                                        "Reply with exactly one of: "
                                        + ", ".join(k.value for k in candidates)},
        ]
        answer = advisor.complete(messages, settings)
        responses.append(answer)
        choice = parse_policy(answer, candidates)
        if choice is None:
            raise AdvisorAmbiguous(
                f"advisor did not name exactly one policy after clarification: {answer!r}")
        return PolicyChoice(choice, answer.strip(), False)
    finally:
        if audit is not None:
            audit.write(getattr(advisor, "name", "?"), "cache-policy", messages, responses)


_FENCE = re.compile(r"```(?:json)?\s*(.*?)```", re.DOTALL)


def _parse_plan_text(text: str) -> PolicyPlan:
    m = _FENCE.search(text)
    body = m.group(1) if m else text
    start, end = body.find("{"), body.rfind("}")
    if start < 0 or end < start:
        raise PlanError("no JSON object in advisor answer")
    return PolicyPlan.from_json(body[start:end + 1])


def _check_clients(plan: PolicyPlan, doc: SystemStateDoc):
    clients = set(doc.client_ids())
    known = clients | {"server"} | set(doc.server.links) \
        | set(doc.server.cache_segments.values())
    for a in plan:
        client = getattr(a, "client", None)
        if client is not None and client not in clients:
            raise UnknownClientError(f"plan references unknown client {client!r}")
        if a.kind in ("SetCachePolicy", "SetCacheSize", "SetReadAhead") \
                and a.subject not in known:
            raise UnknownClientError(f"plan references unknown target {a.subject!r}")


def advise_plan(advisor: Advisor, doc: SystemStateDoc, objective: Objective,
                knowledge: KnowledgeStore | None = None, k: int = 3,
                settings: GenerationSettings | None = None,
                audit: AuditLog | None = None) -> PolicyPlan:
    if not doc.clients:
        return PolicyPlan((), provenance={"advisor": getattr(advisor, "name", "?"),
                                          "doc": doc.digest()})
    docs: list[KnowledgeDoc] = []
    if knowledge is not None:
        query = " ".join([objective.goal_text] + [c.intent for c in doc.clients]
                         + [c.proc_name for c in doc.clients])
        docs = retrieve(knowledge, query, k)
    prompt = build_plan_prompt(doc, objective, docs)
    messages = [{"role": "system", "content": SYSTEM_PROMPT},
                {"role": "user", "content": prompt}]
    responses = []
    try:
        answer = advisor.complete(messages, settings)
        responses.append(answer)
        try:
            plan = _parse_plan_text(answer)
        except PlanError as exc:
            messages = messages + [
                {"role": "assistant", "content": answer},
                {"role": "user", "content": f"That answer could not be used ({exc}). "
                                            "Reply with only the JSON object."},
            ]
            answer = advisor.complete(messages, settings)
            responses.append(answer)
            try:
                plan = _parse_plan_text(answer)
            except PlanError as exc2:
                raise AdvisorAmbiguous(f"unusable plan after clarification: {exc2}") from exc2
    finally:
        if audit is not None:
            audit.write(getattr(advisor, "name", "?"), "plan", messages, responses)
    _check_clients(plan, doc)
    provenance = {"advisor": getattr(advisor, "name", "?"), "doc": doc.digest()}
    if docs:
        provenance["knowledge"] = ",".join(d.id for d in docs)
    return PolicyPlan(plan.actions, plan.plan_id or f"plan-{doc.digest()[:12]}", provenance)
