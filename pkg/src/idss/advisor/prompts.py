"""Prompt templates.  Section markers are parsed back by the mock advisor."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from idss.advisor.knowledge import KnowledgeDoc
from idss.cachesim.policies import PolicyKind
from idss.policyir.actions import ACTION_TYPES
from idss.telemetry import SystemStateDoc, WorkloadProfile, canonical_json
from idss.trace import AccessTrace

SYSTEM_PROMPT = (
    "You are a storage configuration advisor. Follow the stated objective, "
    "respect every hard constraint, and answer only in the requested format."
)

CANDIDATES_MARK = "CANDIDATES: "
PROFILE_MARK = "PROFILE: "
STATE_MARK = "SYSTEM STATE: "
POLICY_FORMAT = "Answer with exactly one policy name from CANDIDATES."
PLAN_FORMAT = ('Respond with only a JSON object {"actions": [...]}; each action is '
               'an object with an "action" field naming one of ACTIONS.')


@dataclass(frozen=True)
class Objective:
    goal_text: str = "maximize aggregate cache hit rate"
    priorities: Mapping[str, str] = field(default_factory=dict)
    constraints: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.goal_text.strip():
            raise ValueError("objective goal_text must be non-empty")

    @classmethod
    def from_dict(cls, d: Mapping) -> "Objective":
        return cls(d.get("goal_text", cls.goal_text), dict(d.get("priorities", {})),
                   tuple(d.get("constraints", ())))

    def render(self) -> list[str]:
        out = [f"OBJECTIVE: {self.goal_text}"]
        for client, prio in sorted(self.priorities.items()):
            out.append(f"PRIORITY {client}: {prio}")
        if self.constraints:
            out.append("HARD CONSTRAINTS: " + ", ".join(self.constraints))
        return out


def build_policy_prompt(profile: WorkloadProfile, raw_prefix: AccessTrace,
                        candidates: Sequence[PolicyKind | str],
                        objective: Objective | None = None) -> str:
    if not candidates:
        raise ValueError("candidate list is empty")
    names = [PolicyKind.parse(c).value for c in candidates]
    objective = objective or Objective()
    lines = [
        *objective.render(),
        "TASK: select the cache replacement policy for this workload.",
        CANDIDATES_MARK + ", ".join(names),
        PROFILE_MARK + json.dumps(profile.to_dict(), sort_keys=True),
        f"PREFIX ({len(raw_prefix)} block ids): " + " ".join(map(str, raw_prefix.blocks)),
        POLICY_FORMAT,
    ]
    return "\n".join(lines) + "\n"


def build_plan_prompt(doc: SystemStateDoc, objective: Objective,
                      knowledge: Iterable[KnowledgeDoc] = ()) -> str:
    lines = [
        *objective.render(),
        "TASK: propose a configuration plan for the clients and the storage server.",
        STATE_MARK + canonical_json(doc.to_dict()).rstrip("\n"),
        "ACTIONS: " + ", ".join(ACTION_TYPES),
        "Units: bytes and bytes per second.",
    ]
    docs = list(knowledge)
    if docs:
        lines.append("KNOWLEDGE:")
        lines += [f"[{d.id}] ({d.source}) {' '.join(d.body.split())}" for d in docs]
    lines.append(PLAN_FORMAT)
    return "\n".join(lines) + "\n"


def section(prompt: str, mark: str) -> str | None:
    for line in prompt.splitlines():
        if line.startswith(mark):
            return line[len(mark):]
    return None
