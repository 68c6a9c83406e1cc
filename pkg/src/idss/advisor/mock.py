"""Deterministic rule-table advisor used in place of a language model.

It answers the same prompts as the live advisor, reading back the PROFILE or
SYSTEM STATE sections, so both go through the same parsing path.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from idss.advisor.prompts import (
    CANDIDATES_MARK,
    PROFILE_MARK,
    STATE_MARK,
    section,
)
from idss.cachesim.policies import POLICY_ORDER, PolicyKind
from idss.telemetry import SystemStateDoc, WorkloadProfile

READ_AHEAD_BYTES = 256 * 1024


@dataclass(frozen=True)
class MockAdvisor:
    # Cache policy rules, checked in order.
    skew_lfu: float = 0.5
    novelty_arc: float = 0.9
    # Plan rules.
    burst_write_bps: float = 500e6
    reserve_fraction: float = 0.8
    sequential_min: float = 0.9
    client_hit_rate_max: float = 0.9
    name: str = "mock"

    def choose_policy(self, profile: WorkloadProfile) -> PolicyKind:
        if profile.cyclicity or profile.skew >= self.skew_lfu:
            return PolicyKind.LFU
        if profile.novelty >= self.novelty_arc:
            return PolicyKind.ARC
        return PolicyKind.LeCaR

    def complete(self, messages: list[dict], settings=None) -> str:
        prompt = messages[-1]["content"]
        # A clarification turn re-sends the original prompt first.
        original = next((m["content"] for m in messages if m["role"] == "user"), prompt)
        state = section(original, STATE_MARK)
        if state is not None:
            return json.dumps({"actions": self.plan_actions(
                SystemStateDoc.from_dict(json.loads(state)))}, sort_keys=True)
        profile = section(original, PROFILE_MARK)
        if profile is None:
            return "I cannot tell what is being asked."
        choice = self.choose_policy(WorkloadProfile.from_dict(json.loads(profile)))
        cands = section(original, CANDIDATES_MARK) or ""
        allowed = [PolicyKind.parse(c) for c in cands.split(",") if c.strip()]
        if allowed and choice not in allowed:
            choice = next(k for k in POLICY_ORDER if k in allowed)
        return choice.value

    def plan_actions(self, doc: SystemStateDoc) -> list[dict]:
        actions: list[dict] = []
        links = doc.server.links
        link = doc.constraints.get("link") or (sorted(links)[0] if links else "nic0")
        reserved = 0.0
        for c in doc.clients:
            actions.append({"action": "SetCachePolicy", "target": c.client_id,
                            "policy": self.choose_policy(c.profile).value})
        for c in doc.clients:
            w = float(c.telemetry.get("write_bps", 0.0))
            r = float(c.telemetry.get("read_bps", 0.0))
            if w >= self.burst_write_bps and w > r:
                bps = self.reserve_fraction * w
                reserved += bps
                actions.append({"action": "ReserveBandwidth", "client": c.client_id,
                                "bps": bps, "link": link})
        for c in doc.clients:
            w = float(c.telemetry.get("write_bps", 0.0))
            r = float(c.telemetry.get("read_bps", 0.0))
            streaming = r >= w and c.profile.sequentiality >= self.sequential_min
            if streaming and reserved > 0:
                budget = max(0.0, float(links.get(link, 0.0)) - reserved)
                bound = doc.constraints.get("max_stream_bps")
                if bound is not None:
                    budget = min(budget, float(bound))
                actions.append({"action": "CapBandwidth", "client": c.client_id,
                                "bps": budget, "link": link})
            if streaming:
                actions.append({"action": "SetReadAhead", "target": c.client_id,
                                "bytes": READ_AHEAD_BYTES})
        for c in doc.clients:
            hr = c.telemetry.get("cache_hit_rate")
            if hr is not None and float(hr) > self.client_hit_rate_max:
                seg = doc.server.cache_segments.get(c.client_id, c.client_id)
                actions.append({"action": "DisableServerCache", "segment": seg})
        return actions
