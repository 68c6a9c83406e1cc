import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from planfactory import random_plan

from idss.cachesim import PolicyKind
from idss.policyir import (
    CapBandwidth,
    DisableServerCache,
    GuardrailError,
    PlanError,
    PolicyPlan,
    ReserveBandwidth,
    SetCachePolicy,
    SetFsParam,
    SetIOScheduler,
    SetQoSClass,
    SetReadAhead,
    load_guardrails,
    parse_guardrails,
    to_base_units,
    validate,
)
from idss.policyir.translate import UnsupportedAction, parse_commands, translate

MB = 1e6


def rails(*objs):
    return parse_guardrails(json.dumps(list(objs)))


def cap(gid, value, unit="MB/s", actions=("SetQoSClass",), **sel):
    return {"id": gid, "kind": "cap", "selector": {"actions": list(actions), **sel},
            "limit": {"value": value, "unit": unit}}


# -- actions and plans ----------------------------------------------------------------

def test_plan_json_round_trip_and_digest():
    p = PolicyPlan((SetCachePolicy("c0", "lfu"), SetQoSClass("video", 5e8)), "p1",
                   {"advisor": "mock"})
    assert p.actions[0].policy is PolicyKind.LFU
    text = p.to_json()
    assert text.endswith("\n") and " " not in text
    q = PolicyPlan.from_json(text)
    assert q == p and q.digest() == p.digest()


def test_plan_rejects_conflicts_and_bad_fields():
    with pytest.raises(PlanError, match="twice"):
        PolicyPlan((SetReadAhead("d", 1), SetReadAhead("d", 2)))
    with pytest.raises(PlanError):
        SetReadAhead("d", -1)
    with pytest.raises(PlanError):
        CapBandwidth("", 1, "nic0")
    with pytest.raises(PlanError, match="unknown action"):
        PolicyPlan.from_dict({"actions": [{"action": "Reboot"}]})
    with pytest.raises(PlanError, match="unexpected field"):
        PolicyPlan.from_dict({"actions": [{"action": "DisableServerCache",
                                           "segment": "s", "force": True}]})
    with pytest.raises(PlanError):
        PolicyPlan.from_json("{not json")


def test_action_accessors():
    r = ReserveBandwidth("ckpt", 1.2e9, "nic0")
    assert (r.subject, r.link_id, r.quantity) == ("ckpt", "nic0", 1.2e9)
    assert SetIOScheduler("dev0", "deadline").setting == "deadline"
    assert SetFsParam("commit", 30).value == "30"


# -- guardrails ------------------------------------------------------------------------

def test_units():
    assert to_base_units(100, "MB/s") == 100e6
    assert to_base_units(4, "KiB") == 4096
    assert to_base_units(1.5, "GB") == 1.5e9
    with pytest.raises(GuardrailError):
        to_base_units(1, "furlongs")


def test_nic_cap_rejects_video_qos(fixtures_dir):
    g = load_guardrails(fixtures_dir / "guardrails_nic.json")
    res = validate(PolicyPlan((SetQoSClass("video", 500 * MB),)), g)
    assert not res.accepted
    (v,) = res.violations
    assert v.guardrail == "nic-cap" and v.message.startswith("nic-cap")
    assert validate(PolicyPlan((SetQoSClass("video", 500 * MB),)), []).accepted


def test_empty_plan_always_accepted(fixtures_dir):
    g = load_guardrails(fixtures_dir / "guardrails_nic.json")
    assert validate(PolicyPlan(), g).accepted


def test_aggregate_cap_over_link():
    g = rails({"id": "agg", "kind": "aggregate_cap",
               "selector": {"actions": ["ReserveBandwidth"], "link": "nic0"},
               "limit": {"value": 100, "unit": "MB/s"}})
    two = PolicyPlan((ReserveBandwidth("a", 60 * MB, "nic0"),
                      ReserveBandwidth("b", 60 * MB, "nic0")))
    res = validate(two, g)
    assert not res.accepted
    assert res.violations[0].action.client == "b"
    assert "agg" in res.violations[0].message
    split = PolicyPlan((ReserveBandwidth("a", 60 * MB, "nic0"),
                        ReserveBandwidth("b", 60 * MB, "nic1")))
    assert validate(split, g).accepted


def test_floor_allowed_set_immutable():
    g = rails(
        {"id": "ra-min", "kind": "floor", "selector": {"actions": ["SetReadAhead"]},
         "limit": {"value": 128, "unit": "KiB"}},
        {"id": "sched", "kind": "allowed_set", "selector": {"actions": ["SetIOScheduler"]},
         "limit": {"values": ["deadline", "mq-deadline"]}},
        {"id": "no-fs", "kind": "immutable", "selector": {"actions": ["SetFsParam"]}},
    )
    ok = PolicyPlan((SetReadAhead("dev0", 262144), SetIOScheduler("dev0", "deadline")))
    assert validate(ok, g).accepted
    bad = PolicyPlan((SetReadAhead("dev0", 4096), SetIOScheduler("dev0", "cfq"),
                      SetFsParam("barrier", "0")))
    assert [v.guardrail for v in validate(bad, g).violations] == ["ra-min", "sched", "no-fs"]


def test_selector_target_glob_and_field():
    g = rails(cap("vid", 200, target="video*"),
              {"id": "iops", "kind": "cap", "selector": {"actions": ["SetQoSClass"],
                                                         "field": "max_iops"},
               "limit": {"value": 1000, "unit": "iops"}})
    plan = PolicyPlan((SetQoSClass("backup", 500 * MB, 50),
                       SetQoSClass("video-hd", 100 * MB, 5000)))
    assert [v.guardrail for v in validate(plan, g).violations] == ["iops"]


@pytest.mark.parametrize("bad", [
    "{}",
    "[1]",
    '[{"id": "x", "kind": "ceiling"}]',
    '[{"id": "x", "kind": "cap"}]',
    '[{"id": "x", "kind": "cap", "limit": {"value": "100"}}]',
    '[{"id": "x", "kind": "cap", "limit": {"value": 1, "unit": "parsecs"}}]',
    '[{"id": "x", "kind": "allowed_set", "limit": {"values": []}}]',
    '[{"id": "x", "kind": "immutable", "limit": {"value": 1}}]',
    '[{"id": "x", "kind": "immutable", "selector": {"actions": ["Reboot"]}}]',
    '[{"id": "x", "kind": "immutable"}, {"id": "x", "kind": "immutable"}]',
    "not json",
])
def test_malformed_guardrails(bad):
    with pytest.raises(GuardrailError):
        parse_guardrails(bad)


RAIL_POOL = [
    cap("q", 300, actions=["SetQoSClass", "CapBandwidth", "ReserveBandwidth"]),
    cap("c1", 1, unit="GB/s", actions=["CapBandwidth"], target="c1"),
    {"id": "agg", "kind": "aggregate_cap", "selector": {"actions": ["ReserveBandwidth"]},
     "limit": {"value": 1.5, "unit": "GB/s"}},
    {"id": "ra", "kind": "floor", "selector": {"actions": ["SetReadAhead"]},
     "limit": {"value": 64, "unit": "KiB"}},
    {"id": "sch", "kind": "allowed_set", "selector": {"actions": ["SetIOScheduler"]},
     "limit": {"values": ["deadline"]}},
    {"id": "seg", "kind": "immutable", "selector": {"actions": ["DisableServerCache"],
                                                    "target": "seg-*"}},
]


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sets(st.integers(0, len(RAIL_POOL) - 1)),
       st.integers(0, len(RAIL_POOL) - 1))
def test_validator_monotonicity(seed, subset, extra):
    plan = random_plan(random.Random(seed))
    base = rails(*(RAIL_POOL[i] for i in sorted(subset)))
    more = rails(*(RAIL_POOL[i] for i in sorted(subset | {extra})))
    if validate(plan, more).accepted:
        assert validate(plan, base).accepted
    if not validate(plan, base).accepted:
        assert not validate(plan, more).accepted


# -- translation ------------------------------------------------------------------------

def test_linux_readahead_sectors():
    s = translate(PolicyPlan((SetReadAhead("dev0", 262144),)), "linux-dryrun")
    assert s.commands == ("blockdev --setra 512 dev0",)
    assert s.render().startswith("# DRY-RUN")
    assert s.executable is False


def test_linux_scheduler():
    s = translate(PolicyPlan((SetIOScheduler("dev0", "deadline"),)), "linux-dryrun")
    assert s.commands == ("echo deadline > /sys/block/dev0/queue/scheduler",)


def test_linux_unsupported_action_named():
    with pytest.raises(UnsupportedAction, match="DisableServerCache.*linux-dryrun"):
        translate(PolicyPlan((DisableServerCache("seg"),)), "linux-dryrun")
    with pytest.raises(PlanError):
        translate(PolicyPlan(), "solaris")


def test_vendor_qos_record():
    s = translate(PolicyPlan((SetQoSClass("video", 500_000_000),)), "mockvendor")
    assert s.commands == ({"op": "qos.create", "name": "video", "max_bw": 500_000_000,
                           "max_iops": None},)


def test_parse_hand_written_record_and_empty():
    plan = parse_commands('[{"op": "qos.create", "name": "video", "max_bw": 5e8}]')
    assert plan.actions == (SetQoSClass("video", 5e8),)
    assert parse_commands("").actions == ()
    assert parse_commands([]).actions == ()
    with pytest.raises(PlanError, match="unknown op"):
        parse_commands([{"op": "qos.delete", "name": "video"}])
    with pytest.raises(PlanError):
        parse_commands([{"op": "bw.cap", "client": "a"}])
    with pytest.raises(PlanError):
        parse_commands([], backend="linux-dryrun")


def test_round_trip_random_plans():
    rng = random.Random(99)
    for _ in range(100):
        plan = random_plan(rng)
        script = translate(plan, "mockvendor")
        assert parse_commands(script) == plan
        assert parse_commands(script.render()) == plan


def test_translate_is_deterministic_and_violations_are_single():
    rng = random.Random(3)
    g = rails(*RAIL_POOL)
    for _ in range(50):
        plan = random_plan(rng)
        assert translate(plan).render() == translate(PolicyPlan.from_json(plan.to_json())).render()
        for v in validate(plan, g).violations:
            ids = [r["id"] for r in RAIL_POOL if r["id"] in v.message.split(":")[0]]
            assert ids == [v.guardrail]
            assert v.action in plan.actions
