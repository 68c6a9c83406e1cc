"""Seeded generator of random valid plans, shared by property tests."""

from idss.cachesim import POLICY_ORDER
from idss.policyir import (
    CapBandwidth,
    DisableServerCache,
    PolicyPlan,
    ReserveBandwidth,
    SetCachePolicy,
    SetCacheSize,
    SetFsParam,
    SetIOScheduler,
    SetQoSClass,
    SetReadAhead,
)

NAMES = ["c0", "c1", "c2", "dev0", "video", "seg-a"]
LINKS = ["nic0", "nic1"]


def _pick(rng, seq):
    return seq[int(rng.random() * len(seq))]


def _rate(rng):
    # mix of integral and fractional byte rates
    return _pick(rng, [int(rng.random() * 2e9), rng.random() * 2e9, 0])


def random_action(rng):
    n = _pick(rng, NAMES)
    makers = [
        lambda: SetCachePolicy(n, _pick(rng, POLICY_ORDER)),
        lambda: SetCacheSize(n, int(rng.random() * 2**34)),
        lambda: SetReadAhead(n, 512 * int(rng.random() * 4096)),
        lambda: ReserveBandwidth(n, _rate(rng), _pick(rng, LINKS)),
        lambda: CapBandwidth(n, _rate(rng), _pick(rng, LINKS)),
        lambda: SetIOScheduler(n, _pick(rng, ["deadline", "cfq", "mq-deadline", "none"])),
        lambda: SetQoSClass(n, _rate(rng), _pick(rng, [None, int(rng.random() * 1e5)])),
        lambda: DisableServerCache(n),
        lambda: SetFsParam(_pick(rng, ["noatime", "commit", "barrier"]), str(int(rng.random() * 60))),
    ]
    return _pick(rng, makers)()


def random_plan(rng, max_len=12):
    actions, seen = [], set()
    for _ in range(int(rng.random() * (max_len + 1))):
        a = random_action(rng)
        if (a.kind, a.subject) not in seen:
            seen.add((a.kind, a.subject))
            actions.append(a)
    return PolicyPlan(tuple(actions))
