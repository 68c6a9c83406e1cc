import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import naive_arc_hits, naive_fifo_hits, naive_lfu_hits, naive_lru_hits

from idss.cachesim import (
    POLICY_ORDER,
    HyperparamError,
    PolicyKind,
    best_policy,
    capacity_for,
    make_engine,
    simulate,
    sweep,
    sweep_csv,
)
from idss.trace import AccessTrace, TraceError, gen_synthetic, trace_stats

ORACLES = {
    PolicyKind.LRU: naive_lru_hits,
    PolicyKind.FIFO: naive_fifo_hits,
    PolicyKind.LFU: naive_lfu_hits,
    PolicyKind.ARC: naive_arc_hits,
}

traces_st = st.lists(st.integers(0, 63), min_size=1, max_size=300)


def hits(blocks, kind, cap, **hp):
    return simulate(AccessTrace.from_blocks(blocks), kind, cap, hp).hits


@pytest.mark.parametrize("kind", list(ORACLES))
def test_matches_naive_oracle_on_random_traces(kind):
    rng = random.Random(2024)
    for _ in range(150):
        n = 1 + int(rng.random() * 400)
        u = 1 + int(rng.random() * 64)
        cap = 1 + int(rng.random() * 32)
        blocks = [int(rng.random() * u) for _ in range(n)]
        assert hits(blocks, kind, cap) == ORACLES[kind](blocks, cap), (blocks, cap)


def test_lru_example():
    assert hits([1, 2, 1, 3, 1], "LRU", 2) == 2


def test_fifo_example():
    # 1 stays in until 3 evicts it, so only the second access hits
    assert hits([1, 2, 1, 3, 1], "FIFO", 2) == 1


def test_single_block_repeated():
    rep = sweep(AccessTrace.from_blocks([1, 1, 1, 1]), 1)
    assert {rep.hit_rate(k) for k in POLICY_ORDER} == {0.75}


@pytest.mark.parametrize("kind", POLICY_ORDER)
def test_only_compulsory_misses(kind):
    assert hits([1, 2, 1, 2], kind, 2) == 2


def test_cyclic_trace_defeats_lru_and_fifo():
    c = gen_synthetic("C", seed=1)
    for kind in ("LRU", "FIFO"):
        assert simulate(c, kind, 10).hits == 0


@pytest.mark.parametrize("kind", POLICY_ORDER)
def test_capacity_covering_working_set(kind):
    for seed, k in [(1, "A"), (2, "B"), (3, "C")]:
        t = gen_synthetic(k, seed=seed)
        s = trace_stats(t)
        r = simulate(t, kind, s.unique_blocks)
        assert r.hit_rate == 1 - s.unique_blocks / s.length


@settings(max_examples=60, deadline=None)
@given(traces_st, st.integers(1, 40), st.sampled_from(POLICY_ORDER))
def test_engine_invariants(blocks, cap, kind):
    eng = make_engine(kind, cap)
    seen = set()
    h = 0
    for b in blocks:
        hit = eng.access(b)
        if b not in seen:
            assert not hit
        seen.add(b)
        h += hit
        res = eng.resident()
        assert len(res) <= cap
        assert b in res
    r = simulate(AccessTrace.from_blocks(blocks), kind, cap)
    assert r.hits == h and r.hits + r.misses == len(blocks)


@pytest.mark.parametrize("kind", POLICY_ORDER)
def test_deterministic(kind):
    t = gen_synthetic("B", seed=5)
    assert simulate(t, kind, 20) == simulate(t, kind, 20)


def test_goldens(traces, goldens):
    for name, t in traces.items():
        g = goldens[name]
        s = trace_stats(t)
        assert (s.length, s.unique_blocks) == (g["length"], g["unique"])
        cap = capacity_for(s, 0.001)
        assert cap == g["capacity"]
        rep = sweep(t, cap)
        assert {k.value: r.hits for k, r in rep.results.items()} == g["hits"]
        assert rep.best.value == g["best"]


def test_parallel_sweep_matches_serial():
    t = gen_synthetic("B", seed=3)
    assert sweep(t, 8, parallel=2).results == sweep(t, 8).results


def test_best_policy_ties_follow_order():
    rates = {k.value: 0.1 for k in POLICY_ORDER} | {"LRU": 0.4, "LFU": 0.6}
    assert best_policy(rates) == (PolicyKind.LFU, 0.6)
    assert best_policy({"FIFO": 0.5, "LFU": 0.5, "ARC": 0.4})[0] is PolicyKind.LFU
    assert best_policy({k: 0.0 for k in POLICY_ORDER})[0] is PolicyKind.LRU
    assert best_policy({"Cacheus": 0.3, "LRU": 0.2}) == (PolicyKind.Cacheus, 0.3)
    with pytest.raises(ValueError):
        best_policy({})


def test_capacity_for():
    assert capacity_for(10_000, 0.001) == 10
    assert capacity_for(100, 0.001) == 1
    assert capacity_for(2100, 0.001) == 2
    assert capacity_for(2061, 0.001) == 2
    with pytest.raises(ValueError):
        capacity_for(100, 0.0)


def test_policy_parse():
    assert PolicyKind.parse("lecar") is PolicyKind.LeCaR
    assert PolicyKind.parse(PolicyKind.ARC) is PolicyKind.ARC
    with pytest.raises(ValueError):
        PolicyKind.parse("MRU")


def test_unknown_hyperparam_rejected():
    with pytest.raises(HyperparamError, match="bogus"):
        make_engine("LRU", 4, bogus=1)
    # known ones are accepted
    assert hits([1, 2, 1], "LeCaR", 2, learning_rate=0.1, seed=3) == 1


def test_bad_capacity_and_empty_trace():
    with pytest.raises(ValueError):
        make_engine("ARC", 0)
    with pytest.raises(TraceError):
        simulate(AccessTrace(()), "LRU", 1)


def test_lecar_and_cacheus_seeded():
    t = gen_synthetic("A", seed=3)
    for kind in ("LeCaR", "Cacheus"):
        a = simulate(t, kind, 50, {"seed": 1})
        assert a == simulate(t, kind, 50, {"seed": 1})


def test_sweep_csv():
    t = AccessTrace.from_blocks([1, 2, 1, 3, 1], name="tiny")
    text = sweep_csv([sweep(t, 2)])
    lines = text.splitlines()
    assert lines[0] == "trace,policy,capacity,hits,misses,hit_rate"
    assert lines[1] == "tiny,LRU,2,2,3,0.4"
    assert len(lines) == 1 + len(POLICY_ORDER)
