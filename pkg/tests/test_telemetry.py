import json

import pytest

from idss.telemetry import (
    ClientTelemetry,
    ServerState,
    SystemStateDoc,
    TelemetryError,
    WorkloadProfile,
    extract_profile,
    load_telemetry,
    load_whitelist,
    organize,
    parse_rate,
    parse_telemetry,
    parse_telemetry_table,
)
from idss.trace import AccessTrace, gen_synthetic, prefix


def test_parse_fixture_example():
    t = parse_telemetry("client_id=A\nproc=mysqld\nread_bps=2000000\nwrite_bps=8000000")
    assert (t.client_id, t.proc_name, t.read_bps, t.write_bps) == ("A", "mysqld", 2e6, 8e6)
    assert t.cache_hit_rate is None


def test_streaming_and_checkpoint_fixtures(fixtures_dir):
    s = load_telemetry(fixtures_dir / "streaming.telem")
    assert s.read_bps == 100e6
    assert s.cache_hit_rate == 0.42
    c = load_telemetry(fixtures_dir / "checkpoint.telem")
    assert c.write_bps == 1.5e9


def test_missing_mandatory_key_named():
    for key in ("client_id", "read_bps", "write_bps"):
        fields = {"client_id": "x", "read_bps": "1", "write_bps": "2"}
        del fields[key]
        text = "\n".join(f"{k}={v}" for k, v in fields.items())
        with pytest.raises(TelemetryError, match=f"missing mandatory telemetry key: {key}"):
            parse_telemetry(text)


def test_fixture_comments_and_extras():
    t = parse_telemetry("# captured\nclient_id=z\nread_bps=1\nwrite_bps=0\niops=120\nnote=hot\n")
    assert t.extra == {"iops": 120.0, "note": "hot"}
    with pytest.raises(TelemetryError, match="line 1"):
        parse_telemetry("garbage")


def test_parse_rate_units():
    assert parse_rate("100 MB/s") == 100e6
    assert parse_rate("1.5GB/s") == 1.5e9
    assert parse_rate("12 M/s") == 12 * 1024**2
    assert parse_rate("4KiB") == 4096
    assert parse_rate("7") == 7.0
    with pytest.raises(TelemetryError):
        parse_rate("fast")


def test_column_mapped_iotop_table():
    text = (
        "  TID  PRIO  USER  DISK READ  DISK WRITE  COMMAND\n"
        " 4242 be/4 mysql 1.00 M/s 8.00 M/s mysqld\n"
        " 4243 be/4 root 0.00 B/s 0.00 B/s kworker\n"
    )
    cols = {"client_id": 0, "read_bps": 3, "write_bps": 4, "proc": 5}
    t = parse_telemetry(text, "column-mapped", columns=cols)
    assert (t.client_id, t.proc_name) == ("4242", "mysqld")
    assert t.read_bps == 1024**2 and t.write_bps == 8 * 1024**2
    rows = parse_telemetry_table(text, cols)
    assert [r.client_id for r in rows] == ["4242", "4243"]
    with pytest.raises(TelemetryError, match="client_id"):
        parse_telemetry(text, "column-mapped", columns={"read_bps": 3, "write_bps": 4})


def test_column_mapped_delimited():
    text = "id,rd,wr\ndb,2000000,8000000\n"
    t = parse_telemetry(text, "column-mapped", columns={"client_id": 0, "read_bps": 1,
                                                          "write_bps": 2}, delimiter=",")
    assert (t.client_id, t.read_bps, t.write_bps) == ("db", 2e6, 8e6)


def test_telemetry_invariants():
    with pytest.raises(TelemetryError):
        ClientTelemetry("", read_bps=1)
    with pytest.raises(TelemetryError):
        ClientTelemetry("x", read_bps=-1)
    with pytest.raises(TelemetryError):
        ClientTelemetry("x", cache_hit_rate=1.5)


def test_profile_of_cyclic_prefix():
    p = extract_profile(prefix(gen_synthetic("C", seed=1), 400))
    assert p.sequentiality >= 0.99
    assert p.cyclicity is False
    assert p.prefix_len == 400


def test_profile_detects_full_cycle():
    t = AccessTrace.from_blocks(list(range(50)) * 3)
    assert extract_profile(t).cyclicity is True


def test_profile_of_skewed_prefix():
    p = extract_profile(prefix(gen_synthetic("B", seed=3), 400))
    assert p.skew >= 0.7


def test_profile_of_increasing_blocks():
    p = extract_profile(AccessTrace.from_blocks(list(range(400))))
    assert (p.sequentiality, p.novelty, p.skew) == (1.0, 1.0, 0.0)


def test_profile_uses_only_the_prefix():
    full = gen_synthetic("B", seed=3)
    head = prefix(full, 400)
    tail_changed = AccessTrace.from_blocks(head.blocks + [999_999] * 600)
    assert extract_profile(head) == extract_profile(prefix(tail_changed, 400))


def test_profile_too_short():
    with pytest.raises(TelemetryError, match="too short"):
        extract_profile(AccessTrace.from_blocks([1, 2, 3]))


PROFILE = WorkloadProfile(0.1, 0.5, False, 0.9, 400)
SERVER = ServerState(("ssd", "hdd"), {"size": 1 << 30}, {"nic0": 1.5e9}, {"b": "seg-b"})


def test_organize_is_deterministic():
    a = ClientTelemetry("b", "x", 1, 2)
    b = ClientTelemetry("a", "y", 3, 4)
    d1 = organize([(a, PROFILE, "ia"), (b, PROFILE, "ib")], SERVER)
    d2 = organize([(b, PROFILE, "ib"), (a, PROFILE, "ia")], SERVER)
    assert d1.client_ids() == ["a", "b"]
    assert d1.to_json() == d2.to_json()
    assert d1.to_json().endswith("\n")
    assert d1.digest() == d2.digest()
    assert SystemStateDoc.from_dict(d1.to_dict()) == d1


def test_organize_whitelist_filtering(tmp_path):
    t = ClientTelemetry("a", read_bps=1, extra={"iops": 9, "secret_env": "x"})
    doc = organize([(t, PROFILE, "")], SERVER)
    assert doc.clients[0].telemetry == {"read_bps": 1, "write_bps": 0.0, "iops": 9}
    wl = tmp_path / "wl.json"
    wl.write_text('["read_bps"]')
    doc = organize([(t, PROFILE, "")], SERVER, whitelist=load_whitelist(wl))
    assert doc.clients[0].telemetry == {"read_bps": 1}


def test_organize_duplicate_id():
    t = ClientTelemetry("a")
    with pytest.raises(TelemetryError, match="duplicate"):
        organize([(t, PROFILE, ""), (t, PROFILE, "")], SERVER)


def test_three_client_scenario_intents(fixtures_dir):
    intents = {
        "oltp": "keep p99 latency under 5 ms for the order database",
        "stream": "sustain 100 MB/s video reads without stalls",
        "ckpt": "absorb bursty checkpoint writes peaking at 1.5 GB/s",
    }
    items = [(load_telemetry(fixtures_dir / f"{n}.telem"), PROFILE, intents[i])
             for n, i in [("oltp", "oltp"), ("streaming", "stream"), ("checkpoint", "ckpt")]]
    doc = organize(items, SERVER, {"max_stream_bps": 4e8})
    assert {c.client_id: c.intent for c in doc.clients} == intents
    again = SystemStateDoc.from_dict(json.loads(doc.to_json()))
    assert again.to_json() == doc.to_json()
