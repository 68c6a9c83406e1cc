"""Client telemetry, workload profiles, and the organized system-state document."""

from __future__ import annotations

import hashlib
import json
import re
from collections import Counter
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping

from idss.trace import AccessTrace

DEFAULT_WHITELIST = frozenset(
    {"read_bps", "write_bps", "cache_hit_rate", "iops", "latency_p99"})
MIN_PREFIX = 10
CYCLE_PROBE = 64


class TelemetryError(ValueError):
    pass


@dataclass(frozen=True)
class ClientTelemetry:
    client_id: str
    proc_name: str = ""
    read_bps: float = 0.0
    write_bps: float = 0.0
    cache_hit_rate: float | None = None
    extra: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if not self.client_id:
            raise TelemetryError("client_id must be non-empty")
        if self.read_bps < 0 or self.write_bps < 0:
            raise TelemetryError("rates must be >= 0")
        if self.cache_hit_rate is not None and not 0 <= self.cache_hit_rate <= 1:
            raise TelemetryError("cache_hit_rate must be in [0, 1]")

    def metrics(self) -> dict[str, Any]:
        out = dict(self.extra)
        out["read_bps"] = self.read_bps
        out["write_bps"] = self.write_bps
        if self.cache_hit_rate is not None:
            out["cache_hit_rate"] = self.cache_hit_rate
        return out


@dataclass(frozen=True)
class WorkloadProfile:
    skew: float
    sequentiality: float
    cyclicity: bool
    novelty: float
    prefix_len: int

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: Mapping) -> "WorkloadProfile":
        return cls(float(d["skew"]), float(d["sequentiality"]), bool(d["cyclicity"]),
                   float(d["novelty"]), int(d["prefix_len"]))


@dataclass(frozen=True)
class ServerState:
    tiers: tuple = ()
    cache: Mapping[str, Any] = field(default_factory=dict)
    links: Mapping[str, float] = field(default_factory=dict)
    cache_segments: Mapping[str, str] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"tiers": list(self.tiers), "cache": dict(self.cache),
                "links": dict(self.links), "cache_segments": dict(self.cache_segments)}

    @classmethod
    def from_dict(cls, d: Mapping) -> "ServerState":
        return cls(tuple(d.get("tiers", ())), dict(d.get("cache", {})),
                   {k: float(v) for k, v in d.get("links", {}).items()},
                   dict(d.get("cache_segments", {})))


@dataclass(frozen=True)
class ClientEntry:
    client_id: str
    profile: WorkloadProfile
    telemetry: Mapping[str, Any]
    intent: str
    proc_name: str = ""


@dataclass(frozen=True)
class SystemStateDoc:
    clients: tuple[ClientEntry, ...]
    server: ServerState
    constraints: Mapping[str, Any]

    def client_ids(self) -> list[str]:
        return [c.client_id for c in self.clients]

    def to_dict(self) -> dict:
        return {
            "clients": [
                {"client_id": c.client_id, "proc_name": c.proc_name,
                 "profile": c.profile.to_dict(), "telemetry": dict(c.telemetry),
                 "intent": c.intent}
                for c in self.clients
            ],
            "server": self.server.to_dict(),
            "constraints": dict(self.constraints),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "SystemStateDoc":
        clients = tuple(
            ClientEntry(c["client_id"], WorkloadProfile.from_dict(c["profile"]),
                        dict(c["telemetry"]), c["intent"], c.get("proc_name", ""))
            for c in d["clients"])
        return cls(clients, ServerState.from_dict(d["server"]),
                   dict(d.get("constraints", {})))

    def to_json(self) -> str:
        return canonical_json(self.to_dict())

    def digest(self) -> str:
        return hashlib.sha256(self.to_json().encode("utf-8")).hexdigest()


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False,
                      separators=(",", ":")) + "\n"


# -- parsing ------------------------------------------------------------------

_SUFFIX = {"": 1, "b": 1, "k": 1024, "m": 1024**2, "g": 1024**3,
           "kb": 1e3, "mb": 1e6, "gb": 1e9,
           "kib": 1024, "mib": 1024**2, "gib": 1024**3}
_RATE = re.compile(r"^\s*([0-9.eE+-]+)\s*([a-zA-Z]*)(?:/s)?\s*$")


def parse_rate(text: str) -> float:
    """Parse ``2000000``, ``100 MB/s``, or iotop-style ``12.5 M/s``.

    Bare K/M/G suffixes are binary (as iotop prints them); KB/MB/GB are
    decimal.
    """
    m = _RATE.match(str(text))
    if not m or m.group(2).lower() not in _SUFFIX:
        raise TelemetryError(f"cannot parse rate {text!r}")
    return float(m.group(1)) * _SUFFIX[m.group(2).lower()]


_MANDATORY = ("client_id", "read_bps", "write_bps")


def _build(fields: dict[str, str]) -> ClientTelemetry:
    for key in _MANDATORY:
        if key not in fields:
            raise TelemetryError(f"missing mandatory telemetry key: {key}")
    fields = dict(fields)
    client_id = fields.pop("client_id")
    proc = fields.pop("proc", fields.pop("proc_name", ""))
    read_bps = parse_rate(fields.pop("read_bps"))
    write_bps = parse_rate(fields.pop("write_bps"))
    hr = fields.pop("cache_hit_rate", None)
    extra: dict[str, Any] = {}
    for k, v in fields.items():
        try:
            extra[k] = float(v)
        except ValueError:
            extra[k] = v
    return ClientTelemetry(client_id, proc, read_bps, write_bps,
                           None if hr is None else float(hr), extra)


def parse_telemetry(text: str, fmt: str = "fixture",
                    columns: Mapping[str, int] | None = None,
                    delimiter: str | None = None,
                    skip_header: bool = True,
                    client_id: str | None = None) -> ClientTelemetry:
    """Parse one client's telemetry.

    ``fixture``: ``key=value`` lines, ``#`` comments allowed.
    ``column-mapped``: a table (e.g. captured iotop output); ``columns`` maps
    field names to column indices and the first data row is used.
    """
    if fmt == "fixture":
        fields: dict[str, str] = {}
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise TelemetryError(f"line {lineno}: expected key=value")
            k, v = line.split("=", 1)
            fields[k.strip()] = v.strip()
        if client_id is not None:
            fields.setdefault("client_id", client_id)
        return _build(fields)
    if fmt == "column-mapped":
        rows = parse_telemetry_table(text, columns or {}, delimiter, skip_header,
                                     client_id)
        if not rows:
            raise TelemetryError("no data rows in telemetry table")
        return rows[0]
    raise TelemetryError(f"unknown telemetry format {fmt!r}")


def parse_telemetry_table(text: str, columns: Mapping[str, int],
                          delimiter: str | None = None, skip_header: bool = True,
                          client_id: str | None = None) -> list[ClientTelemetry]:
    out = []
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if skip_header:
        lines = lines[1:]
    for line in lines:
        cols = line.split(delimiter) if delimiter else line.split()
        # iotop prints "12.50 M/s" as two tokens when split on whitespace
        cols = _merge_units(cols) if delimiter is None else [c.strip() for c in cols]
        fields = {}
        for name, idx in columns.items():
            if idx >= len(cols):
                raise TelemetryError(f"column {idx} ({name}) missing in row {line!r}")
            fields[name] = cols[idx]
        if client_id is not None:
            fields.setdefault("client_id", client_id)
        out.append(_build(fields))
    return out


def _merge_units(tokens: list[str]) -> list[str]:
    merged: list[str] = []
    for tok in tokens:
        if merged and re.fullmatch(r"[KMGkmg]?i?B?/s", tok):
            merged[-1] = f"{merged[-1]} {tok}"
        else:
            merged.append(tok)
    return merged


def load_telemetry(path: str | Path) -> ClientTelemetry:
    return parse_telemetry(Path(path).read_text(encoding="utf-8"))


# -- profiles -----------------------------------------------------------------

def _is_cyclic(blocks: list[int]) -> bool:
    first = blocks[0]
    try:
        period = blocks.index(first, 1)
    except ValueError:
        return False
    m = min(CYCLE_PROBE, period)
    if period + m > len(blocks):
        return False
    return blocks[period:period + m] == blocks[:m]


def extract_profile(prefix: AccessTrace) -> WorkloadProfile:
    """Summarise a trace prefix.

    skew: share of accesses that land on blocks referenced more than once.
    sequentiality: share of consecutive pairs whose block delta is +1.
    cyclicity: the first block recurs and the following min(64, period)
    blocks repeat the opening order.
    novelty: distinct blocks over length.
    """
    blocks = prefix.blocks
    n = len(blocks)
    if n < MIN_PREFIX:
        raise TelemetryError(f"prefix too short: {n} < {MIN_PREFIX}")
    counts = Counter(blocks)
    reused = sum(c for c in counts.values() if c > 1)
    seq = sum(1 for a, b in zip(blocks, blocks[1:]) if b - a == 1)
    return WorkloadProfile(
        skew=reused / n,
        sequentiality=seq / (n - 1),
        cyclicity=_is_cyclic(blocks),
        novelty=len(counts) / n,
        prefix_len=n,
    )


# -- organization ---------------------------------------------------------------

def load_whitelist(path: str | Path | None) -> frozenset[str]:
    if path is None:
        return DEFAULT_WHITELIST
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return frozenset(str(k) for k in data)


def organize(clients: Iterable[tuple[ClientTelemetry, WorkloadProfile, str]],
             server: ServerState, constraints: Mapping[str, Any] | None = None,
             whitelist: Iterable[str] = DEFAULT_WHITELIST) -> SystemStateDoc:
    allowed = frozenset(whitelist)
    entries: dict[str, ClientEntry] = {}
    for telem, profile, intent in clients:
        if telem.client_id in entries:
            raise TelemetryError(f"duplicate client id {telem.client_id!r}")
        kept = {k: v for k, v in telem.metrics().items() if k in allowed}
        entries[telem.client_id] = ClientEntry(
            telem.client_id, profile, kept, intent, telem.proc_name)
    ordered = tuple(entries[k] for k in sorted(entries))
    return SystemStateDoc(ordered, server, dict(constraints or {}))
