"""Block access traces: data model, synthetic generators, file ingestion.

Synthetic traces use Python's ``random.Random`` (Mersenne Twister MT19937)
seeded with the caller's integer.  Only ``Random.random()`` is consumed and
integers are derived as ``floor(random() * n)``; CPython guarantees the
``random()`` stream is stable across versions and platforms, so generated
traces are byte-identical everywhere.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import random
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Literal, Sequence, Union

logger = logging.getLogger(__name__)

Op = Literal["read", "write"]
Kind = Literal["A", "B", "C", "D"]

ORIGINS = ("synthetic-A", "synthetic-B", "synthetic-C", "synthetic-D", "file")


class TraceError(ValueError):
    """Raised for invalid generator parameters, empty traces, bad files."""


@dataclass(frozen=True, slots=True)
class Request:
    seq: int
    block: int
    op: Op = "read"
    size_blocks: int = 1

    def __post_init__(self):
        if self.block < 0:
            raise TraceError(f"block must be >= 0, got {self.block}")
        if self.size_blocks < 1:
            raise TraceError(f"size_blocks must be >= 1, got {self.size_blocks}")
        if self.op not in ("read", "write"):
            raise TraceError(f"op must be read or write, got {self.op!r}")


@dataclass(frozen=True)
class AccessTrace:
    requests: tuple[Request, ...]
    origin: str = "file"
    seed: int | None = None
    name: str = ""

    def __post_init__(self):
        if self.origin not in ORIGINS:
            raise TraceError(f"unknown origin {self.origin!r}")
        prev = -1
        for r in self.requests:
            if r.seq <= prev:
                raise TraceError("request seq must be strictly increasing")
            prev = r.seq

    def __len__(self) -> int:
        return len(self.requests)

    @property
    def blocks(self) -> list[int]:
        return [r.block for r in self.requests]

    @property
    def label(self) -> str:
        return self.name or self.origin

    @classmethod
    def from_blocks(cls, blocks: Iterable[int], origin: str = "file",
                    seed: int | None = None, name: str = "",
                    op: Op = "read") -> "AccessTrace":
        reqs = tuple(Request(i, int(b), op) for i, b in enumerate(blocks))
        return cls(reqs, origin=origin, seed=seed, name=name)


@dataclass(frozen=True)
class TraceStats:
    length: int
    unique_blocks: int
    read_fraction: float
    max_block: int


# -- generator parameters ---------------------------------------------------

@dataclass(frozen=True)
class ParamsA:
    """Preload then uniform random accesses."""
    preload: int = 1000
    random_accesses: int = 5000
    universe: int = 10_000

    def check(self):
        if self.preload < 1 or self.random_accesses < 0:
            raise TraceError("preload must be >= 1 and random_accesses >= 0")
        if self.universe < self.preload:
            raise TraceError("universe must include the preloaded blocks")


@dataclass(frozen=True)
class ParamsB:
    """Hot set receiving ``hot_frac`` of accesses, cold remainder."""
    total: int = 10_000
    hot: int = 100
    hot_frac: float = 0.8
    cold_start: int = 1000
    cold_size: int = 100_000

    def check(self):
        if self.total < 1 or self.hot < 1 or self.cold_size < 1:
            raise TraceError("total, hot and cold_size must be positive")
        if not 0.0 <= self.hot_frac <= 1.0:
            raise TraceError(f"hot_frac must be in [0, 1], got {self.hot_frac}")
        if self.hot > self.cold_start:
            raise TraceError(
                f"hot set of {self.hot} blocks overlaps the cold universe "
                f"starting at block {self.cold_start}")


@dataclass(frozen=True)
class ParamsC:
    cycle_len: int = 1000
    cycles: int = 10
    base: int = 0

    def check(self):
        if self.cycle_len < 1 or self.cycles < 1 or self.base < 0:
            raise TraceError("cycle_len and cycles must be >= 1, base >= 0")


@dataclass(frozen=True)
class ParamsD:
    epochs: int = 5
    window: int = 2000
    accesses_per_epoch: int = 2000
    base: int = 0

    def check(self):
        if min(self.epochs, self.window, self.accesses_per_epoch) < 1 or self.base < 0:
            raise TraceError("epochs, window, accesses_per_epoch must be >= 1")


GeneratorParams = Union[ParamsA, ParamsB, ParamsC, ParamsD]
DEFAULT_PARAMS = {"A": ParamsA, "B": ParamsB, "C": ParamsC, "D": ParamsD}


def _below(rng: random.Random, n: int) -> int:
    return int(rng.random() * n)


def gen_synthetic(kind: Kind, params: GeneratorParams | None = None,
                  seed: int = 0) -> AccessTrace:
    """Generate one of the four synthetic traces.

    A: ``preload`` distinct blocks in order, then uniform random accesses over
    ``universe`` blocks (which contains the preloaded ones).
    B: each access goes to the hot set ``0..hot-1`` with probability
    ``hot_frac``, otherwise uniformly to ``cold_start..cold_start+cold_size-1``.
    C: ``cycles`` sequential passes over ``cycle_len`` contiguous blocks.
    D: ``epochs`` disjoint windows of ``window`` blocks, each scanned
    sequentially for ``accesses_per_epoch`` accesses.
    """
    kind = kind.upper()
    if kind not in DEFAULT_PARAMS:
        raise TraceError(f"unknown synthetic kind {kind!r}")
    if params is None:
        params = DEFAULT_PARAMS[kind]()
    if not isinstance(params, DEFAULT_PARAMS[kind]):
        raise TraceError(f"trace {kind} needs {DEFAULT_PARAMS[kind].__name__}")
    params.check()
    rng = random.Random(seed)

    if kind == "A":
        blocks = list(range(params.preload))
        blocks += [_below(rng, params.universe) for _ in range(params.random_accesses)]
    elif kind == "B":
        blocks = []
        for _ in range(params.total):
            if rng.random() < params.hot_frac:
                blocks.append(_below(rng, params.hot))
            else:
                blocks.append(params.cold_start + _below(rng, params.cold_size))
    elif kind == "C":
        n = params.cycle_len * params.cycles
        blocks = [params.base + i % params.cycle_len for i in range(n)]
    else:
        blocks = []
        for e in range(params.epochs):
            lo = params.base + e * params.window
            blocks += [lo + i % params.window for i in range(params.accesses_per_epoch)]

    return AccessTrace.from_blocks(blocks, origin=f"synthetic-{kind}", seed=seed,
                                   name=kind)


# -- file formats -------------------------------------------------------------

@dataclass(frozen=True)
class FormatSpec:
    """Column mapping for delimited trace files.

    ``delimiter=None`` splits on whitespace.  ``skip_header=None`` skips the
    first row only when its block column is not an integer.
    """
    delimiter: str | None = ","
    col_block: int = 2
    col_op: int | None = 1
    col_ts: int | None = 0
    col_size: int | None = 3
    skip_header: bool | None = None
    max_bad_fraction: float = 0.05

    @classmethod
    def native(cls) -> "FormatSpec":
        return cls()

    @classmethod
    def plain(cls) -> "FormatSpec":
        return cls(delimiter=None, col_block=0, col_op=None, col_ts=None,
                   col_size=None, skip_header=False)

    @classmethod
    def from_json(cls, text: str) -> "FormatSpec":
        obj = json.loads(text)
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(obj) - known
        if unknown:
            raise TraceError(f"unknown FormatSpec keys: {sorted(unknown)}")
        if "col_block" not in obj:
            raise TraceError("FormatSpec requires col_block")
        return cls(**obj)


_OPS = {"r": "read", "read": "read", "rs": "read",
        "w": "write", "write": "write", "ws": "write"}


def _parse_row(cols: Sequence[str], spec: FormatSpec, seq: int) -> Request:
    block = int(cols[spec.col_block])
    op = "read"
    if spec.col_op is not None and spec.col_op < len(cols):
        raw = cols[spec.col_op].strip().lower()
        if raw not in _OPS:
            raise ValueError(f"bad op {raw!r}")
        op = _OPS[raw]
    size = 1
    if spec.col_size is not None and spec.col_size < len(cols):
        size = int(cols[spec.col_size])
    return Request(seq, block, op, size)


def _split(line: str, spec: FormatSpec) -> list[str]:
    if spec.delimiter is None:
        return line.split()
    return next(csv.reader([line], delimiter=spec.delimiter))


def load_trace(path: str | Path, fmt: FormatSpec | str = "csv") -> AccessTrace:
    """Read a trace file.  ``fmt`` is a FormatSpec, ``"csv"`` or ``"plain"``.

    Malformed rows are skipped with a warning as long as they stay within
    ``fmt.max_bad_fraction`` of all data rows; beyond that the load fails and
    the error names the first offending line.
    """
    if isinstance(fmt, str):
        if fmt == "csv":
            fmt = FormatSpec.native()
        elif fmt == "plain":
            fmt = FormatSpec.plain()
        else:
            raise TraceError(f"unknown trace format {fmt!r}")
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise TraceError(f"cannot read trace {path}: {exc}") from exc

    lines = text.splitlines()
    requests: list[Request] = []
    bad: list[int] = []
    rows = 0
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        cols = _split(line, fmt)
        if lineno == 1 and fmt.skip_header is not False:
            if fmt.skip_header:
                continue
            try:
                int(cols[fmt.col_block])
            except (ValueError, IndexError):
                continue
        rows += 1
        try:
            requests.append(_parse_row(cols, fmt, len(requests)))
        except (ValueError, IndexError):
            bad.append(lineno)

    if bad:
        if len(bad) > fmt.max_bad_fraction * rows:
            raise TraceError(
                f"{path}: {len(bad)} of {rows} rows malformed (limit "
                f"{fmt.max_bad_fraction:.0%}); first bad line {bad[0]}")
        logger.warning("%s: skipped %d malformed row(s), first at line %d",
                       path, len(bad), bad[0])
    return AccessTrace(tuple(requests), origin="file", name=path.stem)


def dump_trace(trace: AccessTrace) -> str:
    buf = io.StringIO()
    buf.write("seq,op,block,size\n")
    for r in trace.requests:
        buf.write(f"{r.seq},{'R' if r.op == 'read' else 'W'},{r.block},{r.size_blocks}\n")
    return buf.getvalue()


def save_trace(trace: AccessTrace, path: str | Path) -> None:
    Path(path).write_text(dump_trace(trace), encoding="utf-8")


# -- statistics ---------------------------------------------------------------

def trace_stats(trace: AccessTrace) -> TraceStats:
    if not trace.requests:
        raise TraceError("trace is empty")
    blocks = trace.blocks
    reads = sum(1 for r in trace.requests if r.op == "read")
    return TraceStats(
        length=len(blocks),
        unique_blocks=len(set(blocks)),
        read_fraction=reads / len(blocks),
        max_block=max(blocks),
    )


def prefix(trace: AccessTrace, n: int) -> AccessTrace:
    if n < 1:
        raise TraceError(f"prefix length must be >= 1, got {n}")
    if n >= len(trace):
        return trace
    return replace(trace, requests=trace.requests[:n])
