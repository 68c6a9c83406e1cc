"""Demand-cache replacement policies.

Every engine exposes ``access(block) -> bool`` (True on hit) and keeps at
most ``capacity`` resident blocks.  On a miss the block is always admitted.
"""

from __future__ import annotations

import math
import random
from collections import OrderedDict
from enum import Enum


class PolicyKind(str, Enum):
    LRU = "LRU"
    LFU = "LFU"
    FIFO = "FIFO"
    ARC = "ARC"
    LeCaR = "LeCaR"
    Cacheus = "Cacheus"

    @classmethod
    def parse(cls, text: str) -> "PolicyKind":
        if isinstance(text, cls):
            return text
        key = str(text).strip().lower()
        for kind in cls:
            if kind.value.lower() == key:
                return kind
        raise ValueError(f"unknown policy {text!r}; expected one of "
                         f"{', '.join(k.value for k in cls)}")

    def __str__(self) -> str:
        return self.value


# Fixed tie-break order for best-policy selection.
POLICY_ORDER = tuple(PolicyKind)


class HyperparamError(ValueError):
    pass


class Engine:
    """Base class; subclasses implement ``access`` and ``resident``."""

    hyperparam_defaults: dict = {}

    def __init__(self, capacity: int, **hyperparams):
        if capacity < 1:
            raise ValueError(f"capacity must be >= 1, got {capacity}")
        unknown = set(hyperparams) - set(self.hyperparam_defaults)
        if unknown:
            raise HyperparamError(
                f"{type(self).__name__}: unknown hyperparameter(s) {sorted(unknown)}")
        self.capacity = capacity
        self.params = {**self.hyperparam_defaults, **hyperparams}

    def access(self, block: int) -> bool:
        raise NotImplementedError

    def resident(self) -> set[int]:
        raise NotImplementedError


class LRU(Engine):
    def __init__(self, capacity, **hp):
        super().__init__(capacity, **hp)
        self._od: OrderedDict[int, None] = OrderedDict()

    def access(self, block):
        od = self._od
        if block in od:
            od.move_to_end(block)
            return True
        if len(od) >= self.capacity:
            od.popitem(last=False)
        od[block] = None
        return False

    def resident(self):
        return set(self._od)


class FIFO(Engine):
    def __init__(self, capacity, **hp):
        super().__init__(capacity, **hp)
        self._od: OrderedDict[int, None] = OrderedDict()

    def access(self, block):
        od = self._od
        if block in od:
            return True
        if len(od) >= self.capacity:
            od.popitem(last=False)
        od[block] = None
        return False

    def resident(self):
        return set(self._od)


class FreqBuckets:
    """Resident blocks grouped by access count, each group in recency order.

    ``victim(mru=False)`` returns the least recently used block among the
    least frequent ones; ``mru=True`` picks the most recently used instead.
    """

    def __init__(self):
        self.freq: dict[int, int] = {}
        self.buckets: dict[int, OrderedDict[int, None]] = {}
        self.min_freq = 0

    def __contains__(self, block):
        return block in self.freq

    def __len__(self):
        return len(self.freq)

    def insert(self, block: int, freq: int = 1):
        self.freq[block] = freq
        self.buckets.setdefault(freq, OrderedDict())[block] = None
        if len(self.freq) == 1 or freq < self.min_freq:
            self.min_freq = freq

    def touch(self, block: int):
        f = self.freq[block]
        bucket = self.buckets[f]
        del bucket[block]
        if not bucket:
            del self.buckets[f]
            if self.min_freq == f:
                self.min_freq = f + 1
        self.freq[block] = f + 1
        self.buckets.setdefault(f + 1, OrderedDict())[block] = None

    def remove(self, block: int) -> int:
        f = self.freq.pop(block)
        bucket = self.buckets[f]
        del bucket[block]
        if not bucket:
            del self.buckets[f]
            if self.min_freq == f and self.freq:
                self.min_freq = min(self.buckets)
        return f

    def victim(self, mru: bool = False) -> int:
        bucket = self.buckets[self.min_freq]
        return next(reversed(bucket)) if mru else next(iter(bucket))


class LFU(Engine):
    """Least frequently used; ties evict the least recently used block."""

    def __init__(self, capacity, **hp):
        super().__init__(capacity, **hp)
        self._fb = FreqBuckets()

    def access(self, block):
        fb = self._fb
        if block in fb:
            fb.touch(block)
            return True
        if len(fb) >= self.capacity:
            fb.remove(fb.victim())
        fb.insert(block)
        return False

    def resident(self):
        return set(self._fb.freq)


class ARC(Engine):
    """Adaptive Replacement Cache (Megiddo and Modha, FAST 2003)."""

    def __init__(self, capacity, **hp):
        super().__init__(capacity, **hp)
        self.p = 0.0
        self.t1: OrderedDict[int, None] = OrderedDict()
        self.t2: OrderedDict[int, None] = OrderedDict()
        self.b1: OrderedDict[int, None] = OrderedDict()
        self.b2: OrderedDict[int, None] = OrderedDict()

    def _replace(self, in_b2: bool):
        t1, t2 = self.t1, self.t2
        if t1 and (len(t1) > self.p or (in_b2 and len(t1) == self.p) or not t2):
            old, _ = t1.popitem(last=False)
            self.b1[old] = None
        else:
            old, _ = t2.popitem(last=False)
            self.b2[old] = None

    def access(self, x):
        c = self.capacity
        t1, t2, b1, b2 = self.t1, self.t2, self.b1, self.b2
        if x in t1:
            del t1[x]
            t2[x] = None
            return True
        if x in t2:
            t2.move_to_end(x)
            return True
        if x in b1:
            self.p = min(float(c), self.p + max(len(b2) / len(b1), 1.0))
            if len(t1) + len(t2) >= c:
                self._replace(False)
            del b1[x]
            t2[x] = None
            return False
        if x in b2:
            self.p = max(0.0, self.p - max(len(b1) / len(b2), 1.0))
            if len(t1) + len(t2) >= c:
                self._replace(True)
            del b2[x]
            t2[x] = None
            return False
        l1 = len(t1) + len(b1)
        total = l1 + len(t2) + len(b2)
        if l1 == c:
            if len(t1) < c:
                b1.popitem(last=False)
                self._replace(False)
            else:
                t1.popitem(last=False)
        elif total >= c:
            if total >= 2 * c:
                b2.popitem(last=False)
            if len(t1) + len(t2) >= c:
                self._replace(False)
        t1[x] = None
        return False

    def resident(self):
        return set(self.t1) | set(self.t2)


class _History:
    """Bounded FIFO of evicted blocks with eviction time and metadata."""

    def __init__(self, size: int):
        self.size = max(1, size)
        self.od: OrderedDict[int, tuple] = OrderedDict()

    def __contains__(self, block):
        return block in self.od

    def add(self, block: int, *meta):
        if block in self.od:
            del self.od[block]
        elif len(self.od) >= self.size:
            self.od.popitem(last=False)
        self.od[block] = meta

    def pop(self, block: int) -> tuple:
        return self.od.pop(block)


def _normalize(w_a: float, w_b: float) -> tuple[float, float]:
    s = w_a + w_b
    return w_a / s, w_b / s


class LeCaR(Engine):
    """Regret-weighted choice between an LRU and an LFU expert (Vietri et al.).

    Each expert keeps a history of the blocks it evicted.  A miss on a block
    in the LRU history penalises LRU (the LFU weight grows by
    ``exp(learning_rate * discount**age)``), and symmetrically for LFU.
    On eviction the expert is sampled with probability equal to its weight.
    """

    hyperparam_defaults = {"learning_rate": 0.45, "discount": None,
                           "history_size": None, "seed": 0}

    def __init__(self, capacity, **hp):
        super().__init__(capacity, **hp)
        p = self.params
        self.lr = float(p["learning_rate"])
        self.discount = (p["discount"] if p["discount"] is not None
                         else 0.005 ** (1.0 / capacity))
        hsize = p["history_size"] or capacity
        self.rng = random.Random(p["seed"])
        self.w_lru = self.w_lfu = 0.5
        self.lru: OrderedDict[int, None] = OrderedDict()
        self.lfu = FreqBuckets()
        self.h_lru = _History(hsize)
        self.h_lfu = _History(hsize)
        self.time = 0

    def access(self, x):
        self.time += 1
        if x in self.lru:
            self.lru.move_to_end(x)
            self.lfu.touch(x)
            return True
        freq = 1
        if x in self.h_lru:
            t, f = self.h_lru.pop(x)
            reward = self.discount ** (self.time - t)
            self.w_lfu *= math.exp(self.lr * reward)
            freq = f + 1
        elif x in self.h_lfu:
            t, f = self.h_lfu.pop(x)
            reward = self.discount ** (self.time - t)
            self.w_lru *= math.exp(self.lr * reward)
            freq = f + 1
        self.w_lru, self.w_lfu = _normalize(self.w_lru, self.w_lfu)

        if len(self.lru) >= self.capacity:
            if self.rng.random() < self.w_lru:
                victim = next(iter(self.lru))
                hist = self.h_lru
            else:
                victim = self.lfu.victim()
                hist = self.h_lfu
            del self.lru[victim]
            f = self.lfu.remove(victim)
            hist.add(victim, self.time, f)
        self.lru[x] = None
        self.lfu.insert(x, freq)
        return False

    def resident(self):
        return set(self.lru)


class _SRLRU:
    """Scan-resistant LRU: new blocks enter a probation list (SR) and are
    promoted to the reuse list (R) on a hit.  R is bounded by
    ``capacity - sr_target``; its overflow is demoted back to SR.  The
    victim is the LRU end of SR, falling back to R.
    """

    def __init__(self, capacity: int):
        self.capacity = capacity
        self.sr_target = max(1, capacity // 2)
        self.sr: OrderedDict[int, bool] = OrderedDict()  # value: was demoted
        self.r: OrderedDict[int, None] = OrderedDict()

    def __contains__(self, block):
        return block in self.sr or block in self.r

    def _rebalance(self):
        limit = max(0, self.capacity - self.sr_target)
        while len(self.r) > limit:
            old, _ = self.r.popitem(last=False)
            self.sr[old] = True

    def hit(self, block):
        if block in self.sr:
            del self.sr[block]
        else:
            del self.r[block]
        self.r[block] = None
        self._rebalance()

    def insert(self, block, reused: bool):
        if reused:
            self.r[block] = None
        else:
            self.sr[block] = False
        self._rebalance()

    def victim(self) -> int:
        return next(iter(self.sr)) if self.sr else next(iter(self.r))

    def remove(self, block) -> bool:
        if block in self.sr:
            return self.sr.pop(block)
        del self.r[block]
        return False

    def adapt(self, was_demoted: bool):
        # A demoted block coming back means R was too small; a fresh block
        # coming back means SR was too small.
        if was_demoted:
            self.sr_target = max(1, self.sr_target - 1)
        else:
            self.sr_target = min(max(1, self.capacity - 1), self.sr_target + 1)


class Cacheus(Engine):
    """Cacheus (Rodriguez et al., FAST 2021): SR-LRU and CR-LFU experts.

    CR-LFU evicts the most recently used among the least frequent blocks.
    The learning rate is adapted by hill climbing on the hit rate of
    consecutive windows of ``window`` requests (default: capacity, at least
    ``min_window``); after ``restart_after`` windows without improvement it
    is re-drawn from the seeded generator.
    """

    hyperparam_defaults = {"learning_rate": 0.45, "discount": None,
                           "history_size": None, "window": None,
                           "min_window": 10, "restart_after": 10,
                           "lr_bounds": (1e-3, 1.0), "seed": 0}

    def __init__(self, capacity, **hp):
        super().__init__(capacity, **hp)
        p = self.params
        self.lr = float(p["learning_rate"])
        self.lr_lo, self.lr_hi = p["lr_bounds"]
        self.discount = (p["discount"] if p["discount"] is not None
                         else 0.005 ** (1.0 / capacity))
        hsize = p["history_size"] or max(1, capacity // 2)
        self.window = p["window"] or max(capacity, p["min_window"])
        self.rng = random.Random(p["seed"])
        self.w_sr = self.w_cr = 0.5
        self.sr = _SRLRU(capacity)
        self.cr = FreqBuckets()
        self.h_sr = _History(hsize)
        self.h_cr = _History(hsize)
        self.time = 0
        self._win_hits = 0
        self._prev_hr = 0.0
        self._direction = 1.0
        self._stale = 0

    def _adapt_lr(self):
        hr = self._win_hits / self.window
        delta = hr - self._prev_hr
        if delta > 0:
            self._stale = 0
        else:
            self._direction = -self._direction
            self._stale += 1
        if self._stale >= self.params["restart_after"]:
            self.lr = self.lr_lo + self.rng.random() * (self.lr_hi - self.lr_lo)
            self._stale = 0
        else:
            self.lr = min(self.lr_hi, max(self.lr_lo, self.lr * 2.0 ** (0.5 * self._direction)))
        self._prev_hr = hr
        self._win_hits = 0

    def access(self, x):
        self.time += 1
        hit = self._access(x)
        if hit:
            self._win_hits += 1
        if self.time % self.window == 0:
            self._adapt_lr()
        return hit

    def _access(self, x):
        if x in self.cr:
            self.sr.hit(x)
            self.cr.touch(x)
            return True
        freq, reused = 1, False
        if x in self.h_sr:
            t, f, demoted = self.h_sr.pop(x)
            self.w_cr *= math.exp(self.lr * self.discount ** (self.time - t))
            self.sr.adapt(demoted)
            freq, reused = f + 1, True
        elif x in self.h_cr:
            t, f, _ = self.h_cr.pop(x)
            self.w_sr *= math.exp(self.lr * self.discount ** (self.time - t))
            freq, reused = f + 1, True
        self.w_sr, self.w_cr = _normalize(self.w_sr, self.w_cr)

        if len(self.cr) >= self.capacity:
            if self.rng.random() < self.w_sr:
                victim, hist = self.sr.victim(), self.h_sr
            else:
                victim, hist = self.cr.victim(mru=True), self.h_cr
            demoted = self.sr.remove(victim)
            f = self.cr.remove(victim)
            hist.add(victim, self.time, f, demoted)
        self.sr.insert(x, reused)
        self.cr.insert(x, freq)
        return False

    def resident(self):
        return set(self.cr.freq)


ENGINES: dict[PolicyKind, type[Engine]] = {
    PolicyKind.LRU: LRU,
    PolicyKind.LFU: LFU,
    PolicyKind.FIFO: FIFO,
    PolicyKind.ARC: ARC,
    PolicyKind.LeCaR: LeCaR,
    PolicyKind.Cacheus: Cacheus,
}


def make_engine(kind: PolicyKind | str, capacity: int, **hyperparams) -> Engine:
    return ENGINES[PolicyKind.parse(kind)](capacity, **hyperparams)
