"""Independent, deliberately naive reference simulators.

Plain lists and linear scans only; nothing is shared with idss.cachesim.
"""


def naive_lru_hits(blocks, capacity):
    cache = []  # index 0 = least recently used
    hits = 0
    for b in blocks:
        if b in cache:
            hits += 1
            cache.remove(b)
            cache.append(b)
        else:
            if len(cache) == capacity:
                cache.pop(0)
            cache.append(b)
    return hits


def naive_fifo_hits(blocks, capacity):
    cache = []
    hits = 0
    for b in blocks:
        if b in cache:
            hits += 1
        else:
            if len(cache) == capacity:
                cache.pop(0)
            cache.append(b)
    return hits


def naive_lfu_hits(blocks, capacity):
    """Evict the minimum-count block; ties go to the oldest last access.
    Counts are forgotten on eviction."""
    cache = {}  # block -> [count, last_access_time]
    hits = 0
    for t, b in enumerate(blocks):
        if b in cache:
            hits += 1
            cache[b][0] += 1
            cache[b][1] = t
        else:
            if len(cache) == capacity:
                victim = None
                for blk, (cnt, last) in cache.items():
                    if victim is None or (cnt, last) < (cache[victim][0], cache[victim][1]):
                        victim = blk
                del cache[victim]
            cache[b] = [1, t]
    return hits


def naive_arc_hits(blocks, c):
    """ARC transcribed from the FAST'03 pseudocode using Python lists
    (index 0 = LRU end)."""
    t1, t2, b1, b2 = [], [], [], []
    p = 0.0
    hits = 0

    def replace(x):
        if t1 and (len(t1) > p or (x in b2 and len(t1) == p) or not t2):
            b1.append(t1.pop(0))
        else:
            b2.append(t2.pop(0))

    for x in blocks:
        if x in t1 or x in t2:
            hits += 1
            (t1 if x in t1 else t2).remove(x)
            t2.append(x)
        elif x in b1:
            p = min(float(c), p + max(len(b2) / len(b1), 1.0))
            replace(x)
            b1.remove(x)
            t2.append(x)
        elif x in b2:
            p = max(0.0, p - max(len(b1) / len(b2), 1.0))
            replace(x)
            b2.remove(x)
            t2.append(x)
        else:
            if len(t1) + len(b1) == c:
                if len(t1) < c:
                    b1.pop(0)
                    replace(x)
                else:
                    t1.pop(0)
            elif len(t1) + len(b1) < c:
                total = len(t1) + len(t2) + len(b1) + len(b2)
                if total >= c:
                    if total == 2 * c:
                        b2.pop(0)
                    replace(x)
            t1.append(x)
    return hits
