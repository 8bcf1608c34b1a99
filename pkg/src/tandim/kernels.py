"""Hot counting kernels: exact set cover and packing over 64-bit element masks.

Every kernel is written in loop style so it can run either through numba's
``@njit`` or as plain Python/numpy. Set ``TANDIM_DISABLE_NUMBA=1`` (or
``NUMBA_DISABLE_JIT=1``) to force the fallback path; ``benchmarks/bench_kernels.py``
compares the two.
"""

import os

import numpy as np

_FALSY = ("", "0", "false", "no")

USE_NUMBA = (
    os.getenv("TANDIM_DISABLE_NUMBA", "0").lower() in _FALSY
    and os.getenv("NUMBA_DISABLE_JIT", "0").lower() in _FALSY
)

if USE_NUMBA:
    from numba import njit as _njit
else:
    def _njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda fn: fn


@_njit(cache=True)
def _popcount(x):
    x = np.uint64(x)
    n = np.int64(0)
    while x:
        x &= x - np.uint64(1)
        n += 1
    return n


@_njit(cache=True)
def greedy_cover(masks, universe):
    """Greedy set cover over element bitmasks; ties broken by smallest index.

    Returns the number of sets used, or -1 if the universe is not coverable.
    """
    covered = np.uint64(0)
    count = np.int64(0)
    while covered & universe != universe:
        best_gain = np.int64(0)
        best_i = np.int64(-1)
        for i in range(masks.shape[0]):
            gain = _popcount(masks[i] & universe & ~covered)
            if gain > best_gain:
                best_gain = gain
                best_i = i
        if best_i < 0:
            return np.int64(-1)
        covered |= masks[best_i]
        count += 1
    return count


@_njit(cache=True)
def cover_lower_bound(masks, universe, nbits):
    """Greedy set of pairwise non-co-coverable elements; its size bounds the
    cover size from below."""
    chosen = np.uint64(0)
    count = np.int64(0)
    one = np.uint64(1)
    for e in range(nbits):
        ebit = one << np.uint64(e)
        if not (universe & ebit):
            continue
        ok = True
        for i in range(masks.shape[0]):
            if masks[i] & ebit and masks[i] & chosen:
                ok = False
                break
        if ok:
            chosen |= ebit
            count += 1
    return count


@_njit(cache=True)
def set_cover_exact(masks, universe, ub, node_budget):
    """Branch-and-bound minimum set cover.

    masks: per-candidate element bitmask, universe: elements to cover,
    ub: a known attainable cover size (e.g. from greedy_cover).
    Returns (best, complete) where complete=0 means the node budget ran out
    and best is only an upper bound.
    """
    nsets = masks.shape[0]
    max_size = np.int64(1)
    for i in range(nsets):
        p = _popcount(masks[i] & universe)
        if p > max_size:
            max_size = p

    best = ub
    if universe == np.uint64(0):
        return np.int64(0), np.int64(1)

    # DFS stack: covered mask, branching element, next candidate index
    cap = 64 * (nsets + 2)
    st_cov = np.zeros(cap, dtype=np.uint64)
    st_elem = np.zeros(cap, dtype=np.int64)
    st_next = np.zeros(cap, dtype=np.int64)

    one = np.uint64(1)

    def _pick(cov):
        # least-covered uncovered element
        best_e = np.int64(-1)
        best_c = np.int64(1 << 60)
        for e in range(64):
            ebit = one << np.uint64(e)
            if not (universe & ebit) or (cov & ebit):
                continue
            c = np.int64(0)
            for i in range(nsets):
                if masks[i] & ebit:
                    c += 1
            if c < best_c:
                best_c = c
                best_e = e
        return best_e

    sp = np.int64(0)
    st_cov[0] = np.uint64(0)
    st_elem[0] = _pick(np.uint64(0))
    st_next[0] = 0
    nodes = np.int64(0)
    complete = np.int64(1)

    while sp >= 0:
        cov = st_cov[sp]
        e = st_elem[sp]
        k = st_next[sp]
        depth = sp  # sets already chosen
        if e < 0:
            sp -= 1
            continue
        ebit = one << np.uint64(e)
        # advance to the next candidate covering e
        i = k
        found = np.int64(-1)
        while i < nsets:
            if masks[i] & ebit:
                found = i
                i += 1
                break
            i += 1
        st_next[sp] = i
        if found < 0:
            sp -= 1
            continue
        nodes += 1
        if node_budget > 0 and nodes > node_budget:
            complete = np.int64(0)
            break
        new_cov = cov | masks[found]
        nd = depth + 1
        if new_cov & universe == universe:
            if nd < best:
                best = nd
            continue
        remaining = _popcount(universe & ~new_cov)
        lb = nd + (remaining + max_size - 1) // max_size
        if lb >= best:
            continue
        sp += 1
        st_cov[sp] = new_cov
        st_elem[sp] = _pick(new_cov)
        st_next[sp] = 0

    return best, complete


@_njit(cache=True)
def greedy_packing(adj, n):
    """Greedy independent set in the conflict graph, by vertex index."""
    chosen = np.uint64(0)
    count = np.int64(0)
    one = np.uint64(1)
    for v in range(n):
        if adj[v] & chosen:
            continue
        chosen |= one << np.uint64(v)
        count += 1
    return count


@_njit(cache=True)
def clique_cover(adj, n):
    """Greedy partition into cliques; the number of cliques bounds the
    independence number from above."""
    one = np.uint64(1)
    remaining = np.uint64(0)
    for v in range(n):
        remaining |= one << np.uint64(v)
    count = np.int64(0)
    while remaining:
        # seed with the smallest remaining vertex, extend to a maximal clique
        v = np.int64(0)
        while not (remaining & (one << np.uint64(v))):
            v += 1
        clique = one << np.uint64(v)
        common = adj[v] & remaining
        remaining &= ~(one << np.uint64(v))
        w = v + 1
        while w < n:
            wbit = one << np.uint64(w)
            if (common & wbit) and (remaining & wbit):
                clique |= wbit
                remaining &= ~wbit
                common &= adj[w]
            w += 1
        count += 1
    return count


@_njit(cache=True)
def packing_exact(adj, n, lb, node_budget):
    """Branch-and-bound maximum independent set on the conflict graph.

    adj[v] is the bitmask of vertices conflicting with v (no self-bit).
    Returns (best, complete).
    """
    one = np.uint64(1)
    full = np.uint64(0)
    for v in range(n):
        full |= one << np.uint64(v)

    best = lb
    cap = n + 2
    st_cand = np.zeros(cap, dtype=np.uint64)
    st_size = np.zeros(cap, dtype=np.int64)
    sp = np.int64(0)
    st_cand[0] = full
    st_size[0] = 0
    nodes = np.int64(0)
    complete = np.int64(1)

    while sp >= 0:
        cand = st_cand[sp]
        size = st_size[sp]
        sp -= 1
        nodes += 1
        if node_budget > 0 and nodes > node_budget:
            complete = np.int64(0)
            break
        if size + _popcount(cand) <= best:
            continue
        if cand == np.uint64(0):
            if size > best:
                best = size
            continue
        # branch on the smallest candidate vertex: exclude, then include
        v = np.int64(0)
        while not (cand & (one << np.uint64(v))):
            v += 1
        vbit = one << np.uint64(v)
        sp += 1
        st_cand[sp] = cand & ~vbit
        st_size[sp] = size
        sp += 1
        st_cand[sp] = cand & ~vbit & ~adj[v]
        st_size[sp] = size + 1
        if size + 1 > best:
            best = size + 1

    return best, complete


def warmup():
    """Trigger JIT compilation on tiny inputs so timings stay honest."""
    masks = np.array([3, 6, 4], dtype=np.uint64)
    greedy_cover(masks, np.uint64(7))
    cover_lower_bound(masks, np.uint64(7), 3)
    set_cover_exact(masks, np.uint64(7), np.int64(3), np.int64(0))
    adj = np.array([2, 1, 0], dtype=np.uint64)
    greedy_packing(adj, 3)
    clique_cover(adj, 3)
    packing_exact(adj, 3, np.int64(1), np.int64(0))
