"""Maximum disjoint families of representations (Y*) and overlap counts (W)."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import ComputationError

EXACT_CAP = 64
OVERLAP_BUDGET = 20000


@dataclass(frozen=True)
class PackingResult:
    y_star: int
    chosen: list = field(default_factory=list)
    method: str = "exact"
    w: int = 0


def _masks(reps):
    elems = sorted({x for r in reps for x in r})
    pos = {x: i for i, x in enumerate(elems)}
    return [sum(1 << pos[x] for x in r) for r in reps]


def pack_greedy(reps, with_overlap: bool = True) -> PackingResult:
    """Keep each representation, in the given order, that misses all kept ones."""
    used: set[int] = set()
    chosen = []
    for r in reps:
        if used.isdisjoint(r):
            chosen.append(tuple(r))
            used.update(r)
    w = overlap_pairs(reps)[0] if with_overlap else 0
    return PackingResult(len(chosen), chosen, "greedy", w)


def pack_exact(reps, cap: int = EXACT_CAP, with_overlap: bool = True) -> PackingResult:
    """Maximum disjoint subfamily by branch and bound on the conflict graph."""
    reps = [tuple(r) for r in reps]
    m = len(reps)
    if m > cap:
        raise ComputationError("CAP_EXCEEDED", f"{m} representations exceed exact-packing cap {cap}")
    w = overlap_pairs(reps)[0] if with_overlap else 0
    if m == 0:
        return PackingResult(0, [], "exact", w)

    masks = _masks(reps)
    adj = [0] * m
    for a in range(m):
        for b in range(a + 1, m):
            if masks[a] & masks[b]:
                adj[a] |= 1 << b
                adj[b] |= 1 << a

    greedy = pack_greedy(reps, with_overlap=False)
    index = {r: i for i, r in enumerate(reps)}
    best = [sum(1 << index[r] for r in greedy.chosen)]
    best_size = [greedy.y_star]

    # reps through one element are pairwise in conflict, so a cover of the
    # candidates by such cliques bounds the packing size from above
    through: dict[int, int] = {}
    for i, r in enumerate(reps):
        for x in r:
            through[x] = through.get(x, 0) | (1 << i)
    cliques = list(through.values())

    def clique_cover(cand: int, limit: int) -> int:
        used = 0
        while cand and used <= limit:
            cand &= ~max(cliques, key=lambda c: (c & cand).bit_count())
            used += 1
        return used

    def search(cand: int, picked: int, size: int) -> None:
        if size + cand.bit_count() <= best_size[0]:
            return
        if size + clique_cover(cand, best_size[0] - size) <= best_size[0]:
            return
        if not cand:
            best[0], best_size[0] = picked, size
            return
        # conflict-free candidates can always be taken
        free = 0
        c = cand
        while c:
            v = (c & -c).bit_length() - 1
            c &= c - 1
            if not adj[v] & cand:
                free |= 1 << v
        if free:
            search(cand & ~free, picked | free, size + free.bit_count())
            return
        # branch on the candidate with most conflicts
        v = max(_bits(cand), key=lambda i: (adj[i] & cand).bit_count())
        search(cand & ~(1 << v) & ~adj[v], picked | (1 << v), size + 1)
        search(cand & ~(1 << v), picked, size)

    search((1 << m) - 1, 0, 0)
    chosen = sorted(reps[i] for i in _bits(best[0]))
    return PackingResult(best_size[0], chosen, "exact", w)


def _bits(x: int):
    while x:
        low = x & -x
        yield low.bit_length() - 1
        x ^= low


def pack(reps, cap: int = EXACT_CAP, with_overlap: bool = True) -> PackingResult:
    """Exact packing when small enough, greedy (still maximal) otherwise."""
    if len(reps) <= cap:
        return pack_exact(reps, cap, with_overlap)
    return pack_greedy(reps, with_overlap)


def overlap_pairs(reps, budget: int = OVERLAP_BUDGET) -> tuple[int, dict[int, int]]:
    """Unordered pairs of representations that share an element.

    Returns ``(w, by_size)`` where ``by_size[l]`` counts pairs whose
    intersection has exactly ``l`` elements, ``1 <= l <= k-1``.
    """
    m = len(reps)
    if m == 0:
        return 0, {}
    if m > budget:
        raise ComputationError("BUDGET_EXCEEDED", f"{m} representations exceed overlap budget {budget}")
    k = len(reps[0])
    arr = np.asarray(reps, dtype=np.int64)
    elems, inv = np.unique(arr, return_inverse=True)
    inc = np.zeros((m, len(elems)), dtype=np.float64)
    inc[np.repeat(np.arange(m), k), inv.ravel()] = 1.0
    hist = np.zeros(k + 1, dtype=np.int64)
    step = max(1, (1 << 22) // m)
    for r0 in range(0, m, step):
        r1 = min(r0 + step, m)
        g = inc[r0:r1] @ inc.T
        # strictly upper triangle: pair (a, b) with a < b
        cols = np.arange(m)[None, :]
        rows = np.arange(r0, r1)[:, None]
        vals = np.rint(g[cols > rows]).astype(np.int64)
        hist += np.bincount(vals, minlength=k + 1)[: k + 1]
    by_size = {l: int(hist[l]) for l in range(1, k)}
    return sum(by_size.values()), by_size
