"""Agglomerative linkage engines.

Six methods are supported. Single linkage runs on a minimum spanning tree;
complete, average and Ward run on the nearest-neighbor chain; centroid and
median (which can produce inversions, invalidating the chain) run on a
generic reduction loop with a cached nearest-neighbor table. All three
engines evolve inter-cluster distances with Lance-Williams updates from the
same pairwise Euclidean starting state, so the engines agree wherever their
methods overlap.

Tie-breaking is deterministic: when several pairs attain the minimum
distance, the generic loop joins the pair with the lexicographically
smallest (smaller-id, larger-id); the chain and MST engines resolve ties by
stable height ordering, which coincides on duplicate-point inputs.
"""

from __future__ import annotations

import enum

import numpy as np

from .dendrogram import Dendrogram
from .distances import CondensedDistances
from .errors import ValidationError


class LinkageMethod(enum.Enum):
    SIN = "single"
    COM = "complete"
    AVG = "average"
    CEN = "centroid"
    MED = "median"
    WAR = "ward"

    def __str__(self) -> str:
        return self.value

    @classmethod
    def from_string(cls, name: str) -> "LinkageMethod":
        key = name.strip().upper()
        if key in cls.__members__:
            return cls[key]
        for member in cls:
            if member.value == name.strip().lower():
                return member
        raise ValidationError(f"unknown linkage method {name!r}")


ALL_METHODS = tuple(LinkageMethod)

_CHAIN_METHODS = {LinkageMethod.COM, LinkageMethod.AVG, LinkageMethod.WAR}


def linkage(dist: CondensedDistances, method: LinkageMethod) -> Dendrogram:
    """Build the full dendrogram of ``dist`` under ``method``.

    Returns n-1 merges ordered as performed; heights are the inter-cluster
    distances at join time. Heights are non-decreasing for SIN/COM/AVG/WAR;
    CEN and MED may exhibit inversions.
    """
    if not isinstance(method, LinkageMethod):
        method = LinkageMethod.from_string(str(method))
    square = _working_matrix(dist)
    if method is LinkageMethod.SIN:
        return _mst_linkage(square)
    if method in _CHAIN_METHODS:
        return _nn_chain_linkage(square, method)
    return _generic_linkage(square, method)


def linkage_single_mst(dist: CondensedDistances) -> Dendrogram:
    """Single linkage via Prim's minimum spanning tree.

    Merge-equivalent to ``linkage(dist, LinkageMethod.SIN)``: the merge
    heights are the MST edge weights in sorted order and flat clusters agree
    at every threshold.
    """
    return _mst_linkage(_working_matrix(dist))


def _working_matrix(dist: CondensedDistances) -> np.ndarray:
    if dist.n < 2:
        raise ValidationError("linkage needs at least 2 points")
    square = dist.to_square()
    np.fill_diagonal(square, np.inf)
    return square


# ---------------------------------------------------------------------------
# Lance-Williams updates. d_xi/d_yi are distances from the two merged
# clusters to each remaining cluster, d_xy their mutual distance, nx/ny/ni
# the member counts. Squared forms are clipped at zero before the sqrt to
# absorb float cancellation.


def _lw_update(
    method: LinkageMethod,
    d_xi: np.ndarray,
    d_yi: np.ndarray,
    d_xy: float,
    nx: int,
    ny: int,
    ni: np.ndarray,
) -> np.ndarray:
    if method is LinkageMethod.SIN:
        return np.minimum(d_xi, d_yi)
    if method is LinkageMethod.COM:
        return np.maximum(d_xi, d_yi)
    if method is LinkageMethod.AVG:
        return (nx * d_xi + ny * d_yi) / (nx + ny)
    if method is LinkageMethod.CEN:
        nxy = nx + ny
        sq = (nx * d_xi**2 + ny * d_yi**2) / nxy - (nx * ny * d_xy**2) / nxy**2
        return np.sqrt(np.maximum(sq, 0.0))
    if method is LinkageMethod.MED:
        sq = 0.5 * d_xi**2 + 0.5 * d_yi**2 - 0.25 * d_xy**2
        return np.sqrt(np.maximum(sq, 0.0))
    if method is LinkageMethod.WAR:
        t = nx + ny + ni
        sq = ((ni + nx) * d_xi**2 + (ni + ny) * d_yi**2 - ni * d_xy**2) / t
        return np.sqrt(np.maximum(sq, 0.0))
    raise ValidationError(f"unsupported method {method}")


# ---------------------------------------------------------------------------
# Generic reduction loop (centroid/median; O(n^3) worst case).


def _generic_linkage(square: np.ndarray, method: LinkageMethod) -> Dendrogram:
    n = square.shape[0]
    d = square
    ids = np.arange(n, dtype=np.int64)
    size = np.ones(n, dtype=np.int64)
    alive = np.ones(n, dtype=bool)
    # Cached per-row nearest neighbor over live slots.
    nn_val = np.full(n, np.inf)
    nn_arg = np.zeros(n, dtype=np.int64)
    for i in range(n):
        nn_arg[i] = np.argmin(d[i])
        nn_val[i] = d[i, nn_arg[i]]

    children = np.empty((n - 1, 2), dtype=np.int64)
    heights = np.empty(n - 1)
    sizes = np.empty(n - 1, dtype=np.int64)

    for k in range(n - 1):
        masked = np.where(alive, nn_val, np.inf)
        current_min = masked.min()
        x, y = _argmin_pair(d, ids, masked, current_min)

        nx, ny = int(size[x]), int(size[y])
        id_x, id_y = int(ids[x]), int(ids[y])
        children[k] = (id_x, id_y) if id_x < id_y else (id_y, id_x)
        heights[k] = current_min
        sizes[k] = nx + ny

        others = np.flatnonzero(alive)
        others = others[(others != x) & (others != y)]
        updated = _lw_update(method, d[x, others], d[y, others], current_min, nx, ny, size[others])
        d[y, others] = updated
        d[others, y] = updated
        d[x, :] = np.inf
        d[:, x] = np.inf
        alive[x] = False
        ids[y] = n + k
        size[y] = nx + ny

        if others.size:
            nn_arg[y] = others[np.argmin(updated)]
            nn_val[y] = d[y, nn_arg[y]]
            better = updated < nn_val[others]
            nn_val[others[better]] = updated[better]
            nn_arg[others[better]] = y
            stale = others[~better]
            stale = stale[(nn_arg[stale] == x) | (nn_arg[stale] == y)]
            for i in stale:
                nn_arg[i] = np.argmin(d[i])
                nn_val[i] = d[i, nn_arg[i]]

    return Dendrogram(n=n, children=children, heights=heights, sizes=sizes)


def _argmin_pair(
    d: np.ndarray, ids: np.ndarray, masked_nn: np.ndarray, current_min: float
) -> tuple[int, int]:
    """Slot pair attaining ``current_min``, tie-broken by smallest cluster ids.

    Every pair at the minimum shows up in the cached row minima of both its
    slots, so scanning rows whose cached value equals the minimum enumerates
    all candidates.
    """
    best = None
    best_key = None
    for r in np.flatnonzero(masked_nn == current_min):
        for c in np.flatnonzero(d[r] == current_min):
            a, b = int(ids[r]), int(ids[c])
            key = (min(a, b), max(a, b))
            if best_key is None or key < best_key:
                best_key = key
                best = (int(r), int(c))
    assert best is not None
    return best


# ---------------------------------------------------------------------------
# Nearest-neighbor chain (complete/average/Ward; these methods are reducible
# so chain merges sorted by height form a valid greedy order).


def _nn_chain_linkage(square: np.ndarray, method: LinkageMethod) -> Dendrogram:
    n = square.shape[0]
    d = square
    size = np.ones(n, dtype=np.int64)
    pair_slots = np.empty((n - 1, 2), dtype=np.int64)
    raw_heights = np.empty(n - 1)
    chain: list[int] = []

    for k in range(n - 1):
        if not chain:
            chain.append(int(np.argmax(size > 0)))
        while True:
            x = chain[-1]
            # Prefer the previous chain element on ties to avoid cycles.
            if len(chain) > 1:
                y = chain[-2]
                current_min = d[x, y]
            else:
                y = -1
                current_min = np.inf
            row = np.where(size > 0, d[x], np.inf)
            row[x] = np.inf
            j = int(np.argmin(row))
            if row[j] < current_min:
                y = j
                current_min = row[j]
            if len(chain) > 1 and y == chain[-2]:
                break
            chain.append(y)
        chain.pop()
        chain.pop()

        if x > y:
            x, y = y, x
        nx, ny = int(size[x]), int(size[y])
        pair_slots[k] = (x, y)
        raw_heights[k] = current_min

        others = np.flatnonzero(size > 0)
        others = others[(others != x) & (others != y)]
        updated = _lw_update(method, d[x, others], d[y, others], current_min, nx, ny, size[others])
        d[y, others] = updated
        d[others, y] = updated
        d[x, :] = np.inf
        d[:, x] = np.inf
        size[x] = 0
        size[y] = nx + ny

    order = np.argsort(raw_heights, kind="stable")
    return _label(pair_slots[order], raw_heights[order], n)


# ---------------------------------------------------------------------------
# Single linkage via Prim's MST.


def _mst_linkage(square: np.ndarray) -> Dendrogram:
    n = square.shape[0]
    in_tree = np.zeros(n, dtype=bool)
    best_dist = np.full(n, np.inf)
    best_src = np.zeros(n, dtype=np.int64)
    edges = np.empty((n - 1, 2), dtype=np.int64)
    weights = np.empty(n - 1)

    current = 0
    in_tree[0] = True
    for k in range(n - 1):
        row = square[current]
        improved = ~in_tree & (row < best_dist)
        best_dist[improved] = row[improved]
        best_src[improved] = current
        cand = np.where(in_tree, np.inf, best_dist)
        nxt = int(np.argmin(cand))
        edges[k] = sorted((int(best_src[nxt]), nxt))
        weights[k] = best_dist[nxt]
        in_tree[nxt] = True
        current = nxt

    order = np.argsort(weights, kind="stable")
    return _label(edges[order], weights[order], n)


class _UnionFind:
    """Union-find over cluster ids, assigning n, n+1, ... to new merges."""

    def __init__(self, n: int):
        self.parent = np.arange(2 * n - 1, dtype=np.int64)
        self.size = np.ones(2 * n - 1, dtype=np.int64)
        self.next_label = n

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return int(root)

    def merge(self, x_root: int, y_root: int) -> int:
        label = self.next_label
        self.parent[x_root] = label
        self.parent[y_root] = label
        self.size[label] = self.size[x_root] + self.size[y_root]
        self.next_label += 1
        return int(self.size[label])


def _label(pairs: np.ndarray, ordered_heights: np.ndarray, n: int) -> Dendrogram:
    """Convert height-ordered point/slot pairs into dendrogram merges."""
    uf = _UnionFind(n)
    children = np.empty((n - 1, 2), dtype=np.int64)
    sizes = np.empty(n - 1, dtype=np.int64)
    for i, (a, b) in enumerate(pairs):
        ra, rb = uf.find(int(a)), uf.find(int(b))
        children[i] = (ra, rb) if ra < rb else (rb, ra)
        sizes[i] = uf.merge(ra, rb)
    return Dendrogram(n=n, children=children, heights=np.asarray(ordered_heights, dtype=np.float64).copy(), sizes=sizes)
