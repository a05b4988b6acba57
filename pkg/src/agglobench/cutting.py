"""Size-targeted dendrogram cuts with outlier pruning and relevance scoring.

The cut works in two independent passes over a dendrogram. Bottom-up, merges
are replayed until ``k`` live clusters of at least ``s`` members coexist for
the first time; the merge that got there is then possibly undone when the
freshly formed cluster overshoots the target size by more than its larger
child undershoots it. Top-down, subtrees smaller than ``c`` hanging off the
root path are marked as outliers until a merge with two large children is
reached. Relevance is the mean formation height of the reported clusters,
normalized by the root merge height so that a single root-level cluster
scores exactly 1.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .dendrogram import Dendrogram
from .errors import ValidationError
from .points import PointSet

TRANSITION = -1
PERIPHERY = -2


@dataclass(frozen=True)
class CutParams:
    """Target cluster count ``k``, target size ``s``, outlier threshold ``c``.

    ``s`` and ``c`` are point counts. ``c`` must stay below half the dataset
    so the top-down pruning always has a large child to descend into.
    """

    k: int
    s: int
    c: int

    def validate(self, n: int) -> None:
        if self.k < 1:
            raise ValidationError(f"k must be >= 1, got {self.k}")
        if not 1 <= self.s <= n:
            raise ValidationError(f"s must be in [1, {n}], got {self.s}")
        if not 0 <= self.c < n / 2:
            raise ValidationError(f"c must be in [0, {n / 2}), got {self.c}")


@dataclass(frozen=True)
class IdentifiedClusters:
    """Output of the bottom-up pass: subtree member sets and their formation heights."""

    clusters: tuple[frozenset[int], ...]
    heights: tuple[float, ...]
    stop_merge: int


@dataclass(frozen=True)
class CutResult:
    """Final clusters, outliers and relevance extracted from one dendrogram.

    ``cluster_heights`` are raw dendrogram heights at which each reported
    cluster formed; ``outlier_stop_height`` is the raw height of the merge
    where the top-down pruning stopped (the root height when nothing was
    pruned). ``n_pred`` counts clusters after the undo rule and before
    outlier subtraction.
    """

    clusters: tuple[frozenset[int], ...]
    cluster_heights: tuple[float, ...]
    outliers: frozenset[int]
    relevance: float
    n_pred: int
    outlier_stop_height: float

    def to_json(self) -> str:
        return json.dumps(
            {
                "clusters": [sorted(c) for c in self.clusters],
                "cluster_heights": list(self.cluster_heights),
                "outliers": sorted(self.outliers),
                "relevance": self.relevance,
                "n_pred": self.n_pred,
                "outlier_stop_height": self.outlier_stop_height,
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "CutResult":
        data = json.loads(text)
        return cls(
            clusters=tuple(frozenset(c) for c in data["clusters"]),
            cluster_heights=tuple(data["cluster_heights"]),
            outliers=frozenset(data["outliers"]),
            relevance=float(data["relevance"]),
            n_pred=int(data["n_pred"]),
            outlier_stop_height=float(data["outlier_stop_height"]),
        )


@dataclass(frozen=True)
class RegionLabels:
    """Per-point region codes: >= 0 nucleus (cluster index), -1 transition, -2 periphery."""

    codes: np.ndarray = field(repr=False)

    def __post_init__(self):
        codes = np.asarray(self.codes, dtype=np.int64)
        codes.setflags(write=False)
        object.__setattr__(self, "codes", codes)

    def as_strings(self) -> list[str]:
        out = []
        for c in self.codes:
            if c == TRANSITION:
                out.append("transition")
            elif c == PERIPHERY:
                out.append("outlier")
            else:
                out.append(str(int(c)))
        return out


def identify_clusters(d: Dendrogram, params: CutParams) -> IdentifiedClusters:
    """Bottom-up search for ``k`` clusters of at least ``s`` members.

    Replays merges in order, stopping at the first merge after which exactly
    ``k`` live clusters have size >= s, then applies the undo rule to the
    freshly formed cluster. When ``k`` such clusters never coexist the search
    falls back to ``k - 1`` and so on; the root is the last resort.
    """
    params.validate(d.n)
    for k in range(params.k, 0, -1):
        found = _identify_at(d, k, params.s)
        if found is not None:
            return found
    # Unreachable when s <= n (the root always satisfies k=1); kept defensive.
    root_id = 2 * d.n - 2
    return IdentifiedClusters(
        clusters=(frozenset(int(p) for p in d.members(root_id)),),
        heights=(d.root_height,),
        stop_merge=d.n_merges - 1,
    )


def _identify_at(d: Dendrogram, k: int, s: int) -> IdentifiedClusters | None:
    n = d.n
    size = np.ones(2 * n - 1, dtype=np.int64)
    size[n:] = d.sizes
    live = set(range(n))
    big = int(np.sum(size[:n] >= s))  # singletons count when s == 1

    for m in range(d.n_merges):
        left, right = (int(c) for c in d.children[m])
        new_id = n + m
        live.discard(left)
        live.discard(right)
        live.add(new_id)
        big += int(size[new_id] >= s) - int(size[left] >= s) - int(size[right] >= s)
        if big == k:
            chosen = sorted(cid for cid in live if size[cid] >= s)
            final = _apply_undo(d, new_id, s, chosen)
            clusters = tuple(frozenset(int(p) for p in d.members(cid)) for cid in final)
            heights = tuple(
                float(d.heights[cid - n]) if cid >= n else 0.0 for cid in final
            )
            return IdentifiedClusters(clusters=clusters, heights=heights, stop_merge=m)
    return None


def _apply_undo(d: Dendrogram, u: int, s: int, chosen: list[int]) -> list[int]:
    """Replace the freshly formed cluster by its larger child when it overshoots.

    The merge is kept iff (s_u - s) < (s - s_m) with s_m the larger child
    size; ties between equally sized children go to the earlier-created one.
    """
    if u not in chosen:
        return chosen
    q, t = (int(c) for c in d.children[u - d.n])
    s_u = d.size_of(u)
    s_q, s_t = d.size_of(q), d.size_of(t)
    s_m = max(s_q, s_t)
    if (s_u - s) < (s - s_m):
        return chosen
    if s_q > s_t:
        keep = q
    elif s_t > s_q:
        keep = t
    else:
        keep = min(q, t)
    return sorted(c for c in chosen if c != u) + [keep]


def prune_outliers(d: Dendrogram, c: int) -> frozenset[int]:
    """Top-down outlier detection: subtrees smaller than ``c`` near the root.

    Starting at the root merge, whenever one child has fewer than ``c``
    members its points are marked as outliers and the walk descends into the
    other child; it stops at the first merge whose children both have at
    least ``c`` members.
    """
    outliers, _ = _prune_walk(d, c)
    return outliers


def _prune_walk(d: Dendrogram, c: int) -> tuple[frozenset[int], float]:
    if c < 0:
        raise ValidationError(f"outlier threshold must be >= 0, got {c}")
    if c >= d.n:
        raise ValidationError(f"outlier threshold {c} would prune all {d.n} points")
    outliers: set[int] = set()
    node = 2 * d.n - 2
    stop_height = d.root_height
    while node >= d.n:
        merge = node - d.n
        stop_height = float(d.heights[merge])
        left, right = (int(x) for x in d.children[merge])
        s_left, s_right = d.size_of(left), d.size_of(right)
        if s_left >= c and s_right >= c:
            break
        if s_left < c and s_right < c:
            # Dead end: nothing large enough to descend into.
            break
        small, large = (left, right) if s_left < c else (right, left)
        outliers.update(int(p) for p in d.members(small))
        node = large
    return frozenset(outliers), stop_height


def relevance(d: Dendrogram, cluster_heights) -> float:
    """Mean formation height of the reported clusters over the root height.

    Clamped to [0, 1]; defined as 0 when the root height is 0 (all points
    identical).
    """
    heights = list(cluster_heights)
    if not heights:
        raise ValidationError("relevance needs at least one cluster height")
    root = d.root_height
    if root <= 0.0:
        return 0.0
    value = float(np.mean(heights)) / root
    return min(max(value, 0.0), 1.0)


def cut(d: Dendrogram, params: CutParams) -> CutResult:
    """Identify clusters, prune outliers and score relevance in one pass.

    Outlier points are removed from any identified cluster containing them;
    clusters emptied by the subtraction are dropped from the membership lists
    while ``n_pred`` keeps the pre-subtraction count.
    """
    params.validate(d.n)
    ident = identify_clusters(d, params)
    outliers, stop_height = _prune_walk(d, params.c)

    clusters: list[frozenset[int]] = []
    heights: list[float] = []
    for members, h in zip(ident.clusters, ident.heights):
        remaining = members - outliers
        if remaining:
            clusters.append(remaining)
            heights.append(h)
    rel = relevance(d, heights) if heights else 0.0
    return CutResult(
        clusters=tuple(clusters),
        cluster_heights=tuple(heights),
        outliers=outliers,
        relevance=rel,
        n_pred=len(ident.clusters),
        outlier_stop_height=stop_height,
    )


def region_labels(ps: PointSet, cr: CutResult) -> RegionLabels:
    """Label every point as nucleus (by cluster index), transition or periphery."""
    codes = np.full(ps.n, TRANSITION, dtype=np.int64)
    for idx, members in enumerate(cr.clusters):
        for p in members:
            codes[p] = idx
    for p in cr.outliers:
        codes[p] = PERIPHERY
    return RegionLabels(codes)


def region_labels_csv(labels: RegionLabels) -> str:
    """Single-column CSV body (with header) of per-point region labels."""
    return "\n".join(["region"] + labels.as_strings()) + "\n"
