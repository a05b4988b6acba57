"""Merge trees produced by agglomerative clustering.

Cluster ids follow the usual convention: 0..n-1 are the original points,
and merge ``i`` creates cluster id ``n + i``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class Dendrogram:
    """Full merge history of n points: n-1 merges with heights and sizes.

    ``children[i]`` holds the two cluster ids joined by merge ``i`` with
    ``children[i, 0] < children[i, 1]``; ``heights[i]`` is the inter-cluster
    distance at which they were joined and ``sizes[i]`` the resulting member
    count.
    """

    n: int
    children: np.ndarray = field(repr=False)
    heights: np.ndarray = field(repr=False)
    sizes: np.ndarray = field(repr=False)

    def __post_init__(self):
        children = np.asarray(self.children, dtype=np.int64)
        heights = np.asarray(self.heights, dtype=np.float64)
        sizes = np.asarray(self.sizes, dtype=np.int64)
        if self.n < 2:
            raise ValidationError(f"need n >= 2, got {self.n}")
        if children.shape != (self.n - 1, 2):
            raise ValidationError(f"children must have shape ({self.n - 1}, 2)")
        if heights.shape != (self.n - 1,) or sizes.shape != (self.n - 1,):
            raise ValidationError("heights/sizes must have one entry per merge")
        for arr in (children, heights, sizes):
            arr.setflags(write=False)
        object.__setattr__(self, "children", children)
        object.__setattr__(self, "heights", heights)
        object.__setattr__(self, "sizes", sizes)

    @property
    def n_merges(self) -> int:
        return self.n - 1

    @property
    def root_height(self) -> float:
        """Height of the final merge (not necessarily the maximum under inversions)."""
        return float(self.heights[-1])

    def size_of(self, cluster_id: int) -> int:
        return 1 if cluster_id < self.n else int(self.sizes[cluster_id - self.n])

    def members(self, cluster_id: int) -> np.ndarray:
        """Sorted original point ids contained in ``cluster_id``."""
        if cluster_id < self.n:
            return np.array([cluster_id], dtype=np.int64)
        out = []
        stack = [cluster_id]
        while stack:
            cid = stack.pop()
            if cid < self.n:
                out.append(cid)
            else:
                stack.extend(self.children[cid - self.n])
        out.sort()
        return np.array(out, dtype=np.int64)

    def to_json(self) -> str:
        merges = [
            [int(l), int(r), float(h), int(s)]
            for (l, r), h, s in zip(self.children, self.heights, self.sizes)
        ]
        return json.dumps({"n": self.n, "merges": merges})

    @classmethod
    def from_json(cls, text: str) -> "Dendrogram":
        data = json.loads(text)
        try:
            n = int(data["n"])
            merges = data["merges"]
        except (KeyError, TypeError):
            raise ValidationError("dendrogram JSON needs 'n' and 'merges'") from None
        if len(merges) != n - 1:
            raise ValidationError(f"expected {n - 1} merges, got {len(merges)}")
        arr = np.asarray(merges, dtype=np.float64).reshape(n - 1, 4)
        return cls(
            n=n,
            children=arr[:, :2].astype(np.int64),
            heights=arr[:, 2].copy(),
            sizes=arr[:, 3].astype(np.int64),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json() + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "Dendrogram":
        return cls.from_json(Path(path).read_text())


@dataclass(frozen=True)
class Violation:
    """One broken invariant, anchored at a merge index (-1 for global checks)."""

    kind: str
    merge: int
    message: str


@dataclass(frozen=True)
class DendrogramValidation:
    violations: tuple[Violation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    def kinds(self) -> set[str]:
        return {v.kind for v in self.violations}


def validate_dendrogram(d: Dendrogram) -> DendrogramValidation:
    """Check every structural invariant and report all violations found."""
    n = d.n
    found: list[Violation] = []
    seen_as_child = np.zeros(2 * n - 1, dtype=bool)
    true_sizes = np.ones(2 * n - 1, dtype=np.int64)

    for i in range(d.n_merges):
        left, right = int(d.children[i, 0]), int(d.children[i, 1])
        new_id = n + i
        for cid in (left, right):
            if not 0 <= cid < 2 * n - 1:
                found.append(Violation("unknown-child", i, f"merge {i}: child id {cid} out of range"))
                continue
            if cid >= new_id:
                found.append(
                    Violation("use-before-creation", i, f"merge {i}: child {cid} not yet created")
                )
                continue
            if seen_as_child[cid]:
                found.append(
                    Violation("double-parent", i, f"merge {i}: child {cid} already merged elsewhere")
                )
            seen_as_child[cid] = True
        if left == right:
            found.append(Violation("self-merge", i, f"merge {i}: joins {left} with itself"))
        if 0 <= left < new_id and 0 <= right < new_id:
            expected = true_sizes[left] + true_sizes[right]
            true_sizes[new_id] = expected
            if d.sizes[i] != expected:
                found.append(
                    Violation(
                        "size",
                        i,
                        f"merge {i}: recorded size {d.sizes[i]}, children sum to {expected}",
                    )
                )
        h = d.heights[i]
        if not np.isfinite(h) or h < 0:
            found.append(Violation("height", i, f"merge {i}: height {h} not a finite non-negative"))

    if d.n_merges and d.sizes[-1] != n:
        found.append(Violation("root-size", d.n_merges - 1, f"final merge size {d.sizes[-1]} != n={n}"))
    return DendrogramValidation(tuple(found))


def monotonic_heights(d: Dendrogram) -> bool:
    """True when merge heights never decrease along the merge sequence."""
    return bool(np.all(np.diff(d.heights) >= 0))


def flat_clusters(d: Dendrogram, threshold: float) -> np.ndarray:
    """Partition labels after applying every merge with height <= threshold.

    Returns one label per original point; labels are arbitrary but contiguous
    from zero. For inversion-free dendrograms this is the classic horizontal
    cut at ``threshold``.
    """
    parent = np.arange(2 * d.n - 1)

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i in range(d.n_merges):
        if d.heights[i] <= threshold:
            new_id = d.n + i
            parent[find(int(d.children[i, 0]))] = new_id
            parent[find(int(d.children[i, 1]))] = new_id

    roots = np.array([find(i) for i in range(d.n)])
    _, labels = np.unique(roots, return_inverse=True)
    return labels
