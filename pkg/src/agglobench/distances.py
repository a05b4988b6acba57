"""Condensed pairwise Euclidean distances."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .points import PointSet


@dataclass(frozen=True)
class CondensedDistances:
    """Upper-triangle storage of a symmetric n x n distance matrix.

    Entry (i, j) with i < j lives at ``condensed_index(n, i, j)``.
    """

    values: np.ndarray = field(repr=False)
    n: int

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        expected = self.n * (self.n - 1) // 2
        if self.n < 2:
            raise ValidationError(f"need n >= 2, got {self.n}")
        if vals.shape != (expected,):
            raise ValidationError(
                f"expected {expected} condensed entries for n={self.n}, got {vals.shape}"
            )
        if not np.isfinite(vals).all():
            raise ValidationError("distances contain non-finite values")
        if (vals < 0).any():
            raise ValidationError("distances contain negative values")
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def to_square(self) -> np.ndarray:
        """Expand to a full symmetric matrix (zero diagonal)."""
        sq = np.zeros((self.n, self.n))
        iu = np.triu_indices(self.n, k=1)
        sq[iu] = self.values
        sq[(iu[1], iu[0])] = self.values
        return sq


def condensed_index(n: int, i: int, j: int) -> int:
    """Index of pair (i, j), i != j, in the condensed vector for n points."""
    if i > j:
        i, j = j, i
    return n * i - (i * (i + 1) // 2) + (j - i - 1)


def pairwise_distances(ps: PointSet) -> CondensedDistances:
    """Euclidean distances between all point pairs, condensed form."""
    pts = ps.points
    n = ps.n
    out = np.empty(n * (n - 1) // 2)
    start = 0
    for i in range(n - 1):
        diff = pts[i + 1 :] - pts[i]
        m = diff.shape[0]
        np.sqrt(np.einsum("ij,ij->i", diff, diff), out=out[start : start + m])
        start += m
    return CondensedDistances(out, n)
