"""Point sets and CSV ingestion."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import IngestionError, ValidationError


@dataclass(frozen=True)
class PointSet:
    """An immutable n x dim matrix of finite coordinates.

    ``points`` is stored as a read-only float64 array; the original input is
    copied, so callers may keep mutating their own buffers.
    """

    points: np.ndarray = field(repr=False)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2:
            raise ValidationError(f"points must be 2-D, got shape {pts.shape}")
        if pts.shape[0] < 2:
            raise ValidationError(f"need at least 2 points, got {pts.shape[0]}")
        if pts.shape[1] < 1:
            raise ValidationError("points need at least one coordinate")
        if not np.isfinite(pts).all():
            raise ValidationError("points contain non-finite coordinates")
        pts = pts.copy()
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]


def read_points_csv(path: str | Path) -> PointSet:
    """Parse a headerless CSV of numeric rows into a PointSet.

    Errors name the offending row (1-based) so users can fix their files.
    """
    path = Path(path)
    rows: list[list[float]] = []
    width = None
    with open(path, newline="") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            cells = line.split(",")
            if width is None:
                width = len(cells)
            elif len(cells) != width:
                raise IngestionError(
                    f"{path}: row {lineno} has {len(cells)} columns, expected {width}"
                )
            try:
                rows.append([float(c) for c in cells])
            except ValueError:
                raise IngestionError(
                    f"{path}: row {lineno} contains a non-numeric cell"
                ) from None
    if not rows:
        raise IngestionError(f"{path}: no data rows found")
    if len(rows) < 2:
        raise IngestionError(f"{path}: need at least 2 points, found {len(rows)}")
    try:
        return PointSet(np.array(rows))
    except ValidationError as exc:
        raise IngestionError(f"{path}: {exc}") from None


def write_points_csv(ps: PointSet, path: str | Path) -> None:
    """Write one point per row, plain decimal floats, no header."""
    np.savetxt(path, ps.points, delimiter=",", fmt="%.17g")
