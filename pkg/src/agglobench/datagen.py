"""Synthetic unimodal and bimodal point distributions.

Four zero-centered unimodal families are provided: uniform in the unit ball,
standard gaussian, symmetrized exponential, and a degree-2 power law (each
coordinate is a squared uniform variate with a random sign, giving a density
that diverges at the origin). Bimodal datasets are built by drawing two
half-size sets, estimating their dispersions, and translating them apart by
``d = alpha * sigma / 2`` per coordinate; the power family flips the second
set first so the heavy tails point away from each other.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .points import PointSet, write_points_csv


class Family(enum.Enum):
    UNIFORM = "uniform"
    GAUSSIAN = "gaussian"
    POWER = "power"
    EXPONENTIAL = "exponential"

    def __str__(self) -> str:
        return self.value


class Modality(enum.Enum):
    UNIMODAL = "unimodal"
    BIMODAL = "bimodal"

    def __str__(self) -> str:
        return self.value


ALL_FAMILIES = tuple(Family)


@dataclass(frozen=True)
class DistributionSpec:
    """Recipe for one synthetic dataset."""

    family: Family
    dim: int
    modality: Modality
    n: int
    seed: int
    alpha: float = 4.0

    def __post_init__(self):
        if isinstance(self.family, str):
            object.__setattr__(self, "family", Family(self.family))
        if isinstance(self.modality, str):
            object.__setattr__(self, "modality", Modality(self.modality))
        if self.dim < 1:
            raise ValidationError(f"dim must be >= 1, got {self.dim}")
        if self.n < 2:
            raise ValidationError(f"n must be >= 2, got {self.n}")
        if self.alpha <= 0:
            raise ValidationError(f"alpha must be > 0, got {self.alpha}")
        if self.modality is Modality.BIMODAL and self.n % 2:
            raise ValidationError(f"bimodal n must be even, got {self.n}")

    def to_dict(self) -> dict:
        return {
            "family": self.family.value,
            "dim": self.dim,
            "modality": self.modality.value,
            "n": self.n,
            "seed": self.seed,
            "alpha": self.alpha,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DistributionSpec":
        return cls(
            family=Family(data["family"]),
            dim=int(data["dim"]),
            modality=Modality(data["modality"]),
            n=int(data["n"]),
            seed=int(data["seed"]),
            alpha=float(data.get("alpha", 4.0)),
        )


@dataclass(frozen=True)
class BimodalDerivation:
    """Dispersions and translation used to build one bimodal dataset.

    ``modes`` records which half each point was drawn in (0 or 1), kept for
    testing mode separation downstream.
    """

    sigma1: float
    sigma2: float
    sigma: float
    d: float
    modes: np.ndarray = field(repr=False)

    def __post_init__(self):
        modes = np.asarray(self.modes, dtype=np.int64)
        modes.setflags(write=False)
        object.__setattr__(self, "modes", modes)


def derive_seed(
    master_seed: int, family: Family, dim: int, modality: Modality, replicate: int
) -> int:
    """Deterministic per-dataset seed from experiment coordinates.

    Uses numpy's SeedSequence so independently generated datasets get
    independent, platform-stable streams.
    """
    fam_code = list(Family).index(family)
    mod_code = list(Modality).index(modality)
    ss = np.random.SeedSequence((int(master_seed), fam_code, dim, mod_code, replicate))
    return int(ss.generate_state(1, np.uint64)[0])


def _draw(family: Family, n: int, dim: int, rng: np.random.Generator) -> np.ndarray:
    if family is Family.GAUSSIAN:
        return rng.standard_normal((n, dim))
    if family is Family.UNIFORM:
        # Direction from a normalized gaussian, radius U^(1/dim): uniform in the unit ball.
        g = rng.standard_normal((n, dim))
        norms = np.linalg.norm(g, axis=1, keepdims=True)
        norms[norms == 0] = 1.0
        radii = rng.random(n) ** (1.0 / dim)
        return g / norms * radii[:, None]
    if family is Family.EXPONENTIAL:
        mags = rng.exponential(1.0, (n, dim))
        signs = np.where(rng.random((n, dim)) < 0.5, -1.0, 1.0)
        return mags * signs
    if family is Family.POWER:
        u = 1.0 - rng.random((n, dim))  # uniform on (0, 1]
        signs = np.where(rng.random((n, dim)) < 0.5, -1.0, 1.0)
        return signs * u**2
    raise ValidationError(f"unknown family {family}")


def sample_unimodal(spec: DistributionSpec) -> PointSet:
    """Draw one unimodal dataset."""
    if spec.modality is not Modality.UNIMODAL:
        raise ValidationError("sample_unimodal needs a unimodal spec")
    rng = np.random.default_rng(spec.seed)
    return PointSet(_draw(spec.family, spec.n, spec.dim, rng))


def make_bimodal(
    spec: DistributionSpec, translation_axis: int | None = None
) -> tuple[PointSet, BimodalDerivation]:
    """Draw one bimodal dataset plus the derivation that produced it.

    By default the translation ``d`` is applied to every coordinate; pass a
    ``translation_axis`` to shift along a single axis instead (sensitivity
    checks only).
    """
    if spec.modality is not Modality.BIMODAL:
        raise ValidationError("make_bimodal needs a bimodal spec")
    rng = np.random.default_rng(spec.seed)
    half = spec.n // 2
    s1 = _draw(spec.family, half, spec.dim, rng)
    s2 = _draw(spec.family, half, spec.dim, rng)
    # One dispersion scalar per set: sqrt of the mean per-coordinate variance.
    sigma1 = float(np.sqrt(s1.var(axis=0).mean()))
    sigma2 = float(np.sqrt(s2.var(axis=0).mean()))
    sigma = (sigma1 + sigma2) / 2.0
    d = spec.alpha * sigma / 2.0

    if spec.family is Family.POWER:
        s2 = -s2  # tails of the two modes point in opposite directions
    if translation_axis is None:
        s1 = s1 + d
        s2 = s2 - d
    else:
        if not 0 <= translation_axis < spec.dim:
            raise ValidationError(f"translation_axis {translation_axis} out of range")
        s1 = s1.copy()
        s2 = s2.copy()
        s1[:, translation_axis] += d
        s2[:, translation_axis] -= d

    points = np.vstack([s1, s2])
    modes = np.repeat([0, 1], half)
    derivation = BimodalDerivation(sigma1=sigma1, sigma2=sigma2, sigma=sigma, d=d, modes=modes)
    return PointSet(points), derivation


def sample(spec: DistributionSpec) -> PointSet:
    """Draw a dataset of either modality (derivation discarded for bimodal)."""
    if spec.modality is Modality.UNIMODAL:
        return sample_unimodal(spec)
    points, _ = make_bimodal(spec)
    return points


def export_dataset(ps: PointSet, spec: DistributionSpec, csv_path: str | Path) -> Path:
    """Write the dataset as headerless CSV with a JSON sidecar holding the spec."""
    csv_path = Path(csv_path)
    write_points_csv(ps, csv_path)
    sidecar = csv_path.with_suffix(".json")
    sidecar.write_text(json.dumps(spec.to_dict(), indent=2) + "\n")
    return sidecar


def load_spec(sidecar_path: str | Path) -> DistributionSpec:
    return DistributionSpec.from_dict(json.loads(Path(sidecar_path).read_text()))
