"""Unit directions, projections, and constructive coverings of the sphere.

Halfspace depth is a minimum over directions, so everything downstream
leans on two facts implemented here: projections onto nearby directions
differ by at most ``|x| * angle`` (chords are shorter than arcs), and the
sphere of directions can be covered by finitely many caps of a chosen
angular radius.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Unit-norm validation tolerance, relative to 1.
UNIT_NORM_RTOL = 1e-12

# Dot products of unit vectors can land just outside [-1, 1] after
# floating-point rounding; clamp before arccos.
def _safe_arccos(x):
    return np.arccos(np.clip(x, -1.0, 1.0))


def max_cover_radius(d: int) -> float:
    """Largest admissible cap radius for covers of S^(d-1): arccos(d^-1/2)."""
    if d < 2:
        raise ValueError(f"covers require dimension >= 2, got d={d}")
    return math.acos(d ** -0.5)


@dataclass(frozen=True)
class Direction:
    """A point on the unit sphere, stored as a coordinate tuple."""

    coordinates: tuple[float, ...]

    def __post_init__(self):
        coords = tuple(float(c) for c in self.coordinates)
        if len(coords) < 1:
            raise ValueError("direction needs at least one coordinate")
        norm = math.sqrt(math.fsum(c * c for c in coords))
        if abs(norm - 1.0) > UNIT_NORM_RTOL:
            raise ValueError(f"direction norm {norm!r} is not 1 within {UNIT_NORM_RTOL}")
        object.__setattr__(self, "coordinates", coords)

    @property
    def dim(self) -> int:
        return len(self.coordinates)

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.coordinates, dtype=float)

    @classmethod
    def from_vector(cls, v) -> "Direction":
        """Normalize a nonzero vector into a Direction."""
        arr = np.asarray(v, dtype=float).reshape(-1)
        norm = float(np.linalg.norm(arr))
        if norm == 0.0 or not math.isfinite(norm):
            raise ValueError("cannot normalize a zero or non-finite vector")
        return cls(tuple(arr / norm))


def project(p, theta: Direction) -> float:
    """Signed scalar projection of point p onto the direction theta.

    Parameters
    ----------
    p : array_like, shape (d,)
        Point to project.
    theta : Direction
        Unit direction of matching dimension.

    Returns
    -------
    float
        Inner product of p with the unit vector of theta.
    """
    arr = np.asarray(p, dtype=float).reshape(-1)
    if arr.shape[0] != theta.dim:
        raise ValueError(
            f"dimension mismatch: point has {arr.shape[0]} coordinates, direction has {theta.dim}"
        )
    return float(arr @ theta.array)


def spherical_distance(theta: Direction, phi: Direction) -> float:
    """Geodesic (great-circle) distance between two directions, in [0, pi]."""
    if theta.dim != phi.dim:
        raise ValueError(f"dimension mismatch: {theta.dim} vs {phi.dim}")
    return float(_safe_arccos(theta.array @ phi.array))


@dataclass(frozen=True, eq=False)
class SphericalCover:
    """A finite set of directions meant to cover S^(d-1) at cap radius psi.

    The covering property itself is checked statistically by
    ``verify_cover``; the constructor only validates shapes, unit norms,
    and the admissible psi range.
    """

    centers: np.ndarray
    psi: float

    def __post_init__(self):
        arr = np.array(self.centers, dtype=float)
        if arr.ndim != 2 or arr.shape[0] < 1:
            raise ValueError("centers must be a nonempty (m, d) array")
        d = arr.shape[1]
        psi = float(self.psi)
        if not (0.0 < psi < max_cover_radius(d)):
            raise ValueError(
                f"cover radius {psi} outside (0, arccos(d^-1/2)) = (0, {max_cover_radius(d):.6f}) for d={d}"
            )
        norms = np.linalg.norm(arr, axis=1)
        bad = np.nonzero(np.abs(norms - 1.0) > UNIT_NORM_RTOL)[0]
        if bad.size:
            raise ValueError(f"center {bad[0]} has norm {norms[bad[0]]!r}, expected 1")
        arr.setflags(write=False)
        object.__setattr__(self, "centers", arr)
        object.__setattr__(self, "psi", psi)

    @property
    def d(self) -> int:
        return int(self.centers.shape[1])

    @property
    def n_centers(self) -> int:
        return int(self.centers.shape[0])

    def directions(self) -> tuple[Direction, ...]:
        return tuple(Direction(tuple(row)) for row in self.centers)

    def to_dict(self) -> dict:
        return {"d": self.d, "psi": self.psi, "centers": self.centers.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "SphericalCover":
        centers = np.asarray(data["centers"], dtype=float)
        if "d" in data and centers.ndim == 2 and centers.shape[1] != int(data["d"]):
            raise ValueError(
                f"cover dictionary says d={data['d']} but centers have {centers.shape[1]} coordinates"
            )
        return cls(centers, float(data["psi"]))


@dataclass(frozen=True)
class CoverCheck:
    """Statistical covering report: largest observed gap over sampled directions."""

    max_gap: float
    passed: bool
    trials: int
    psi: float

    def to_dict(self) -> dict:
        return {
            "max_gap": self.max_gap,
            "pass": self.passed,
            "trials": self.trials,
            "psi": self.psi,
        }


def sample_directions(d: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform directions on S^(d-1) via normalized iid Gaussians, shape (size, d)."""
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    v = rng.standard_normal((size, d))
    norms = np.linalg.norm(v, axis=1)
    # A zero draw has probability zero; redraw defensively if it happens.
    while np.any(norms == 0.0):
        bad = norms == 0.0
        v[bad] = rng.standard_normal((int(bad.sum()), d))
        norms = np.linalg.norm(v, axis=1)
    return v / norms[:, None]


def verify_cover(
    cover: SphericalCover,
    trials: int,
    rng: np.random.Generator | None = None,
    chunk: int = 20_000,
) -> CoverCheck:
    """Sample uniform directions and report the largest gap to the nearest center.

    Passes when every sampled direction lies within psi of some center.
    This is a statistical check, not a proof; trials around 1e5 are
    adequate at the cap radii used here.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if rng is None:
        rng = np.random.default_rng(0)
    centers_t = cover.centers.T
    min_best_dot = 1.0
    remaining = int(trials)
    while remaining > 0:
        k = min(chunk, remaining)
        g = sample_directions(cover.d, k, rng)
        best = (g @ centers_t).max(axis=1)
        min_best_dot = min(min_best_dot, float(best.min()))
        remaining -= k
    max_gap = float(_safe_arccos(min_best_dot))
    return CoverCheck(max_gap=max_gap, passed=max_gap <= cover.psi, trials=int(trials), psi=cover.psi)


def _fibonacci_sphere(count: int) -> np.ndarray:
    """Fibonacci lattice on S^2: near-uniform deterministic point set."""
    golden = (1.0 + math.sqrt(5.0)) / 2.0
    i = np.arange(count, dtype=float)
    z = 1.0 - 2.0 * (i + 0.5) / count
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    lon = 2.0 * math.pi * i / golden
    pts = np.column_stack([r * np.cos(lon), r * np.sin(lon), z])
    return pts / np.linalg.norm(pts, axis=1)[:, None]


def _lemma_count(d: int, psi: float) -> int:
    # Simplified covering-count form with unit leading constant, used only
    # to size the initial candidate set before verification.
    count = (math.sqrt(d) / psi) ** (d - 1) * (d - 1) ** 1.5 * math.log(d)
    return max(2 * d, int(math.ceil(count)))


def build_cover(
    d: int,
    psi: float,
    rng: np.random.Generator | None = None,
    verify_trials: int = 100_000,
    slack: float = 0.9,
    growth: float = 1.3,
    max_rounds: int = 40,
) -> SphericalCover:
    """Construct a cover of S^(d-1) by caps of radius psi.

    d=2 uses exactly ceil(pi/psi)+1 equally spaced angles, which covers the
    circle deterministically (no verification needed). d=3 uses a Fibonacci
    lattice and d>=4 uniform random centers, both sized from the simplified
    covering-count formula and grown geometrically until a statistical check
    passes at radius slack*psi. The slack leaves headroom so independent
    re-verification at radius psi is comfortably safe.

    Parameters
    ----------
    d : int
        Ambient dimension, >= 2.
    psi : float
        Cap radius, in (0, arccos(d^-1/2)).
    rng : numpy.random.Generator, optional
        Source of randomness for d >= 3 construction and verification.
        Defaults to a generator seeded with 0 so results are reproducible.
    """
    limit = max_cover_radius(d)
    if not (0.0 < psi < limit):
        raise ValueError(f"cover radius {psi} outside (0, {limit:.6f}) for d={d}")
    if d == 2:
        count = int(math.ceil(math.pi / psi)) + 1
        angles = 2.0 * math.pi * np.arange(count) / count
        centers = np.column_stack([np.cos(angles), np.sin(angles)])
        return SphericalCover(centers, psi)
    if rng is None:
        rng = np.random.default_rng(0)
    count = _lemma_count(d, psi)
    for _ in range(max_rounds):
        if d == 3:
            centers = _fibonacci_sphere(count)
        else:
            centers = sample_directions(d, count, rng)
        candidate = SphericalCover(centers, psi)
        check = verify_cover(candidate, verify_trials, rng)
        if check.max_gap <= slack * psi:
            return candidate
        count = int(math.ceil(count * growth))
    raise RuntimeError(
        f"could not verify a cover of S^{d - 1} at radius {psi} within {max_rounds} growth rounds"
    )
