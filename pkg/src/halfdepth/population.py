"""Closed-form halfspace depth for Gaussian and elliptical Gaussian laws.

For a radially symmetric law the depth of q is the Gaussian CDF at -|q|;
an elliptical Gaussian reduces to that case through an affine whitening
map. Each distribution also carries the constants that drive the
deviation bounds: a radial tail decay rate, a projected-density bound,
and a direction-Lipschitz bound for the projected CDF family.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import ndtr

from .geometry import Direction

SQRT_2PI = math.sqrt(2.0 * math.pi)

# Symmetry check tolerance for covariance input, absolute on entries
# relative to the largest entry.
_SYMMETRY_RTOL = 1e-10


def _phi(x):
    """Standard normal CDF via the complementary error function (ndtr)."""
    return ndtr(x)


@dataclass(frozen=True)
class DistributionSpec:
    """A population the harness can sample from and score against.

    family is "standard_normal" or "elliptical_normal". mu and sigma are
    carried as nested tuples so the value is hashable and immutable; use
    ``mu_array`` / ``sigma_array`` for numerics. lam, c1 bound the radial
    tail by c1 * R^(3d-5) * exp(-lam R^2 / 2); lpi bounds every projected
    density; ltheta bounds the change of the projected CDF per radian of
    direction change.
    """

    family: str
    d: int
    mu: tuple[float, ...]
    sigma: tuple[tuple[float, ...], ...]
    lam: float
    c1: float
    lpi: float
    ltheta: float

    def __post_init__(self):
        if self.family not in ("standard_normal", "elliptical_normal"):
            raise ValueError(f"unknown family {self.family!r}")
        if self.d < 1:
            raise ValueError(f"dimension must be >= 1, got {self.d}")
        if len(self.mu) != self.d:
            raise ValueError(f"mu has {len(self.mu)} coordinates, expected {self.d}")
        if len(self.sigma) != self.d or any(len(row) != self.d for row in self.sigma):
            raise ValueError(f"sigma must be {self.d}x{self.d}")
        for name in ("lam", "c1", "lpi"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.ltheta < 0:
            raise ValueError(f"ltheta must be nonnegative, got {self.ltheta}")

    @property
    def mu_array(self) -> np.ndarray:
        return np.asarray(self.mu, dtype=float)

    @property
    def sigma_array(self) -> np.ndarray:
        return np.asarray(self.sigma, dtype=float)

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "d": self.d,
            "mu": list(self.mu),
            "sigma": [list(row) for row in self.sigma],
            "lambda": self.lam,
            "C1": self.c1,
            "Lpi": self.lpi,
            "Ltheta": self.ltheta,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DistributionSpec":
        family = data["family"]
        d = int(data["d"])
        if family == "standard_normal":
            base = standard_normal(d)
            overrides = {}
            for key, field in (("lambda", "lam"), ("C1", "c1"), ("Lpi", "lpi"), ("Ltheta", "ltheta")):
                if key in data:
                    overrides[field] = float(data[key])
            return replace(base, **overrides) if overrides else base
        if family == "elliptical_normal":
            return elliptical_normal(
                np.asarray(data["mu"], dtype=float),
                np.asarray(data["sigma"], dtype=float),
                lam=float(data["lambda"]) if "lambda" in data else None,
                c1=float(data["C1"]) if "C1" in data else 1.0,
                lpi=float(data["Lpi"]) if "Lpi" in data else None,
                ltheta=float(data["Ltheta"]) if "Ltheta" in data else None,
            )
        raise ValueError(f"unknown family {family!r}")


def standard_normal(d: int, c1: float = 1.0) -> DistributionSpec:
    """Standard normal in dimension d: lam=1, Lpi=1/sqrt(2 pi), Ltheta=0."""
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    eye = tuple(tuple(1.0 if i == j else 0.0 for j in range(d)) for i in range(d))
    return DistributionSpec(
        family="standard_normal",
        d=d,
        mu=(0.0,) * d,
        sigma=eye,
        lam=1.0,
        c1=c1,
        lpi=1.0 / SQRT_2PI,
        ltheta=0.0,
    )


def _validated_covariance(sigma: np.ndarray) -> np.ndarray:
    sigma = np.asarray(sigma, dtype=float)
    if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1]:
        raise ValueError(f"covariance must be square, got shape {sigma.shape}")
    scale = max(1.0, float(np.abs(sigma).max()))
    asym = float(np.abs(sigma - sigma.T).max())
    if asym > _SYMMETRY_RTOL * scale:
        raise ValueError(f"covariance is not symmetric: max asymmetry {asym}")
    return 0.5 * (sigma + sigma.T)


def elliptical_normal(
    mu,
    sigma,
    lam: float | None = None,
    c1: float = 1.0,
    lpi: float | None = None,
    ltheta: float | None = None,
) -> DistributionSpec:
    """Gaussian with mean mu and SPD covariance sigma.

    Default constants when not supplied: lam = 1/max eigenvalue (radial
    decay of the dominant axis), lpi = 1/(sqrt(2 pi) * smallest projected
    standard deviation), and ltheta from differentiating the projected CDF
    Phi((t - <mu,u>)/sigma_u) along the sphere:
    (|mu| + (eig_max - eig_min)/(sqrt(e) * sigma_min)) / (sqrt(2 pi) * sigma_min).
    These are valid but not tight; pass explicit values to override.
    """
    mu = np.asarray(mu, dtype=float).reshape(-1)
    sigma = _validated_covariance(sigma)
    if sigma.shape[0] != mu.shape[0]:
        raise ValueError(f"mu has dimension {mu.shape[0]} but sigma is {sigma.shape[0]}x{sigma.shape[0]}")
    eigvals = np.linalg.eigvalsh(sigma)
    if eigvals[0] <= 0:
        raise ValueError(f"covariance is not positive definite: eigenvalue {eigvals[0]}")
    eig_min, eig_max = float(eigvals[0]), float(eigvals[-1])
    sigma_min = math.sqrt(eig_min)
    if lam is None:
        lam = 1.0 / eig_max
    if lpi is None:
        lpi = 1.0 / (SQRT_2PI * sigma_min)
    if ltheta is None:
        mu_norm = float(np.linalg.norm(mu))
        ltheta = (mu_norm + (eig_max - eig_min) / (math.sqrt(math.e) * sigma_min)) / (
            SQRT_2PI * sigma_min
        )
    return DistributionSpec(
        family="elliptical_normal",
        d=mu.shape[0],
        mu=tuple(mu),
        sigma=tuple(tuple(row) for row in sigma),
        lam=float(lam),
        c1=float(c1),
        lpi=float(lpi),
        ltheta=float(ltheta),
    )


@dataclass(frozen=True, eq=False)
class AffineReduction:
    """Whitening map y = D^-1 Q^T (x - mu) with sigma = Q D^2 Q^T."""

    rotation: np.ndarray  # Q, orthogonal, columns are eigenvectors
    scales: np.ndarray    # diagonal of D, positive, nonincreasing
    mu: np.ndarray

    def __post_init__(self):
        for name in ("rotation", "scales", "mu"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def to_reduced(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return (x - self.mu) @ self.rotation / self.scales

    def from_reduced(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        return (y * self.scales) @ self.rotation.T + self.mu


def affine_reduce(sigma, mu) -> AffineReduction:
    """Eigendecompose an SPD covariance into a deterministic whitening map.

    Eigenvalues are sorted in decreasing order and each eigenvector's sign
    is fixed so that its first component of nontrivial magnitude is
    positive, making the reduction reproducible across runs.
    """
    sigma = _validated_covariance(sigma)
    mu = np.asarray(mu, dtype=float).reshape(-1)
    if sigma.shape[0] != mu.shape[0]:
        raise ValueError(f"mu has dimension {mu.shape[0]} but sigma is {sigma.shape[0]}x{sigma.shape[0]}")
    eigvals, eigvecs = np.linalg.eigh(sigma)
    if eigvals[0] <= 0:
        raise ValueError(f"covariance is not positive definite: eigenvalue {float(eigvals[0])}")
    order = np.argsort(eigvals)[::-1]
    eigvals = eigvals[order]
    eigvecs = eigvecs[:, order]
    for j in range(eigvecs.shape[1]):
        col = eigvecs[:, j]
        nonzero = np.nonzero(np.abs(col) > 1e-12)[0]
        pivot = nonzero[0] if nonzero.size else 0
        if col[pivot] < 0:
            eigvecs[:, j] = -col
    return AffineReduction(rotation=eigvecs, scales=np.sqrt(eigvals), mu=mu)


def _projected_moments(dist: DistributionSpec, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Mean and standard deviation of <X, u> for each row u of a (m, d) array."""
    loc = u @ dist.mu_array
    var = np.einsum("md,de,me->m", u, dist.sigma_array, u)
    return loc, np.sqrt(var)


def cdf_projected(dist: DistributionSpec, theta: Direction, t: float) -> float:
    """CDF of the projection <X, theta> evaluated at t."""
    if theta.dim != dist.d:
        raise ValueError(f"direction has dimension {theta.dim}, distribution has {dist.d}")
    if dist.family == "standard_normal":
        return float(_phi(t))
    loc, scale = _projected_moments(dist, theta.array[None, :])
    return float(_phi((t - loc[0]) / scale[0]))


def cdf_projected_many(dist: DistributionSpec, directions: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Vectorized projected CDF: directions (m, d), t (..., m) -> same shape as t."""
    directions = np.asarray(directions, dtype=float)
    t = np.asarray(t, dtype=float)
    if dist.family == "standard_normal":
        return _phi(t)
    loc, scale = _projected_moments(dist, directions)
    return _phi((t - loc) / scale)


def population_depth(dist: DistributionSpec, q) -> float:
    """Halfspace depth of q under the population law.

    Standard normal: Phi(-|q|). Elliptical: Phi(-|y|) where y is the
    whitened image of q; depth is affine invariant, so the reduction is
    exact, not an approximation.
    """
    q = np.asarray(q, dtype=float).reshape(-1)
    if q.shape[0] != dist.d:
        raise ValueError(f"query has dimension {q.shape[0]}, distribution has {dist.d}")
    if dist.family == "standard_normal":
        return float(_phi(-np.linalg.norm(q)))
    reduction = affine_reduce(dist.sigma_array, dist.mu_array)
    y = reduction.to_reduced(q)
    return float(_phi(-np.linalg.norm(y)))


def tail_probability_bound(dist: DistributionSpec, radius: float) -> float:
    """Radial tail envelope c1 * R^(3d-5) * exp(-lam R^2 / 2), valid for R > 1."""
    if radius <= 1.0:
        raise ValueError(f"tail envelope requires R > 1, got {radius}")
    return dist.c1 * radius ** (3 * dist.d - 5) * math.exp(-dist.lam * radius * radius / 2.0)
