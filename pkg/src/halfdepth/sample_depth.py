"""Halfspace (Tukey) depth of a query point relative to a finite sample.

The depth of q is the smallest fraction of sample points contained in a
closed halfspace whose boundary passes through q. Equivalently it is the
minimum over unit directions of the empirical CDF of the projected sample
evaluated at the projected query. All counting here uses the closed
convention: points on the boundary hyperplane belong to both sides.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path

import numpy as np

from .geometry import SphericalCover
from .population import DistributionSpec, cdf_projected_many

# Boundary membership is decided up to this relative tolerance; anything
# within it is treated as lying on the hyperplane (and counted on both
# sides, per the closed convention).
TIE_RTOL = 1e-12

# Angular nudge used to probe both open sides of a candidate hyperplane
# that touches sample points.
NUDGE_RADIANS = 1e-7

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class DepthValue:
    """Exact sample depth as an integer count over n."""

    count: int
    n: int

    def __post_init__(self):
        if not (0 <= self.count <= self.n):
            raise ValueError(f"count {self.count} outside [0, {self.n}]")

    @property
    def value(self) -> float:
        return self.count / self.n

    def to_dict(self) -> dict:
        return {"count": self.count, "n": self.n, "value": self.value}


@dataclass(frozen=True)
class DepthInterval:
    """Certified enclosure of the exact depth from a cover-based evaluation."""

    lower: float
    upper: float
    psi: float
    radius: float

    def __post_init__(self):
        if self.lower > self.upper:
            raise ValueError(f"lower {self.lower} exceeds upper {self.upper}")

    def to_dict(self) -> dict:
        return {"lower": self.lower, "upper": self.upper, "psi": self.psi, "R": self.radius}


@dataclass(frozen=True, eq=False)
class Sample:
    """An immutable (n, d) array of sample points."""

    points: np.ndarray

    def __post_init__(self):
        arr = np.array(self.points, dtype=float)
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"sample must be a nonempty (n, d) array, got shape {arr.shape}")
        if not np.isfinite(arr).all():
            raise ValueError("sample contains non-finite coordinates")
        arr.setflags(write=False)
        object.__setattr__(self, "points", arr)

    @property
    def n(self) -> int:
        return int(self.points.shape[0])

    @property
    def dim(self) -> int:
        return int(self.points.shape[1])

    @classmethod
    def from_csv(cls, path) -> "Sample":
        """Load one point per line, comma-separated coordinates, no header."""
        rows = []
        width = None
        text = Path(path).read_text()
        for i, line in enumerate(text.splitlines()):
            if not line.strip():
                continue
            tokens = line.split(",")
            if width is None:
                width = len(tokens)
            elif len(tokens) != width:
                raise ValueError(
                    f"sample CSV row {i + 1}: expected {width} columns, found {len(tokens)}"
                )
            row = []
            for j, tok in enumerate(tokens):
                try:
                    row.append(float(tok))
                except ValueError:
                    raise ValueError(
                        f"sample CSV row {i + 1}, column {j + 1}: cannot parse {tok.strip()!r}"
                    ) from None
            rows.append(row)
        if not rows:
            raise ValueError("sample CSV contains no data rows")
        return cls(np.asarray(rows))

    @classmethod
    def from_json(cls, path) -> "Sample":
        """Load from a JSON object with a "points" list of coordinate lists."""
        data = json.loads(Path(path).read_text())
        if not isinstance(data, dict) or "points" not in data:
            raise ValueError('sample JSON must be an object with a "points" key')
        pts = data["points"]
        if not isinstance(pts, list) or not pts:
            raise ValueError('sample JSON "points" must be a nonempty list')
        first = pts[0]
        width = len(first) if isinstance(first, list) else 1
        for i, row in enumerate(pts):
            got = len(row) if isinstance(row, list) else 1
            if got != width:
                raise ValueError(f"sample JSON point {i}: expected {width} coordinates, found {got}")
        return cls(np.asarray(pts, dtype=float))


def _boundary_tol(magnitudes) -> np.ndarray:
    """Relative tie tolerance scaled by the magnitudes involved."""
    return TIE_RTOL * np.maximum(1.0, magnitudes)


def depth_1d(q: float, sample: Sample) -> DepthValue:
    """Depth on the line: the smaller of the closed left and right counts."""
    if sample.dim != 1:
        raise ValueError(f"depth_1d requires a 1-dimensional sample, got d={sample.dim}")
    x = sample.points[:, 0]
    q = float(q)
    tol = _boundary_tol(np.maximum(np.abs(x), abs(q)))
    left = int(np.count_nonzero(x <= q + tol))
    right = int(np.count_nonzero(x >= q - tol))
    return DepthValue(count=min(left, right), n=sample.n)


def depth_exact_2d(q, sample: Sample) -> DepthValue:
    """Exact planar depth by a rotating sweep over critical angles.

    Translate q to the origin and reduce each closed halfplane through q
    to a closed half-circle of polar angles. The count of angles in a
    closed arc of length pi is piecewise constant as the arc rotates and
    only changes where an arc endpoint crosses a data angle, so the
    minimum over all halfplanes is attained strictly between consecutive
    critical angles. Evaluating the count at every such midpoint (via
    binary search on the sorted angles) gives the exact minimum in
    O(n log n). Points coinciding with q lie in every closed halfplane
    and contribute a constant offset.
    """
    if sample.dim != 2:
        raise ValueError(f"depth_exact_2d requires a 2-dimensional sample, got d={sample.dim}")
    q = np.asarray(q, dtype=float).reshape(-1)
    if q.shape[0] != 2:
        raise ValueError(f"query has dimension {q.shape[0]}, expected 2")
    y = sample.points - q
    norms = np.linalg.norm(y, axis=1)
    scale = np.maximum(norms, np.linalg.norm(q))
    coincident = norms <= _boundary_tol(scale)
    base = int(np.count_nonzero(coincident))
    y = y[~coincident]
    if y.shape[0] == 0:
        return DepthValue(count=base, n=sample.n)
    angles = np.sort(np.mod(np.arctan2(y[:, 1], y[:, 0]), TWO_PI))
    breaks = np.unique(np.concatenate([angles, np.mod(angles - math.pi, TWO_PI)]))
    gaps = np.diff(breaks, append=breaks[0] + TWO_PI)
    starts = np.mod(breaks + 0.5 * gaps, TWO_PI)
    ends = starts + math.pi
    wrap = ends > TWO_PI
    lo = np.searchsorted(angles, starts, side="left")
    hi = np.searchsorted(angles, np.where(wrap, ends - TWO_PI, ends), side="right")
    counts = np.where(wrap, (angles.size - lo) + hi, hi - lo)
    return DepthValue(count=base + int(counts.min()), n=sample.n)


def _brute_candidates(y: np.ndarray, norms: np.ndarray) -> np.ndarray:
    """Candidate normals: null directions of <= d-1 point subsets, nudged off contact."""
    n, d = y.shape
    generic = np.random.default_rng(0xD1CE).standard_normal((d, d))
    live = np.nonzero(norms > 0)[0]
    normals = []
    for size in range(0, d):
        for subset in combinations(live, size):
            rows = y[list(subset)]
            basis = []
            ok = True
            for row in rows:
                v = row.copy()
                for b in basis:
                    v -= (v @ b) * b
                nv = np.linalg.norm(v)
                if nv <= 1e-10 * max(1.0, np.linalg.norm(row)):
                    ok = False  # affinely degenerate subset, smaller ones cover it
                    break
                basis.append(v / nv)
            if not ok:
                continue
            for g in generic:
                if len(basis) == d - 1:
                    break
                v = g.copy()
                for b in basis:
                    v -= (v @ b) * b
                nv = np.linalg.norm(v)
                if nv > 1e-10:
                    basis.append(v / nv)
            if len(basis) != d - 1:
                continue
            span = np.vstack(basis)
            _, _, vt = np.linalg.svd(span)
            normal = vt[-1]
            normals.append(normal)
            if subset:
                touch = y[list(subset)] / norms[list(subset), None]
                cos_e, sin_e = math.cos(NUDGE_RADIANS), math.sin(NUDGE_RADIANS)
                # Probe every open region around the contact set: rotate a
                # little toward each signed combination of touching points.
                for signs in np.ndindex(*(2,) * len(subset)):
                    shift = sum((1.0 if s else -1.0) * t for s, t in zip(signs, touch))
                    shift_norm = np.linalg.norm(shift)
                    if shift_norm == 0.0:
                        continue
                    nudged = cos_e * normal + sin_e * shift / shift_norm
                    normals.append(nudged / np.linalg.norm(nudged))
    return np.asarray(normals)


def depth_brute(q, sample: Sample) -> DepthValue:
    """Reference depth by enumerating candidate halfspace normals.

    The minimizing closed halfspace can be rotated until its boundary
    touches at most d-1 sample points, so normals orthogonal to every
    subset of that size (completed with fixed generic directions when the
    subset is small) catch the optimum up to boundary contact. Nudging
    each contact normal by a tiny rotation in every signed combination of
    the touching points probes the adjacent open regions, and counting
    both closed sides of every candidate yields the exact minimum. Meant
    for small n as an oracle; cost grows like n^(d-1).
    """
    q = np.asarray(q, dtype=float).reshape(-1)
    if q.shape[0] != sample.dim:
        raise ValueError(f"query has dimension {q.shape[0]}, sample has {sample.dim}")
    if sample.dim == 1:
        return depth_1d(q[0], sample)
    y = sample.points - q
    norms = np.linalg.norm(y, axis=1)
    scale = np.maximum(norms, np.linalg.norm(q))
    on_query = norms <= _boundary_tol(scale)
    if bool(on_query.all()):
        return DepthValue(count=sample.n, n=sample.n)
    normals = _brute_candidates(y, np.where(on_query, 0.0, norms))
    proj = y @ normals.T
    tol = _boundary_tol(norms)[:, None]
    below = np.count_nonzero(proj <= tol, axis=0)
    above = np.count_nonzero(proj >= -tol, axis=0)
    best = int(min(below.min(), above.min()))
    return DepthValue(count=best, n=sample.n)


def _cover_counts(y: np.ndarray, cover: SphericalCover, threshold: float, closed_tol: bool) -> int:
    proj = y @ cover.centers.T
    if closed_tol:
        tol = _boundary_tol(np.abs(proj))
        counts = np.count_nonzero(proj <= threshold + tol, axis=0)
    else:
        counts = np.count_nonzero(proj <= threshold, axis=0)
    return int(counts.min())


def depth_approx(q, sample: Sample, cover: SphericalCover) -> DepthValue:
    """Depth minimized over the cover's directions only.

    Always an upper bound for the exact depth (the minimum over all
    directions); exact whenever the cover happens to contain a minimizing
    direction.
    """
    q = np.asarray(q, dtype=float).reshape(-1)
    if q.shape[0] != sample.dim or cover.d != sample.dim:
        raise ValueError(
            f"dimension mismatch: sample d={sample.dim}, query {q.shape[0]}, cover {cover.d}"
        )
    y = sample.points - q
    count = _cover_counts(y, cover, 0.0, closed_tol=True)
    return DepthValue(count=count, n=sample.n)


def depth_certified(q, sample: Sample, cover: SphericalCover) -> DepthInterval:
    """Two-sided enclosure of the exact depth from a single cover pass.

    With q at the origin, projections onto directions within psi of a
    cover center differ by at most R*psi, where R is the largest sample
    distance from q. Counting at threshold 0 over the centers upper-bounds
    the exact depth; counting at threshold -R*psi lower-bounds it.
    """
    q = np.asarray(q, dtype=float).reshape(-1)
    if q.shape[0] != sample.dim or cover.d != sample.dim:
        raise ValueError(
            f"dimension mismatch: sample d={sample.dim}, query {q.shape[0]}, cover {cover.d}"
        )
    y = sample.points - q
    radius = float(np.linalg.norm(y, axis=1).max())
    upper = _cover_counts(y, cover, 0.0, closed_tol=True)
    # Plain (untoleranced) comparison keeps the lower bound conservative.
    lower = _cover_counts(y, cover, -radius * cover.psi, closed_tol=False)
    n = sample.n
    return DepthInterval(lower=lower / n, upper=upper / n, psi=cover.psi, radius=radius)


def ks_statistic(values: np.ndarray, cdf_values: np.ndarray) -> float:
    """Exact two-sided Kolmogorov-Smirnov statistic from order statistics.

    values are the sample points (any order); cdf_values must be the
    population CDF evaluated at the corresponding points. The sup over all
    thresholds of |F_n - F| is attained at the jumps, i.e. at
    max(F(x_(i)) - (i-1)/n, i/n - F(x_(i))).
    """
    values = np.asarray(values, dtype=float).reshape(-1)
    cdf_values = np.asarray(cdf_values, dtype=float).reshape(-1)
    if values.shape != cdf_values.shape or values.size == 0:
        raise ValueError("values and cdf_values must be equal-length nonempty arrays")
    order = np.argsort(values)
    f = cdf_values[order]
    n = values.size
    i = np.arange(1, n + 1)
    return float(np.maximum(f - (i - 1) / n, i / n - f).max())


def _ks_per_column(z_sorted: np.ndarray, f: np.ndarray) -> np.ndarray:
    n = z_sorted.shape[0]
    i = np.arange(1, n + 1, dtype=float)[:, None]
    return np.maximum(f - (i - 1.0) / n, i / n - f).max(axis=0)


def sup_deviation(sample: Sample, dist: DistributionSpec, cover: SphericalCover | None) -> float:
    """Largest exact KS distance between projected sample and projected law.

    The maximum runs over the cover's directions (for d=1 over the single
    axis direction, where reflection gives the same statistic and no cover
    is needed). This is a lower estimate of the supremum over all
    directions; the gap is controlled by the cover radius and the
    distribution's Lipschitz constants.
    """
    if sample.dim != dist.d:
        raise ValueError(f"sample has dimension {sample.dim}, distribution has {dist.d}")
    if sample.dim == 1:
        axis = np.array([[1.0]])
        z = np.sort(sample.points, axis=0)
        f = cdf_projected_many(dist, axis, z)
        return float(_ks_per_column(z, f)[0])
    if cover is None:
        raise ValueError(f"a cover is required for d={sample.dim}")
    if cover.d != sample.dim:
        raise ValueError(f"cover has dimension {cover.d}, sample has {sample.dim}")
    z = np.sort(sample.points @ cover.centers.T, axis=0)
    f = cdf_projected_many(dist, cover.centers, z)
    return float(_ks_per_column(z, f).max())
