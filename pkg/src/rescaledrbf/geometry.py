"""Point sets, domains, quasi-random node generation, and fill-distance.

Everything in this module is plain geometry: no kernels, no linear algebra.
Point sets are immutable ``(N, d)`` float arrays wrapped together with an
optional domain descriptor that knows membership and a bounding box.
"""

import numpy as np
from dataclasses import dataclass, field

# Two points closer than this are considered coincident; Gram matrices for
# coincident points are singular, so PointSet construction rejects them.
DISTINCT_TOL = 1e-12


def _as_point_array(points):
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2:
        raise ValueError(f"points must be a (N, d) array, got shape {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise ValueError("points contain non-finite coordinates")
    return pts


def min_pairwise_distance(points):
    """Smallest Euclidean distance between any two rows of ``points``."""
    pts = _as_point_array(points)
    if len(pts) < 2:
        return np.inf
    from scipy.spatial.distance import pdist

    return float(pdist(pts).min())


# ---------------------------------------------------------------------------
# Domains
# ---------------------------------------------------------------------------

class Domain:
    """Base class for membership-testable regions of R^d."""

    dim = None

    def contains(self, points):
        """Boolean membership mask for an ``(N, d)`` array of points."""
        raise NotImplementedError

    def bounding_box(self):
        """Axis-aligned bounding box as a pair of length-d arrays (lo, hi)."""
        raise NotImplementedError


@dataclass(frozen=True)
class Box(Domain):
    """Axis-aligned box [lo_1, hi_1] x ... x [lo_d, hi_d]. Scalars give an interval."""

    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lo, dtype=float))
        hi = np.atleast_1d(np.asarray(self.hi, dtype=float))
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ValueError("lo and hi must be scalars or equal-length vectors")
        if np.any(hi <= lo):
            raise ValueError(f"degenerate box: lo={lo} hi={hi}")
        object.__setattr__(self, "lo", tuple(lo))
        object.__setattr__(self, "hi", tuple(hi))

    @property
    def dim(self):
        return len(self.lo)

    def contains(self, points):
        pts = _as_point_array(points)
        lo, hi = np.asarray(self.lo), np.asarray(self.hi)
        return np.all((pts >= lo) & (pts <= hi), axis=1)

    def bounding_box(self):
        return np.asarray(self.lo), np.asarray(self.hi)


def interval(a, b):
    """One-dimensional domain [a, b]."""
    return Box((float(a),), (float(b),))


@dataclass(frozen=True)
class Disk(Domain):
    """Closed disk of given center and radius in R^2."""

    center: tuple
    radius: float

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.center, dtype=float))
        if c.shape != (2,):
            raise ValueError("disk center must be a 2-vector")
        if self.radius <= 0:
            raise ValueError("disk radius must be positive")
        object.__setattr__(self, "center", tuple(c))

    dim = 2

    def contains(self, points):
        pts = _as_point_array(points)
        d2 = np.sum((pts - np.asarray(self.center)) ** 2, axis=1)
        return d2 <= self.radius**2

    def bounding_box(self):
        c = np.asarray(self.center)
        return c - self.radius, c + self.radius


@dataclass(frozen=True)
class Cardioid(Domain):
    """Cardioid r <= s (1 - cos theta) about the origin.

    With the default scale s = 0.5 the curve fits inside [-1, 1]^2: it spans
    x in [-2s, s/4] and |y| <= 3*sqrt(3)*s/4.
    """

    scale: float = 0.5

    def __post_init__(self):
        if self.scale <= 0:
            raise ValueError("cardioid scale must be positive")

    dim = 2

    def contains(self, points):
        pts = _as_point_array(points)
        r = np.hypot(pts[:, 0], pts[:, 1])
        theta = np.arctan2(pts[:, 1], pts[:, 0])
        return r <= self.scale * (1.0 - np.cos(theta))

    def bounding_box(self):
        s = self.scale
        ymax = 0.75 * np.sqrt(3.0) * s
        return np.array([-2.0 * s, -ymax]), np.array([s / 4.0, ymax])


@dataclass(frozen=True)
class CustomDomain(Domain):
    """Domain given by an arbitrary vectorized membership predicate."""

    predicate: callable  # (N, d) array -> (N,) bool
    lo: tuple
    hi: tuple

    @property
    def dim(self):
        return len(self.lo)

    def contains(self, points):
        pts = _as_point_array(points)
        mask = np.asarray(self.predicate(pts), dtype=bool)
        if mask.shape != (len(pts),):
            raise ValueError("domain predicate must return one bool per point")
        return mask

    def bounding_box(self):
        return np.asarray(self.lo, dtype=float), np.asarray(self.hi, dtype=float)


# ---------------------------------------------------------------------------
# Point sets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PointSet:
    """Ordered set of pairwise-distinct sites in R^d.

    ``points`` is an immutable (N, d) float array. If ``domain`` is given,
    every point must be a member.
    """

    points: np.ndarray
    domain: Domain | None = None

    def __post_init__(self):
        pts = _as_point_array(self.points).copy()
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if len(pts) == 0:
            raise ValueError("empty point set")
        if min_pairwise_distance(pts) <= DISTINCT_TOL:
            raise ValueError(
                f"points are not pairwise distinct (min distance <= {DISTINCT_TOL})"
            )
        if self.domain is not None:
            if self.domain.dim is not None and self.domain.dim != pts.shape[1]:
                raise ValueError(
                    f"domain dimension {self.domain.dim} != point dimension {pts.shape[1]}"
                )
            inside = self.domain.contains(pts)
            if not np.all(inside):
                bad = int(np.argmin(inside))
                raise ValueError(f"point {pts[bad]} is outside the domain")

    @property
    def dim(self):
        return self.points.shape[1]

    def __len__(self):
        return len(self.points)


def as_pointset(X, domain=None):
    """Coerce an array or PointSet into a PointSet (no copy when already one)."""
    if isinstance(X, PointSet):
        return X
    return PointSet(_as_point_array(X), domain)


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------

def _first_primes(k):
    primes = []
    n = 2
    while len(primes) < k:
        if all(n % p for p in primes):
            primes.append(n)
        n += 1
    return primes


def _radical_inverse(i, base):
    # van der Corput digit reversal of i in the given base
    inv, f = 0.0, 1.0 / base
    while i > 0:
        inv += f * (i % base)
        i //= base
        f /= base
    return inv


def halton(n, dim):
    """First ``n`` points of the Halton sequence in (0, 1)^dim.

    Uses the radical inverse in the first ``dim`` prime bases. Indexing
    starts at 1 (index 0 is skipped so the all-zeros point never appears),
    which makes the output a prefix of any longer request.
    """
    if n < 1 or dim < 1:
        raise ValueError("halton requires n >= 1 and dim >= 1")
    bases = _first_primes(dim)
    pts = np.empty((n, dim))
    for j, b in enumerate(bases):
        pts[:, j] = [_radical_inverse(i, b) for i in range(1, n + 1)]
    return PointSet(pts, Box((0.0,) * dim, (1.0,) * dim))


def grid(resolution, box):
    """Tensor-product grid of equally spaced points including the box corners.

    ``resolution`` is a per-axis point count (scalar broadcasts to all axes),
    each at least 2. Returns a PointSet whose domain is the box.
    """
    if not isinstance(box, Box):
        box = Box(*box)
    lo, hi = box.bounding_box()
    d = box.dim
    res = np.broadcast_to(np.asarray(resolution, dtype=int), (d,))
    if np.any(res < 2):
        raise ValueError("grid resolution must be >= 2 per axis")
    axes = [np.linspace(lo[k], hi[k], res[k]) for k in range(d)]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=-1)
    return PointSet(pts, box)


def restrict(pointset, domain):
    """Subset of ``pointset`` lying in ``domain``, order preserved.

    The result may be empty, in which case ``None`` is returned rather than
    an (invalid) empty PointSet.
    """
    ps = as_pointset(pointset)
    if domain.dim is not None and domain.dim != ps.dim:
        raise ValueError("dimension mismatch between points and domain")
    mask = domain.contains(ps.points)
    if not mask.any():
        return None
    return PointSet(ps.points[mask], domain)


# ---------------------------------------------------------------------------
# Diagnostics
# ---------------------------------------------------------------------------

def fill_distance(X, probe):
    """Discrete fill distance: max over probe points of the distance to X.

    ``probe`` should be a dense discretization of the domain of interest;
    the result is the discrete approximation of the mesh size (it converges
    to the true value from below as the probe is refined).
    """
    from scipy.spatial.distance import cdist

    xp = as_pointset(X).points
    pp = as_pointset(probe).points
    if xp.shape[1] != pp.shape[1]:
        raise ValueError("dimension mismatch between X and probe")
    worst = 0.0
    for start in range(0, len(pp), 2048):
        block = pp[start : start + 2048]
        worst = max(worst, float(cdist(block, xp).min(axis=1).max()))
    return worst


def half_sphere_lift(points):
    """Height sqrt(1 - x1^2 - x2^2) of points of the closed unit disk.

    Accepts a single point ``(2,)`` or a batch ``(N, 2)``. Values that fall
    a rounding error below zero are clamped; points genuinely outside the
    disk raise ValueError.
    """
    pts = np.asarray(points, dtype=float)
    single = pts.ndim == 1
    pts = _as_point_array(pts if not single else pts[None, :])
    if pts.shape[1] != 2:
        raise ValueError("half_sphere_lift expects points in R^2")
    s = 1.0 - pts[:, 0] ** 2 - pts[:, 1] ** 2
    if np.any(s < -1e-12):
        bad = pts[int(np.argmin(s))]
        raise ValueError(f"point {bad} lies outside the closed unit disk")
    out = np.sqrt(np.maximum(s, 0.0))
    return float(out[0]) if single else out
