"""Block-based partition-of-unity interpolation with rescaled local fits.

A cover places patch centers on a uniform grid over the domain's bounding
box; each patch is a ball whose radius is ``overlap`` times half the grid
cell diagonal, so neighboring patches overlap for any overlap > 1. Patch
membership queries go through a uniform block index (cell size = patch
radius, 3^d neighboring cells searched), which keeps assignment and
evaluation linear in the number of points.

Weights are Shepard-normalized compactly supported bumps centered at the
patch centers: w_k(x) = W2(|x - c_k| / r_k) / sum_j W2(|x - c_j| / r_j).
They vanish outside their patch and sum to one on the covered region by
construction. The global fit is sum_k p_k(x) w_k(x) with per-patch standard
or rescaled local interpolants.
"""

import numpy as np
from dataclasses import dataclass, replace
from itertools import product

from .geometry import PointSet, as_pointset
from .interpolate import eval_rescaled, eval_standard, fit_rescaled, fit_standard
from .kernels import _phi_w2
from .solver import NotPositiveDefiniteError


class UncoveredPointError(ValueError):
    """A point lies outside every patch of the cover."""

    def __init__(self, points, what="point"):
        self.points = np.atleast_2d(np.asarray(points, dtype=float))
        super().__init__(f"{what} not covered by any patch: {self.points[0]}")


class PatchFitError(RuntimeError):
    """A local interpolation problem failed; carries patch diagnostics."""

    def __init__(self, patch_index, n_local, cond, cause):
        self.patch_index = int(patch_index)
        self.n_local = int(n_local)
        self.cond = float(cond)
        super().__init__(
            f"patch {patch_index} fit failed (n_local={n_local}, "
            f"cond~{cond:.3e}): {cause}"
        )


@dataclass(frozen=True)
class Patch:
    center: np.ndarray
    radius: float
    indices: np.ndarray  # positions of the local points in the global set
    model: object = None  # InterpolantModel or RescaledModel after fit_pum
    eps_override: float = None  # optional per-patch shape parameter


class _BlockIndex:
    """Uniform-grid spatial hash of patch centers.

    Cell size equals the (common) patch radius, so every patch covering a
    point has its center in one of the 3^d cells around the point's cell.
    """

    def __init__(self, centers, cell_size, origin):
        self.cell = float(cell_size)
        self.origin = np.asarray(origin, dtype=float)
        self.dim = len(self.origin)
        self.cells = {}
        keys = self._keys(centers)
        for k, key in enumerate(map(tuple, keys)):
            self.cells.setdefault(key, []).append(k)
        self._offsets = list(product((-1, 0, 1), repeat=self.dim))

    def _keys(self, points):
        return np.floor((np.atleast_2d(points) - self.origin) / self.cell).astype(int)

    def candidates(self, key):
        """Patch indices whose center may lie within one cell of ``key``."""
        out = []
        for off in self._offsets:
            out.extend(self.cells.get(tuple(np.add(key, off)), ()))
        return sorted(out)

    def group_points(self, points):
        """Yield (point_indices, candidate_patch_ids) grouped by grid cell."""
        keys = self._keys(points)
        uniq, inverse = np.unique(keys, axis=0, return_inverse=True)
        for u, key in enumerate(uniq):
            yield np.nonzero(inverse == u)[0], self.candidates(key)


@dataclass(frozen=True)
class Cover:
    """Overlapping patch cover of a point set with its block index."""

    patches: tuple
    block: _BlockIndex
    n_data: int

    def __len__(self):
        return len(self.patches)


def build_cover(domain, X, patches_per_axis, overlap=1.5):
    """Cover the data with ball patches centered on a uniform grid.

    ``domain`` supplies the bounding box (a Domain or an explicit (lo, hi)
    pair). Patches that capture no data point are dropped; afterwards every
    data point must still lie in at least one patch or UncoveredPointError
    is raised.
    """
    X = as_pointset(X)
    if hasattr(domain, "bounding_box"):
        lo, hi = domain.bounding_box()
    else:
        lo, hi = (np.asarray(v, dtype=float) for v in domain)
    d = X.dim
    if len(lo) != d:
        raise ValueError("domain dimension does not match the point set")
    if overlap <= 1.0:
        raise ValueError("overlap must exceed 1 so neighboring patches overlap")
    m = np.broadcast_to(np.asarray(patches_per_axis, dtype=int), (d,))
    if np.any(m < 1):
        raise ValueError("patches_per_axis must be >= 1")

    width = (hi - lo) / m
    radius = float(overlap * 0.5 * np.linalg.norm(width))
    axes = [lo[k] + (np.arange(m[k]) + 0.5) * width[k] for k in range(d)]
    mesh = np.meshgrid(*axes, indexing="ij")
    centers = np.stack([g.ravel() for g in mesh], axis=-1)

    block = _BlockIndex(centers, radius, lo - radius)
    local_indices = [[] for _ in range(len(centers))]
    covered = np.zeros(len(X), dtype=bool)
    for pt_idx, cand in block.group_points(X.points):
        pts = X.points[pt_idx]
        for k in cand:
            inside = np.linalg.norm(pts - centers[k], axis=1) <= radius
            if inside.any():
                local_indices[k].extend(pt_idx[inside])
                covered[pt_idx[inside]] = True
    if not covered.all():
        raise UncoveredPointError(X.points[~covered], what="data point")

    patches = tuple(
        Patch(center=centers[k], radius=radius, indices=np.array(sorted(idx)))
        for k, idx in enumerate(local_indices)
        if idx
    )
    # Rebuild the index over the surviving patches only.
    block = _BlockIndex(np.array([p.center for p in patches]), radius, lo - radius)
    return Cover(patches=patches, block=block, n_data=len(X))


def _raw_weight(patch, points):
    dist = np.linalg.norm(np.atleast_2d(points) - patch.center, axis=1)
    return _phi_w2(dist / patch.radius)


def weight(cover, k, x):
    """Shepard-normalized weight of patch k at a single covered point."""
    x = np.atleast_1d(np.asarray(x, dtype=float))[None, :]
    total = 0.0
    wk = 0.0
    for j, patch in enumerate(cover.patches):
        w = float(_raw_weight(patch, x)[0])
        total += w
        if j == k:
            wk = w
    if total <= 0.0:
        raise UncoveredPointError(x)
    return wk / total


@dataclass(frozen=True)
class PumModel:
    cover: Cover
    kernel: object
    rescale_locals: bool


def fit_pum(kernel, cover, X, fX, rescale_locals=False):
    """Fit a local interpolant on every patch; the global blend interpolates X."""
    X = as_pointset(X)
    fX = np.asarray(fX, dtype=float)
    if len(X) != cover.n_data or fX.shape != (len(X),):
        raise ValueError("cover, points, and samples are inconsistent")
    fitted = []
    for k, patch in enumerate(cover.patches):
        local_X = PointSet(X.points[patch.indices])
        local_f = fX[patch.indices]
        local_kernel = kernel
        if patch.eps_override is not None:
            local_kernel = replace(kernel, eps=patch.eps_override)
        try:
            if rescale_locals:
                model = fit_rescaled(local_kernel, local_X, local_f)
            else:
                model = fit_standard(local_kernel, local_X, local_f)
        except NotPositiveDefiniteError as err:
            from .kernels import gram

            cond = np.linalg.cond(gram(local_kernel, local_X), 1)
            raise PatchFitError(k, len(local_X), cond, err) from err
        fitted.append(replace(patch, model=model))
    return PumModel(
        cover=Cover(patches=tuple(fitted), block=cover.block, n_data=cover.n_data),
        kernel=kernel,
        rescale_locals=rescale_locals,
    )


def eval_pum(model, points):
    """Evaluate the PUM blend; returns (values, defined).

    Undefined points (uncovered, or with every covering rescaled local
    denominator-vanished) get NaN. When some rescaled locals vanish at a
    point, those patches drop out and the Shepard normalization runs over
    the survivors.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    single = np.asarray(points).ndim == 1
    num = np.zeros(len(pts))
    den = np.zeros(len(pts))
    patches = model.cover.patches
    for pt_idx, cand in model.cover.block.group_points(pts):
        sub = pts[pt_idx]
        for k in cand:
            patch = patches[k]
            w = _raw_weight(patch, sub)
            active = w > 0.0
            if not active.any():
                continue
            idx = pt_idx[active]
            local_pts = sub[active]
            if model.rescale_locals:
                vals, defined = eval_rescaled(patch.model, local_pts)
                vals = np.where(defined, vals, 0.0)
                wgt = w[active] * defined
            else:
                vals = eval_standard(patch.model, local_pts)
                wgt = w[active]
            num[idx] += wgt * vals
            den[idx] += wgt
    defined = den > 0.0
    values = np.where(defined, num / np.where(defined, den, 1.0), np.nan)
    if single:
        return float(values[0]), bool(defined[0])
    return values, defined
