"""Radial kernel families, Gram matrices, variably scaled and rescaled kernels.

A kernel is one of three things:

* :class:`KernelSpec` -- a plain radial kernel ``phi(eps * ||x - y||)``;
* :class:`VskKernel` -- a variably scaled kernel: the base kernel applied to
  points lifted to R^{d+1} by a scale function ``c``, so the radial argument
  becomes ``sqrt(||x - y||^2 + (c(x) - c(y))^2)``;
* :class:`RescaledKernel` -- ``K(x, y) / (Pg(x) Pg(y))`` where ``Pg`` is the
  interpolant of the constant function 1 on a fixed node set.

All evaluation goes through :func:`kernel_matrix`; :func:`gram` is the
square symmetric case.
"""

import numpy as np
from dataclasses import dataclass
from scipy.spatial.distance import cdist

from .geometry import as_pointset

FAMILIES = ("gauss", "iq", "imq", "m0", "m2", "w0", "w2")

# Families with compact support [0, 1] in the scaled radius t = eps * r.
WENDLAND = ("w0", "w2")


def _phi_gauss(t):
    return np.exp(-(t**2))


def _phi_iq(t):
    return 1.0 / (1.0 + t**2)


def _phi_imq(t):
    return 1.0 / np.sqrt(1.0 + t**2)


def _phi_m0(t):
    return np.exp(-t)


def _phi_m2(t):
    return (1.0 + t) * np.exp(-t)


def _phi_w0(t):
    base = np.maximum(1.0 - t, 0.0)
    return base**2


def _phi_w2(t):
    base = np.maximum(1.0 - t, 0.0)
    return base**4 * (4.0 * t + 1.0)


_PHI = {
    "gauss": _phi_gauss,
    "iq": _phi_iq,
    "imq": _phi_imq,
    "m0": _phi_m0,
    "m2": _phi_m2,
    "w0": _phi_w0,
    "w2": _phi_w2,
}


def phi(family, t):
    """Basic radial function of one family at scaled radius t = eps * r >= 0.

    Wendland families return exactly 0 for t >= 1.
    """
    if family not in _PHI:
        raise ValueError(f"unknown kernel family {family!r}; choose from {FAMILIES}")
    arr = np.asarray(t, dtype=float)
    if np.any(arr < 0):
        raise ValueError("scaled radius t must be nonnegative")
    out = _PHI[family](arr)
    return float(out) if np.isscalar(t) or arr.ndim == 0 else out


class DenominatorVanishedError(ValueError):
    """Rescaled-kernel evaluation hit a point where the constant-one fit vanishes."""

    def __init__(self, point, value):
        self.point = np.asarray(point, dtype=float)
        self.value = float(value)
        super().__init__(
            f"constant-one interpolant vanishes at {self.point} (|Pg| = {abs(value):.3e})"
        )


@dataclass(frozen=True)
class KernelSpec:
    """Radial kernel family with shape parameter eps (> 0) in R^dim.

    For Wendland families the implemented closed forms are valid up to
    dimension 3, and the support radius is 1/eps.
    """

    family: str
    eps: float
    dim: int = 1

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(
                f"unknown kernel family {self.family!r}; choose from {FAMILIES}"
            )
        if not self.eps > 0:
            raise ValueError("shape parameter eps must be positive")
        if self.dim < 1:
            raise ValueError("dimension must be >= 1")
        if self.family in WENDLAND and self.dim > 3:
            raise ValueError(
                f"{self.family} closed form is only implemented for dim <= 3"
            )

    @property
    def support_radius(self):
        """Support radius in physical units; inf for globally supported families."""
        return 1.0 / self.eps if self.family in WENDLAND else np.inf


def constant_scale(value):
    """Scale function c(x) = value, making a VSK identical to its base kernel."""
    v = float(value)

    def scale(points):
        return np.full(len(np.atleast_2d(points)), v)

    return scale


@dataclass(frozen=True)
class VskKernel:
    """Variably scaled kernel: base kernel in R^{d+1} on points lifted by ``scale``.

    ``base.dim`` is the lifted dimension d+1. The scale function maps an
    (N, d) array to N scale values.
    """

    base: KernelSpec
    scale: callable

    def __post_init__(self):
        if self.base.dim < 2:
            raise ValueError("VSK base kernel must live in dimension >= 2")

    @property
    def data_dim(self):
        return self.base.dim - 1

    def lift(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        c = np.asarray(self.scale(pts), dtype=float)
        if c.shape != (len(pts),):
            raise ValueError("scale function must return one value per point")
        return np.hstack([pts, c[:, None]])


@dataclass(frozen=True)
class RescaledKernel:
    """K(x, y) / (Pg(x) Pg(y)) for a constant-one interpolant Pg.

    ``denom`` is an InterpolantModel fitted to the constant 1; evaluation
    raises :class:`DenominatorVanishedError` where |Pg| <= vanish_tol.
    """

    base: object  # KernelSpec or VskKernel
    denom: object  # interpolate.InterpolantModel of the constant 1
    vanish_tol: float = 1e-12

    def denominator(self, points):
        from .interpolate import eval_standard

        pts = np.atleast_2d(np.asarray(points, dtype=float))
        pg = np.atleast_1d(eval_standard(self.denom, pts))
        small = np.abs(pg) <= self.vanish_tol
        if np.any(small):
            bad = int(np.argmax(small))
            raise DenominatorVanishedError(pts[bad], pg[bad])
        return pg


def _plain_matrix(spec, P, Q):
    return _PHI[spec.family](spec.eps * cdist(P, Q))


def kernel_matrix(kernel, P, Q):
    """Matrix of kernel values K(p_i, q_j) for two batches of points."""
    P = np.atleast_2d(np.asarray(P, dtype=float))
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    if P.shape[1] != Q.shape[1]:
        raise ValueError("point batches have mismatched dimensions")
    if isinstance(kernel, KernelSpec):
        return _plain_matrix(kernel, P, Q)
    if isinstance(kernel, VskKernel):
        return _plain_matrix(kernel.base, kernel.lift(P), kernel.lift(Q))
    if isinstance(kernel, RescaledKernel):
        base = kernel_matrix(kernel.base, P, Q)
        pg_p = kernel.denominator(P)
        pg_q = kernel.denominator(Q)
        return base / np.outer(pg_p, pg_q)
    raise TypeError(f"not a kernel: {kernel!r}")


def kernel_eval(kernel, x, y):
    """Kernel value at a single pair of points."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    return float(kernel_matrix(kernel, x[None, :], y[None, :])[0, 0])


def gram(kernel, X):
    """Symmetric kernel matrix A_ij = K(x_i, x_j) on a point set.

    The pairwise-distance computation is symmetric in exact floating point,
    so no explicit symmetrization is applied.
    """
    pts = as_pointset(X).points
    return kernel_matrix(kernel, pts, pts)


def min_eig_check(M):
    """Smallest eigenvalue of a symmetric matrix.

    Used as a positive-definiteness witness: a positive return certifies a
    strictly positive definite matrix (up to eigensolver accuracy).
    """
    from scipy.linalg import eigvalsh

    M = np.asarray(M, dtype=float)
    return float(eigvalsh(M)[0])
