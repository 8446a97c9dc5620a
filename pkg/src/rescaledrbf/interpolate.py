"""Standard and rescaled kernel interpolants, cardinal bases, Lebesgue diagnostics.

The standard interpolant of data (X, fX) is ``Pf(x) = sum_i c_i K(x, x_i)``
with coefficients from the Gram system ``A c = fX``. The rescaled interpolant
divides by the interpolant of the constant one,

    Pf_hat(x) = Pf(x) / Pg(x),       A d = 1,

which reproduces constants and damps the oscillations of compactly
supported fits. Both solves share one factorization.

Where ``Pg`` vanishes (possible for compactly supported kernels on sparse
sets) the rescaled interpolant is undefined; evaluation returns NaN plus a
boolean "defined" mask and callers decide policy.
"""

import numpy as np
from dataclasses import dataclass
from collections import namedtuple

from . import solver
from .geometry import as_pointset
from .kernels import KernelSpec, RescaledKernel, gram, kernel_matrix

# Relative threshold (times max |Pg| at the nodes) below which the rescaled
# denominator counts as vanished.
VANISH_REL_TOL = 1e-12

# cardinal_table switches to extended precision above this condition
# estimate: beyond it, double-precision solves cannot certify the cardinal
# identity u_j(x_i) = delta_ij to the documented 1e-8.
COND_EXTENDED_THRESHOLD = 1e6

# Extended-precision cardinal solves are O(N^3) at 50 digits; past this
# order they would dominate runtime, so larger tables stay in double.
EXTENDED_MAX_N = 150


def _kernel_tag(kernel):
    if isinstance(kernel, KernelSpec):
        return f"{kernel.family}(eps={kernel.eps:g})"
    return type(kernel).__name__


@dataclass(frozen=True)
class InterpolantModel:
    """Kernel translate-space interpolant: centers, coefficients, node values."""

    kernel: object
    centers: object  # PointSet
    coeffs: np.ndarray
    values: np.ndarray
    cond: float

    def __len__(self):
        return len(self.centers)


@dataclass(frozen=True)
class RescaledModel:
    """Rescaled interpolant Pf/Pg: a standard fit plus constant-one coefficients."""

    base: InterpolantModel
    denom_coeffs: np.ndarray
    vanish_tol: float

    @property
    def kernel(self):
        return self.base.kernel

    @property
    def centers(self):
        return self.base.centers

    def __len__(self):
        return len(self.base)


def _coerce_eval(points, dim):
    """Return ((M, d) array, single_flag) for a point batch or a single point."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 0:
        if dim != 1:
            raise ValueError("scalar evaluation point only valid in 1D")
        return pts.reshape(1, 1), True
    if pts.ndim == 1:
        if pts.shape[0] == dim:
            return pts[None, :], True
        if dim == 1:
            return pts[:, None], False
        raise ValueError(f"cannot interpret shape {pts.shape} as points in R^{dim}")
    if pts.ndim == 2 and pts.shape[1] == dim:
        return pts, False
    raise ValueError(f"cannot interpret shape {pts.shape} as points in R^{dim}")


def fit_standard(kernel, X, fX, ridge=0.0):
    """Interpolate samples fX at sites X; returns an InterpolantModel."""
    X = as_pointset(X)
    fX = np.asarray(fX, dtype=float)
    if fX.shape != (len(X),):
        raise ValueError(f"expected {len(X)} samples, got shape {fX.shape}")
    A = gram(kernel, X)
    F = solver.factor(A, ridge=ridge, context=_kernel_tag(kernel))
    c = solver.solve(F, fX)
    return InterpolantModel(
        kernel=kernel,
        centers=X,
        coeffs=c,
        values=fX.copy(),
        cond=solver.cond_estimate(F, A),
    )


def fit_rescaled(kernel, X, fX, ridge=0.0, vanish_tol=None):
    """Fit the rescaled interpolant Pf/Pg; both solves share one factorization."""
    X = as_pointset(X)
    fX = np.asarray(fX, dtype=float)
    if fX.shape != (len(X),):
        raise ValueError(f"expected {len(X)} samples, got shape {fX.shape}")
    A = gram(kernel, X)
    F = solver.factor(A, ridge=ridge, context=_kernel_tag(kernel))
    coeffs = solver.solve(F, np.column_stack([fX, np.ones(len(X))]))
    c, d = coeffs[:, 0], coeffs[:, 1]
    if vanish_tol is None:
        vanish_tol = VANISH_REL_TOL * float(np.abs(A @ d).max())
    base = InterpolantModel(
        kernel=kernel,
        centers=X,
        coeffs=c,
        values=fX.copy(),
        cond=solver.cond_estimate(F, A),
    )
    return RescaledModel(base=base, denom_coeffs=d, vanish_tol=float(vanish_tol))


def constant_one_model(model):
    """The constant-one interpolant Pg of a RescaledModel, as a standard model."""
    return InterpolantModel(
        kernel=model.base.kernel,
        centers=model.base.centers,
        coeffs=model.denom_coeffs,
        values=np.ones(len(model.base)),
        cond=model.base.cond,
    )


def eval_standard(model, points):
    """Evaluate sum_i c_i K(x, x_i) at one point or a batch."""
    pts, single = _coerce_eval(points, model.centers.dim)
    vals = kernel_matrix(model.kernel, pts, model.centers.points) @ model.coeffs
    return float(vals[0]) if single else vals


def eval_rescaled(model, points):
    """Evaluate Pf/Pg; returns (values, defined).

    Values are NaN where |Pg| <= vanish_tol; the boolean mask marks defined
    points. For a single point the pair is (float, bool).
    """
    pts, single = _coerce_eval(points, model.centers.dim)
    Kx = kernel_matrix(model.kernel, pts, model.centers.points)
    num = Kx @ model.base.coeffs
    den = Kx @ model.denom_coeffs
    defined = np.abs(den) > model.vanish_tol
    vals = np.where(defined, num / np.where(defined, den, 1.0), np.nan)
    if single:
        return float(vals[0]), bool(defined[0])
    return vals, defined


def eval_rescaled_kernel_form(model, points):
    """Rescaled interpolant via the rescaled-kernel basis (testing path).

    Computes sum_j c_j Kr(x, x_j) Pg(x_j) literally through RescaledKernel.
    Algebraically identical to the ratio form; kept as an independent
    evaluation route for the induced-kernel machinery. Raises
    DenominatorVanishedError at undefined points.
    """
    pts, single = _coerce_eval(points, model.centers.dim)
    pg_model = constant_one_model(model)
    kr = RescaledKernel(
        base=model.base.kernel, denom=pg_model, vanish_tol=model.vanish_tol
    )
    pg_nodes = eval_standard(pg_model, model.centers.points)
    Kr = kernel_matrix(kr, pts, model.centers.points)
    vals = Kr @ (model.base.coeffs * pg_nodes)
    return float(vals[0]) if single else vals


# ---------------------------------------------------------------------------
# Cardinal bases and Lebesgue diagnostics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CardinalTable:
    """Values of the cardinal and rescaled-cardinal bases on an evaluation set.

    ``U[i, j] = u_j(e_i)``; ``U_hat`` is row-normalized by ``denom = sum_k u_k``
    (NaN rows where |denom| <= vanish_tol, marked by ``defined``). ``cond``
    is the Gram condition estimate: cardinal values inherit its uncertainty.
    """

    centers: object
    eval_points: object
    U: np.ndarray
    U_hat: np.ndarray
    denom: np.ndarray
    defined: np.ndarray
    cond: float
    vanish_tol: float
    extended: bool


def _cardinal_values_extended(A, K_eval, dps=50):
    """U = K_eval @ inv(A) carried out at ``dps`` decimal digits.

    Ill-conditioned Gram systems (flat kernels) lose the cardinal identity
    to rounding in double precision; redoing the solve in extended precision
    restores it. Inputs stay the double-precision matrices, so this is the
    exact cardinal table of the kernel matrix as represented.
    """
    from mpmath import mp

    n = A.shape[0]
    with mp.workdps(dps):
        Amp = mp.matrix([[mp.mpf(v) for v in row] for row in A.tolist()])
        Cmp = mp.inverse(Amp)
        cols = [[Cmp[k, j] for k in range(n)] for j in range(n)]
        U = np.empty((K_eval.shape[0], n))
        for i in range(K_eval.shape[0]):
            row = [mp.mpf(v) for v in K_eval[i]]
            for j in range(n):
                U[i, j] = float(mp.fsum(row[k] * cols[j][k] for k in range(n)))
    return U


def cardinal_table(kernel, X, eval_points, vanish_tol=None, precision="auto"):
    """Tabulate the cardinal basis u_j and rescaled cardinals u_j / sum_k u_k.

    One factorization, N solves. ``precision`` is "auto" (extended solve when
    the condition estimate exceeds COND_EXTENDED_THRESHOLD and N is small),
    "double", or "extended".
    """
    X = as_pointset(X)
    E = as_pointset(eval_points) if not isinstance(eval_points, np.ndarray) else None
    eval_pts = E.points if E is not None else np.atleast_2d(eval_points)
    if eval_pts.shape[1] != X.dim:
        raise ValueError("evaluation points have wrong dimension")

    A = gram(kernel, X)
    F = solver.factor(A, context=_kernel_tag(kernel))
    cond = solver.cond_estimate(F, A)
    K_eval = kernel_matrix(kernel, eval_pts, X.points)

    if precision == "auto":
        use_extended = cond > COND_EXTENDED_THRESHOLD and len(X) <= EXTENDED_MAX_N
    elif precision in ("double", "extended"):
        use_extended = precision == "extended"
    else:
        raise ValueError("precision must be 'auto', 'double', or 'extended'")

    if use_extended:
        U = _cardinal_values_extended(A, K_eval)
    else:
        C = solver.solve(F, np.eye(len(X)))
        U = K_eval @ C

    denom = U.sum(axis=1)
    if vanish_tol is None:
        d = solver.solve(F, np.ones(len(X)))
        vanish_tol = VANISH_REL_TOL * float(np.abs(A @ d).max())
    defined = np.abs(denom) > vanish_tol
    U_hat = np.where(defined[:, None], U / np.where(defined, denom, 1.0)[:, None], np.nan)

    return CardinalTable(
        centers=X,
        eval_points=eval_pts,
        U=U,
        U_hat=U_hat,
        denom=denom,
        defined=defined,
        cond=cond,
        vanish_tol=float(vanish_tol),
        extended=use_extended,
    )


@dataclass(frozen=True)
class LebesgueReport:
    """Pointwise Lebesgue functions and constants for both cardinal bases.

    ``lambda_hat_fn`` is NaN where the rescaled basis is undefined; those
    points are excluded from ``lambda_hat_const`` and counted separately.
    """

    lambda_fn: np.ndarray
    lambda_const: float
    lambda_hat_fn: np.ndarray
    lambda_hat_const: float
    defined: np.ndarray
    n_undefined: int


def lebesgue(table):
    """Lebesgue report from a cardinal table."""
    lam = np.abs(table.U).sum(axis=1)
    lam_hat = np.where(table.defined, np.abs(table.U_hat).sum(axis=1), np.nan)
    defined = table.defined
    lam_hat_const = float(lam_hat[defined].max()) if defined.any() else np.nan
    return LebesgueReport(
        lambda_fn=lam,
        lambda_const=float(lam.max()),
        lambda_hat_fn=lam_hat,
        lambda_hat_const=lam_hat_const,
        defined=defined,
        n_undefined=int((~defined).sum()),
    )


StabilityCheck = namedtuple(
    "StabilityCheck", ["ok", "slack_standard", "slack_rescaled"]
)


def stability_bound_check(model, table, fX, tol=1e-9):
    """Verify |P(x)| <= Lambda(x) * max|fX| pointwise for both interpolants.

    The slack is max(|P(x)| - Lambda(x) * max|fX|): nonpositive values mean
    the bound holds with room to spare. For a plain InterpolantModel only
    the standard bound is checked (slack_rescaled is NaN).
    """
    fX = np.asarray(fX, dtype=float)
    fmax = float(np.abs(fX).max())
    eval_pts = table.eval_points

    base = model.base if isinstance(model, RescaledModel) else model
    p_std = eval_standard(base, eval_pts)
    lam = np.abs(table.U).sum(axis=1)
    slack_std = float((np.abs(p_std) - lam * fmax).max())

    slack_resc = np.nan
    if isinstance(model, RescaledModel):
        p_resc, defined_m = eval_rescaled(model, eval_pts)
        mask = defined_m & table.defined
        if mask.any():
            lam_hat = np.abs(table.U_hat[mask]).sum(axis=1)
            slack_resc = float((np.abs(p_resc[mask]) - lam_hat * fmax).max())

    ok = slack_std <= tol and (np.isnan(slack_resc) or slack_resc <= tol)
    return StabilityCheck(ok=ok, slack_standard=slack_std, slack_rescaled=slack_resc)
