"""Test functions, error metrics, and the registry of named experiment runs.

Every registry entry reproduces one figure or table of the underlying
study at desk scale: a named, parameterized run that emits CSV-serializable
rows with the schema in :data:`CSV_COLUMNS`. Runs are deterministic (Halton
nodes, fixed grids, no RNG), so identical configurations give identical
metric values; only the timing columns vary between invocations.
"""

import os
import time

import numpy as np
from dataclasses import dataclass

from .geometry import (
    Box,
    Cardioid,
    Disk,
    PointSet,
    grid,
    halton,
    half_sphere_lift,
    interval,
    restrict,
)
from .interpolate import (
    cardinal_table,
    eval_rescaled,
    eval_standard,
    fit_rescaled,
    fit_standard,
    lebesgue,
)
from .kernels import KernelSpec, VskKernel
from .pum import build_cover, eval_pum, fit_pum
from .solver import NotPositiveDefiniteError

# ---------------------------------------------------------------------------
# Test functions
# ---------------------------------------------------------------------------

def franke2d(x, y, classic=False):
    """Franke's four-hump test surface.

    By default the second exponential uses the linear (9y+1)/10 term; with
    ``classic=True`` it uses the textbook squared variant (9y+1)^2/10.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    second_y = (9 * y + 1) ** 2 / 10.0 if classic else (9 * y + 1) / 10.0
    return (
        0.75 * np.exp(-((9 * x - 2) ** 2 + (9 * y - 2) ** 2) / 4.0)
        + 0.75 * np.exp(-((9 * x + 1) ** 2) / 49.0 - second_y)
        + 0.5 * np.exp(-((9 * x - 7) ** 2 + (9 * y - 3) ** 2) / 4.0)
        - 0.2 * np.exp(-((9 * x - 4) ** 2) - (9 * y - 7) ** 2)
    )


def ackley2d(x, y, classic=False):
    """Ackley's multimodal test surface.

    The default form has exp(-0.5 (cos 2 pi x + cos 2 pi y)); ``classic=True``
    selects the optimization-literature variant exp(+0.5 (...)), which is 0
    at the origin.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    sign = 1.0 if classic else -1.0
    return (
        -20.0 * np.exp(-0.2 * np.sqrt(0.5 * (x**2 + y**2)))
        - np.exp(sign * 0.5 * (np.cos(2 * np.pi * x) + np.cos(2 * np.pi * y)))
        + 20.0
        + np.e
    )


def poly9_2d(x1, x2):
    """(x1^2 + x2^2 - 1)^9 -- zero on the unit circle, steep near the corners."""
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    return (x1**2 + x2**2 - 1.0) ** 9


def identity1d(x):
    return np.asarray(x, dtype=float)


def constant_fn(a):
    a = float(a)

    def fn(points):
        return np.full(len(np.atleast_2d(points)), a)

    return fn


def test_function(tag):
    """Vectorized (N, d) -> (N,) evaluator for a named test function."""
    if tag == "franke":
        return lambda p: franke2d(p[:, 0], p[:, 1])
    if tag == "franke-classic":
        return lambda p: franke2d(p[:, 0], p[:, 1], classic=True)
    if tag == "ackley":
        return lambda p: ackley2d(p[:, 0], p[:, 1])
    if tag == "ackley-classic":
        return lambda p: ackley2d(p[:, 0], p[:, 1], classic=True)
    if tag == "poly9":
        return lambda p: poly9_2d(p[:, 0], p[:, 1])
    if tag == "identity1d":
        return lambda p: identity1d(p[:, 0])
    if tag.startswith("const:"):
        return constant_fn(float(tag.split(":", 1)[1]))
    raise ValueError(f"unknown test function {tag!r}")


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ErrorSummary:
    rmse: float
    max_err: float
    n_eval: int
    n_flagged: int


def metrics(true_vals, approx_vals, flags=None):
    """RMSE and max absolute error over the non-flagged entries.

    ``flags`` marks excluded points (denominator-vanished or uncovered);
    raises ValueError when nothing is left.
    """
    t = np.asarray(true_vals, dtype=float)
    a = np.asarray(approx_vals, dtype=float)
    if t.shape != a.shape:
        raise ValueError("value arrays have different lengths")
    if flags is None:
        flags = np.zeros(t.shape, dtype=bool)
    flags = np.asarray(flags, dtype=bool)
    keep = ~flags
    if not keep.any():
        raise ValueError("all evaluation points are flagged")
    resid = np.abs(t[keep] - a[keep])
    return ErrorSummary(
        rmse=float(np.sqrt(np.mean(resid**2))),
        max_err=float(resid.max()),
        n_eval=int(t.size),
        n_flagged=int(flags.sum()),
    )


# ---------------------------------------------------------------------------
# Node constructions
# ---------------------------------------------------------------------------

def half_sphere_points(n):
    """n near-uniform nodes of the upper unit hemisphere, projected to the disk.

    Golden-angle (Fibonacci) spiral with heights z_i = (i + 1/2)/n; the
    projection keeps (x, y) and the lift height is recovered by
    :func:`rescaledrbf.geometry.half_sphere_lift`.
    """
    i = np.arange(n)
    z = (i + 0.5) / n
    r = np.sqrt(1.0 - z**2)
    theta = np.pi * (3.0 - np.sqrt(5.0)) * i
    pts = np.stack([r * np.cos(theta), r * np.sin(theta)], axis=-1)
    return PointSet(pts, Disk((0.0, 0.0), 1.0))


# ---------------------------------------------------------------------------
# Row machinery
# ---------------------------------------------------------------------------

CSV_COLUMNS = (
    "experiment",
    "method",
    "kernel",
    "eps",
    "n_points",
    "n_eval",
    "rmse",
    "maxerr",
    "n_flagged",
    "lebesgue_std",
    "lebesgue_resc",
    "cond_est",
    "fit_ms",
    "eval_ms",
)


def _n_threads():
    try:
        return max(1, int(os.environ.get("RBF_THREADS", "1")))
    except ValueError:
        return 1


def eval_in_chunks(fn, points):
    """Apply a pointwise-batch evaluator, optionally across RBF_THREADS threads.

    Chunk results are stitched back in order, so output is independent of
    the thread count.
    """
    pts = np.atleast_2d(points)
    n = _n_threads()
    if n == 1 or len(pts) < 4096:
        return fn(pts)
    from concurrent.futures import ThreadPoolExecutor

    chunks = np.array_split(pts, 4 * n)
    with ThreadPoolExecutor(max_workers=n) as pool:
        parts = list(pool.map(fn, chunks))
    if isinstance(parts[0], tuple):
        return tuple(
            np.concatenate([p[i] for p in parts]) for i in range(len(parts[0]))
        )
    return np.concatenate(parts)


def _fit_eval(method, kernel, X, fX, eval_pts, cover=None, vsk_scale=None):
    """Fit one method and evaluate it; returns (values, defined, cond, t_fit, t_eval)."""
    k = kernel
    if method in ("vsk", "vsk+rescaled"):
        if vsk_scale is None:
            raise ValueError(f"method {method!r} needs a scale function")
        k = VskKernel(
            KernelSpec(kernel.family, kernel.eps, dim=kernel.dim + 1), vsk_scale
        )
    t0 = time.perf_counter()
    if method in ("standard", "vsk"):
        model = fit_standard(k, X, fX)
        cond = model.cond
        evaluate = lambda p: (eval_standard(model, p), np.ones(len(p), dtype=bool))
    elif method in ("rescaled", "vsk+rescaled"):
        model = fit_rescaled(k, X, fX)
        cond = model.base.cond
        evaluate = lambda p: eval_rescaled(model, p)
    elif method in ("pum", "rpum"):
        if cover is None:
            raise ValueError(f"method {method!r} needs a cover")
        model = fit_pum(k, cover, X, fX, rescale_locals=(method == "rpum"))
        conds = [
            p.model.base.cond if method == "rpum" else p.model.cond
            for p in model.cover.patches
        ]
        cond = max(conds)
        evaluate = lambda p: eval_pum(model, p)
    else:
        raise ValueError(f"unknown method {method!r}")
    t1 = time.perf_counter()
    values, defined = eval_in_chunks(evaluate, eval_pts)
    t2 = time.perf_counter()
    return values, defined, cond, (t1 - t0) * 1e3, (t2 - t1) * 1e3


def _method_row(name, method, kernel, X, fX, eval_pts, true_vals, cover=None,
                vsk_scale=None):
    row = {
        "experiment": name,
        "method": method,
        "kernel": kernel.family,
        "eps": kernel.eps,
        "n_points": len(X),
        "n_eval": len(eval_pts),
    }
    try:
        values, defined, cond, fit_ms, eval_ms = _fit_eval(
            method, kernel, X, fX, eval_pts, cover=cover, vsk_scale=vsk_scale
        )
        summary = metrics(true_vals, np.where(defined, values, 0.0), flags=~defined)
        row.update(
            rmse=summary.rmse,
            maxerr=summary.max_err,
            n_flagged=summary.n_flagged,
            cond_est=cond,
            fit_ms=fit_ms,
            eval_ms=eval_ms,
        )
    except (NotPositiveDefiniteError, ValueError) as err:
        row["_error"] = str(err)
    return row


def _lebesgue_row(name, kernel, X, eval_pts):
    row = {
        "experiment": name,
        "method": "lebesgue",
        "kernel": kernel.family,
        "eps": kernel.eps,
        "n_points": len(X),
        "n_eval": len(eval_pts),
    }
    try:
        t0 = time.perf_counter()
        table = cardinal_table(kernel, X, eval_pts)
        report = lebesgue(table)
        row.update(
            n_flagged=report.n_undefined,
            lebesgue_std=report.lambda_const,
            lebesgue_resc=report.lambda_hat_const,
            cond_est=table.cond,
            fit_ms=(time.perf_counter() - t0) * 1e3,
        )
    except (NotPositiveDefiniteError, ValueError) as err:
        row["_error"] = str(err)
    return row


def failures(rows):
    """Error messages of the failed rows, in order."""
    return [r["_error"] for r in rows if "_error" in r]


# ---------------------------------------------------------------------------
# Registry
# ---------------------------------------------------------------------------

def _run_fig2_1d():
    """1D illustration: f(x) = x, W2, eps = 5, on a 3-node and a 7-node set."""
    eval_pts = grid(1000, interval(0, 1)).points
    f = test_function("identity1d")
    rows = []
    for nodes in ([1 / 6, 1 / 2, 5 / 6], [0, 1 / 6, 1 / 3, 1 / 2, 2 / 3, 5 / 6, 1]):
        X = PointSet(np.asarray(nodes)[:, None])
        kernel = KernelSpec("w2", 5.0, dim=1)
        for method in ("standard", "rescaled"):
            rows.append(
                _method_row("fig2-1d", method, kernel, X, f(X.points),
                            eval_pts, f(eval_pts))
            )
    return rows


def _run_fig2_franke(franke_classic=False):
    """Franke RMSE vs shape parameter on the 25-node grid, W2, 30 eps values."""
    X = grid(5, Box((0.0, 0.0), (1.0, 1.0)))
    eval_pts = grid(40, Box((0.0, 0.0), (1.0, 1.0))).points
    f = test_function("franke-classic" if franke_classic else "franke")
    fX = f(X.points)
    true_vals = f(eval_pts)
    rows = []
    for eps in np.geomspace(0.5, 4.0, 30):
        kernel = KernelSpec("w2", float(eps), dim=2)
        for method in ("standard", "rescaled"):
            rows.append(
                _method_row("fig2-franke", method, kernel, X, fX, eval_pts, true_vals)
            )
    return rows


def _leb_1d(name, family, eps_values):
    X = grid(10, interval(-1, 1))
    eval_pts = grid(1000, interval(-1, 1)).points
    return [
        _lebesgue_row(name, KernelSpec(family, float(e), dim=1), X, eval_pts)
        for e in eps_values
    ]


def _run_leb_gauss():
    """Standard vs rescaled Lebesgue constants, Gaussian, 10 nodes in [-1, 1]."""
    return _leb_1d("leb-gauss", "gauss", (0.5, 1.0, 4.0, 8.0))


def _run_leb_w2():
    """Standard vs rescaled Lebesgue constants, W2, 10 nodes in [-1, 1]."""
    return _leb_1d("leb-w2", "w2", (0.5, 1.0, 2.0, 4.0))


def _run_leb_w2_square():
    """Lebesgue comparison on the square: 25 equispaced nodes, W2, eps = 3.85."""
    box = Box((-1.0, -1.0), (1.0, 1.0))
    X = grid(5, box)
    eval_pts = grid(101, box).points
    return [_lebesgue_row("leb-w2-square", KernelSpec("w2", 3.85, dim=2), X, eval_pts)]


def _run_leb_w2_cardioid():
    """Lebesgue comparison on the cardioid r = (1 - cos theta)/2, W2, eps = 3."""
    box = Box((-1.0, -1.0), (1.0, 1.0))
    card = Cardioid(0.5)
    X = restrict(grid(9, box), card)
    eval_pts = restrict(grid(101, box), card).points
    return [_lebesgue_row("leb-w2-cardioid", KernelSpec("w2", 3.0, dim=2), X, eval_pts)]


def _run_pu_vs_rpu_disk(patches=8, overlap=1.5, ackley_classic=False):
    """PUM vs rescaled-local PUM on the disk: Ackley data on 1000 Halton nodes."""
    disk = Disk((0.5, 0.5), 0.5)
    X = restrict(halton(1000, 2), disk)
    eval_pts = restrict(grid(100, Box((0.0, 0.0), (1.0, 1.0))), disk).points
    f = test_function("ackley-classic" if ackley_classic else "ackley")
    fX = f(X.points)
    true_vals = f(eval_pts)
    cover = build_cover(disk, X, patches, overlap=overlap)
    rows = []
    for eps in np.linspace(0.01, 2.0, 30):
        kernel = KernelSpec("w2", float(eps), dim=2)
        for method in ("pum", "rpum"):
            rows.append(
                _method_row("pu-vs-rpu-disk", method, kernel, X, fX, eval_pts,
                            true_vals, cover=cover)
            )
    return rows


# (nodes per axis, eval nodes per axis, patches per axis) for the three
# grid sizes of the PU-vs-RPUM accuracy table.
_TABLE444_SIZES = ((17, 40, 4), (32, 50, 8), (50, 80, 12))


def _run_table444(eps=5.0, overlap=1.5):
    """PU vs RPUM accuracy for (x1^2 + x2^2 - 1)^9 on unit-square grids."""
    box = Box((0.0, 0.0), (1.0, 1.0))
    f = test_function("poly9")
    rows = []
    for n_axis, n_eval_axis, patches in _TABLE444_SIZES:
        X = grid(n_axis, box)
        eval_pts = grid(n_eval_axis, box).points
        fX = f(X.points)
        true_vals = f(eval_pts)
        cover = build_cover(box, X, patches, overlap=overlap)
        kernel = KernelSpec("w2", float(eps), dim=2)
        for method in ("pum", "rpum"):
            rows.append(
                _method_row("table444", method, kernel, X, fX, eval_pts,
                            true_vals, cover=cover)
            )
    return rows


def _run_vsk_halfsphere(franke_classic=False, n_eps=20):
    """Half-sphere lift experiment: plain, rescaled, VSK, and VSK+rescaled fits.

    Franke data on 200 near-uniform hemisphere nodes projected to the unit
    disk; the scale function is the lift height sqrt(1 - x1^2 - x2^2). The
    sweep ends at eps = 5, the headline configuration.
    """
    X = half_sphere_points(200)
    eval_pts = restrict(grid(100, Box((-1.0, -1.0), (1.0, 1.0))), Disk((0, 0), 1)).points
    f = test_function("franke-classic" if franke_classic else "franke")
    fX = f(X.points)
    true_vals = f(eval_pts)
    rows = []
    for eps in np.linspace(0.1, 5.0, n_eps):
        kernel = KernelSpec("w2", float(eps), dim=2)
        for method in ("standard", "rescaled", "vsk", "vsk+rescaled"):
            rows.append(
                _method_row("vsk-halfsphere", method, kernel, X, fX, eval_pts,
                            true_vals, vsk_scale=half_sphere_lift)
            )
    return rows


REGISTRY = {
    "fig2-1d": _run_fig2_1d,
    "fig2-franke": _run_fig2_franke,
    "leb-gauss": _run_leb_gauss,
    "leb-w2": _run_leb_w2,
    "leb-w2-square": _run_leb_w2_square,
    "leb-w2-cardioid": _run_leb_w2_cardioid,
    "pu-vs-rpu-disk": _run_pu_vs_rpu_disk,
    "table444": _run_table444,
    "vsk-halfsphere": _run_vsk_halfsphere,
}


def run(name, **overrides):
    """Run a named registry experiment; returns its list of row dicts.

    Unknown names raise KeyError listing the registry; unknown overrides
    raise TypeError from the runner signature.
    """
    if name not in REGISTRY:
        raise KeyError(
            f"unknown experiment {name!r}; available: {', '.join(sorted(REGISTRY))}"
        )
    return REGISTRY[name](**overrides)
