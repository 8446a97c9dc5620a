"""Dense symmetric positive definite solves via Cholesky factorization.

One factorization serves any number of right-hand sides, which is how the
cardinal-basis computation amortizes its N solves. No automatic
regularization is ever applied: a failed factorization is reported, and the
caller may opt in to an explicit ridge term.
"""

import numpy as np
from dataclasses import dataclass
from scipy.linalg import lapack


class NotPositiveDefiniteError(np.linalg.LinAlgError):
    """Cholesky failed: the matrix has a nonpositive pivot.

    ``pivot_index`` is 1-based (the order of the offending leading minor,
    as reported by LAPACK).
    """

    def __init__(self, pivot_index, context=""):
        self.pivot_index = int(pivot_index)
        msg = f"matrix is not positive definite (pivot {self.pivot_index})"
        if context:
            msg += f"; {context}"
        super().__init__(msg)


class NonFiniteMatrixError(ValueError):
    pass


@dataclass(frozen=True)
class SpdFactorization:
    """Lower Cholesky factor of an SPD matrix plus its smallest pivot."""

    n: int
    lower: np.ndarray
    smallest_pivot: float


def factor(A, ridge=0.0, context=""):
    """Cholesky-factor a symmetric positive definite matrix.

    ``ridge`` > 0 adds ridge * I before factoring (explicit opt-in only).
    Raises NotPositiveDefiniteError with the failing pivot index, or
    NonFiniteMatrixError for inf/nan entries.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise NonFiniteMatrixError("matrix has non-finite entries")
    scale = np.abs(A).max() or 1.0
    if np.abs(A - A.T).max() > 1e-12 * scale:
        raise ValueError("matrix is not symmetric")
    if ridge < 0:
        raise ValueError("ridge must be nonnegative")
    if ridge > 0:
        A = A + ridge * np.eye(len(A))
    c, info = lapack.dpotrf(A, lower=1)
    if info > 0:
        raise NotPositiveDefiniteError(info, context)
    if info < 0:
        raise ValueError(f"illegal value in argument {-info} of dpotrf")
    return SpdFactorization(n=len(A), lower=c, smallest_pivot=float(np.diag(c).min()))


def solve(F, B):
    """Solve A x = b for one right-hand side vector or a matrix of columns."""
    B = np.asarray(B, dtype=float)
    vector = B.ndim == 1
    rhs = B[:, None] if vector else B
    if rhs.ndim != 2 or rhs.shape[0] != F.n:
        raise ValueError(f"right-hand side shape {B.shape} does not match order {F.n}")
    x, info = lapack.dpotrs(F.lower, rhs, lower=1)
    if info != 0:
        raise ValueError(f"illegal value in argument {-info} of dpotrs")
    return x[:, 0] if vector else x


def cond_estimate(F, A):
    """1-norm condition estimate of the factored matrix (always >= 1)."""
    A = np.asarray(A, dtype=float)
    anorm = float(np.abs(A).sum(axis=0).max())
    rcond, info = lapack.dpocon(F.lower, anorm, uplo=b"L")
    if info != 0:
        raise ValueError(f"illegal value in argument {-info} of dpocon")
    if rcond <= 0:
        return np.inf
    return max(1.0, 1.0 / float(rcond))
