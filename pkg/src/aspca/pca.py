"""Dual-covariance PCA and the noise-reduction (NR) estimators.

Components are numbered from 1, as in the usual PC notation; array column
``j - 1`` holds component ``j``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import AbsentComponentError, InvalidComponentError, InvalidInputError
from .linalg import center_columns, symmetric_eigen

__all__ = [
    "MIN_SAMPLES",
    "PcaFit",
    "NrFit",
    "as_data_matrix",
    "dual_covariance",
    "fit_pca",
    "nr_eigenvalues",
    "fit_nr",
    "pc_scores",
    "angle",
    "aligned_mse",
]

MIN_SAMPLES = 4
# relative size below which a dual eigenvalue counts as zero
ZERO_EIGENVALUE_TOL = 1e-10


def as_data_matrix(x, min_samples=MIN_SAMPLES):
    """Validate a d x n data matrix (columns are observations) and return it as float64."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise InvalidInputError(f"data matrix must be 2-D, got {x.ndim}-D")
    d, n = x.shape
    if d < 1:
        raise InvalidInputError("data matrix has no variables")
    if n < min_samples:
        raise InvalidInputError(f"need at least {min_samples} samples, got n={n}")
    if not np.all(np.isfinite(x)):
        raise InvalidInputError("data matrix contains non-finite entries")
    return x


def dual_covariance(x):
    """The n x n dual sample covariance ``(X - Xbar)^T (X - Xbar) / (n - 1)``."""
    x = as_data_matrix(x)
    centered, _ = center_columns(x)
    sd = centered.T @ centered / (x.shape[1] - 1)
    return 0.5 * (sd + sd.T)


@dataclass(frozen=True)
class PcaFit:
    """Conventional PCA computed through the dual covariance matrix.

    Attributes
    ----------
    r : int
        Number of components kept, ``min(n - 2, d)``.
    lambda_hat : ndarray, shape (r,)
        Leading eigenvalues of the dual matrix, descending.
    u_hat : ndarray, shape (n, r)
        Dual eigenvectors.
    h_hat : ndarray, shape (d, r)
        Unit PC directions; columns of absent components are zero.
    present : ndarray of bool, shape (r,)
        False where the eigenvalue is zero (rank deficiency).
    dual_values : ndarray, shape (n,)
        Every eigenvalue of the dual matrix.
    trace_dual : float
    mean : ndarray, shape (d,)
    n : int
    """

    r: int
    lambda_hat: np.ndarray
    u_hat: np.ndarray
    h_hat: np.ndarray
    present: np.ndarray
    dual_values: np.ndarray
    trace_dual: float
    mean: np.ndarray
    n: int

    @property
    def d(self):
        return self.h_hat.shape[0]

    def _check(self, j):
        if not 1 <= j <= self.r:
            raise InvalidInputError(f"component {j} out of range 1..{self.r}")

    def direction(self, j):
        """Unit PC direction of component ``j`` (1-based)."""
        self._check(j)
        if not self.present[j - 1]:
            raise AbsentComponentError(
                f"component {j} has zero eigenvalue; its direction is undefined"
            )
        return self.h_hat[:, j - 1]


def fit_pca(x):
    """Conventional PCA of a d x n data matrix via its dual covariance."""
    x = as_data_matrix(x)
    d, n = x.shape
    centered, mean = center_columns(x)
    sd = centered.T @ centered / (n - 1)
    sd = 0.5 * (sd + sd.T)
    eig = symmetric_eigen(sd)
    values = eig.values.copy()
    top = max(values[0], 0.0)
    # S_D is PSD: round-off on either side of zero is snapped to exactly zero
    values[np.abs(values) <= ZERO_EIGENVALUE_TOL * top] = 0.0

    r = min(n - 2, d)
    lam = values[:r]
    u = eig.vectors[:, :r]
    present = lam > ZERO_EIGENVALUE_TOL * top
    h = np.zeros((d, r))
    if np.any(present):
        scale = np.sqrt((n - 1) * lam[present])
        h[:, present] = (centered @ u[:, present]) / scale
    return PcaFit(
        r=r,
        lambda_hat=lam,
        u_hat=u,
        h_hat=h,
        present=present,
        dual_values=values,
        trace_dual=float(np.trace(sd)),
        mean=mean,
        n=n,
    )


def nr_eigenvalues(lambda_hat, trace_dual, n):
    """Noise-reduced eigenvalues and the per-component noise estimates.

    ``delta_j = (trace_dual - sum_{s<=j} lambda_hat_s) / (n - j - 1)`` and
    ``lambda_tilde_j = lambda_hat_j - delta_j``.
    """
    lam = np.asarray(lambda_hat, dtype=np.float64)
    j = np.arange(1, lam.shape[0] + 1)
    if np.any(n - j - 1 <= 0):
        raise InvalidInputError(f"NR estimates need j <= n - 2 (n={n}, r={lam.shape[0]})")
    delta = (trace_dual - np.cumsum(lam)) / (n - j - 1)
    return lam - delta, delta


@dataclass(frozen=True)
class NrFit:
    """NR eigenvalues and (non-unit) NR directions on top of a :class:`PcaFit`."""

    base: PcaFit
    lambda_tilde: np.ndarray
    delta_hat: np.ndarray
    h_tilde: np.ndarray
    valid: np.ndarray

    @property
    def r(self):
        return self.base.r

    def direction(self, j):
        """NR direction of component ``j`` (1-based); raises if ``lambda_tilde_j <= 0``."""
        self.base._check(j)
        if not self.valid[j - 1]:
            raise InvalidComponentError(j, float(self.lambda_tilde[j - 1]))
        return self.h_tilde[:, j - 1]


def fit_nr(x):
    """PCA plus the noise-reduction eigenvalues and directions."""
    base = fit_pca(x)
    lam_t, delta = nr_eigenvalues(base.lambda_hat, base.trace_dual, base.n)
    # lambda_tilde_j >= 0 in exact arithmetic (delta_j averages eigenvalues that
    # are all <= lambda_hat_j), so values within round-off of zero count as zero
    floor = ZERO_EIGENVALUE_TOL * base.lambda_hat[0]
    valid = (lam_t > floor) & base.present
    h_t = np.full_like(base.h_hat, np.nan)
    if np.any(valid):
        ratio = base.lambda_hat[valid] / lam_t[valid]
        h_t[:, valid] = base.h_hat[:, valid] * np.sqrt(ratio)
    return NrFit(base=base, lambda_tilde=lam_t, delta_hat=delta, h_tilde=h_t, valid=valid)


def pc_scores(x, direction):
    """Scores ``(x_i - xbar)^T direction`` for every sample ``i``."""
    x = np.asarray(x, dtype=np.float64)
    direction = np.asarray(direction, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] < 1:
        raise InvalidInputError(f"expected a d x n matrix, got shape {x.shape}")
    if direction.shape != (x.shape[0],):
        raise InvalidInputError(
            f"direction has length {direction.shape}, data has d={x.shape[0]}"
        )
    centered, _ = center_columns(x)
    return centered.T @ direction


def angle(u, v, aligned=False):
    """Angle in radians between two nonzero vectors.

    With ``aligned=True`` the sign of ``u`` is flipped when that makes the
    inner product nonnegative, so the result lies in ``[0, pi/2]``.
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise InvalidInputError(f"length mismatch: {u.shape} vs {v.shape}")
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise InvalidInputError("angle is undefined for a zero vector")
    cos = float(u @ v) / (nu * nv)
    if aligned:
        cos = abs(cos)
    return float(np.arccos(np.clip(cos, -1.0, 1.0)))


def aligned_mse(estimate, truth):
    """Squared error ``||s * estimate - truth||^2`` minimised over the global sign ``s``."""
    estimate = np.asarray(estimate, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    if estimate.shape != truth.shape:
        raise InvalidInputError(f"length mismatch: {estimate.shape} vs {truth.shape}")
    plus = np.sum((estimate - truth) ** 2)
    minus = np.sum((estimate + truth) ** 2)
    return float(min(plus, minus))
