"""Small dense linear algebra kit.

Everything the PCA layer needs for n x n dual matrices and moderately sized
covariance factors: a cyclic Jacobi eigensolver, Cholesky, column centering.
numpy supplies storage and vector arithmetic only; no LAPACK routine is called.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, InvalidInputError, NotPositiveDefiniteError

__all__ = [
    "EigenSystem",
    "as_symmetric",
    "symmetric_eigen",
    "cholesky",
    "center_columns",
]

OFF_DIAGONAL_TOL = 1e-13
MAX_SWEEPS = 64


@dataclass(frozen=True)
class EigenSystem:
    """Eigenpairs of a symmetric matrix.

    ``values`` are sorted in descending order and ``vectors[:, j]`` is the unit
    eigenvector of ``values[j]``. Each eigenvector is signed so that its
    largest-magnitude entry is positive.
    """

    values: np.ndarray
    vectors: np.ndarray
    sweeps: int = 0

    @property
    def order(self):
        return self.values.shape[0]


def as_symmetric(a):
    """Return a float copy of ``a`` with ``(i, j)`` and ``(j, i)`` averaged."""
    a = np.array(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise InvalidInputError(f"expected a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidInputError("matrix contains non-finite entries")
    return 0.5 * (a + a.T)


def _off_norm(a):
    off = a.copy()
    np.fill_diagonal(off, 0.0)
    return np.linalg.norm(off)


def _round_robin(p):
    """Pairings covering every (i, k), i < k, once per sweep in p - 1 rounds of disjoint pairs."""
    players = list(range(p + (p % 2)))
    m = len(players)
    rounds = []
    for _ in range(m - 1):
        pairs = [(players[t], players[m - 1 - t]) for t in range(m // 2)]
        pairs = [(min(i, k), max(i, k)) for i, k in pairs if i < p and k < p]
        if pairs:
            left, right = zip(*pairs)
            rounds.append((np.array(left), np.array(right)))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def _rotate_round(a, v, left, right):
    # rotations act on disjoint planes, so they commute and apply at once
    apq = a[left, right]
    active = apq != 0.0
    if not np.any(active):
        return
    left, right, apq = left[active], right[active], apq[active]
    with np.errstate(over="ignore", divide="ignore"):
        theta = (a[right, right] - a[left, left]) / (2.0 * apq)
        huge = np.abs(theta) > 1e150
        safe = np.where(huge, 1.0, theta)
        t = np.sign(safe) / (np.abs(safe) + np.sqrt(safe * safe + 1.0))
        t = np.where(safe == 0.0, 1.0, t)
        t = np.where(huge, 0.5 / theta, t)
    c = 1.0 / np.sqrt(t * t + 1.0)
    s = t * c
    col_l = a[:, left].copy()
    col_r = a[:, right].copy()
    a[:, left] = c * col_l - s * col_r
    a[:, right] = s * col_l + c * col_r
    row_l = a[left, :].copy()
    row_r = a[right, :].copy()
    a[left, :] = c[:, None] * row_l - s[:, None] * row_r
    a[right, :] = s[:, None] * row_l + c[:, None] * row_r
    a[left, right] = 0.0
    a[right, left] = 0.0
    v_l = v[:, left].copy()
    v_r = v[:, right].copy()
    v[:, left] = c * v_l - s * v_r
    v[:, right] = s * v_l + c * v_r


def symmetric_eigen(a, tol=OFF_DIAGONAL_TOL, max_sweeps=MAX_SWEEPS):
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Each sweep visits every off-diagonal pair once, in round-robin order so
    that disjoint rotations are applied together.

    Parameters
    ----------
    a : array_like, shape (p, p)
        Symmetric matrix; it is symmetrized by averaging before use.
    tol : float
        Sweeps stop once the off-diagonal Frobenius norm is at most
        ``tol * ||a||_F``.
    max_sweeps : int
        Sweep budget before :class:`ConvergenceError` is raised.

    Returns
    -------
    EigenSystem
    """
    a = as_symmetric(a)
    p = a.shape[0]
    v = np.eye(p)
    scale = np.linalg.norm(a)
    target = tol * scale
    schedule = _round_robin(p)
    sweeps = 0
    off = _off_norm(a)
    while off > target:
        if sweeps >= max_sweeps:
            raise ConvergenceError(
                f"Jacobi did not converge in {max_sweeps} sweeps "
                f"(off-diagonal norm {off:.3e}, target {target:.3e})",
                residual=off,
            )
        for left, right in schedule:
            _rotate_round(a, v, left, right)
        sweeps += 1
        off = _off_norm(a)

    values = np.diag(a).copy()
    lead = np.argmax(np.abs(v), axis=0)
    signs = np.where(v[lead, np.arange(p)] < 0.0, -1.0, 1.0)
    v = v * signs
    order = np.lexsort((lead, -values))
    return EigenSystem(values=values[order], vectors=v[:, order], sweeps=sweeps)


def cholesky(a):
    """Lower-triangular ``L`` with ``a = L @ L.T`` for symmetric positive definite ``a``.

    Raises :class:`NotPositiveDefiniteError` naming the first non-positive pivot.
    """
    a = as_symmetric(a)
    p = a.shape[0]
    low = np.zeros_like(a)
    for j in range(p):
        row = low[j, :j]
        pivot = a[j, j] - row @ row
        if not pivot > 0.0:
            raise NotPositiveDefiniteError(j, float(pivot))
        ljj = np.sqrt(pivot)
        low[j, j] = ljj
        if j + 1 < p:
            low[j + 1:, j] = (a[j + 1:, j] - low[j + 1:, :j] @ row) / ljj
    return low


def center_columns(x):
    """Subtract the per-variable sample mean from a d x n matrix.

    Returns ``(centered, mean)`` where ``mean`` has length d.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.size == 0:
        raise InvalidInputError(f"expected a non-empty d x n matrix, got shape {x.shape}")
    mean = x.mean(axis=1)
    return x - mean[:, None], mean
