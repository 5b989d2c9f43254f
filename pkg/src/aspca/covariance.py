"""Low-rank estimates of the intrinsic (spiked) covariance part and their losses.

A factor ``B`` with columns ``b_1..b_m`` stands for ``sum_j b_j b_j^T``; losses
are evaluated from m x m Gram matrices so no d x d matrix is ever formed
unless :meth:`LowRankFactor.materialize` is asked for explicitly.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

__all__ = [
    "MAX_DENSE_DIM",
    "LowRankFactor",
    "scaled_directions",
    "conventional_intrinsic",
    "frobenius_loss",
]

MAX_DENSE_DIM = 1024


@dataclass(frozen=True)
class LowRankFactor:
    """``columns`` has shape (d, m); the represented matrix is ``columns @ columns.T``."""

    columns: np.ndarray

    def __post_init__(self):
        cols = np.asarray(self.columns, dtype=np.float64)
        if cols.ndim == 1:
            cols = cols[:, None]
        if cols.ndim != 2 or cols.shape[1] < 1 or cols.shape[0] < 1:
            raise InvalidInputError(f"factor needs shape (d, m>=1), got {cols.shape}")
        object.__setattr__(self, "columns", cols)

    @property
    def dim(self):
        return self.columns.shape[0]

    @property
    def rank(self):
        return self.columns.shape[1]

    def gram(self):
        return self.columns.T @ self.columns

    def materialize(self, max_dim=MAX_DENSE_DIM):
        """Dense d x d matrix; refused above ``max_dim``."""
        if self.dim > max_dim:
            raise InvalidInputError(
                f"refusing to materialize a {self.dim} x {self.dim} matrix (max_dim={max_dim})"
            )
        return self.columns @ self.columns.T


def scaled_directions(nr, directions):
    """Columns ``sqrt(lambda_tilde_j) * h_j*`` from an NR fit and its sparse directions."""
    if not directions:
        raise InvalidInputError("need at least one direction")
    d = nr.base.d
    cols = np.zeros((d, len(directions)))
    for c, direction in enumerate(directions):
        j = direction.component
        nr.direction(j)  # raises for an invalid component
        cols[direction.indices, c] = np.sqrt(nr.lambda_tilde[j - 1]) * direction.values
    return LowRankFactor(cols)


def conventional_intrinsic(fit, m):
    """Columns ``sqrt(lambda_hat_j) * h_hat_j`` for j = 1..m."""
    if not 1 <= m <= fit.r:
        raise InvalidInputError(f"m must lie in 1..{fit.r}, got {m}")
    cols = np.column_stack([np.sqrt(fit.lambda_hat[j - 1]) * fit.direction(j) for j in range(1, m + 1)])
    return LowRankFactor(cols)


def frobenius_loss(a, b):
    """Squared Frobenius distance between ``A A^T`` and ``B B^T`` via Gram matrices."""
    if a.dim != b.dim:
        raise InvalidInputError(f"dimension mismatch: {a.dim} vs {b.dim}")
    aa = a.gram()
    bb = b.gram()
    ab = a.columns.T @ b.columns
    loss = np.sum(aa * aa) + np.sum(bb * bb) - 2.0 * np.sum(ab * ab)
    return float(max(loss, 0.0))
