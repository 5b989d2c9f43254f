"""Thresholded PC directions, SH-PC scores and sign clustering.

Three truncation rules share one representation, :class:`SparseDirection`:

* ``auto``  - keep the largest NR entries until their squared sum reaches 1
  (the A-SPCA rule; no tuning parameter, values kept as is);
* ``omega`` - the same scan stopped at cumulative squared mass ``omega``
  (shrinkage PC direction);
* ``tspca`` - hard threshold ``|h| >= min(zeta, max|h|)`` on a unit direction,
  renormalized to length one.

Entries are ranked by decreasing magnitude with ties broken by the lower
variable index, so every rule retains exactly the scanned prefix.
"""

import warnings
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .errors import InvalidInputError
from .pca import NrFit, fit_nr

__all__ = [
    "SparseDirection",
    "ThresholdWarning",
    "magnitude_order",
    "cumulative_support_size",
    "threshold_auto",
    "threshold_omega",
    "tspca",
    "sparse_scores",
    "sh_pc_scores",
    "cluster_by_sign",
    "label_agreement",
    "AspcaComponent",
    "aspca_fit",
    "shrinkage_fit",
]

MODES = ("auto", "omega", "tspca")


class ThresholdWarning(UserWarning):
    """The cumulative target was never reached, so the whole vector was kept."""


@dataclass(frozen=True)
class SparseDirection:
    """A direction stored as its support ``indices`` (ascending) and ``values``.

    ``norm_sq`` is the sum of squared values accumulated by decreasing
    magnitude, the same order used by the cumulative threshold rule.

    ``param`` is omega for ``mode == "omega"``, zeta for ``"tspca"`` and None
    for ``"auto"``. ``exhausted`` records that the cumulative target was not
    reached and every entry was retained.
    """

    dim: int
    indices: np.ndarray
    values: np.ndarray
    component: int
    mode: str
    param: Optional[float] = None
    exhausted: bool = False
    norm_sq: float = field(init=False)

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        val = np.asarray(self.values, dtype=np.float64)
        if self.mode not in MODES:
            raise InvalidInputError(f"unknown mode {self.mode!r}")
        if idx.ndim != 1 or idx.shape != val.shape or idx.size < 1:
            raise InvalidInputError("support must be a non-empty 1-D index/value pair")
        if np.any(np.diff(idx) <= 0) or idx[0] < 0 or idx[-1] >= self.dim:
            raise InvalidInputError("indices must be strictly increasing within [0, dim)")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "values", val)
        # accumulate in the order the threshold rule scans, so the cached value
        # is bit-identical to the partial sum that decided the support
        ordered = val[magnitude_order(val)]
        object.__setattr__(self, "norm_sq", float(np.cumsum(ordered * ordered)[-1]))

    @property
    def support_size(self):
        return int(self.indices.size)

    def to_dense(self):
        out = np.zeros(self.dim)
        out[self.indices] = self.values
        return out

    def normalized(self):
        """Copy scaled to unit length."""
        return SparseDirection(
            dim=self.dim,
            indices=self.indices,
            values=self.values / np.sqrt(self.norm_sq),
            component=self.component,
            mode=self.mode,
            param=self.param,
            exhausted=self.exhausted,
        )


def magnitude_order(h):
    """Indices of ``h`` by decreasing ``|h|``, ties by increasing index."""
    h = np.asarray(h, dtype=np.float64)
    return np.lexsort((np.arange(h.size), -np.abs(h)))


def cumulative_support_size(h, target):
    """Least k with ``sum_{s<=k} h_(s)^2 >= target`` over the magnitude-sorted entries.

    Returns ``(k, order)``; ``k`` is ``len(h)`` if the target is never reached.
    """
    h = np.asarray(h, dtype=np.float64)
    order = magnitude_order(h)
    partial = np.cumsum(h[order] ** 2)
    k = int(np.searchsorted(partial, target, side="left")) + 1
    return min(k, h.size), order


def _truncate(h, target, component, mode, param):
    h = np.asarray(h, dtype=np.float64)
    if h.ndim != 1 or h.size < 1 or not np.all(np.isfinite(h)):
        raise InvalidInputError("direction must be a finite, non-empty vector")
    k, order = cumulative_support_size(h, target)
    exhausted = float(np.sum(h * h)) < target
    if exhausted:
        warnings.warn(
            f"component {component}: squared norm {np.sum(h * h):.17g} is below "
            f"the target {target}; keeping all {h.size} entries",
            ThresholdWarning,
            stacklevel=3,
        )
    kept = np.sort(order[:k])
    return SparseDirection(
        dim=h.size,
        indices=kept,
        values=h[kept],
        component=component,
        mode=mode,
        param=param,
        exhausted=exhausted,
    )


def _nr_source(h, component):
    if isinstance(h, NrFit):
        return h.direction(component)
    return h


def threshold_auto(h, component=1):
    """A-SPCA truncation of an NR direction.

    ``h`` is either an NR direction vector or an :class:`NrFit`, in which case
    ``component`` selects the direction (and an invalid component raises
    :class:`InvalidComponentError`).
    """
    return _truncate(_nr_source(h, component), 1.0, component, "auto", None)


def threshold_omega(h, omega, component=1):
    """Shrinkage PC direction: truncation at cumulative squared mass ``omega``."""
    if not 0.0 < omega <= 1.0:
        raise InvalidInputError(f"omega must lie in (0, 1], got {omega!r}")
    return _truncate(_nr_source(h, component), float(omega), component, "omega", float(omega))


def tspca(h, zeta, component=1):
    """Thresholded SPCA on a unit conventional direction, renormalized."""
    if not zeta > 0.0:
        raise InvalidInputError(f"zeta must be positive, got {zeta!r}")
    h = np.asarray(h, dtype=np.float64)
    if h.ndim != 1 or h.size < 1:
        raise InvalidInputError("direction must be a non-empty vector")
    if abs(np.linalg.norm(h) - 1.0) > 1e-8:
        raise InvalidInputError(f"TSPCA needs a unit direction, got norm {np.linalg.norm(h)!r}")
    mag = np.abs(h)
    cut = min(zeta, mag.max())
    kept = np.flatnonzero(mag >= cut)
    vals = h[kept]
    return SparseDirection(
        dim=h.size,
        indices=kept,
        values=vals / np.linalg.norm(vals),
        component=component,
        mode="tspca",
        param=float(zeta),
    )


def sparse_scores(x, indices, values):
    """``(x_i - xbar)^T h`` for ``h`` given by its support; other rows of x are never read."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] < 1:
        raise InvalidInputError(f"expected a d x n matrix, got shape {x.shape}")
    rows = x[np.asarray(indices, dtype=np.int64), :]
    centered = rows - rows.mean(axis=1, keepdims=True)
    return centered.T @ np.asarray(values, dtype=np.float64)


def sh_pc_scores(x, direction, normalized=False):
    """SH-PC scores on a sparse direction, optionally for its unit-length version."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] != direction.dim:
        raise InvalidInputError(
            f"direction has dim {direction.dim}, data has shape {x.shape}"
        )
    scores = sparse_scores(x, direction.indices, direction.values)
    if normalized:
        scores = scores / np.sqrt(direction.norm_sq)
    return scores


def cluster_by_sign(scores):
    """Label 1 for nonnegative scores, 2 for negative ones."""
    scores = np.asarray(scores, dtype=np.float64)
    return np.where(scores >= 0.0, 1, 2)


def label_agreement(labels, truth):
    """Fraction of matching two-class labels, maximised over swapping the labels."""
    labels = np.asarray(labels)
    truth = np.asarray(truth)
    if labels.shape != truth.shape:
        raise InvalidInputError("label vectors differ in length")
    if labels.size == 0:
        return 1.0
    same = float(np.mean(labels == truth))
    swapped = float(np.mean(np.where(labels == 1, 2, 1) == truth))
    return max(same, swapped)


class AspcaComponent(NamedTuple):
    lambda_tilde: float
    direction: SparseDirection


def _check_m(nr, m):
    if not isinstance(m, (int, np.integer)) or not 1 <= m <= nr.r:
        raise InvalidInputError(f"m must be an integer in 1..{nr.r}, got {m!r}")


def aspca_fit(x, m, nr=None):
    """Automatic sparse PCA: NR eigenvalues and auto-thresholded directions for j = 1..m."""
    nr = fit_nr(x) if nr is None else nr
    _check_m(nr, m)
    out = []
    for j in range(1, m + 1):
        out.append(AspcaComponent(float(nr.lambda_tilde[j - 1]), threshold_auto(nr, j)))
    return out


def shrinkage_fit(x, m, omega, nr=None):
    """Shrinkage PC directions for j = 1..m at a common ``omega``."""
    nr = fit_nr(x) if nr is None else nr
    _check_m(nr, m)
    return [
        AspcaComponent(float(nr.lambda_tilde[j - 1]), threshold_omega(nr, omega, j))
        for j in range(1, m + 1)
    ]
