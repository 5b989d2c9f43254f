"""Automatic sparse PCA for high-dimension, low-sample-size data.

The main entry points are :func:`fit_nr` (noise-reduction eigenvalues and
directions), :func:`aspca_fit` (automatically thresholded directions) and the
synthetic settings in :mod:`aspca.simgen`.
"""

from .covariance import LowRankFactor, conventional_intrinsic, frobenius_loss, scaled_directions
from .errors import (
    AbsentComponentError,
    AspcaError,
    ConvergenceError,
    InvalidComponentError,
    InvalidInputError,
    NotPositiveDefiniteError,
)
from .linalg import EigenSystem, center_columns, cholesky, symmetric_eigen
from .pca import NrFit, PcaFit, aligned_mse, angle, dual_covariance, fit_nr, fit_pca, pc_scores
from .sparse import (
    SparseDirection,
    aspca_fit,
    cluster_by_sign,
    label_agreement,
    sh_pc_scores,
    shrinkage_fit,
    threshold_auto,
    threshold_omega,
    tspca,
)

__version__ = "0.1.0"
