import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aspca.covariance import LowRankFactor, conventional_intrinsic, frobenius_loss, scaled_directions
from aspca.errors import InvalidComponentError, InvalidInputError
from aspca.pca import fit_nr, fit_pca
from aspca.sparse import SparseDirection, aspca_fit


def dense_loss(a, b):
    diff = a.columns @ a.columns.T - b.columns @ b.columns.T
    return float(np.sum(diff * diff))


class FakeNr:
    """Just enough of an NR fit to drive ``scaled_directions``."""

    def __init__(self, d, lambda_tilde):
        self.lambda_tilde = np.asarray(lambda_tilde, dtype=float)
        self.base = type("Base", (), {"d": d})()

    def direction(self, j):
        if self.lambda_tilde[j - 1] <= 0:
            raise InvalidComponentError(j, float(self.lambda_tilde[j - 1]))


class TestScaledDirections:
    def test_single_coordinate(self):
        sd = SparseDirection(dim=5, indices=[0], values=[1.0], component=1, mode="auto")
        factor = scaled_directions(FakeNr(5, [4.0]), [sd])
        np.testing.assert_array_equal(factor.columns[:, 0], [2.0, 0.0, 0.0, 0.0, 0.0])

    def test_norms_and_support(self, rng):
        x = rng.standard_normal((30, 10))
        x[:2] *= 4
        nr = fit_nr(x)
        comps = aspca_fit(x, 2, nr)
        factor = scaled_directions(nr, [c.direction for c in comps])
        for j, comp in enumerate(comps):
            col = factor.columns[:, j]
            np.testing.assert_array_equal(np.flatnonzero(col), comp.direction.indices)
            assert col @ col == pytest.approx(comp.lambda_tilde * comp.direction.norm_sq, rel=1e-12)

    def test_dense_hand_computation(self):
        d1 = SparseDirection(dim=4, indices=[0, 2], values=[1.0, 0.5], component=1, mode="auto")
        d2 = SparseDirection(dim=4, indices=[3], values=[-1.0], component=2, mode="auto")
        dense = scaled_directions(FakeNr(4, [4.0, 9.0]), [d1, d2]).materialize()
        expected = np.zeros((4, 4))
        expected[0, 0], expected[0, 2], expected[2, 0], expected[2, 2] = 4.0, 2.0, 2.0, 1.0
        expected[3, 3] = 9.0
        np.testing.assert_allclose(dense, expected, rtol=1e-15)

    def test_invalid_component(self):
        sd = SparseDirection(dim=3, indices=[0], values=[1.0], component=1, mode="auto")
        with pytest.raises(InvalidComponentError):
            scaled_directions(FakeNr(3, [-1.0]), [sd])

    def test_empty(self):
        with pytest.raises(InvalidInputError):
            scaled_directions(FakeNr(3, [1.0]), [])


class TestConventional:
    def test_rank_one_reconstructs_sample_covariance(self):
        x = np.outer([1.0, -2.0, 0.5], [3.0, 1.0, -1.0, 0.0, 2.0])
        factor = conventional_intrinsic(fit_pca(x), 1)
        centered = x - x.mean(axis=1, keepdims=True)
        s = centered @ centered.T / 4
        np.testing.assert_allclose(factor.materialize(), s, atol=1e-12)

    def test_column_norms(self, rng):
        fit = fit_pca(rng.standard_normal((5, 9)))
        factor = conventional_intrinsic(fit, 2)
        np.testing.assert_allclose(np.sum(factor.columns ** 2, axis=0), fit.lambda_hat[:2], rtol=1e-10)

    def test_dense_oracle(self, rng):
        fit = fit_pca(rng.standard_normal((5, 9)))
        dense = conventional_intrinsic(fit, 2).materialize()
        expected = sum(fit.lambda_hat[j] * np.outer(fit.h_hat[:, j], fit.h_hat[:, j]) for j in range(2))
        np.testing.assert_allclose(dense, expected, atol=1e-12)

    def test_m_range(self, rng):
        fit = fit_pca(rng.standard_normal((5, 9)))
        with pytest.raises(InvalidInputError):
            conventional_intrinsic(fit, 6)


class TestFrobeniusLoss:
    def test_identical(self, rng):
        a = LowRankFactor(rng.standard_normal((6, 2)))
        assert frobenius_loss(a, a) == pytest.approx(0.0, abs=1e-10)

    def test_orthogonal_projectors(self):
        e = np.eye(3)
        assert frobenius_loss(LowRankFactor(e[:, 0]), LowRankFactor(e[:, 1])) == pytest.approx(2.0)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 10_000), st.integers(1, 32), st.integers(1, 4), st.integers(1, 4))
    def test_matches_dense(self, seed, d, ma, mb):
        rng = np.random.default_rng(seed)
        a = LowRankFactor(rng.standard_normal((d, ma)))
        b = LowRankFactor(rng.standard_normal((d, mb)))
        ref = dense_loss(a, b)
        assert frobenius_loss(a, b) == pytest.approx(ref, rel=1e-10, abs=1e-10)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10_000))
    def test_symmetry_order_and_sign(self, seed):
        rng = np.random.default_rng(seed)
        a = LowRankFactor(rng.standard_normal((8, 3)))
        b = LowRankFactor(rng.standard_normal((8, 2)))
        flipped = LowRankFactor(a.columns[:, ::-1] * np.array([1.0, -1.0, -1.0]))
        ref = frobenius_loss(a, b)
        assert frobenius_loss(b, a) == pytest.approx(ref, rel=1e-12)
        assert frobenius_loss(flipped, b) == pytest.approx(ref, rel=1e-12)

    def test_dim_mismatch(self):
        with pytest.raises(InvalidInputError):
            frobenius_loss(LowRankFactor(np.ones((3, 1))), LowRankFactor(np.ones((4, 1))))


class TestLowRankFactor:
    def test_materialize_limit(self):
        factor = LowRankFactor(np.ones((2000, 1)))
        with pytest.raises(InvalidInputError):
            factor.materialize()
        assert factor.materialize(max_dim=2000).shape == (2000, 2000)

    def test_vector_promoted(self):
        factor = LowRankFactor(np.arange(3.0))
        assert (factor.dim, factor.rank) == (3, 1)

    def test_empty_rejected(self):
        with pytest.raises(InvalidInputError):
            LowRankFactor(np.zeros((3, 0)))
