import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from aspca.errors import InvalidComponentError, InvalidInputError
from aspca.pca import fit_nr, pc_scores
from aspca.simgen import sample, setting_s1
from aspca.sparse import (
    SparseDirection,
    ThresholdWarning,
    aspca_fit,
    cluster_by_sign,
    label_agreement,
    sh_pc_scores,
    shrinkage_fit,
    threshold_auto,
    threshold_omega,
    tspca,
)


def brute_force_k(h, target):
    """Smallest prefix length of the magnitude-sorted squares reaching ``target``."""
    ordered = sorted(range(len(h)), key=lambda i: (-abs(h[i]), i))
    for k in range(1, len(h) + 1):
        if sum(h[i] ** 2 for i in ordered[:k]) >= target:
            return k, sorted(ordered[:k])
    return len(h), sorted(ordered)


def long_vectors(min_size=1, max_size=30):
    return arrays(
        np.float64, st.integers(min_size, max_size), elements=st.floats(-3, 3, allow_nan=False)
    ).filter(lambda h: h @ h >= 1.0)


class TestSparseDirection:
    def test_rejects_unsorted(self):
        with pytest.raises(InvalidInputError):
            SparseDirection(dim=4, indices=[2, 1], values=[1.0, 1.0], component=1, mode="auto")

    def test_rejects_out_of_range(self):
        with pytest.raises(InvalidInputError):
            SparseDirection(dim=2, indices=[2], values=[1.0], component=1, mode="auto")

    def test_rejects_empty(self):
        with pytest.raises(InvalidInputError):
            SparseDirection(dim=2, indices=[], values=[], component=1, mode="auto")

    def test_dense_and_normalized(self):
        sd = SparseDirection(dim=4, indices=[1, 3], values=[3.0, 4.0], component=2, mode="omega", param=0.5)
        np.testing.assert_array_equal(sd.to_dense(), [0.0, 3.0, 0.0, 4.0])
        assert sd.norm_sq == 25.0
        assert sd.normalized().norm_sq == pytest.approx(1.0)
        assert sd.support_size == 2


class TestThresholdAuto:
    def test_single_entry(self):
        sd = threshold_auto(np.array([1.2, 0.1, 0.05]))
        np.testing.assert_array_equal(sd.indices, [0])
        np.testing.assert_array_equal(sd.values, [1.2])

    def test_hand_cumulative(self):
        sd = threshold_auto(np.array([0.9, 0.5, 0.3, 0.1]))
        assert sd.support_size == 2
        np.testing.assert_array_equal(sd.indices, [0, 1])
        np.testing.assert_array_equal(sd.values, [0.9, 0.5])

    def test_keeps_signed_values_unordered_input(self):
        sd = threshold_auto(np.array([0.1, -0.5, 0.0, -0.9, 0.3]))
        np.testing.assert_array_equal(sd.indices, [1, 3])
        np.testing.assert_array_equal(sd.values, [-0.5, -0.9])
        assert sd.mode == "auto" and sd.param is None

    def test_ties_resolved_by_index(self):
        sd = threshold_auto(np.array([0.6, 0.6, 0.6, 0.6, 0.6]))
        # 3 * 0.36 = 1.08 is the first partial sum reaching 1
        np.testing.assert_array_equal(sd.indices, [0, 1, 2])

    @settings(max_examples=200, deadline=None)
    @given(long_vectors())
    def test_matches_brute_force(self, h):
        sd = threshold_auto(h)
        k, support = brute_force_k(list(h), 1.0)
        assert sd.support_size == k
        np.testing.assert_array_equal(sd.indices, support)
        np.testing.assert_array_equal(sd.values, h[support])
        smallest = np.min(np.abs(sd.values))
        assert 1.0 <= sd.norm_sq <= 1.0 + smallest ** 2 + 1e-12

    def test_short_vector_keeps_everything(self):
        with pytest.warns(ThresholdWarning):
            sd = threshold_auto(np.array([0.5, 0.5]))
        assert sd.exhausted
        assert sd.support_size == 2

    def test_invalid_component_from_fit(self):
        nr = fit_nr(np.eye(6))
        with pytest.raises(InvalidComponentError, match="component 1"):
            threshold_auto(nr, 1)

    def test_rejects_non_finite(self):
        with pytest.raises(InvalidInputError):
            threshold_auto(np.array([np.nan, 2.0]))


class TestThresholdOmega:
    def test_hand_example(self):
        sd = threshold_omega(np.array([0.9, 0.5, 0.3, 0.1]), 0.5)
        np.testing.assert_array_equal(sd.indices, [0])
        assert sd.param == 0.5

    @pytest.mark.parametrize("omega", [0.0, -0.1, 1.01, np.nan])
    def test_domain(self, omega):
        with pytest.raises(InvalidInputError):
            threshold_omega(np.array([1.0, 1.0]), omega)

    @settings(max_examples=100, deadline=None)
    @given(long_vectors())
    def test_omega_one_equals_auto(self, h):
        a, b = threshold_auto(h), threshold_omega(h, 1.0)
        np.testing.assert_array_equal(a.indices, b.indices)
        np.testing.assert_array_equal(a.values, b.values)

    @settings(max_examples=100, deadline=None)
    @given(long_vectors(), st.floats(0.01, 1.0), st.floats(0.01, 1.0))
    def test_nested_supports(self, h, w1, w2):
        lo, hi = sorted((w1, w2))
        small, big = threshold_omega(h, lo), threshold_omega(h, hi)
        assert set(small.indices) <= set(big.indices)

    @settings(max_examples=100, deadline=None)
    @given(long_vectors(), st.floats(0.01, 1.0))
    def test_norm_invariant(self, h, omega):
        sd = threshold_omega(h, omega)
        smallest = np.min(sd.values ** 2)
        assert omega <= sd.norm_sq
        assert sd.norm_sq - smallest < omega


class TestTspca:
    def test_tiny_zeta_is_identity(self, rng):
        h = rng.standard_normal(7)
        h /= np.linalg.norm(h)
        sd = tspca(h, 1e-300)
        np.testing.assert_array_equal(sd.indices, np.arange(7))
        np.testing.assert_allclose(sd.values, h, atol=1e-15)

    def test_large_zeta_keeps_max(self):
        h = np.array([0.6, -0.8, 0.0])
        sd = tspca(h, 5.0)
        np.testing.assert_array_equal(sd.to_dense(), [0.0, -1.0, 0.0])

    def test_hand_renormalization(self):
        h = np.array([0.8, 0.5896, 0.05, 0.1])
        h = h / np.linalg.norm(h)
        sd = tspca(h, 0.2)
        np.testing.assert_array_equal(sd.indices, [0, 1])
        expected = np.array([0.8, 0.5896]) / np.hypot(0.8, 0.5896)
        np.testing.assert_allclose(sd.values, expected, rtol=1e-12)

    def test_domain(self):
        with pytest.raises(InvalidInputError):
            tspca(np.array([1.0, 0.0]), 0.0)
        with pytest.raises(InvalidInputError):
            tspca(np.array([1.0, 1.0]), 0.1)

    @settings(max_examples=100, deadline=None)
    @given(arrays(np.float64, st.integers(1, 25), elements=st.floats(-5, 5)).filter(lambda h: h @ h > 1e-6),
           st.floats(1e-6, 2.0))
    def test_unit_norm_nonempty(self, h, zeta):
        h = h / np.linalg.norm(h)
        sd = tspca(h, zeta)
        assert sd.support_size >= 1
        assert abs(sd.norm_sq - 1.0) <= 1e-10


class TestScores:
    def test_single_coordinate(self, rng):
        x = rng.standard_normal((5, 6))
        sd = SparseDirection(dim=5, indices=[3], values=[1.0], component=1, mode="auto")
        np.testing.assert_allclose(sh_pc_scores(x, sd), x[3] - x[3].mean(), atol=1e-15)

    def test_normalized_scaling(self, rng):
        x = rng.standard_normal((5, 6))
        sd = SparseDirection(dim=5, indices=[0, 2], values=[1.5, -2.0], component=1, mode="auto")
        np.testing.assert_allclose(sh_pc_scores(x, sd, normalized=True), sh_pc_scores(x, sd) / 2.5, rtol=1e-14)

    def test_dense_equivalence(self, rng):
        x = rng.standard_normal((30, 9))
        sd = threshold_auto(fit_nr(x), 1)
        np.testing.assert_allclose(sh_pc_scores(x, sd), pc_scores(x, sd.to_dense()), atol=1e-12)

    def test_only_support_rows_are_read(self, rng):
        x = rng.standard_normal((6, 5))
        sd = SparseDirection(dim=6, indices=[1, 4], values=[0.3, 0.7], component=1, mode="auto")
        poisoned = x.copy()
        poisoned[[0, 2, 3, 5]] = np.nan
        np.testing.assert_array_equal(sh_pc_scores(poisoned, sd), sh_pc_scores(x, sd))

    def test_dimension_mismatch(self):
        sd = SparseDirection(dim=3, indices=[0], values=[1.0], component=1, mode="auto")
        with pytest.raises(InvalidInputError):
            sh_pc_scores(np.ones((4, 5)), sd)


class TestClustering:
    def test_examples(self):
        np.testing.assert_array_equal(cluster_by_sign([3.0, -1.0, 2.0]), [1, 2, 1])
        np.testing.assert_array_equal(cluster_by_sign([1.0, 2.0]), [1, 1])
        np.testing.assert_array_equal(cluster_by_sign([0.0, -0.0]), [1, 1])

    @given(st.lists(st.sampled_from([1, 2]), min_size=1, max_size=40), st.integers(0, 100))
    def test_agreement_swap_invariant(self, truth, seed):
        truth = np.array(truth)
        labels = np.random.default_rng(seed).integers(1, 3, truth.size)
        swapped = np.where(labels == 1, 2, 1)
        assert label_agreement(labels, truth) == label_agreement(swapped, truth)
        assert label_agreement(labels, truth) >= 0.5

    def test_agreement_mismatch(self):
        with pytest.raises(InvalidInputError):
            label_agreement([1, 2], [1])


class TestPipeline:
    def test_composition_identity(self, rng):
        x = rng.standard_normal((40, 10))
        x[:2] *= 5
        nr = fit_nr(x)
        out = aspca_fit(x, 3)
        for j, comp in enumerate(out, 1):
            ref = threshold_auto(nr, j)
            assert comp.lambda_tilde == nr.lambda_tilde[j - 1]
            np.testing.assert_array_equal(comp.direction.indices, ref.indices)
            np.testing.assert_array_equal(comp.direction.values, ref.values)

    def test_parallel_components_match(self, rng):
        from concurrent.futures import ThreadPoolExecutor

        x = rng.standard_normal((40, 10))
        nr = fit_nr(x)
        with ThreadPoolExecutor(4) as pool:
            par = list(pool.map(lambda j: threshold_auto(nr, j), range(1, 5)))
        for j, sd in enumerate(par, 1):
            np.testing.assert_array_equal(sd.values, threshold_auto(nr, j).values)

    @pytest.mark.parametrize("m", [0, 9, 2.0])
    def test_m_out_of_range(self, rng, m):
        with pytest.raises(InvalidInputError):
            aspca_fit(rng.standard_normal((20, 10)), m)

    def test_shrinkage_fit(self, rng):
        x = rng.standard_normal((40, 10))
        for comp in shrinkage_fit(x, 2, 0.3):
            assert comp.direction.mode == "omega"
            assert comp.direction.norm_sq >= 0.3

    def test_permutation_equivariance(self, rng):
        x = rng.standard_normal((25, 8))
        x[3] *= 6
        perm = rng.permutation(25)
        a = aspca_fit(x, 2)
        b = aspca_fit(x[perm], 2)
        inverse = np.argsort(perm)
        for ca, cb in zip(a, b):
            assert ca.lambda_tilde == pytest.approx(cb.lambda_tilde, rel=1e-10)
            da, db = ca.direction.to_dense(), cb.direction.to_dense()[inverse]
            sign = np.sign(da @ db)
            np.testing.assert_allclose(sign * db, da, atol=1e-10)

    def test_s1_support_concentrates_on_first_variable(self):
        spec = setting_s1(256)
        hits = 0
        for r in range(100):
            sd = threshold_auto(fit_nr(sample(spec, 16, 11, r).x), 1)
            hits += 0 in sd.indices and np.argmax(np.abs(sd.to_dense())) == 0
        assert hits >= 90


def test_no_warning_for_valid_nr_directions(rng):
    x = rng.standard_normal((50, 12))
    nr = fit_nr(x)
    with warnings.catch_warnings():
        warnings.simplefilter("error", ThresholdWarning)
        for j in np.flatnonzero(nr.valid) + 1:
            threshold_auto(nr, j)
