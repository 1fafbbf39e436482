"""Objective constructors: values, gradients, helper hooks, conversions."""
import itertools

import numpy as np
import pytest
import scipy.sparse as sp

from dpcd import (AffinityProblem, DimensionError, DomainError, HashingProblem,
                  SparseGraph, binary_vector, constraint_check, exact_ones,
                  exhaustive_oracle, make_affinity_objective,
                  make_dense_subgraph, make_hashing_objective, make_quadratic,
                  make_shifted_separable)

from conftest import assert_gradient_matches, interior_points, random_quadratic


def brute_flip_delta(f, x, flips):
    out = np.empty(flips.shape[0])
    for i, row in enumerate(flips):
        y = np.array(x)
        y[row] *= -1.0
        out[i] = f.value(y) - f.value(x)
    return out


class TestQuadratic:
    def test_identity_matrix(self):
        f = make_quadratic(np.eye(2), np.zeros(2))
        x = binary_vector([1, -1])
        assert f.value(x) == pytest.approx(2.0)
        assert f.gradient(x).tolist() == [2.0, -2.0]

    def test_linear_only(self):
        f = make_quadratic(np.zeros((2, 2)), np.array([1.0, -1.0]))
        for x in ([1, 1], [-1, 1], [-1, -1]):
            assert f.gradient(binary_vector(x)).tolist() == [1.0, -1.0]

    def test_constant_term(self):
        f = make_quadratic(np.zeros((2, 2)), np.zeros(2), d=7.5)
        assert f.value(binary_vector([1, 1])) == 7.5

    @pytest.mark.parametrize("sparse", [False, True])
    def test_finite_differences(self, sparse):
        f = random_quadratic(8, 17, sparse=sparse)
        assert_gradient_matches(f, interior_points(8, 20, 3))

    def test_symmetrization_warns_and_matches(self):
        A = np.array([[0.0, 3.0], [1.0, 0.0]])
        with pytest.warns(UserWarning):
            f = make_quadratic(A, np.zeros(2))
        g = make_quadratic((A + A.T) / 2, np.zeros(2))
        x = binary_vector([1, -1])
        assert f.value(x) == g.value(x)

    def test_lipschitz_is_declared_and_valid(self, rng):
        f = random_quadratic(10, 23)
        # empirical ratio ||grad(y)-grad(z)|| / ||y-z|| over random box pairs
        worst = 0.0
        for _ in range(1000):
            y = rng.uniform(-1, 1, 10)
            z = rng.uniform(-1, 1, 10)
            num = np.linalg.norm(f.gradient(y) - f.gradient(z), np.inf)
            den = np.linalg.norm(y - z, np.inf)
            if den > 1e-12:
                worst = max(worst, num / den)
        assert worst <= f.lipschitz + 1e-9

    @pytest.mark.parametrize("sparse", [False, True])
    def test_value_batch_matches_value(self, sparse, rng):
        f = random_quadratic(9, 31, sparse=sparse)
        X = np.where(rng.random((40, 9)) < 0.5, 1.0, -1.0)
        got = f.value_batch(X)
        want = [f.value(row) for row in X]
        assert np.allclose(got, want)

    @pytest.mark.parametrize("sparse", [False, True])
    def test_flips_delta_matches_brute_force(self, sparse, rng):
        f = random_quadratic(12, 47, sparse=sparse)
        x = np.where(rng.random(12) < 0.5, 1.0, -1.0)
        for j in (1, 2, 4):
            flips = np.stack([rng.permutation(12)[:j] for _ in range(30)])
            assert np.allclose(f.flips_delta(x, flips),
                               brute_flip_delta(f, x, flips), atol=1e-9)

    def test_coefficient_mass(self):
        A = np.array([[1.0, -2.0], [-2.0, 5.0]])
        f = make_quadratic(A, np.array([0.5, -0.25]))
        assert f.coeff_abs_sum == pytest.approx(10.75)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            make_quadratic(np.eye(3), np.zeros(2))


class TestShiftedSeparable:
    def test_minimum_value(self):
        f = make_shifted_separable([0.5, 0.5])
        assert f.value(binary_vector([-1, -1])) == pytest.approx(0.25)
        assert exhaustive_oracle(f).optimum.tolist() == [-1.0, -1.0]

    def test_gradient_at_all_plus(self):
        beta = np.array([0.3, 0.6, 0.9])
        f = make_shifted_separable(beta)
        assert np.allclose(f.gradient(binary_vector([1, 1, 1])), 1.0 + beta)

    def test_single_coordinate_values(self):
        f = make_shifted_separable([0.9])
        assert f.value(binary_vector([1])) == pytest.approx(1.805)
        assert f.value(binary_vector([-1])) == pytest.approx(0.005)

    @pytest.mark.parametrize("bad", [[0.0, 0.5], [0.5, 1.0], [-0.2], [1.7], []])
    def test_domain_validation(self, bad):
        with pytest.raises(DomainError):
            make_shifted_separable(bad)

    def test_declared_constants(self):
        f = make_shifted_separable([0.25, 0.75])
        assert f.lipschitz == 1.0
        assert f.coeff_abs_sum == pytest.approx(2.0)

    def test_finite_differences(self, rng):
        beta = rng.uniform(0.05, 0.95, 7)
        assert_gradient_matches(make_shifted_separable(beta),
                                interior_points(7, 20, 5))

    def test_flips_delta(self, rng):
        beta = rng.uniform(0.05, 0.95, 8)
        f = make_shifted_separable(beta)
        x = np.where(rng.random(8) < 0.5, 1.0, -1.0)
        flips = np.stack([rng.permutation(8)[:2] for _ in range(20)])
        assert np.allclose(f.flips_delta(x, flips),
                           brute_flip_delta(f, x, flips))


def triangle():
    return SparseGraph(3, [0, 0, 1], [1, 2, 2], [1.0, 1.0, 1.0])


class TestDenseSubgraph:
    def test_triangle_full_selection(self):
        f, c = make_dense_subgraph(triangle(), 3)
        assert c == exact_ones(3)
        y = binary_vector([1, 1, 1])
        # add back the dropped constant to get -4 * x'Wx = -4 * 6
        assert f.value(y) - triangle().total_weight == pytest.approx(-24.0)

    def test_k_zero_unique_feasible(self):
        f, c = make_dense_subgraph(triangle(), 0)
        assert c == exact_ones(0)
        y = binary_vector([-1, -1, -1])
        assert constraint_check(y, c)
        assert f.value(y) - triangle().total_weight == pytest.approx(0.0)

    def test_identity_with_indicator_form(self, rng):
        g = SparseGraph(7, [0, 0, 1, 2, 4], [1, 3, 2, 5, 6],
                        [1.0, 2.0, 0.5, 1.5, 3.0])
        f, c = make_dense_subgraph(g, 3)
        W = g.matrix().toarray()
        for sel in itertools.combinations(range(7), 3):
            y = -np.ones(7)
            y[list(sel)] = 1.0
            x = (y + 1.0) / 2.0
            assert f.value(y) - g.total_weight == pytest.approx(
                -4.0 * x @ W @ x)

    def test_k_validation(self):
        with pytest.raises(DomainError):
            make_dense_subgraph(triangle(), 4)
        with pytest.raises(DomainError):
            make_dense_subgraph(triangle(), -1)

    def test_finite_differences(self):
        g = SparseGraph(6, [0, 1, 2, 0], [1, 2, 3, 5], [1.0, 2.0, 1.0, 0.5])
        f, _ = make_dense_subgraph(g, 2)
        assert_gradient_matches(f, interior_points(6, 20, 9))

    def test_name(self):
        f, _ = make_dense_subgraph(triangle(), 1)
        assert f.name == "dense-subgraph"


class TestHashingObjective:
    def test_exact_fit_zero_gradient(self, rng):
        B = np.where(rng.random((6, 3)) < 0.5, 1.0, -1.0)
        W = rng.standard_normal((3, 2))
        problem = HashingProblem(Y=B @ W, lam=0.0, r=3)
        f = make_hashing_objective(problem, W)
        assert np.allclose(f.gradient(B.ravel()), 0.0)
        assert f.value(B.ravel()) == pytest.approx(0.0)

    def test_scalar_hand_case(self):
        problem = HashingProblem(Y=np.array([[0.0]]), lam=0.0, r=1)
        f = make_hashing_objective(problem, np.array([[2.0]]))
        b = binary_vector([1])
        assert f.value(b) == pytest.approx(2.0)
        assert f.gradient(b).tolist() == [4.0]

    def test_penalty_constant(self):
        problem = HashingProblem(Y=np.zeros((2, 2)), lam=3.0, r=1)
        W = np.array([[1.0, 2.0]])
        f = make_hashing_objective(problem, W)
        b = binary_vector([1, -1])
        # residual 1/2*(1+4+1+4) plus lam/2 * ||W||^2
        assert f.value(b) == pytest.approx(5.0 + 7.5)

    def test_dimension_mismatch_names_axes(self):
        problem = HashingProblem(Y=np.zeros((4, 3)), lam=0.0, r=2)
        with pytest.raises(DimensionError, match="W is"):
            make_hashing_objective(problem, np.zeros((3, 3)))

    def test_finite_differences(self, rng):
        Y = rng.standard_normal((5, 3))
        W = rng.standard_normal((2, 3))
        f = make_hashing_objective(HashingProblem(Y=Y, lam=0.7, r=2), W)
        assert_gradient_matches(f, interior_points(10, 20, 13))

    def test_row_major_layout(self, rng):
        Y = rng.standard_normal((4, 2))
        W = rng.standard_normal((3, 2))
        f = make_hashing_objective(HashingProblem(Y=Y, lam=0.0, r=3), W)
        B = np.where(rng.random((4, 3)) < 0.5, 1.0, -1.0)
        direct = 0.5 * np.sum((Y - B @ W) ** 2)
        assert f.value(B.ravel()) == pytest.approx(direct)
        assert f.dimension == 12

    def test_lipschitz_bounds_gradient_jumps(self, rng):
        Y = rng.standard_normal((6, 4))
        W = rng.standard_normal((3, 4))
        f = make_hashing_objective(HashingProblem(Y=Y, lam=0.0, r=3), W)
        worst = 0.0
        for _ in range(500):
            y = rng.uniform(-1, 1, 18)
            z = rng.uniform(-1, 1, 18)
            num = np.linalg.norm(f.gradient(y) - f.gradient(z), np.inf)
            den = np.linalg.norm(y - z, np.inf)
            if den > 1e-12:
                worst = max(worst, num / den)
        assert worst <= f.lipschitz + 1e-9


class TestAffinityObjective:
    def test_exact_fit(self):
        B = np.array([[1.0], [-1.0]])
        f = make_affinity_objective(AffinityProblem(S=B @ B.T, scale=1.0))
        assert f.value(B.ravel()) == pytest.approx(0.0)
        assert np.allclose(f.gradient(B.ravel()), 0.0)

    def test_identity_target_hand_case(self):
        f = make_affinity_objective(AffinityProblem(S=np.eye(2), scale=1.0))
        assert f.value(binary_vector([1, -1])) == pytest.approx(2.0)

    def test_r_inference_and_override(self):
        S = np.eye(3)
        assert make_affinity_objective(AffinityProblem(S=S, scale=4.0)).dimension == 12
        assert make_affinity_objective(AffinityProblem(S=S, scale=2.5), r=2).dimension == 6
        with pytest.raises(DomainError):
            make_affinity_objective(AffinityProblem(S=S, scale=2.5))

    def test_asymmetric_target_warns(self):
        S = np.array([[0.0, 1.0], [0.0, 0.0]])
        with pytest.warns(UserWarning):
            make_affinity_objective(AffinityProblem(S=S, scale=1.0))

    def test_finite_differences(self, rng):
        S = rng.standard_normal((4, 4))
        S = (S + S.T) / 2
        f = make_affinity_objective(AffinityProblem(S=S, scale=2.0))
        assert_gradient_matches(f, interior_points(8, 20, 21))


class TestTraceLossEquivalence:
    def test_columnwise_quadratic_decomposition(self, rng):
        # Tr(B'LB) over a graph Laplacian splits into one quadratic per
        # code column
        g = SparseGraph(6, [0, 0, 1, 2, 3, 4], [1, 2, 3, 4, 5, 5],
                        [1.0, 2.0, 1.0, 1.0, 3.0, 1.0])
        W = g.matrix().toarray()
        L = np.diag(W.sum(axis=1)) - W
        per_column = make_quadratic(L, np.zeros(6))
        for _ in range(10):
            B = np.where(rng.random((6, 4)) < 0.5, 1.0, -1.0)
            total = float(np.trace(B.T @ L @ B))
            split = sum(per_column.value(B[:, t]) for t in range(4))
            assert split == pytest.approx(total)
