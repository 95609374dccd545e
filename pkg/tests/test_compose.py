import numpy as np
import pytest

from metricprox import (
    CompositionProblem,
    LinearMap,
    Metric,
    RankDeficient,
    affine_operator,
    inverse_operator,
    l1,
    parallel_sum_resolvent,
    prox_metric,
    quadratic,
    resolvent_composed,
    resolvent_composed_closed_range,
    resolvent_composed_full_range,
    resolvent_composed_full_range_pair,
    resolvent_dispatch,
    resolvent_parallel_composition,
    solve_inner_inclusion,
    spd_sqrt,
    zero_operator,
)
from conftest import firm_nonexpansive_gap, random_pairs


def _random_metric(rng, dim, lo=0.5, hi=2.5):
    q, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
    return spd_sqrt(q @ np.diag(rng.uniform(lo, hi, dim)) @ q.T)


class TestInnerInclusion:
    def test_identity_fixture(self, rng):
        b = affine_operator(np.eye(2))
        m = LinearMap(np.eye(2))
        u = Metric.identity(2)
        x = rng.standard_normal(2)
        report = solve_inner_inclusion(b, m, u, x)
        assert report.status == "converged"
        # v + v = x for B = B^{-1} = Id
        np.testing.assert_allclose(report.dual_point, x / 2, atol=1e-7)

    def test_zero_map(self, rng):
        b = affine_operator(np.eye(2))
        m = LinearMap(np.zeros((2, 3)))
        u = Metric.identity(3)
        report = solve_inner_inclusion(b, m, u, np.zeros(2))
        assert report.status == "converged"

    def test_scalar_stationarity(self):
        # 2v + v/2 = 1 gives v = 0.4 for B = 2 Id, M U M* = 2
        b = affine_operator(2.0 * np.eye(1))
        m = LinearMap(np.array([[1.0, 1.0]]))
        u = Metric.identity(2)
        report = solve_inner_inclusion(b, m, u, np.array([1.0]))
        assert report.dual_point[0] == pytest.approx(0.4, abs=1e-7)

    def test_adjoint_image_start_independent(self, rng):
        for _ in range(5):
            dim_g, dim_h = 4, 2
            m = LinearMap(rng.standard_normal((dim_h, dim_g)))
            u = _random_metric(rng, dim_g)
            b = l1(dim_h, 0.8).subdifferential()
            rhs = m.apply(rng.standard_normal(dim_g))
            first = solve_inner_inclusion(b, m, u, rhs)
            second = solve_inner_inclusion(b, m, u, rhs, v0=rng.standard_normal(dim_h))
            assert first.status == second.status == "converged"
            np.testing.assert_allclose(
                m.adjoint.apply(first.dual_point),
                m.adjoint.apply(second.dual_point),
                atol=1e-6,
            )


class TestResolventComposed:
    def test_identity_chain(self, rng):
        problem = CompositionProblem(affine_operator(np.eye(2)), LinearMap(np.eye(2)), Metric.identity(2))
        x = rng.standard_normal(2)
        np.testing.assert_allclose(resolvent_composed(problem, x), x / 2, atol=1e-7)

    def test_zero_map_is_identity(self, rng):
        problem = CompositionProblem(
            affine_operator(np.eye(2), np.array([1.0, -2.0])),
            LinearMap(np.zeros((2, 3))),
            Metric.identity(3),
        )
        x = rng.standard_normal(3)
        np.testing.assert_allclose(resolvent_composed(problem, x), x, atol=1e-8)

    def test_l1_subdifferential_soft_threshold(self):
        f = l1(2, 1.0)
        problem = CompositionProblem(f.subdifferential(), LinearMap(np.eye(2)), Metric.identity(2))
        got = resolvent_composed(problem, np.array([2.0, -0.5]))
        np.testing.assert_allclose(got, [1.0, 0.0], atol=1e-7)

    def test_dense_oracle_small_affine(self, rng):
        # independent oracle: J_{U M*BM} by direct dense solve of
        # (Id + U M'A M) p = x - U M'b
        for _ in range(10):
            dim_g, dim_h = 3, 2
            m = rng.standard_normal((dim_h, dim_g))
            a = np.eye(dim_h) * rng.uniform(0.5, 2.0)
            b = rng.standard_normal(dim_h)
            u = _random_metric(rng, dim_g)
            problem = CompositionProblem(affine_operator(a, b), LinearMap(m), u)
            x = rng.standard_normal(dim_g)
            got = resolvent_composed(problem, x)
            lhs = np.eye(dim_g) + u.U.mat @ m.T @ a @ m
            want = np.linalg.solve(lhs, x - u.U.mat @ (m.T @ b))
            np.testing.assert_allclose(got, want, atol=1e-6)


class TestRouteEquivalence:
    def test_kernel_point_passthrough(self):
        # x in ker M forces the dual image M*v to vanish, so J x = x
        problem = CompositionProblem(
            affine_operator(np.eye(1)), LinearMap(np.array([[1.0, 0.0]])), Metric.identity(2)
        )
        x = np.array([0.0, 4.0])
        np.testing.assert_allclose(resolvent_composed(problem, x), x, atol=1e-8)
        np.testing.assert_allclose(resolvent_composed_closed_range(problem, x), x, atol=1e-8)

    def test_full_range_identity_map_is_moreau(self, rng):
        # M = Id reduces the full-range formulas to Id - J_{B^{-1}} = J_B
        b_mat = np.array([[1.0, 0.4], [0.4, 2.0]])
        b = affine_operator(b_mat)
        problem = CompositionProblem(b, LinearMap(np.eye(2)), Metric.identity(2))
        x = rng.standard_normal(2)
        first, second = resolvent_composed_full_range_pair(problem, x)
        want = np.linalg.solve(np.eye(2) + b_mat, x)
        np.testing.assert_allclose(first, want, atol=1e-8)
        np.testing.assert_allclose(second, want, atol=1e-8)

    def test_rank_deficient_raises(self):
        problem = CompositionProblem(
            affine_operator(np.eye(2)),
            LinearMap(np.array([[1.0, 0.0, 0.0], [1.0, 0.0, 0.0]])),
            Metric.identity(3),
        )
        with pytest.raises(RankDeficient):
            resolvent_composed_full_range(problem, np.zeros(3))

    def test_three_routes_agree(self, rng):
        for k in range(15):
            dim_g = int(rng.integers(2, 5))
            dim_h = int(rng.integers(1, dim_g + 1))
            m = LinearMap(rng.standard_normal((dim_h, dim_g)))
            u = _random_metric(rng, dim_g)
            if k % 2:
                b = l1(dim_h, 0.7).subdifferential()
            else:
                b = affine_operator(np.eye(dim_h) * rng.uniform(0.4, 1.5), rng.standard_normal(dim_h))
            problem = CompositionProblem(b, m, u)
            x = 2 * rng.standard_normal(dim_g)
            p_general = resolvent_composed(problem, x)
            p_closed = resolvent_composed_closed_range(problem, x)
            p_first, p_second = resolvent_composed_full_range_pair(problem, x)
            assert np.linalg.norm(p_general - p_closed) <= 2e-5
            assert np.linalg.norm(p_general - p_first) <= 2e-5
            assert np.linalg.norm(p_first - p_second) <= 2e-5

    def test_dispatch_auto(self, rng):
        problem = CompositionProblem(
            affine_operator(np.eye(1)), LinearMap(np.array([[1.0, 1.0]])), Metric.identity(2)
        )
        x = rng.standard_normal(2)
        value, route, report = resolvent_dispatch(problem, x)
        assert route == "full_range"
        np.testing.assert_allclose(value, resolvent_composed(problem, x), atol=2e-5)

    def test_firmly_nonexpansive_in_inverse_metric(self, rng):
        m = LinearMap(rng.standard_normal((2, 3)))
        u = _random_metric(rng, 3)
        problem = CompositionProblem(l1(2, 0.6).subdifferential(), m, u)
        inv = u.inverse()
        gap = firm_nonexpansive_gap(
            lambda p: resolvent_composed(problem, p),
            random_pairs(rng, 3, n=30),
            inner=lambda a, b: inv.inner(a, b),
        )
        assert gap <= 1e-6


class TestParallelComposition:
    def test_summing_map_identity_operator(self, rng):
        # L (Id + L*L)^{-1} L* = 2/3 for the row map [1, 1]
        a = affine_operator(np.eye(2))
        L = LinearMap(np.array([[1.0, 1.0]]))
        x = np.array([float(rng.uniform(-3, 3))])
        got = resolvent_parallel_composition(a, L, Metric.identity(1), x)
        np.testing.assert_allclose(got, 2.0 * x / 3.0, atol=1e-7)

    def test_identity_map_reduces_to_resolvent(self, rng):
        a = affine_operator(np.array([[1.0, 0.3], [0.3, 2.0]]))
        L = LinearMap(np.eye(2))
        x = rng.standard_normal(2)
        got = resolvent_parallel_composition(a, L, Metric.identity(2), x)
        np.testing.assert_allclose(got, a.resolve(1.0, x), atol=1e-7)

    def test_routes_agree(self, rng):
        for k in range(10):
            dim_h = int(rng.integers(2, 5))
            dim_g = int(rng.integers(1, dim_h + 1))
            L = LinearMap(rng.standard_normal((dim_g, dim_h)))
            u = _random_metric(rng, dim_g)
            a = (
                affine_operator(np.eye(dim_h) * rng.uniform(0.5, 1.5), rng.standard_normal(dim_h))
                if k % 2
                else quadratic(np.eye(dim_h)).subdifferential()
            )
            x = 2 * rng.standard_normal(dim_g)
            got_general = resolvent_parallel_composition(a, L, u, x, "general")
            got_closed = resolvent_parallel_composition(a, L, u, x, "closed_range")
            assert np.linalg.norm(got_general - got_closed) <= 2e-5
            if np.linalg.matrix_rank(L.mat) == dim_h:
                got_full = resolvent_parallel_composition(a, L, u, x, "full_range")
                assert np.linalg.norm(got_general - got_full) <= 2e-5

    def test_full_range_requires_rank(self):
        a = affine_operator(np.eye(2))
        L = LinearMap(np.array([[1.0, 1.0]]))
        with pytest.raises(RankDeficient):
            resolvent_parallel_composition(a, L, Metric.identity(1), np.zeros(1), "full_range")

    def test_duality_consistency(self, rng):
        # J_{U(L|>A)} = Id - U J_{U^{-1} L A^{-1} L*} U^{-1} with the right
        # side evaluated through the composition engine
        for k in range(10):
            dim_h = int(rng.integers(2, 5))
            dim_g = int(rng.integers(1, dim_h + 1))
            L = LinearMap(rng.standard_normal((dim_g, dim_h)))
            u = _random_metric(rng, dim_g)
            a = (
                affine_operator(np.eye(dim_h) * rng.uniform(0.5, 1.5))
                if k % 2
                else l1(dim_h, 0.8).subdifferential()
            )
            x = 2 * rng.standard_normal(dim_g)
            left = resolvent_parallel_composition(a, L, u, x, "general")
            dual_problem = CompositionProblem(inverse_operator(a), L.adjoint, u.inverse())
            right = resolvent_composed(dual_problem, u.apply_inv(x))
            assert np.linalg.norm(left + u.apply(right) - x) <= 2e-5


class TestParallelSum:
    def test_scalar_formula(self, rng):
        b = affine_operator(2.0 * np.eye(1))
        c = affine_operator(3.0 * np.eye(1))
        x = np.array([float(rng.uniform(-4, 4))])
        # B [] C = (1/2 + 1/3)^{-1} Id = 1.2 Id, so J(x) = x / 2.2
        np.testing.assert_allclose(parallel_sum_resolvent(b, c, x), x / 2.2, atol=1e-6)

    def test_zero_operator_absorbs(self, rng):
        b = affine_operator(np.array([[1.0, 0.2], [0.2, 0.7]]))
        x = rng.standard_normal(2)
        from metricprox import DEFAULTS

        tight = DEFAULTS.with_overrides(tol_inner=1e-11, tol_fix=1e-13)
        got = parallel_sum_resolvent(b, zero_operator(2), x, tight)
        np.testing.assert_allclose(got, x, atol=1e-8)

    def test_equal_identities(self, rng):
        b = affine_operator(np.eye(1))
        x = np.array([float(rng.uniform(-4, 4))])
        np.testing.assert_allclose(parallel_sum_resolvent(b, b, x), x / 1.5, atol=1e-6)

    def test_matches_scalar_inverse_sum_oracle(self, rng):
        # oracle: for positive scalars, B [] C = (1/beta + 1/gamma)^{-1} Id
        beta, gamma = float(rng.uniform(0.5, 3)), float(rng.uniform(0.5, 3))
        s = 1.0 / (1.0 / beta + 1.0 / gamma)
        b = affine_operator(beta * np.eye(1))
        c = affine_operator(gamma * np.eye(1))
        x = np.array([1.7])
        np.testing.assert_allclose(parallel_sum_resolvent(b, c, x), x / (1 + s), atol=1e-6)
