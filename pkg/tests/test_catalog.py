import math

import numpy as np
import pytest

from metricprox import (
    InnerSolverDiverged,
    LinearMap,
    Metric,
    conjugate_prox_metric,
    indicator_affine,
    indicator_ball,
    indicator_box,
    l1,
    linear,
    prox_metric,
    quadratic,
    separable_exp,
    spd_sqrt,
    zero,
)
from conftest import firm_nonexpansive_gap, random_pairs


def assert_prox_optimal(f, gamma, x, rng, n=100, slack=1e-8, spread=2.0):
    """Variational oracle: the prox must beat random competitors."""
    p = f.prox(gamma, x)
    best = f.value(p) + np.dot(x - p, x - p) / (2 * gamma)
    for _ in range(n):
        q = p + spread * rng.standard_normal(f.dim)
        val = f.value(q) + np.dot(x - q, x - q) / (2 * gamma)
        assert best <= val + slack


def grid_sup_conjugate(f_conj, x, radius=12.0, points=4801):
    """1-D biconjugation oracle: sup_u (x u - f*(u)) over a dense grid."""
    us = np.linspace(-radius, radius, points).reshape(-1, 1)
    vals = us[:, 0] * x - f_conj.value(us)
    return float(np.max(vals[np.isfinite(vals)]))


class TestConstructors:
    def test_quadratic_identity_prox(self, rng):
        f = quadratic(np.eye(2))
        x = rng.standard_normal(2)
        for gamma in (0.5, 1.0, 3.0):
            np.testing.assert_allclose(f.prox(gamma, x), x / (1 + gamma))

    def test_quadratic_rejects_indefinite(self):
        with pytest.raises(ValueError):
            quadratic(np.diag([1.0, -1.0]))

    def test_l1_soft_threshold(self):
        f = l1(3, 1.0)
        np.testing.assert_allclose(f.prox(1.0, np.array([2.0, -0.5, 0.0])), [1.0, 0.0, 0.0])

    def test_box_positive_part(self, rng):
        f = indicator_box(3, 0.0, np.inf)
        x = rng.standard_normal(3)
        np.testing.assert_allclose(f.prox(1.0, x), np.maximum(x, 0.0))

    def test_box_rejects_crossed_bounds(self):
        with pytest.raises(ValueError):
            indicator_box(2, 1.0, -1.0)

    def test_ball_projection(self):
        f = indicator_ball(2, center=0.0, radius=1.0)
        np.testing.assert_allclose(f.prox(1.0, np.array([3.0, 4.0])), [0.6, 0.8])
        np.testing.assert_allclose(f.prox(1.0, np.array([0.1, 0.2])), [0.1, 0.2])

    def test_affine_projection(self):
        # projecting (3, 3) onto {x1 + x2 = 2} moves along (1, 1) to (1, 1)
        f = indicator_affine(LinearMap(np.array([[1.0, 1.0]])), np.array([2.0]))
        np.testing.assert_allclose(f.prox(1.0, np.array([3.0, 3.0])), [1.0, 1.0])
        assert f.value(np.array([1.0, 1.0])) == 0.0
        assert f.value(np.array([0.0, 0.0])) == np.inf

    def test_affine_rejects_infeasible(self):
        with pytest.raises(ValueError):
            indicator_affine(LinearMap(np.zeros((1, 2))), np.array([1.0]))

    def test_exp_prox_omega_constant(self):
        # p + e^p = 0 at the Omega constant
        f = separable_exp(1, 0)
        p = f.prox(1.0, np.array([0.0]))[0]
        assert abs(p + math.exp(p)) < 1e-12
        assert p == pytest.approx(-0.5671432904097838, abs=1e-10)

    def test_exp_prox_leaves_other_coordinates(self, rng):
        f = separable_exp(3, 1)
        x = rng.standard_normal(3)
        p = f.prox(1.0, x)
        assert p[0] == x[0] and p[2] == x[2]
        assert abs(p[1] + math.exp(p[1]) - x[1]) < 1e-12

    def test_linear_prox(self, rng):
        c = np.array([1.0, -2.0])
        f = linear(c)
        x = rng.standard_normal(2)
        np.testing.assert_allclose(f.prox(0.5, x), x - 0.5 * c)

    def test_zero_prox(self, rng):
        f = zero(2)
        x = rng.standard_normal(2)
        np.testing.assert_allclose(f.prox(2.0, x), x)


class TestProxOptimality:
    @pytest.mark.parametrize("build", [
        lambda: quadratic(np.array([[2.0, 0.5], [0.5, 1.0]]), np.array([0.3, -0.7])),
        lambda: l1(2, 0.8),
        lambda: indicator_box(2, -1.0, 2.0),
        lambda: indicator_ball(2, 0.5, 1.5),
        lambda: separable_exp(2, 0),
        lambda: linear(np.array([0.5, -1.0])),
        lambda: zero(2),
    ])
    def test_variational_inequality(self, rng, build):
        f = build()
        for gamma in (0.5, 2.0):
            assert_prox_optimal(f, gamma, 1.5 * rng.standard_normal(2), rng)


class TestConjugates:
    def test_involutive_handles(self):
        for f in (l1(2, 0.5), quadratic(np.eye(2)), zero(3), separable_exp(2, 1)):
            assert f.conjugate.conjugate is f

    def test_l1_conjugate_is_box(self, rng):
        f = l1(2, 0.7)
        g = f.conjugate
        assert g.value(np.array([0.7, -0.7])) == 0.0
        assert g.value(np.array([0.71, 0.0])) == np.inf
        x = 2 * rng.standard_normal(2)
        np.testing.assert_allclose(g.prox(1.0, x), np.clip(x, -0.7, 0.7))

    def test_quadratic_conjugate_values(self):
        # f = x^2 (A = [[2]]), f*(u) = u^2 / 4
        f = quadratic(np.array([[2.0]]))
        assert f.conjugate.value(np.array([3.0])) == pytest.approx(9.0 / 4.0)

    def test_exp_conjugate_formula(self):
        f = separable_exp(1, 0)
        g = f.conjugate
        v = 2.5
        assert g.value(np.array([v])) == pytest.approx(v * (math.log(v) - 1.0))
        assert g.value(np.array([0.0])) == 0.0
        assert g.value(np.array([-0.1])) == np.inf

    @pytest.mark.parametrize("build,xs", [
        (lambda: l1(1, 1.0), [-2.0, -0.3, 0.0, 1.7]),
        (lambda: quadratic(np.array([[1.5]]), np.array([0.2])), [-1.0, 0.0, 2.0]),
        (lambda: indicator_box(1, -1.0, 2.0), [-0.9, 0.0, 1.5]),
        (lambda: separable_exp(1, 0), [-1.0, 0.0, 1.0]),
    ])
    def test_numerical_biconjugation(self, build, xs):
        # independent grid-sup oracle: f(x) = sup_u (xu - f*(u))
        f = build()
        for x in xs:
            direct = f.value(np.array([x]))
            via_grid = grid_sup_conjugate(f.conjugate, x)
            assert via_grid == pytest.approx(direct, abs=5e-3)

    def test_moreau_decomposition_scalar_metric(self, rng):
        for f in (l1(3, 0.9), quadratic(np.eye(3), rng.standard_normal(3))):
            x = 2 * rng.standard_normal(3)
            np.testing.assert_allclose(
                f.prox(1.0, x) + f.conjugate.prox(1.0, x), x, atol=1e-10
            )


class TestProxMetric:
    def test_identity_metric_equals_catalog_prox(self, rng):
        for f in (l1(3, 0.6), quadratic(np.eye(3)), indicator_box(3, -1.0, 1.0)):
            x = 2 * rng.standard_normal(3)
            np.testing.assert_allclose(
                prox_metric(f, Metric.identity(3), x), f.prox(1.0, x), atol=1e-10
            )

    def test_scalar_weighted_absolute_value(self):
        # min |y| + (2 - y)^2 * 2 / 2 has the stationary point y = 2 - 1/2
        f = l1(1, 1.0)
        u = Metric.scaled(2.0, 1)
        assert prox_metric(f, u, np.array([2.0]))[0] == pytest.approx(1.5)

    def test_zero_function(self, rng):
        f = zero(2)
        u = spd_sqrt(np.array([[2.0, 0.5], [0.5, 1.0]]))
        x = rng.standard_normal(2)
        np.testing.assert_allclose(prox_metric(f, u, x), x, atol=1e-12)

    def test_diagonal_separable_matches_fista(self, rng):
        f = l1(3, 0.8)
        u = Metric.diag([0.5, 2.0, 1.3])
        x = 2 * rng.standard_normal(3)
        fast = prox_metric(f, u, x)
        # force the iterative path by a non-separable-looking wrapper
        dense = spd_sqrt(u.U.mat + 1e-13 * (np.ones((3, 3)) - np.eye(3)))
        slow = prox_metric(f, dense, x)
        np.testing.assert_allclose(fast, slow, atol=1e-8)

    def test_dense_metric_variational_optimality(self, rng):
        q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
        u = spd_sqrt(q @ np.diag([0.5, 1.0, 2.5]) @ q.T)
        f = l1(3, 0.7)
        x = 2 * rng.standard_normal(3)
        p = prox_metric(f, u, x)
        base = f.value(p) + 0.5 * u.inner(x - p, x - p)
        for _ in range(200):
            qpt = p + rng.standard_normal(3)
            assert base <= f.value(qpt) + 0.5 * u.inner(x - qpt, x - qpt) + 1e-8

    def test_transform_consistency_quadratic(self, rng):
        # prox^U_f(x) = U^{-1/2} prox_{f o U^{-1/2}}(U^{1/2} x)
        a = np.array([[1.5, 0.3], [0.3, 0.9]])
        b = np.array([0.4, -0.2])
        f = quadratic(a, b)
        u = spd_sqrt(np.array([[2.0, 0.4], [0.4, 1.2]]))
        x = rng.standard_normal(2)
        r = u.U_inv_sqrt.mat
        transformed = quadratic(r @ a @ r, r @ b)
        sandwich = u.apply_inv_sqrt(transformed.prox(1.0, u.apply_sqrt(x)))
        np.testing.assert_allclose(prox_metric(f, u, x), sandwich, atol=1e-6)

    def test_firmly_nonexpansive_in_metric(self, rng):
        u = spd_sqrt(np.array([[1.8, 0.4], [0.4, 0.7]]))
        f = l1(2, 0.5)
        gap = firm_nonexpansive_gap(
            lambda p: prox_metric(f, u, p),
            random_pairs(rng, 2),
            inner=lambda a, b: u.inner(a, b),
        )
        assert gap <= 1e-8


class TestConjugateProxMetric:
    def test_self_conjugate_quadratic(self, rng):
        f = quadratic(np.eye(2))
        x = rng.standard_normal(2)
        np.testing.assert_allclose(
            conjugate_prox_metric(f, Metric.identity(2), x), x / 2, atol=1e-10
        )

    def test_zero_function_gives_zero(self, rng):
        f = zero(2)
        u = spd_sqrt(np.array([[2.0, 0.1], [0.1, 1.0]]))
        x = rng.standard_normal(2)
        np.testing.assert_allclose(conjugate_prox_metric(f, u, x), np.zeros(2), atol=1e-10)

    def test_l1_gives_box_projection(self):
        f = l1(2, 1.0)
        got = conjugate_prox_metric(f, Metric.identity(2), np.array([2.0, -0.5]))
        np.testing.assert_allclose(got, [1.0, -0.5], atol=1e-10)

    def test_agrees_with_direct_conjugate_prox(self, rng):
        for f in (l1(2, 0.8), quadratic(np.array([[1.2, 0.3], [0.3, 0.8]]))):
            q, _ = np.linalg.qr(rng.standard_normal((2, 2)))
            u = spd_sqrt(q @ np.diag([0.6, 2.2]) @ q.T)
            x = 2 * rng.standard_normal(2)
            via_moreau = conjugate_prox_metric(f, u, x)
            direct = prox_metric(f.conjugate, u.inverse(), x)
            np.testing.assert_allclose(via_moreau, direct, atol=1e-8)

    def test_metric_moreau_decomposition(self, rng):
        # prox^U_f(x) + U^{-1} prox^{U^{-1}}_{f*}(U x) = x on random instances
        for _ in range(20):
            dim = int(rng.integers(2, 5))
            fs = [l1(dim, 0.7), quadratic(np.eye(dim)), indicator_box(dim, -1.0, 1.0)]
            f = fs[int(rng.integers(len(fs)))]
            q, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
            u = spd_sqrt(q @ np.diag(rng.uniform(0.5, 2.5, dim)) @ q.T)
            x = 2 * rng.standard_normal(dim)
            left = prox_metric(f, u, x)
            right = prox_metric(f.conjugate, u.inverse(), u.apply(x))
            np.testing.assert_allclose(left + u.apply_inv(right), x, atol=1e-8)


class TestSubdifferentialOperator:
    def test_resolvent_is_prox(self, rng):
        f = l1(2, 0.5)
        op = f.subdifferential()
        x = rng.standard_normal(2)
        np.testing.assert_allclose(op.resolve(0.7, x), f.prox(0.7, x))

    def test_forward_consistency_smooth(self, rng):
        # J_{gamma df}(x + gamma grad f(x)) = x for differentiable members
        for f in (quadratic(np.array([[1.5, 0.2], [0.2, 0.9]]), np.array([0.1, 0.3])),
                  separable_exp(2, 0)):
            op = f.subdifferential()
            x = rng.standard_normal(2)
            for gamma in (0.3, 1.0):
                np.testing.assert_allclose(
                    op.resolve(gamma, x + gamma * op.evaluate(x)), x, atol=1e-9
                )
