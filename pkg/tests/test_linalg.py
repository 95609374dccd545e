import numpy as np
import pytest

from metricprox import (
    DimensionMismatch,
    LinearMap,
    Metric,
    NotPositiveDefinite,
    NotSymmetric,
    format_matrix,
    operator_norm,
    parse_matrix,
    project_kernel_metric,
    project_range_metric,
    pseudoinverse,
    spd_sqrt,
    svd_factors,
)


class TestSpdSqrt:
    def test_diagonal(self):
        m = spd_sqrt(np.diag([4.0, 9.0]))
        np.testing.assert_allclose(m.U_sqrt.mat, np.diag([2.0, 3.0]), atol=1e-12)
        assert m.mu == pytest.approx(4.0)

    def test_identity(self):
        m = spd_sqrt(np.eye(3))
        np.testing.assert_allclose(m.U_sqrt.mat, np.eye(3), atol=1e-12)
        assert m.mu == pytest.approx(1.0)

    def test_dense_sqrt_squares_back(self):
        # smallest eigenvalue of [[2,1],[1,2]] is 1 (eigenpairs 1 and 3)
        u = np.array([[2.0, 1.0], [1.0, 2.0]])
        m = spd_sqrt(u)
        assert m.mu == pytest.approx(1.0, abs=1e-12)
        np.testing.assert_allclose(m.U_sqrt.mat @ m.U_sqrt.mat, u, atol=1e-10)
        np.testing.assert_allclose(m.U.mat @ m.U_inv.mat, np.eye(2), atol=1e-10)

    def test_rejects_asymmetric(self):
        with pytest.raises(NotSymmetric):
            spd_sqrt(np.array([[1.0, 0.5], [0.0, 1.0]]))

    def test_rejects_indefinite(self):
        with pytest.raises(NotPositiveDefinite):
            spd_sqrt(np.diag([1.0, -0.5]))
        with pytest.raises(NotPositiveDefinite):
            spd_sqrt(np.diag([1.0, 0.0]))

    def test_random_reconstruction(self, rng):
        for _ in range(20):
            dim = int(rng.integers(2, 8))
            q, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
            u = q @ np.diag(rng.uniform(0.2, 5.0, dim)) @ q.T
            m = spd_sqrt(u)
            scale = np.linalg.norm(u)
            assert np.linalg.norm(m.U_sqrt.mat @ m.U_sqrt.mat - u) <= 1e-10 * scale
            assert np.linalg.norm(m.U.mat @ m.U_inv.mat - np.eye(dim)) <= 1e-10
            assert np.linalg.norm(m.U_sqrt.mat - m.U_sqrt.mat.T) <= 1e-10 * scale
            assert np.linalg.eigvalsh(m.U_sqrt.mat)[0] > 0

    def test_inverse_metric_swaps_caches(self, rng):
        m = spd_sqrt(np.diag([2.0, 5.0]))
        inv = m.inverse()
        np.testing.assert_allclose(inv.U.mat, np.diag([0.5, 0.2]), atol=1e-12)
        assert inv.mu == pytest.approx(0.2)
        np.testing.assert_allclose(inv.inverse().U.mat, m.U.mat, atol=1e-14)


class TestPseudoinverse:
    def test_projection_matrix_is_own_pinv(self):
        p = np.array([[1.0, 0.0], [0.0, 0.0]])
        np.testing.assert_allclose(pseudoinverse(p).mat, p, atol=1e-12)

    def test_scalar(self):
        np.testing.assert_allclose(pseudoinverse(np.array([[2.0]])).mat, [[0.5]])

    def test_wide_row(self):
        # all four Moore-Penrose identities pin [[0.5], [0.5]] for [[1, 1]]
        a = np.array([[1.0, 1.0]])
        p = pseudoinverse(a).mat
        np.testing.assert_allclose(p, [[0.5], [0.5]], atol=1e-12)
        for lhs, rhs in [(a @ p @ a, a), (p @ a @ p, p)]:
            np.testing.assert_allclose(lhs, rhs, atol=1e-8)

    @pytest.mark.parametrize("rows,cols", [(3, 5), (4, 4), (5, 2), (1, 4)])
    def test_moore_penrose_identities_all_ranks(self, rng, rows, cols):
        for rank in range(min(rows, cols) + 1):
            u, _ = np.linalg.qr(rng.standard_normal((rows, rows)))
            v, _ = np.linalg.qr(rng.standard_normal((cols, cols)))
            s = np.zeros((rows, cols))
            for i in range(rank):
                s[i, i] = rng.uniform(0.5, 2.0)
            a = u @ s @ v.T
            p = pseudoinverse(a).mat
            np.testing.assert_allclose(a @ p @ a, a, atol=1e-8)
            np.testing.assert_allclose(p @ a @ p, p, atol=1e-8)
            np.testing.assert_allclose((a @ p).T, a @ p, atol=1e-8)
            np.testing.assert_allclose((p @ a).T, p @ a, atol=1e-8)

    def test_gram_inverse_formula_when_invertible(self, rng):
        # full column rank: pinv equals (M*M)^{-1} M*
        a = rng.standard_normal((5, 3))
        p = pseudoinverse(a).mat
        np.testing.assert_allclose(p, np.linalg.inv(a.T @ a) @ a.T, atol=1e-8)

    def test_rank_cutoff_zeroes_small_values(self):
        a = np.diag([1.0, 1e-15])
        fac = svd_factors(a)
        assert fac.rank == 1
        np.testing.assert_allclose(fac.pinv_matrix(), np.diag([1.0, 0.0]), atol=1e-12)


class TestMetricProjections:
    def test_euclidean_axis(self):
        m = LinearMap(np.array([[1.0, 0.0], [0.0, 0.0]]))
        u = Metric.identity(2)
        x = np.array([3.0, 7.0])
        np.testing.assert_allclose(project_kernel_metric(m, u, x), [0.0, 7.0], atol=1e-12)
        np.testing.assert_allclose(project_range_metric(m, u, x), [3.0, 0.0], atol=1e-12)

    def test_trivial_kernel(self, rng):
        m = LinearMap(np.array([[2.0, 0.0], [1.0, 1.0]]))  # invertible, ker = {0}
        u = spd_sqrt(np.diag([1.0, 4.0]))
        x = rng.standard_normal(2)
        np.testing.assert_allclose(project_kernel_metric(m, u, x), np.zeros(2), atol=1e-10)

    def test_zero_map_range(self, rng):
        m = LinearMap(np.zeros((2, 3)))
        u = Metric.identity(3)
        x = rng.standard_normal(3)
        np.testing.assert_allclose(project_range_metric(m, u, x), np.zeros(3), atol=1e-12)
        np.testing.assert_allclose(project_kernel_metric(m, u, x), x, atol=1e-12)

    def test_weighted_projection_hand_solve(self):
        # ker M = {y1 + y2 = 0}; x - y must be a multiple of U M* = (1, 4).
        # Writing x - y = t (1, 4) with y1 + y2 = 0 gives t = 1/5 at x = (1, 0),
        # hence y = (4/5, -4/5).
        m = LinearMap(np.array([[1.0, 1.0]]))
        u = spd_sqrt(np.diag([1.0, 4.0]))
        x = np.array([1.0, 0.0])
        y = project_kernel_metric(m, u, x)
        np.testing.assert_allclose(y, [0.8, -0.8], atol=1e-10)
        assert abs(y.sum()) <= 1e-10
        resid = x - y
        np.testing.assert_allclose(resid / resid[0], [1.0, 4.0], atol=1e-10)

    def test_complement_idempotence_orthogonality(self, rng):
        for _ in range(10):
            g = int(rng.integers(2, 7))
            h = int(rng.integers(1, 7))
            m = LinearMap(rng.standard_normal((h, g)))
            q, _ = np.linalg.qr(rng.standard_normal((g, g)))
            u = spd_sqrt(q @ np.diag(rng.uniform(0.3, 3.0, g)) @ q.T)
            for _ in range(10):
                x = rng.standard_normal(g)
                ker = project_kernel_metric(m, u, x)
                ran = project_range_metric(m, u, x)
                np.testing.assert_allclose(ker + ran, x, atol=1e-8)
                np.testing.assert_allclose(
                    project_kernel_metric(m, u, ker), ker, atol=1e-8
                )
                assert abs(ker @ u.U_inv.mat @ ran) <= 1e-8
                assert np.linalg.norm(m.mat @ ker) <= 1e-8


class TestOperatorNorm:
    def test_diagonal(self):
        assert operator_norm(LinearMap(np.diag([3.0, 1.0]))) == pytest.approx(3.0, rel=1e-8)

    def test_zero(self):
        assert operator_norm(LinearMap(np.zeros((2, 3)))) == 0.0

    def test_row_vector(self):
        assert operator_norm(LinearMap(np.array([[1.0, 1.0]]))) == pytest.approx(
            np.sqrt(2.0), rel=1e-8
        )

    def test_matches_svd(self, rng):
        for _ in range(20):
            a = rng.standard_normal((int(rng.integers(1, 7)), int(rng.integers(1, 7))))
            truth = np.linalg.svd(a, compute_uv=False)[0]
            assert operator_norm(LinearMap(a)) == pytest.approx(truth, rel=1e-7, abs=1e-10)


class TestLinearMap:
    def test_adjoint_involution(self, rng):
        m = LinearMap(rng.standard_normal((3, 4)))
        np.testing.assert_array_equal(m.adjoint.adjoint.mat, m.mat)

    def test_dimension_checks(self):
        m = LinearMap(np.ones((2, 3)))
        with pytest.raises(DimensionMismatch):
            m.apply(np.ones(2))
        with pytest.raises(DimensionMismatch):
            m.compose(LinearMap(np.ones((2, 2))))

    def test_immutable(self):
        m = LinearMap(np.eye(2))
        with pytest.raises(ValueError):
            m.mat[0, 0] = 5.0


class TestSerialization:
    def test_round_trip(self, rng):
        a = rng.standard_normal((3, 4))
        np.testing.assert_array_equal(parse_matrix(format_matrix(a)), a)

    def test_vector_round_trip(self):
        v = np.array([1.5, -2.25, 3.0])
        out = parse_matrix(format_matrix(v))
        assert out.shape == (1, 3)
        np.testing.assert_array_equal(out.reshape(-1), v)

    @pytest.mark.parametrize(
        "text",
        ["", "2\n1 2", "2 2\n1 2\n3", "2 2\n1 2\n3 x", "0 2\n"],
    )
    def test_malformed(self, text):
        with pytest.raises(ValueError):
            parse_matrix(text)
