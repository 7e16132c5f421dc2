import math

from hypothesis import given, settings, strategies as st
import mpmath
import numpy as np
import pytest

from entromax.errors import ValidationError
from entromax.oracle_v1 import (INFINITE, SymmetricPD, eval_Ev1, exp_family_fit_residual,
                                grad_Ev1, gw_log_density, gw_optimum, gw_sample,
                                projected_density_ratio, stationarity_residual)

import oracles


def random_spd(rng, n):
    G = rng.standard_normal((n, n))
    return G @ G.T + 0.1 * np.eye(n)


class TestEval:
    @pytest.mark.parametrize("n", [1, 2, 5, 20])
    def test_identity(self, n, frozen):
        assert abs(float(eval_Ev1(np.eye(n))) - n / 2 * frozen["log_pi"]) < 1e-12

    def test_diag_1_4(self):
        with mpmath.workprec(256):
            assert abs(eval_Ev1(np.diag([1.0, 4.0])) - mpmath.log(mpmath.pi / 2)) < 1e-60

    @pytest.mark.parametrize("Y", [np.diag([0.0, 1.0]), np.diag([-1.0, 2.0]), -np.eye(3)])
    def test_not_pd_is_infinite(self, Y):
        assert eval_Ev1(Y) == INFINITE

    def test_asymmetric(self):
        with pytest.raises(ValidationError):
            eval_Ev1(np.array([[1.0, 0.5], [0.0, 1.0]]))

    def test_complex_rejected(self):
        with pytest.raises(ValidationError):
            eval_Ev1(np.array([[1.0, 0.5j], [-0.5j, 1.0]]))

    @settings(max_examples=30, deadline=None)
    @given(st.integers(1, 6), st.floats(0.01, 100), st.integers(0, 2 ** 32 - 1))
    def test_logdet_homogeneity(self, n, c, seed):
        Y = random_spd(np.random.default_rng(seed), n)
        lhs = eval_Ev1(c * Y)
        rhs = eval_Ev1(Y) - mpmath.mpf(n) / 2 * mpmath.log(c)
        assert abs(lhs - rhs) < 1e-9 * (1 + abs(rhs))

    def test_gaussian_integral_quadrature(self):
        # int_R exp(-y v^2) dv = sqrt(pi / y)
        from scipy import integrate
        y = 1.7
        val, _ = integrate.quad(lambda v: math.exp(-y * v * v), -np.inf, np.inf)
        assert abs(float(eval_Ev1([[y]])) - math.log(val)) < 1e-10

    def test_gradient_finite_differences(self):
        rng = np.random.default_rng(0)
        Y = random_spd(rng, 3)
        G = grad_Ev1(Y)
        for i in range(3):
            for j in range(i, 3):
                D = np.zeros((3, 3))
                D[i, j] = D[j, i] = 1.0
                fd = oracles.central_difference(lambda t: eval_Ev1(Y + t[0] * D), [0.0])[0]
                want = G[i, j] * (1 if i == j else 2)
                assert abs(fd - want) <= 1e-6 * abs(want)


class TestOptimum:
    def test_identity(self):
        assert np.allclose(gw_optimum(np.eye(3)), 0.5 * np.eye(3), atol=1e-15)

    def test_diag(self):
        assert np.allclose(gw_optimum(np.diag([2.0, 0.5])), np.diag([0.25, 1.0]), atol=1e-15)

    @pytest.mark.parametrize("seed", range(10))
    def test_stationarity(self, seed):
        rng = np.random.default_rng(seed)
        A = random_spd(rng, int(rng.integers(2, 21)))
        A /= np.linalg.norm(A)
        assert stationarity_residual(A, gw_optimum(A)) <= 1e-10

    def test_singular(self):
        with pytest.raises(ValidationError):
            gw_optimum(np.diag([1.0, 0.0]))

    def test_spd_type(self):
        with pytest.raises(ValidationError):
            SymmetricPD.from_array(np.diag([1.0, -1.0]))
        assert SymmetricPD.from_array(np.eye(4)).n == 4


class TestSampling:
    def test_identity_mean(self):
        N = 100_000
        v = gw_sample(np.eye(3), np.random.default_rng(1), N)
        assert np.all(np.abs(v.mean(axis=0)) <= 4 / math.sqrt(N))

    def test_covariance(self):
        rng = np.random.default_rng(2)
        A = random_spd(rng, 3)
        N = 200_000
        v = gw_sample(A, rng, N)
        outer = np.einsum("ni,nj->nij", v, v)
        se = outer.std(axis=0) / math.sqrt(N)
        assert np.all(np.abs(outer.mean(axis=0) - A) <= 5 * se)

    def test_single_shape(self):
        assert gw_sample(np.eye(2), np.random.default_rng(0)).shape == (2,)

    def test_log_density_is_gaussian(self):
        rng = np.random.default_rng(3)
        A = random_spd(rng, 3)
        v = rng.standard_normal((5, 3))
        want = -0.5 * np.einsum("ni,ij,nj->n", v, np.linalg.inv(A), v)
        assert np.allclose(gw_log_density(A, v), want, rtol=1e-10)


class TestProjection:
    def test_identity_ratio(self):
        rng = np.random.default_rng(4)
        for _ in range(5):
            a, b = rng.standard_normal((2, 3))
            r = projected_density_ratio(np.eye(3), a / np.linalg.norm(a), b / np.linalg.norm(b))
            assert abs(r - 1) < 1e-12

    def test_diag_ratio(self):
        assert projected_density_ratio(np.diag([2.0, 1.0]), [1, 0], [0, 1]) == mpmath.mpf(1) / 4

    def test_non_unit(self):
        with pytest.raises(ValidationError):
            projected_density_ratio(np.eye(2), [1, 1], [0, 1])

    def test_not_exponential_family(self):
        assert exp_family_fit_residual(np.diag([2.0, 1.0])) > 1e-6

    def test_identity_fits_trivially(self):
        assert exp_family_fit_residual(np.eye(2)) < 1e-20
