import math

import mpmath
import numpy as np
import pytest

from entromax.errors import ValidationError
from entromax.mc import (MCEstimate, mc_estimate_Ek, mc_marginal, sample_uniform_pk,
                         sample_uniform_pk_many)
from entromax.oracle_pk import eval_Ek

import oracles


class TestUniformProjections:
    @pytest.mark.parametrize("n,k", [(1, 1), (3, 1), (4, 2), (5, 5)])
    def test_projection(self, n, k):
        X = sample_uniform_pk_many(n, k, 500, 0)
        assert np.max(np.abs(X @ X - X)) < 1e-12
        assert np.max(np.abs(X - X.conj().transpose(0, 2, 1))) < 1e-12
        assert np.max(np.abs(np.trace(X, axis1=1, axis2=2) - k)) < 1e-12

    def test_mean_is_scaled_identity(self):
        n, k, N = 4, 2, 100_000
        X = sample_uniform_pk_many(n, k, N, 1)
        se = np.abs(X.std(axis=0)) / math.sqrt(N)
        want = oracles.uniform_projection_mean(n, k) * np.eye(n)
        assert np.all(np.abs(X.mean(axis=0) - want) <= 4 * se + 1e-14)

    def test_single(self):
        X = sample_uniform_pk(3, 1, 2)
        assert X.n == 3

    def test_bad_rank(self):
        with pytest.raises(ValidationError):
            sample_uniform_pk_many(2, 3, 10, 0)


class TestEstimates:
    def test_zero_y(self):
        est = mc_estimate_Ek(np.zeros(3), 2, 1000, 0)
        assert est.mean == 1 and 0 < est.stderr < 1e-14

    def test_full_rank_is_exact_to_rounding(self):
        # X = I for every draw: only the rounding floor remains
        y = np.array([0.5, -1.0, 2.0])
        est = mc_estimate_Ek(y, 3, 1000, 0)
        exact = float(mpmath.exp(eval_Ek(y, 3)))
        assert abs(exact - est.mean) <= 3 * est.stderr < 1e-13

    def test_matches_exact(self):
        y = np.array([0.5, -1.0, 2.0])
        est = mc_estimate_Ek(y, 2, 200_000, 3)
        assert abs(float(mpmath.exp(eval_Ek(y, 2))) - est.mean) <= 3 * est.stderr

    def test_deterministic_across_chunking(self):
        y = np.array([0.5, -1.0, 2.0])
        a = mc_estimate_Ek(y, 1, 120_000, 4)
        b = mc_estimate_Ek(y, 1, 120_000, 4)
        assert a == b

    def test_large_weights_use_shift(self):
        y = np.array([-35.0, 0.0, 1.0])
        est = mc_estimate_Ek(y, 1, 100_000, 5)
        assert isinstance(est.mean, mpmath.mpf)
        exact = mpmath.exp(eval_Ek(y, 1))
        assert abs(exact - est.mean) <= 3 * est.stderr

    def test_log(self):
        est = MCEstimate(2.0, 0.2, 10)
        lm, ls = est.log()
        assert abs(lm - math.log(2)) < 1e-15 and ls == pytest.approx(0.1)

    def test_matrix_input(self):
        a = mc_estimate_Ek(np.diag([1.0, 0.0]), 1, 1000, 6)
        b = mc_estimate_Ek([1.0, 0.0], 1, 1000, 6)
        assert a == b
        with pytest.raises(ValidationError):
            mc_estimate_Ek(np.ones((2, 2)), 1, 1000, 6)


class TestMarginal:
    def test_zero_y(self):
        M = mc_marginal(np.zeros(4), 1, 50_000, 7)
        assert abs(np.trace(M.entries) - 1) < 1e-12

    def test_matches_gradient(self):
        from entromax.matrixcore import cluster_labels
        from entromax.oracle_pk import grad_Ek
        y = np.array([1.0, 0.0, -0.5, 2.0])
        s, lab = cluster_labels(y)
        g = grad_Ek(s, 2)
        want = np.array([-float(g[i]) for i in lab])
        M, se = mc_marginal(y, 2, 200_000, 8, return_stderr=True)
        assert np.all(np.abs(np.real(np.diag(M.entries)) - want) <= 4 * se)
