import math

from hypothesis import given, settings, strategies as st
import pytest

from entromax.bounds import (InteriorEstimate, balance_bound_pk, bound_convex, bound_pk,
                             eta_estimate_pk, two_param_bound)
from entromax.errors import InteriorityError, ValidationError


class TestTwoParam:
    def test_unit(self):
        assert two_param_bound(1.0, math.exp(-1)) == pytest.approx(1.0, rel=1e-15)

    def test_full_mass(self):
        assert two_param_bound(0.3, 1.0) == 0

    def test_value(self, frozen):
        assert two_param_bound(0.5, 0.01) == pytest.approx(frozen["two_param_05_001"], rel=1e-14)

    def test_diverges(self):
        vals = [two_param_bound(0.5, 10.0 ** -p) for p in (1, 10, 100, 300)]
        assert vals == sorted(vals) and vals[-1] > 1000

    @pytest.mark.parametrize("eta,delta", [(0, 0.5), (-1, 0.5), (1, 0), (1, 1.5)])
    def test_bad(self, eta, delta):
        with pytest.raises(ValidationError):
            two_param_bound(eta, delta)


class TestBoundPk:
    def test_value(self, frozen):
        assert bound_pk(2, 1, 0.1) == pytest.approx(frozen["bound_pk_2_1_01"], rel=1e-14)

    def test_eta_monotone(self):
        assert bound_pk(2, 1, 0.2) < bound_pk(2, 1, 0.1)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(1, 30), st.integers(1, 30), st.floats(1e-4, 0.5))
    def test_monotone(self, n, k, eta):
        k = min(k, n)
        b = bound_pk(n, k, eta)
        assert bound_pk(n, k, eta * 1.5) < b
        assert bound_pk(n + 1, k, eta) > b
        if k < n:
            assert bound_pk(n, k + 1, eta) > b

    def test_bad_k(self):
        with pytest.raises(ValidationError):
            bound_pk(2, 3, 0.1)

    def test_balance_exponent(self):
        assert balance_bound_pk(10.0, 2, 1) == pytest.approx(4 * math.log(80), rel=1e-15)


class TestBoundConvex:
    def test_values(self, frozen):
        assert bound_convex(1, 1.0, 0.25) == pytest.approx(frozen["bound_convex_1_1_025"], rel=1e-14)
        assert bound_convex(3, 10.0, 1.0) == pytest.approx(frozen["bound_convex_3_10_1"], rel=1e-14)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(1, 20), st.floats(1.0, 100.0), st.floats(0.01, 1.0))
    def test_doubling_radius(self, d, R, eta):
        step = bound_convex(d, 2 * R, eta) - bound_convex(d, R, eta)
        assert step == pytest.approx(2 * d / eta * math.log(2), rel=1e-9)
        assert bound_convex(d + 1, R, eta) > bound_convex(d, R, eta)
        assert bound_convex(d, R, eta / 2) > bound_convex(d, R, eta)

    def test_bad(self):
        with pytest.raises(ValidationError):
            bound_convex(0, 1.0, 0.1)
        with pytest.raises(ValidationError):
            bound_convex(1, 0.1, 0.5)


class TestEta:
    @pytest.mark.parametrize("n,k", [(2, 1), (3, 1), (4, 3), (5, 2)])
    def test_uniform(self, n, k):
        assert eta_estimate_pk([k / n] * n, k).eta == pytest.approx(min(k / n, 1 - k / n))

    def test_examples(self):
        assert eta_estimate_pk([0.9, 0.1], 1).eta == pytest.approx(0.1)
        assert eta_estimate_pk([0.5, 0.5], 1).eta == 0.5

    @pytest.mark.parametrize("a,k", [([1.0, 0.0], 1), ([0.6, 0.6], 1), ([1.2, -0.2], 1)])
    def test_boundary(self, a, k):
        with pytest.raises(InteriorityError, match="not in the interior"):
            eta_estimate_pk(a, k)

    def test_estimate_type(self):
        with pytest.raises(ValidationError):
            InteriorEstimate(0.0)
