"""Special-function tests with independent oracles (mpmath / bisection /
defining-integral quadrature)."""

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ciliarec.special import (
    MAX_TAYLOR_DEGREE,
    HillParams,
    erfc,
    erfc_inv,
    hill_F,
    hill_taylor,
)


class TestErfc:
    def test_defining_integral_oracle(self):
        # 1 - (2/sqrt(pi)) int_0^z exp(-tau^2)
        for z in (0.0, 0.25, 1.0, 2.5, -1.0):
            ref = float(1 - 2 / mpmath.sqrt(mpmath.pi) * mpmath.quad(
                lambda u: mpmath.e**(-u**2), [0, z]))
            assert erfc(z) == pytest.approx(ref, abs=1e-14)

    def test_frozen_value(self):
        # oracle: mpmath.erfc(1)
        assert erfc(1.0) == pytest.approx(0.15729920705028513, abs=1e-16)

    def test_vectorized(self):
        z = np.array([0.0, 1.0])
        np.testing.assert_allclose(erfc(z), [1.0, erfc(1.0)])

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            erfc(np.nan)


class TestErfcInv:
    def test_bisection_oracle(self):
        # solve erfc(x) = y by bisection, independent of scipy's inverse
        for y in (0.5, 1.0, 1.5, 0.01):
            lo, hi = -6.0, 6.0
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                if erfc(mid) > y:
                    lo = mid
                else:
                    hi = mid
            assert erfc_inv(y) == pytest.approx(0.5 * (lo + hi), abs=1e-12)

    def test_frozen_value(self):
        # oracle: bisection above at y = 0.5
        assert erfc_inv(0.5) == pytest.approx(0.4769362762044699, abs=1e-15)

    @given(st.floats(min_value=1e-6, max_value=2 - 1e-6))
    def test_round_trip(self, y):
        assert erfc(erfc_inv(y)) == pytest.approx(y, rel=1e-12, abs=1e-12)

    def test_domain_rejected(self):
        for y in (0.0, 2.0, -1.0, 2.5):
            with pytest.raises(ValueError):
                erfc_inv(y)


class TestHillF:
    P = HillParams(n=2.0, K_half=0.5)

    def test_values(self):
        assert hill_F(0.5, self.P) == pytest.approx(0.5)
        assert hill_F(0.4, self.P) == pytest.approx(0.16 / 0.41)
        assert hill_F(1.0, self.P) == pytest.approx(0.8)
        assert hill_F(0.0, self.P) == 0.0

    def test_large_x_no_overflow(self):
        assert hill_F(1e300, self.P) == pytest.approx(1.0)

    @given(st.floats(min_value=0, max_value=1e6),
           st.floats(min_value=0, max_value=1e6))
    def test_monotone(self, x1, x2):
        lo, hi = sorted((x1, x2))
        assert hill_F(lo, self.P) <= hill_F(hi, self.P) + 1e-15

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            hill_F(-0.1, self.P)

    def test_param_validation(self):
        with pytest.raises(ValueError):
            HillParams(n=-1.0, K_half=0.5)
        with pytest.raises(ValueError):
            HillParams(n=2.0, K_half=0.0)


class TestHillTaylor:
    P = HillParams(n=2.0, K_half=0.5)

    def test_mpmath_derivative_oracle(self):
        c0 = 1.0
        coeffs = hill_taylor(c0, 5, self.P)

        def f(x):
            return x**2 / (x**2 + mpmath.mpf("0.25"))

        for k, c in enumerate(coeffs):
            ref = float(mpmath.diff(f, c0, k) / mpmath.factorial(k))
            assert c == pytest.approx(ref, rel=1e-6, abs=1e-10)

    def test_noninteger_exponent(self):
        p = HillParams(n=2.2, K_half=0.5)
        coeffs = hill_taylor(1.0, 3, p)

        def f(x):
            return x**mpmath.mpf("2.2") / (x**mpmath.mpf("2.2") + mpmath.mpf("0.5")**mpmath.mpf("2.2"))

        for k, c in enumerate(coeffs):
            ref = float(mpmath.diff(f, 1.0, k) / mpmath.factorial(k))
            assert c == pytest.approx(ref, rel=1e-6, abs=1e-10)

    def test_remainder_order(self):
        # |F(c0+h) - P_m(h)| = O(h^(m+1)): fitted log-log slope >= m + 0.9
        c0, m = 1.0, 4
        coeffs = hill_taylor(c0, m, self.P)
        hs = np.array([1e-2, 5e-3, 2.5e-3, 1.25e-3])
        errs = []
        for h in hs:
            poly = sum(c * h**k for k, c in enumerate(coeffs))
            errs.append(abs(hill_F(c0 + h, self.P) - poly))
        slope = np.polyfit(np.log(hs), np.log(errs), 1)[0]
        assert slope >= m + 0.9

    def test_degree_cap(self):
        with pytest.raises(ValueError):
            hill_taylor(1.0, MAX_TAYLOR_DEGREE + 1, self.P)
        assert len(hill_taylor(1.0, MAX_TAYLOR_DEGREE, self.P)) == MAX_TAYLOR_DEGREE + 1

    def test_constant_term_is_F(self):
        assert hill_taylor(0.7, 3, self.P)[0] == pytest.approx(hill_F(0.7, self.P), rel=1e-12)
