"""Stability diagnostics tests: Mellin symbol, transforms, norm families,
inequality verifiers, collision scan."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ciliarec.analysis import (
    NormFamilySpec,
    c_gamma,
    family_norm,
    gamma0_bound,
    lambda_gamma,
    lemma9_scan,
    mellin_l2,
    mellin_numeric,
    mellin_plancherel_ratio,
    stability_report,
    verify_levelwise_stability,
    verify_operator_stability,
    verify_stability_L2,
    weighted_norm,
)
from ciliarec.forward import CumulativeFn, Phi_m
from ciliarec.kernels import GeometricMeshSpec, default_params, geometric_partition

PP = default_params()
SPEC = GeometricMeshSpec(beta=0.8, beta0=1.0, m=4)
PART = geometric_partition(SPEC, PP)
SPEC1 = GeometricMeshSpec(beta=0.8, beta0=1.0, m=1)
PART1 = geometric_partition(SPEC1, PP)


class TestLambdaGamma:
    def test_m1_constant_in_s(self):
        gam = 0.3
        ref = PART1.a[0] * PART1.betas[0] ** (-(0.5 + gam))
        s = np.linspace(0, 50, 11)
        np.testing.assert_allclose(lambda_gamma(s, gam, PART1), ref, rtol=1e-14)

    def test_even_in_s(self):
        s = np.linspace(0.1, 30, 17)
        np.testing.assert_allclose(lambda_gamma(s, 1.0, PART),
                                   lambda_gamma(-s, 1.0, PART), rtol=1e-13)

    def test_value_at_zero(self):
        gam = 0.7
        ref = np.sum(PART.a * PART.betas ** (-(0.5 + gam)))
        assert lambda_gamma(0.0, gam, PART) == pytest.approx(ref, rel=1e-13)


class TestCGamma:
    def test_m1_exact(self):
        cg = c_gamma(0.3, PART1)
        assert cg.value == pytest.approx(PART1.a[0] * PART1.betas[0] ** (-0.8), rel=1e-14)
        assert cg.lower_bound == cg.value

    def test_above_threshold_positive_with_certificate(self):
        gam = gamma0_bound(PART) + 1.0
        cg = c_gamma(gam, PART)
        assert cg.lower_bound is not None
        assert cg.value >= cg.lower_bound > 0

    def test_infimizer_inside_window(self):
        gam = gamma0_bound(PART) + 1.0
        cg = c_gamma(gam, PART)
        assert 0.0 <= cg.s_argmin < cg.s_max

    def test_grid_refinement_stable(self):
        gam = gamma0_bound(PART) + 1.0
        c1 = c_gamma(gam, PART, n_samples=50_000).value
        c2 = c_gamma(gam, PART, n_samples=100_000).value
        assert abs(c1 - c2) <= 1e-6 * c2

    def test_small_sample_rejected(self):
        with pytest.raises(ValueError):
            c_gamma(1.0, PART, n_samples=10)


class TestGamma0:
    def test_m1_minus_inf(self):
        assert gamma0_bound(PART1) == float("-inf")

    def test_formula(self):
        ref = np.log(PART.a[-1]) / np.log(PART.betas[-1] / PART.betas[-2]) - 0.5
        assert gamma0_bound(PART) == pytest.approx(ref, rel=1e-14)


class TestMellin:
    def test_indicator_closed_form(self):
        # M[1_(0,1]](s) = 1/s
        f = lambda x: 1.0 if x <= 1.0 else 0.0
        for s in (0.5, 0.5 - 1j, 1.5 + 2j):
            v = mellin_numeric(f, s, support=(0.0, 1.0))
            assert v == pytest.approx(1.0 / s, abs=1e-9)

    def test_scaling_law(self):
        # M[f(beta .)](s) = beta^(-s) M[f](s)
        f = lambda x: np.sin(np.pi * x) ** 2 if x <= 1.0 else 0.0
        beta = 0.8
        s = 0.5 - 0.7j
        lhs = mellin_numeric(lambda x: f(beta * x), s, support=(0.0, 1.0 / beta))
        rhs = beta ** (-s) * mellin_numeric(f, s, support=(0.0, 1.0))
        assert lhs == pytest.approx(rhs, abs=1e-8)

    def test_factorization(self):
        # M[Phi_m[phi]](s) = (sum a_j beta_j^(-s)) M[phi](s) for phi(L) = 0
        phi0 = lambda x: np.sin(np.pi * x / PP.L) ** 2
        phi = CumulativeFn(phi0, PP.L)
        s = 0.5 - 1.3j
        symbol = np.sum(PART.a * PART.betas ** (-s))
        lhs = mellin_numeric(lambda t: Phi_m(phi, t, PART), s, tol=1e-11,
                             support=(0.0, PART.L_m))
        rhs = symbol * mellin_numeric(phi0, s, tol=1e-11, support=(0.0, PP.L))
        assert lhs == pytest.approx(rhs, abs=1e-7)

    def test_l2_line_consistent(self):
        f = lambda x: 1.0 if x <= 1.0 else 0.0
        s0 = 0.9
        ref = (1.0 / (0.5 - 1j * s0)) / np.sqrt(2 * np.pi)
        assert mellin_l2(f, s0, support=(0.0, 1.0)) == pytest.approx(ref, abs=1e-9)

    def test_plancherel_three_functions(self):
        cases = [
            (lambda x: 1.0, 1.0),                                  # indicator
            (lambda x: x * (1.0 - x), np.sqrt(1.0 / 30.0)),        # polynomial bump
            (lambda x: np.sin(np.pi * x), np.sqrt(0.5)),           # half sine
        ]
        for f, l2 in cases:
            ratio = mellin_plancherel_ratio(f, 1.0, l2)
            assert abs(ratio - 1.0) <= 0.01

    def test_nonpositive_real_part_rejected(self):
        with pytest.raises(ValueError):
            mellin_numeric(lambda x: 1.0, -0.5 + 1j)


class TestWeightedNorm:
    def test_order0_closed_form(self):
        # f = 1, gamma = 1: sqrt(int_0^b x^2) = b^(3/2)/sqrt(3)
        b = 0.7
        assert weighted_norm(lambda x: 1.0, 0, 1.0, b) == pytest.approx(
            b**1.5 / np.sqrt(3.0), rel=1e-9)

    def test_order1_closed_form(self):
        # f = x, gamma = 0: sqrt(b^3/3 + b)
        b = 1.3
        v = weighted_norm(lambda x: x, 1, 0.0, b, fprime=lambda x: 1.0)
        assert v == pytest.approx(np.sqrt(b**3 / 3.0 + b), rel=1e-9)

    def test_order1_fd_fallback(self):
        b = 1.0
        v = weighted_norm(lambda x: x**2, 1, 0.0, b, fprime=lambda x: 2 * x)
        v_fd = weighted_norm(lambda x: x**2, 1, 0.0, b)
        assert v_fd == pytest.approx(v, rel=1e-5)

    def test_dual_norm_manufactured_solution(self):
        # choose u = sin(pi x / b); then -u'' + u = (pi^2/b^2 + 1) u and
        # ||u||_H1 = sqrt(b/2 + pi^2/(2 b))
        b = 1.0
        k = np.pi / b
        f = lambda x: (k**2 + 1.0) * np.sin(k * x)
        ref = np.sqrt(b / 2.0 + k**2 * b / 2.0)
        v = weighted_norm(f, -1, 0.0, b, n_grid=4001)
        assert v == pytest.approx(ref, rel=1e-4)

    def test_invalid_order(self):
        with pytest.raises(ValueError):
            weighted_norm(lambda x: x, 2, 0.0, 1.0)


class TestFamilyNorm:
    def test_lp_constant(self):
        spec = NormFamilySpec(kind="Lp", p=3.0)
        assert family_norm(lambda x: 2.0, spec, (0.5, 1.5)) == pytest.approx(
            2.0 * 1.0 ** (1 / 3.0), rel=1e-9)

    def test_linf(self):
        spec = NormFamilySpec(kind="Lp", p=np.inf)
        assert family_norm(lambda x: np.sin(8 * x), spec, (0.0, 3.0),
                           n_samples=20001) == pytest.approx(1.0, abs=1e-6)

    def test_bv_tabulated_step(self):
        # sup 2 plus total variation 4
        spec = NormFamilySpec(kind="BV")
        x = np.array([0.0, 0.5, 1.0, 1.5])
        y = np.array([0.0, 2.0, 0.0, 0.0])
        assert family_norm((x, y), spec, (0.0, 2.0)) == 6.0

    def test_bv_of_unit_step_is_two(self):
        spec = NormFamilySpec(kind="BV")
        f = lambda x: 1.0 if x >= 1.0 else 0.0
        assert family_norm(f, spec, (0.0, 2.0)) == pytest.approx(2.0)

    def test_scaling_constants(self):
        assert NormFamilySpec(kind="Lp", p=2.0).C(4.0) == pytest.approx(2.0)
        assert NormFamilySpec(kind="Lp", p=np.inf).C(4.0) == 1.0
        assert NormFamilySpec(kind="BV").C(0.3) == 1.0
        for spec in (NormFamilySpec(kind="Lp", p=1.0), NormFamilySpec(kind="BV")):
            assert spec.C(1.0) == 1.0

    def test_invalid_specs(self):
        with pytest.raises(ValueError):
            NormFamilySpec(kind="Lq")
        with pytest.raises(ValueError):
            NormFamilySpec(kind="Lp", p=0.5)
        with pytest.raises(ValueError):
            NormFamilySpec(kind="weighted", order=2)

    @given(st.floats(min_value=0.0, max_value=1.0), st.floats(min_value=1.2, max_value=3.0))
    @settings(max_examples=25, deadline=None)
    def test_axiom_nested_intervals(self, a, b):
        # axiom (ii): monotonicity under interval inclusion
        f = lambda x: np.cos(3 * x) + 1.1
        for spec in (NormFamilySpec(kind="Lp", p=2.0), NormFamilySpec(kind="BV")):
            inner = family_norm(f, spec, (a + 0.05, b - 0.05))
            outer = family_norm(f, spec, (a, b))
            assert inner <= outer * (1 + 1e-9)

    @given(st.floats(min_value=0.5, max_value=2.0))
    @settings(max_examples=25, deadline=None)
    def test_axiom_scaling(self, lam):
        # axiom (iii): C(lambda) ||f(lambda .)||_(I/lambda) = ||f||_I
        f = lambda x: x**2 + 0.3
        a, b = 0.2, 1.4
        lp = NormFamilySpec(kind="Lp", p=2.0)
        scaled = family_norm(lambda x: f(lam * x), lp, (a / lam, b / lam))
        assert lp.C(lam) * scaled == pytest.approx(family_norm(f, lp, (a, b)), rel=1e-9)
        bv = NormFamilySpec(kind="BV")
        x = np.linspace(a, b, 200)
        plain = family_norm((x, f(x)), bv, (a, b * 1.01))
        scaled = family_norm((x / lam, f(x)), bv, (a / lam, b * 1.01 / lam))
        assert bv.C(lam) * scaled == pytest.approx(plain, rel=1e-12)


def smooth_cumulative():
    # increasing from 0 with zero derivative at both ends
    return lambda x: np.clip(x, 0, PP.L) ** 2 * (3.0 - 2.0 * np.clip(x, 0, PP.L)) / 1.0


class TestInequalities:
    def test_weighted_L2_stability(self):
        gam = gamma0_bound(PART) + 1.0
        rep = verify_stability_L2(smooth_cumulative(), gam, PART)
        assert rep.holds
        assert rep.lhs > 0 and rep.rhs > 0

    def test_levelwise_all_families(self):
        phi = smooth_cumulative()
        fams = [NormFamilySpec(kind="Lp", p=1.0), NormFamilySpec(kind="Lp", p=2.0),
                NormFamilySpec(kind="Lp", p=np.inf), NormFamilySpec(kind="BV")]
        for k in (0, 1, 3):
            for fam in fams:
                rep = verify_levelwise_stability(phi, k, fam, SPEC, PART)
                assert rep.holds, (k, fam)

    def test_operator_ratios_finite_and_stable(self):
        rho = lambda x: 6.0 * x * (1.0 - x)
        gam = 1.0
        r1 = verify_operator_stability(rho, gam, PART, PP, n_grid=2001)
        r2 = verify_operator_stability(rho, gam, PART, PP, n_grid=4001)
        for r in (r1, r2):
            assert np.isfinite(r.continuity_ratio) and r.continuity_ratio > 0
            assert np.isfinite(r.stability_ratio) and r.stability_ratio > 0
        # only the discrete dual norm depends on the grid; refinement is tame
        assert r1.stability_ratio == pytest.approx(r2.stability_ratio, rel=1e-2)
        assert r1.continuity_ratio == pytest.approx(r2.continuity_ratio, rel=1e-12)


class TestLemma9Scan:
    def test_k1_diagonal_solutions(self):
        rep = lemma9_scan(1, 12)
        assert rep.solutions[1] == [((n,), n) for n in range(13)]
        assert "consistent" in rep.certificates[1]

    def test_k2_to_8_empty(self):
        rep = lemma9_scan(8, 30)
        for k in range(2, 9):
            assert rep.collision_free(k)
            assert "inconsistent" in rep.certificates[k]

    def test_bounds_validated(self):
        with pytest.raises(ValueError):
            lemma9_scan(9, 30)
        with pytest.raises(ValueError):
            lemma9_scan(3, 0)


class TestStabilityReport:
    def test_default_report(self):
        rep = stability_report(PART)
        d = rep.as_dict()
        assert d["gamma"] == pytest.approx(gamma0_bound(PART) + 1.0)
        assert d["c_gamma"] > 0
        assert d["c_gamma_lower_bound"] is not None
        assert len(rep.lambda_s) == len(rep.lambda_values)
