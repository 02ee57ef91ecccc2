import math
from fractions import Fraction

import mpmath as mp
import pytest

from gkz_forge import lattice, series, tautsys
from gkz_forge.errors import DegreeViolation, TruncationTooSmall, UnsupportedFamily
from gkz_forge.series import (
    annihilate_check,
    count_independent,
    frobenius_basis,
    gamma_series,
    monomial_series,
    reciprocal_gamma_jet,
)


SEGMENT = [(-1,), (0,), (1,)]
HESSE = [(0, 0), (1, 0), (0, 1), (-1, -1)]
CROSS = [(1, 0), (-1, 0), (0, 1), (0, -1)]


def make_spec(pts, dim):
    return tautsys.gkz_system(lattice.homogenize(pts, dim), tautsys.cy_beta(dim))


class TestReciprocalGammaJet:
    def numeric_jet(self, base, slope, order):
        """Independent oracle: high-precision Taylor coefficients of 1/Gamma."""
        with mp.workdps(60):
            f = lambda e: mp.rgamma(
                mp.mpf(base.numerator) / base.denominator
                + mp.mpf(slope.numerator) / slope.denominator * e
            )
            return [float(c) for c in mp.taylor(f, 0, order)]

    @pytest.mark.parametrize(
        "base,slope",
        [
            (Fraction(0), Fraction(-2)),
            (Fraction(-3), Fraction(1)),
            (Fraction(1), Fraction(1)),
            (Fraction(5), Fraction(-3)),
            (Fraction(-1, 2), Fraction(2)),
            (Fraction(7, 3), Fraction(-1, 2)),
        ],
    )
    def test_against_numeric_oracle(self, base, slope, order=4):
        jet = reciprocal_gamma_jet(base, slope, order)
        oracle = self.numeric_jet(base, slope, order)
        for mine, ref in zip(jet.coeffs, oracle):
            assert abs(float(mine) - ref) <= 1e-10 * max(1.0, abs(ref))

    def test_reflection_leading_term(self):
        # 1/Gamma(-m + c eps) ~ (-1)^m m! c eps
        for m in range(4):
            jet = reciprocal_gamma_jet(Fraction(-m), Fraction(1), 2)
            assert abs(float(jet.coefficient(0))) == 0
            lead = float(jet.coefficient(1))
            assert abs(lead - (-1) ** m * math.factorial(m)) < 1e-12

    def test_plain_values(self):
        assert series.reciprocal_gamma_value(3) == Fraction(1, 2)
        assert series.reciprocal_gamma_value(0) == 0
        assert series.reciprocal_gamma_value(-4) == 0


class TestGammaSeries:
    def test_empty_kernel_monomial(self):
        spec = make_spec([(0, 0), (1, 0), (0, 1)], 2)
        s = gamma_series(spec, (-1, 0, 0), 5)
        assert s.terms == {((0, 0, 0), (0, 0, 0)): Fraction(1)}

    def test_degree_violation(self):
        spec = make_spec(SEGMENT, 1)
        with pytest.raises(DegreeViolation):
            gamma_series(spec, (0, 0, 0), 3)

    def test_resonant_plain_series_vanishes(self):
        spec = make_spec(SEGMENT, 1)
        s = gamma_series(spec, (0, -1, 0), 6)
        assert s.terms == {}

    def test_eps_coefficient_is_multiple_of_period(self):
        # first-order jet coefficient recovers the binomial power series
        spec = make_spec(SEGMENT, 1)
        s = gamma_series(spec, (0, -1, 0), 6, direction=(1, -2, 1), jet_order=1)
        s1 = s.eps_coefficient(1)
        base = s1.terms[((0, 0, 0), (0, 0, 0))]
        assert abs(base + 2.0) < 1e-12
        for k in range(1, 6):
            got = s1.terms[((k, -2 * k, k), (0, 0, 0))]
            assert abs(got / base - math.comb(2 * k, k)) < 1e-10

    def test_offset_reindexing_invariance(self):
        spec = make_spec(SEGMENT, 1)
        gamma = (Fraction(-1, 2), Fraction(0), Fraction(-1, 2))
        shifted = (Fraction(1, 2), Fraction(-2), Fraction(1, 2))
        a = gamma_series(spec, gamma, 6)
        b = gamma_series(spec, shifted, 6)  # shifted by one kernel vector
        common = {}
        for (v, m), c in a.terms.items():
            common[(a.exponent(v), m)] = c
        overlap = 0
        for (v, m), c in b.terms.items():
            key = (b.exponent(v), m)
            if key in common:
                assert common[key] == c
                overlap += 1
        assert overlap >= 5


class TestFrobeniusBasis:
    @pytest.mark.parametrize(
        "pts,dim,vol", [(SEGMENT, 1, 2), (HESSE, 2, 3), (CROSS, 2, 4)]
    )
    def test_count_matches_volume(self, pts, dim, vol):
        spec = make_spec(pts, dim)
        basis = frobenius_basis(spec, order=8)
        assert len(basis) == vol
        assert count_independent(basis) == vol
        assert lattice.normalized_volume(pts) == vol

    def test_segment_log_structure(self):
        spec = make_spec(SEGMENT, 1)
        s0, s1 = frobenius_basis(spec, order=6)
        assert all(not any(m) for (_, m) in s0.terms)  # pure power series
        assert any(any(m) for (_, m) in s1.terms)  # one log factor
        assert max(sum(m) for (_, m) in s1.terms) == 1

    def test_hesse_log_depths(self):
        spec = make_spec(HESSE, 2)
        basis = frobenius_basis(spec, order=6)
        depths = [max((sum(m) for (_, m) in s.terms), default=0) for s in basis]
        assert depths == [0, 1, 2]

    def test_all_exact_rational(self):
        spec = make_spec(CROSS, 2)
        for s in frobenius_basis(spec, order=6):
            assert all(isinstance(c, Fraction) for c in s.terms.values())

    def test_annihilation_clean(self):
        for pts, dim in [(SEGMENT, 1), (HESSE, 2), (CROSS, 2)]:
            spec = make_spec(pts, dim)
            for s in frobenius_basis(spec, order=8):
                assert all(r.clean for r in annihilate_check(spec, s))

    def test_empty_kernel_family(self):
        spec = make_spec([(0, 0), (1, 0), (0, 1)], 2)
        basis = frobenius_basis(spec, order=5)
        assert len(basis) == 1
        assert count_independent(basis) == 1

    def test_rank_two_family(self):
        # five points with interior: kernel rank 2, volume 4
        pts = [(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)]
        spec = make_spec(pts, 2)
        assert lattice.integer_kernel(spec.A).rank == 2
        basis = frobenius_basis(spec, order=5)
        assert len(basis) == 4
        assert count_independent(basis) == 4
        for s in basis:
            assert all(r.clean for r in annihilate_check(spec, s))

    def test_kernel_rank_cap(self):
        pts = [(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)]
        spec = make_spec(pts, 2)
        with pytest.raises(UnsupportedFamily):
            frobenius_basis(spec, order=4, max_kernel_rank=1)


class TestAnnihilateCheck:
    def test_euler_residual_exact_termwise(self):
        spec = make_spec(SEGMENT, 1)
        s = frobenius_basis(spec, order=5)[0]
        for rep in annihilate_check(spec, s):
            if rep.operator.order() == 1:
                assert rep.checked == 0 and rep.skipped == 0

    def test_constant_against_cy_system(self):
        spec = make_spec(SEGMENT, 1)
        reports = annihilate_check(spec, monomial_series((0, 0, 0)))
        euler = reports[1]
        ((key, value),) = tuple(euler.residual.terms.items())
        assert value == 1

    def test_truncation_too_small(self):
        spec = make_spec(HESSE, 2)  # box operator of order 3
        s = series.LogSeries(
            gamma=(Fraction(-1), Fraction(0), Fraction(0), Fraction(0)),
            terms={((0, 0, 0, 0), (0, 0, 0, 0)): Fraction(1)},
            lattice=lattice.integer_kernel(spec.A).vectors,
            radius=2,
        )
        with pytest.raises(TruncationTooSmall):
            annihilate_check(spec, s)

    def test_scaling_covariance_on_series(self):
        # total exponent degree of every term is -1: F(lam a) = lam^-1 F(a)
        spec = make_spec(HESSE, 2)
        for s in frobenius_basis(spec, order=5):
            for (v, m) in s.terms:
                assert sum(s.exponent(v)) == -1


class TestCountIndependent:
    def test_proportional_series(self):
        s = monomial_series((-1, 0, 0))
        assert count_independent([s, s.scaled(2)]) == 1

    def test_empty(self):
        assert count_independent([]) == 0

    def test_float_fallback(self):
        a = monomial_series((-1, 0, 0), 1.0)
        b = monomial_series((0, -1, 0), 0.5)
        assert count_independent([a, b, a.scaled(3.0)]) == 2
