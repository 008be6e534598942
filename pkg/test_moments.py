#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Pruebas - Momentos exactos de la cola
"""

import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from core.coefficients import Explicit, Geometric, PowerLaw, StretchedExp
from core.errors import DomainError, HypothesisError
from core.moments import (azuma_tail_bound, cov_sq, l2_ratio_error, l2_ratio_error_powerlaw_limit,
                          phi_star_moments, pth_power_ratio_limit, tail_stats, var_Q2)


def test_phi_star_moments_are_exact_fractions():
    moments = phi_star_moments()
    assert moments == {"mean": Fraction(0), "second": Fraction(1, 12), "fourth": Fraction(1, 80)}


def test_tail_stats_geometric():
    stats = tail_stats(Geometric(0.5), 1)
    assert stats.m_N == pytest.approx(0.5)
    assert stats.s2_N == pytest.approx((1.0 / 3.0) / 12.0)
    assert stats.to_dict()["N"] == 1


def test_tail_stats_powerlaw():
    stats = tail_stats(PowerLaw(2.0), 1)
    assert stats.m_N == pytest.approx(math.pi ** 2 / 12, rel=1e-13)
    assert stats.s2_N == pytest.approx(math.pi ** 4 / 1080, rel=1e-13)


@pytest.mark.parametrize("r", [0.5, 0.25, 0.7])
def test_l2_ratio_error_geometric(r):
    # (1/3)·(1-r)/(1+r); para r = 1/2 vale 1/9
    for N in (1, 10, 100):
        assert l2_ratio_error(Geometric(r), N) == pytest.approx((1 - r) / (3 * (1 + r)), rel=1e-12)


def test_l2_ratio_error_powerlaw_limit():
    seq = PowerLaw(2.0)
    assert l2_ratio_error_powerlaw_limit(2.0) == pytest.approx(1.0 / 9.0)
    assert 10_000 * l2_ratio_error(seq, 10_000) == pytest.approx(1.0 / 9.0, rel=1e-3)
    # Cocientes entre décadas cerca de 10
    ratio = l2_ratio_error(seq, 100) / l2_ratio_error(seq, 1000)
    assert 8 <= ratio <= 12


def test_pth_power_limit():
    assert pth_power_ratio_limit(2.0, 1) == pytest.approx(1.0 / 3.0)
    assert pth_power_ratio_limit(2.0, 2) == pytest.approx(9.0 / 7.0)


def test_l2_ratio_error_zero_mean():
    with pytest.raises(HypothesisError):
        l2_ratio_error(Explicit((1.0, -1.0)), 1)


class TestCovSq:

    def test_values(self):
        assert cov_sq(1, 2) == Fraction(1, 720)
        assert cov_sq(3, 6) == Fraction(1, 180 * 64)

    @settings(max_examples=30)
    @given(i=st.integers(min_value=1, max_value=200), gap=st.integers(min_value=1, max_value=20),
           shift=st.integers(min_value=1, max_value=200))
    def test_shift_invariance(self, i, gap, shift):
        assert cov_sq(i, i + gap) == cov_sq(i + shift, i + shift + gap)

    @pytest.mark.parametrize("i,j", [(2, 2), (3, 1), (0, 4)])
    def test_invalid_pairs(self, i, j):
        with pytest.raises(DomainError):
            cov_sq(i, j)


class TestVarQ2:

    def test_single_coefficient(self):
        # Un solo término: Var((φ*)²)/(1/12)² = (1/80 - 1/144)·144 = 4/5
        result = var_Q2(Explicit((0.3,)), 1)
        assert result.exact == pytest.approx(0.8, rel=1e-12)
        assert result.cross_term == 0.0

    def test_two_coefficients(self):
        # c = (1, 1): diagonal 2/180 y covarianza 2·(1/720), s² = 2/12
        result = var_Q2(Explicit((1.0, 1.0)), 1)
        expected = (2.0 / 180.0 + 2.0 / 720.0) / (2.0 / 12.0) ** 2
        assert result.exact == pytest.approx(expected, rel=1e-12)

    @pytest.mark.parametrize("seq", [PowerLaw(2.0), StretchedExp(1.0, 0.5), Geometric(0.5)])
    @pytest.mark.parametrize("N", [1, 10, 100])
    def test_bounds(self, seq, N):
        result = var_Q2(seq, N)
        assert result.cross_term <= result.paper_bound + result.error_bound
        assert result.exact <= result.complete_bound + result.error_bound

    @pytest.mark.parametrize("N", [1, 5, 10])
    def test_half_ratio_split(self, N):
        # Diagonal 0.48 y covarianzas 0.064, independientes de N
        result = var_Q2(Geometric(0.5), N)
        assert result.exact == pytest.approx(0.544, rel=1e-10)
        assert result.cross_term == pytest.approx(0.064, rel=1e-10)
        assert result.paper_bound == pytest.approx(0.4)
        assert result.complete_bound == pytest.approx(1.0)
        assert result.cross_term <= result.paper_bound < result.exact <= result.complete_bound

    def test_powerlaw_vanishes(self):
        seq = PowerLaw(2.0)
        assert var_Q2(seq, 1000).exact < var_Q2(seq, 10).exact < 1.0

    def test_degenerate_tail(self):
        with pytest.raises(HypothesisError):
            var_Q2(Explicit((1.0,)), 2)


class TestAzuma:

    def test_bound_formula(self):
        seq = Geometric(0.5)
        s = seq.tail_sum(5, 2).value
        assert azuma_tail_bound(seq, 5, 0.1) == pytest.approx(2 * math.exp(-0.01 / (2 * s)))

    def test_bound_is_capped(self):
        assert azuma_tail_bound(PowerLaw(2.0), 1, 1e-6) == 1.0

    def test_invalid_level(self):
        with pytest.raises(DomainError):
            azuma_tail_bound(PowerLaw(2.0), 1, 0.0)
