#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Pruebas - Evaluación puntual certificada
"""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from core.coefficients import Geometric, PowerLaw, StretchedExp
from core.errors import DomainError, HypothesisError, PrecisionError
from core.point_eval import (BitPoint, eval_f, eval_partial, eval_tail, lil_normalizer, phi_star,
                             phi_star_rademacher, rademacher, selfsim_check, stat_clt, stat_lil,
                             stat_ratio, tail_M, tail_M_routes, tent, tent_iter)

TAKAGI = Geometric(0.5)


def _takagi_exact(q: Fraction, terms: int = 80) -> Fraction:
    """Σ 2^{-n}·dist(2^{n-1}q, Z) en aritmética racional."""
    total = Fraction(0)
    for n in range(1, terms + 1):
        y = (q * 2 ** (n - 1)) % 1
        total += Fraction(1, 2 ** n) * 2 * min(y, 1 - y)
    return total


class TestBitPoint:

    def test_dyadic_fraction_is_exact(self):
        x = BitPoint.from_fraction(Fraction(3, 8))
        assert x.exact and x.length == 3 and x.to_bits() == "0.011"
        assert x.bit(10) == 0

    def test_non_dyadic_fraction_is_truncated(self):
        x = BitPoint.from_fraction(Fraction(2, 3), 64)
        assert not x.exact
        assert x.to_bits() == "0." + "10" * 32
        with pytest.raises(PrecisionError):
            x.bit(65)

    def test_parse_forms(self):
        assert BitPoint.parse("0.101").value == Fraction(5, 8)
        assert BitPoint.parse("0.25", 128).value == Fraction(1, 4)
        with pytest.raises(DomainError):
            BitPoint.parse("1.01")
        with pytest.raises(DomainError):
            BitPoint.from_fraction(Fraction(3, 2))

    def test_shift_is_dyadic_map(self):
        x = BitPoint.from_bits("0.1101")
        assert x.shift(1).value == Fraction(5, 8)
        assert x.shift(4).value == 0
        with pytest.raises(PrecisionError):
            BitPoint.from_fraction(Fraction(1, 3), 64).shift(64)


class TestTent:

    def test_tent_map(self):
        assert tent(Fraction(1, 4)) == Fraction(1, 2)
        assert tent(Fraction(3, 4)) == Fraction(1, 2)
        assert tent(0.5) == 1.0
        with pytest.raises(DomainError):
            tent(1.5)

    def test_rademacher_signs(self):
        x = BitPoint.from_bits("0.1101")
        assert [rademacher(x, n) for n in range(1, 6)] == [-1, -1, 1, -1, 1]
        with pytest.raises(DomainError):
            rademacher(x, 0)
        with pytest.raises(PrecisionError):
            rademacher(BitPoint.from_fraction(Fraction(1, 3), 64), 65)

    def test_tent_iterates_match_definition(self):
        x = BitPoint.from_fraction(Fraction(5, 16))
        # φ⁽ⁿ⁾(x) = φ(2^{n-1}x mod 1)
        for n in range(1, 6):
            y = (Fraction(5, 16) * 2 ** (n - 1)) % 1
            assert tent_iter(x, n).value == float(tent(y))

    @settings(max_examples=50, deadline=None)
    @given(mantissa=st.integers(min_value=0, max_value=(1 << 200) - 1),
           n=st.integers(min_value=1, max_value=100))
    def test_phi_star_two_routes_agree(self, mantissa, n):
        x = BitPoint(mantissa, 200, exact=False)
        direct = phi_star(x, n)
        series = phi_star_rademacher(x, n)
        assert abs(direct.value - series.value) <= direct.abs_error + series.abs_error

    def test_phi_star_exact_routes_identical(self):
        x = BitPoint.from_fraction(Fraction(11, 32))
        for n in range(1, 8):
            assert phi_star(x, n).value == phi_star_rademacher(x, n).value

    def test_guard_bits_enforced(self):
        x = BitPoint.from_fraction(Fraction(1, 3), 64)
        with pytest.raises(PrecisionError):
            phi_star(x, 40)


class TestEvaluation:

    @pytest.mark.parametrize("q", [Fraction(1, 2), Fraction(1, 4), Fraction(3, 8), Fraction(13, 64)])
    def test_takagi_at_dyadics_matches_rational_sum(self, q):
        value = eval_f(TAKAGI, BitPoint.from_fraction(q), 1e-12)
        assert value.contains(float(_takagi_exact(q)), slack=1e-15)

    def test_takagi_at_one_half(self):
        assert eval_f(TAKAGI, BitPoint.from_fraction(Fraction(1, 2)), 1e-12).value == 0.5

    def test_takagi_two_thirds(self):
        # T(2/3) = 2/3
        x = BitPoint.from_fraction(Fraction(2, 3), 256)
        assert eval_f(TAKAGI, x, 1e-12).contains(2.0 / 3.0)

    @pytest.mark.parametrize("k", range(16))
    def test_quarter_ratio_is_parabola(self, k):
        # r = 1/4: f(x) = x(1-x) en los puntos diádicos
        q = Fraction(k, 16)
        value = eval_f(Geometric(0.25), BitPoint.from_fraction(q), 1e-13)
        assert value.contains(float(q * (1 - q)), slack=1e-15)

    def test_quarter_ratio_at_decimal_point(self):
        # 0.3 truncado a 256 bits: f(0.3) = 0.3·0.7
        x = BitPoint.from_decimal("0.3", 256)
        value = eval_f(Geometric(0.25), x, 1e-12)
        assert value.abs_error <= 1e-12
        assert value.contains(0.21, slack=1e-15)

    def test_quarter_ratio_partial_sum(self):
        # (1/4)·φ(1/4) + (1/16)·φ(1/2) = 1/8 + 1/16
        x = BitPoint.from_fraction(Fraction(1, 4))
        assert eval_partial(Geometric(0.25), x, 3).value == 3.0 / 16.0

    def test_partial_plus_tail_is_whole(self):
        seq = StretchedExp(1.0, 0.5)
        x = BitPoint.from_fraction(Fraction(1, 3), 2048)
        whole = eval_f(seq, x, 1e-10)
        head = eval_partial(seq, x, 20)
        tail = eval_tail(seq, x, 20, 1e-10)
        assert abs(head.value + tail.value - whole.value) <= (
            whole.abs_error + head.abs_error + tail.abs_error + 1e-15)

    def test_empty_partial_sum(self):
        assert eval_partial(TAKAGI, BitPoint.from_fraction(Fraction(1, 3), 128), 1).value == 0.0

    def test_precision_exhausted(self):
        x = BitPoint.from_fraction(Fraction(1, 3), 64)
        with pytest.raises(PrecisionError) as excinfo:
            eval_f(PowerLaw(2.0), x, 1e-12)
        assert excinfo.value.required_length > 64

    def test_invalid_tolerance(self):
        with pytest.raises(DomainError):
            eval_f(TAKAGI, BitPoint.from_fraction(Fraction(1, 2)), 0.0)


class TestTailStatistics:

    @settings(max_examples=20, deadline=None)
    @given(mantissa=st.integers(min_value=0, max_value=(1 << 256) - 1),
           N=st.integers(min_value=1, max_value=60))
    def test_tail_routes_agree(self, mantissa, N):
        x = BitPoint(mantissa, 256, exact=False)
        direct, difference = tail_M_routes(Geometric(0.7), x, N, 1e-9)
        assert abs(direct.value - difference.value) <= direct.abs_error + difference.abs_error

    @pytest.mark.parametrize("k,m", [(1, 1), (3, 3), (5, 4), (12345, 20)])
    def test_dyadic_ratio_vanishes(self, k, m):
        x = BitPoint.from_fraction(Fraction(k, 2 ** m))
        assert stat_ratio(TAKAGI, x, m + 1) == 0.0

    @pytest.mark.parametrize("r,N", [(0.5, 1), (0.5, 7), (0.25, 3), (0.25, 12)])
    def test_two_thirds_ratio(self, r, N):
        # φ⁽ⁿ⁾(2/3) = 2/3 para todo n: el cociente vale 4/3
        x = BitPoint.from_fraction(Fraction(2, 3), 2048)
        assert stat_ratio(Geometric(r), x, N) == pytest.approx(4.0 / 3.0, rel=1e-10)

    def test_two_thirds_tail(self):
        seq = StretchedExp(1.0, 0.5)
        x = BitPoint.from_fraction(Fraction(2, 3), 2048)
        m_N = 0.5 * seq.tail_sum(5, 1).value
        assert tail_M(seq, x, 5, 1e-12).value == pytest.approx(m_N / 3.0, rel=1e-9)

    def test_clt_and_lil_statistics_are_finite(self):
        seq = StretchedExp(1.0, 0.5)
        x = BitPoint.from_fraction(Fraction(1, 3), 4096)
        assert abs(stat_clt(seq, x, 10, tol=1e-9)) < 10
        assert abs(stat_lil(seq, x, 10, tol=1e-9)) < 10

    def test_lil_normalizer_domain(self):
        assert lil_normalizer(0.01) > 0
        with pytest.raises(HypothesisError):
            lil_normalizer(0.5)


class TestSelfSimilarity:

    @pytest.mark.parametrize("r", [0.7, 0.25, -0.5])
    @pytest.mark.parametrize("N", [1, 4, 17])
    def test_gap_within_bound(self, r, N):
        x = BitPoint.from_fraction(Fraction(5, 7), 512)
        result = selfsim_check(r, x, N)
        assert result.holds
        assert result.gap <= 1e-10

    def test_quarter_ratio_first_index(self):
        # N = 1: f(0.3)/m_1 = 0.21/(1/6) en ambos lados
        x = BitPoint.from_decimal("0.3", 256)
        result = selfsim_check(0.25, x, 1)
        assert result.lhs == pytest.approx(1.26, abs=1e-10)
        assert result.rhs == pytest.approx(1.26, abs=1e-10)
        assert result.holds
