#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Pruebas - Lotes reproducibles de bits y perfiles de cola vectorizados
"""

from fractions import Fraction

import numpy as np
import pytest

from core.bitstream import (TWO_THIRDS_WORD, SampleBatch, dyadic_sample, exceptional_rows,
                            phi_block, sample, tail_profile, truncation_index)
from core.coefficients import Geometric, PowerLaw, StretchedExp
from core.errors import DomainError
from core.point_eval import BitPoint, tail_M, tent_iter

from conftest import SEED


class TestSampleBatch:

    def test_reproducible(self):
        first = sample(SEED, 300, 128).words()
        second = sample(SEED, 300, 128).words()
        assert np.array_equal(first, second)

    def test_shards_do_not_depend_on_order(self):
        batch = sample(SEED, 300, 192)
        whole = batch.words()
        assert np.array_equal(whole[37:211], batch.words(37, 211))
        pieces = np.concatenate([batch.words(a, b) for a, b in batch.shards(64)])
        assert np.array_equal(whole, pieces)

    def test_longer_points_extend_shorter_ones(self):
        short = sample(SEED, 50, 128)
        long = short.with_length(320)
        assert np.array_equal(long.words()[:, :2], short.words())

    def test_bits_beyond_length_are_cleared(self):
        words = sample(SEED, 100, 100).words()
        assert np.all(words[:, 1] & np.uint64((1 << 28) - 1) == 0)

    def test_seeds_give_different_streams(self):
        batch = sample(SEED, 100, 64)
        assert not np.array_equal(batch.words(), batch.independent(1).words())

    def test_points_match_words(self):
        batch = sample(SEED, 20, 128)
        words = batch.words()
        for i, x in enumerate(batch.points):
            assert not x.exact and x.length == 128
            assert x.mantissa == (int(words[i, 0]) << 64) | int(words[i, 1])
        assert batch.point(7) == batch.points[7]

    def test_x_values(self):
        batch = sample(SEED, 1000, 64)
        x = batch.x_values()
        assert np.all((x >= 0) & (x < 1))
        assert x[3] == pytest.approx(float(batch.points[3]), abs=2.0 ** -52)

    def test_dyadic_points_are_exact(self):
        batch = dyadic_sample(SEED, 200, 10)
        assert batch.exact
        for x in batch.points[:20]:
            assert x.exact and x.length == 10
        assert np.all(batch.words()[:, 0] & np.uint64((1 << 54) - 1) == 0)

    @pytest.mark.parametrize("kwargs", [
        {"seed": -1, "count": 10, "length": 64},
        {"seed": 1 << 64, "count": 10, "length": 64},
        {"seed": 1, "count": 0, "length": 64},
        {"seed": 1, "count": 10, "length": 32},
        {"seed": 1, "count": 10, "length": 64, "dyadic_bits": 65},
    ])
    def test_invalid_batches(self, kwargs):
        with pytest.raises(DomainError):
            SampleBatch(**kwargs)

    def test_invalid_row_range(self):
        with pytest.raises(DomainError):
            sample(SEED, 10, 64).words(5, 11)


class TestPhiBlock:

    def test_matches_bit_arithmetic(self):
        batch = sample(SEED, 40, 256)
        block = phi_block(batch.words(), 1, 150)
        for i, x in enumerate(batch.points):
            for n in (1, 2, 63, 64, 65, 100, 149):
                assert block[i, n - 1] == pytest.approx(tent_iter(x, n).value, abs=2.0 ** -52)

    def test_range_checked(self):
        words = sample(SEED, 5, 128).words()
        with pytest.raises(DomainError):
            phi_block(words, 0, 10)
        with pytest.raises(DomainError):
            phi_block(words, 1, 130)

    def test_exceptional_rows(self):
        words = sample(SEED, 4, 128).words()
        words[1, :] = TWO_THIRDS_WORD
        words[2, :] = 0
        assert exceptional_rows(words).tolist() == [False, True, True, False]
        # φ⁽ⁿ⁾(2/3) = 2/3 salvo el redondeo de la ventana
        two_thirds = phi_block(words[1:2], 1, 60)
        assert np.allclose(two_thirds, 2.0 / 3.0, atol=1e-15)


class TestTailProfile:

    @pytest.mark.parametrize("seq", [Geometric(0.5), Geometric(-0.5), StretchedExp(1.0, 0.5)])
    def test_matches_pointwise_tail(self, seq):
        grid = [1, 5, 12]
        stop = 200
        batch = sample(SEED, 30, 2048)
        tails = tail_profile(seq, batch.words(), grid, stop, block=64)
        for i, x in enumerate(batch.points):
            for g, N in enumerate(grid):
                scale = abs(seq.term(N))
                reference = tail_M(seq, x, N, 1e-9 * scale)
                remainder = seq.abs_tail_sum(stop).value
                assert tails[i, g] * scale == pytest.approx(
                    reference.value, abs=reference.abs_error + remainder + 1e-14 * scale)

    def test_exact_rest_for_dyadic_points(self):
        seq = PowerLaw(2.0)
        batch = dyadic_sample(SEED, 25, 12)
        grid = [3, 13]
        tails = tail_profile(seq, batch.words(), grid, 13, exact_rest=True)
        for i, x in enumerate(batch.points):
            for g, N in enumerate(grid):
                reference = tail_M(seq, x, N, 1e-12)
                assert tails[i, g] * seq.term(N) == pytest.approx(reference.value, abs=1e-12)

    def test_beyond_dyadic_bits_the_ratio_vanishes(self):
        seq = Geometric(0.5)
        batch = dyadic_sample(SEED, 10, 6)
        tails = tail_profile(seq, batch.words(), [7], 7, exact_rest=True)
        # -½Σ_{n≥N}cₙ en unidades de c_N
        assert np.allclose(tails[:, 0], -1.0, atol=1e-15)


class TestTruncation:

    def test_geometric_uses_minimum_extra(self):
        assert truncation_index(Geometric(0.5), 10, 1e-4) == 74

    def test_powerlaw_variance_fraction(self):
        seq = PowerLaw(2.0)
        M = truncation_index(seq, 100, 1e-4)
        fraction = seq.tail_sum(M, 2).value / seq.tail_sum(100, 2).value
        assert fraction <= 1e-4
        # Σ_{n≥M} n^-4 ≈ 1/(3M³): M ≈ 100·10^(4/3)
        assert 2000 <= M <= 2300


def test_two_thirds_fraction_word():
    x = BitPoint.from_fraction(Fraction(2, 3), 64)
    assert x.mantissa == int(TWO_THIRDS_WORD)
