#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Pruebas - Motor Monte Carlo

Las ejecuciones rápidas usan lotes pequeños y tolerancias amplias; las de
tamaño completo llevan la marca `slow`.
"""

import math

import numpy as np
import pytest
from scipy import stats

from core.bitstream import dyadic_sample, sample
from core.coefficients import Geometric, PowerLaw, StretchedExp
from core.errors import DomainError, HypothesisError
from core.montecarlo import (DKW_CONSTANT, RunningMoments, RunSettings, Thresholds,
                             cesaro_averages, example19_cdf, geometric_grid, ks_limit,
                             ks_statistic, merged_moments, run_clt, run_geometric,
                             run_identities, run_lil, run_lln, run_moments)

from conftest import SEED

LOOSE = Thresholds(l2_rel_tol=0.3, z_limit=6.0, cesaro_tol=0.15, lil_fraction=0.7,
                   decay_fraction=0.6)


def _loose(workers: int = 2) -> RunSettings:
    return RunSettings(LOOSE, workers=workers, shard_size=512)


class TestRunningMoments:

    def test_merge_matches_numpy(self):
        values = np.random.default_rng(SEED).normal(2.0, 3.0, size=5003)
        merged = merged_moments(values, 700)
        assert merged.count == values.size
        assert merged.mean == pytest.approx(np.mean(values), rel=1e-12)
        assert merged.variance == pytest.approx(np.var(values, ddof=1), rel=1e-10)
        assert merged.minimum == values.min() and merged.maximum == values.max()

    def test_empty_is_neutral(self):
        part = RunningMoments.of(np.array([1.0, 2.0]))
        assert RunningMoments().merge(part) == part
        assert part.merge(RunningMoments()) == part
        assert math.isnan(RunningMoments.of(np.array([1.0])).variance)


class TestKolmogorovSmirnov:

    def test_matches_scipy(self):
        values = np.random.default_rng(SEED).uniform(size=800)
        expected = stats.kstest(values, "uniform").statistic
        assert ks_statistic(values, stats.uniform.cdf) == pytest.approx(expected, abs=1e-12)

    def test_own_empirical_cdf_gives_zero(self):
        values = np.array([0.1, 0.4, 0.4, 0.7, 0.9])
        ordered = np.sort(values)

        def ecdf(t):
            return np.searchsorted(ordered, t, side="right") / ordered.size

        assert ks_statistic(values, ecdf) == 0.0

    def test_empty_sample(self):
        with pytest.raises(DomainError):
            ks_statistic([], stats.norm.cdf)

    def test_limit_uses_dkw_band_for_small_samples(self):
        assert ks_limit(0.02, 10 ** 6) == 0.02
        assert ks_limit(0.02, 2000) == pytest.approx(DKW_CONSTANT / math.sqrt(2000))
        assert ks_limit(0.02, 2000, 2) == pytest.approx(DKW_CONSTANT * math.sqrt(2 / 2000))


class TestHelpers:

    def test_parabola_cdf(self):
        assert example19_cdf(0.0) == 0.0
        assert example19_cdf(1.5) == 1.0
        # P(6x(1-x) ≤ 3/4) con x uniforme: x ≤ (1-1/√2)/2 o simétrico
        assert example19_cdf(0.75) == pytest.approx(1 - math.sqrt(0.5))
        with pytest.raises(DomainError):
            example19_cdf(1.6)

    def test_geometric_grid(self):
        grid = geometric_grid(100, 10_000)
        assert grid[0] == 100 and grid[-1] == 10_000
        assert all(b > a for a, b in zip(grid, grid[1:]))
        assert all(b / a <= 1.11 for a, b in zip(grid, grid[1:]))
        assert geometric_grid(1, 5) == [1, 2, 3, 4, 5]

    @pytest.mark.parametrize("lo,hi,ratio", [(0, 10, 1.1), (10, 5, 1.1), (1, 10, 1.0)])
    def test_invalid_grid(self, lo, hi, ratio):
        with pytest.raises(DomainError):
            geometric_grid(lo, hi, ratio)

    def test_cesaro_averages_near_one(self):
        averages = cesaro_averages(0.7, sample(SEED, 10, 64), 2000, 3)
        assert averages.shape == (3,)
        assert np.all(np.abs(averages - 1.0) < 0.15)


class TestLLN:

    def test_dyadic_batch_ratio_is_zero(self, settings):
        batch = dyadic_sample(SEED, 500, 8)
        report = run_lln(PowerLaw(2.0), [4, 10, 100], batch, settings)
        assert {c.name for c in report.checks} == {"ratio_zero", "mean_square_one"}
        assert {c.N for c in report.checks} == {10, 100}
        assert report.passed

    def test_geometric_is_negative_control(self, small_batch):
        report = run_lln(Geometric(0.5), [5, 10], small_batch, _loose())
        assert report.negative_control
        assert report.passed, report.failed_checks()
        assert report.metrics["closed_form@N=5"] == pytest.approx(1.0 / 9.0)

    def test_powerlaw_decade_ratio(self, small_batch):
        report = run_lln(PowerLaw(2.0), [10, 100], small_batch, _loose())
        assert not report.negative_control
        names = {c.name for c in report.checks}
        assert {"decade_ratio_low", "decade_ratio_high", "mean_square_rel_error"} <= names
        assert report.passed, report.failed_checks()

    def test_invalid_indices(self, small_batch):
        with pytest.raises(DomainError):
            run_lln(PowerLaw(2.0), [0, 10], small_batch)


class TestCLT:

    def test_powerlaw_is_close_to_normal(self, small_batch):
        report = run_clt(PowerLaw(2.0), 1000, small_batch, _loose())
        assert not report.negative_control
        assert {"mean_z", "variance_z", "ks_normal", "ks_rescaled_ratio"} == {
            c.name for c in report.checks}
        assert report.passed, report.failed_checks()

    def test_geometric_is_bounded_away(self, small_batch):
        report = run_clt(Geometric(0.5), 10, small_batch, _loose())
        assert report.negative_control
        check = next(c for c in report.checks if c.name == "ks_normal_bounded_away")
        assert check.comparison == ">=" and check.passed

    def test_results_do_not_depend_on_workers(self):
        batch = sample(SEED, 1500, 128)
        one = run_clt(StretchedExp(1.0, 0.5), 20, batch, RunSettings(workers=1, shard_size=256))
        four = run_clt(StretchedExp(1.0, 0.5), 20, batch, RunSettings(workers=4, shard_size=256))
        assert one.to_json() == four.to_json()

    def test_invalid_index(self, small_batch):
        with pytest.raises(DomainError):
            run_clt(PowerLaw(2.0), 0, small_batch)


class TestLIL:

    def test_report_structure(self):
        batch = sample(SEED, 30, 64)
        report = run_lil(PowerLaw(2.0), batch, (100, 1000), _loose())
        assert {c.name for c in report.checks} == {"envelope_upper", "envelope_lower",
                                                   "remainder_decay"}
        metrics = report.metrics
        assert 0.0 <= metrics["fraction_below_plus"] <= 1.0
        assert 0.0 <= metrics["decay_fraction"] <= 1.0
        assert report.params["N_range"] == [100, 1000]
        assert "literal_last_quartile_median" in metrics
        assert any(note.startswith("decay_fraction mide") for note in report.notes)

    def test_geometric_has_no_envelope(self):
        report = run_lil(Geometric(0.5), sample(SEED, 10, 64), (20, 60), _loose())
        assert report.negative_control
        assert not any(c.name.startswith("envelope") for c in report.checks)

    def test_normalizer_must_be_defined(self):
        with pytest.raises(HypothesisError):
            run_lil(StretchedExp(0.01, 0.5), sample(SEED, 10, 64), (1, 10))


class TestGeometric:

    def test_quarter_ratio(self, small_batch):
        report = run_geometric(0.25, 20, small_batch, _loose(), N_prime=1000, cesaro_paths=2)
        names = {c.name for c in report.checks}
        assert {"ks_two_sample", "limit_mean_z", "ks_two_sample_parabola",
                "parabola_mean_z", "cesaro_max_gap"} <= names
        assert any(name.startswith("cdf_gap_u=") for name in names)
        assert report.passed, report.failed_checks()

    def test_without_cesaro_paths(self, small_batch):
        report = run_geometric(0.5, 10, small_batch, _loose(), cesaro_paths=0)
        assert "cesaro_max_gap" not in {c.name for c in report.checks}
        assert "parabola_mean_z" not in {c.name for c in report.checks}

    def test_invalid_index(self, small_batch):
        with pytest.raises(DomainError):
            run_geometric(0.5, 0, small_batch)


def test_identities_pass(settings):
    report = run_identities(sample(SEED, 200, 128), settings)
    assert report.checks
    assert report.passed, report.failed_checks()


def test_moments_small_batch():
    report = run_moments(sample(SEED, 5000, 64), _loose())
    assert report.passed, report.failed_checks()
    assert report.metrics["phi_star_second"] == pytest.approx(1.0 / 12.0, rel=0.1)
    assert report.metrics["var_Q2_cross_term"] == pytest.approx(0.064, rel=1e-9)
    assert {"var_Q2_cross_term_bound", "var_Q2_complete_bound"} <= {c.name for c in report.checks}
    assert any("complete_bound" in note for note in report.notes)


# --- ejecuciones de tamaño completo -------------------------------------------

@pytest.mark.slow
def test_clt_acceptance():
    report = run_clt(PowerLaw(2.0), 1000, sample(SEED, 100_000, 128), RunSettings(workers=4))
    assert report.passed, report.failed_checks()
    assert report.metrics["ks_normal@N=1000"] <= 0.02


@pytest.mark.slow
def test_lln_acceptance():
    report = run_lln(PowerLaw(2.0), [10, 100, 1000], sample(SEED, 100_000, 128),
                     RunSettings(workers=4))
    assert report.passed, report.failed_checks()


@pytest.mark.slow
def test_geometric_acceptance():
    report = run_geometric(0.25, 20, sample(SEED, 100_000, 128), RunSettings(workers=4))
    assert report.passed, report.failed_checks()


@pytest.mark.slow
def test_lil_acceptance():
    report = run_lil(PowerLaw(2.0), sample(SEED, 100, 128), (100, 10_000), RunSettings(workers=4))
    assert report.passed, report.failed_checks()


@pytest.mark.slow
def test_moments_acceptance():
    report = run_moments(sample(SEED, 1_000_000, 64), RunSettings(workers=4))
    assert report.passed, report.failed_checks()
