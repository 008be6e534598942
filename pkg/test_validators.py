#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Pruebas - Validadores de entrada
"""

import pytest

from core.coefficients import PowerLaw
from core.montecarlo import required_length
from utils.validators import (ConfigValidator, NumericValidator, ResourceValidator,
                              SequenceValidator, validate_run_config)


@pytest.mark.parametrize("spec,ok", [
    ("powerlaw:alpha=2", True),
    ("geometric:r=0.25", True),
    ("", False),
    ("   ", False),
    ("powerlaw:alpha=0.5", False),
])
def test_sequence_spec(spec, ok):
    valid, message = SequenceValidator.validate_spec(spec)
    assert valid is ok
    assert (message == "") is ok


class TestNumeric:

    def test_positive_int(self):
        assert NumericValidator.validate_positive_int(3, "N")[0]
        assert not NumericValidator.validate_positive_int(0, "N")[0]
        assert not NumericValidator.validate_positive_int(True, "N")[0]
        assert not NumericValidator.validate_positive_int(2.0, "N")[0]

    @pytest.mark.parametrize("tol,ok", [(1e-12, True), ("1e-9", True), (0, False),
                                        (float("inf"), False), ("abc", False)])
    def test_tolerance(self, tol, ok):
        assert NumericValidator.validate_tolerance(tol)[0] is ok

    def test_bit_length_and_seed(self):
        assert NumericValidator.validate_bit_length(64)[0]
        assert not NumericValidator.validate_bit_length(63)[0]
        assert NumericValidator.validate_seed((1 << 64) - 1)[0]
        assert not NumericValidator.validate_seed(1 << 64)[0]


class TestThresholds:

    def test_valid(self):
        assert ConfigValidator.validate_thresholds({"ks_normal": 0.03, "lil_fraction": 0.9})[0]

    @pytest.mark.parametrize("thresholds", [
        {"ks_normall": 0.03},
        {"ks_normal": "x"},
        {"ks_normal": -0.1},
        {"lil_fraction": 1.5},
        {"decade_ratio_low": 13.0},
    ])
    def test_invalid(self, thresholds):
        valid, message = ConfigValidator.validate_thresholds(thresholds)
        assert not valid and message


def test_memory_estimate():
    assert ResourceValidator.estimate_bytes(1000, 128, block=0) == 1000 * 2 * 8 * 4
    assert ResourceValidator.estimate_bytes(1000, 128) == 1000 * (2 * 8 * 4 + 1024 * 8 * 6)
    fits, _ = ResourceValidator.check_memory(1000, 128, workers=2, shard_size=500)
    assert fits


def test_memory_estimate_uses_working_length():
    # La cola de n^-2 desde N=1000 se evalúa con ~2·10⁴ bits, no con L=128
    width = required_length(PowerLaw(2.0), 1000, 1e-4)
    assert width > 20_000
    assert (ResourceValidator.estimate_bytes(1000, width, block=0)
            > 100 * ResourceValidator.estimate_bytes(1000, 128, block=0))


def test_memory_check_rejects_huge_batch():
    pytest.importorskip("psutil")
    fits, message = ResourceValidator.check_memory(10 ** 9, 20_000, workers=4)
    assert not fits and "MB" in message


def test_run_config_errors():
    config = {"seq": "powerlaw:alpha=2", "samples": 100, "N": [10, 0], "N_range": [50, 10],
              "bit_length": 128, "seed": 7, "tol": 1e-12, "format": "xml",
              "thresholds": {"ks_normal": 0.02}}
    errors = validate_run_config(config)
    assert len(errors) == 3
    assert validate_run_config({"seq": "powerlaw:alpha=2", "N": [10], "format": "csv"}) == []
