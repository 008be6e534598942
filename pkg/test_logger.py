#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Pruebas - Sistema de logging
"""

import json
import logging
import os
import time
from datetime import datetime, timedelta

import pytest

from core.logger import SUCCESS, CustomLogger, RunStats


@pytest.fixture
def logger(tmp_path):
    log = CustomLogger("PruebaTakagi", log_dir=str(tmp_path / "logs"), level="DEBUG",
                       use_colors=False, max_log_files=2)
    yield log
    log.shutdown()


def test_run_stats_properties():
    start = datetime(2026, 1, 1, 12, 0, 0)
    run = RunStats("r1", "verify", start, end_time=start + timedelta(seconds=3),
                   checks_passed=3, checks_failed=1)
    assert run.total_checks == 4
    assert run.pass_rate == 75.0
    assert run.duration.total_seconds() == 3
    assert RunStats("r2", "eval", start).pass_rate == 0.0


def test_success_level_is_registered(logger):
    assert logging.getLevelName(SUCCESS) == "SUCCESS"


def test_checks_are_counted(logger):
    logger.start_run("verify", "run_prueba")
    logger.log_check("clt", "ks_normal", True, 0.004, 0.02)
    logger.log_check("clt", "variance_z", False, 5.0, 4.0)
    logger.log_report("clt", "fail", "reportes/verify_clt.json")
    run = logger.current_run
    assert run.checks_passed == 1 and run.checks_failed == 1
    assert run.reports == ["reportes/verify_clt.json"]
    assert logger.end_run() is run
    assert run.warnings and run.errors
    assert logger.current_run is None
    assert logger.runs_history == [run]


def test_messages_reach_the_file(logger):
    logger.log_operation("SUCCESS", "todo correcto", "appendix")
    logger.flush()
    for handler in logger.handlers:
        handler.flush()
    text = logger.log_file.read_text(encoding="utf-8")
    assert "SUCCESS - appendix: todo correcto" in text


def test_export_run_report(logger, tmp_path):
    logger.start_run("eval")
    run = logger.end_run()
    run.memory_mb = 12.5
    path = tmp_path / "resumen.json"
    assert logger.export_run_report(run, str(path))
    data = json.loads(path.read_text(encoding="utf-8"))
    assert data["command"] == "eval" and "export_date" in data
    assert data["memory_mb"] == 12.5


def test_cleanup_keeps_newest(logger):
    now = time.time()
    for k in range(4):
        old = logger.log_dir / f"analysis_2020-01-0{k + 1}.log"
        old.write_text("", encoding="utf-8")
        os.utime(old, (now - 1000 * (k + 1), now - 1000 * (k + 1)))
    logger.cleanup_old_logs()
    remaining = sorted(p.name for p in logger.log_dir.glob("analysis_*.log"))
    assert len(remaining) == 2
    assert logger.log_file.name in remaining


def test_set_log_level(logger):
    logger.set_log_level("ERROR")
    assert logger.logger.level == logging.ERROR
    assert logging.getLogger("core").level == logging.ERROR
