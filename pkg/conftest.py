#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Fixtures comunes de las pruebas - Analizador Takagi
"""

import sys
from pathlib import Path

import pytest

# Agregar el directorio raíz al path para importar módulos
sys.path.insert(0, str(Path(__file__).parent))

from core.bitstream import sample  # noqa: E402
from core.montecarlo import RunSettings, Thresholds  # noqa: E402

SEED = 7


@pytest.fixture
def seed() -> int:
    return SEED


@pytest.fixture
def small_batch():
    """2000 puntos de 128 bits, el tamaño del perfil 'rapido'."""
    return sample(SEED, 2000, 128)


@pytest.fixture
def settings() -> RunSettings:
    return RunSettings(thresholds=Thresholds(), workers=2, shard_size=512)


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    """Directorio de trabajo aislado: config.json, logs/ y reportes/ se crean aquí."""
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("TAKAGI_SEED", raising=False)
    return tmp_path
