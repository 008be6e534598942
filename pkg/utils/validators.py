#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Validadores - Analizador Takagi

Este módulo contiene las validaciones de la entrada de usuario: cadenas de
secuencia, parámetros numéricos, umbrales de configuración y recursos del
sistema disponibles para un lote de muestras.
"""

import math
from typing import Any, Dict, List, Mapping, Optional, Tuple

from core.coefficients import from_spec
from core.errors import SequenceSpecError
from core.montecarlo import Thresholds

# Bytes por punto y palabra de 64 bits, con margen para las copias de las palabras
BYTES_PER_WORD = 8
WORKING_SET_FACTOR = 4
# Matrices (puntos × bloque) de 8 bytes que phi_block mantiene a la vez
PHI_BLOCK_ARRAYS = 6
DEFAULT_BLOCK = 1024
MEMORY_FRACTION = 0.5


class ValidationError(Exception):
    """Excepción personalizada para errores de validación."""
    pass


class SequenceValidator:
    """Validador de cadenas de especificación de secuencias."""

    @staticmethod
    def validate_spec(text: str) -> Tuple[bool, str]:
        """Valida una especificación 'familia:clave=valor,...'.

        Args:
            text: Especificación a validar

        Returns:
            Tupla (es_válido, mensaje_error)
        """
        if not text or not text.strip():
            return False, "La especificación de secuencia no puede estar vacía"
        try:
            from_spec(text)
        except SequenceSpecError as e:
            return False, str(e)
        return True, ""


class NumericValidator:
    """Validador de parámetros numéricos."""

    @staticmethod
    def validate_positive_int(value: Any, name: str, minimum: int = 1) -> Tuple[bool, str]:
        if isinstance(value, bool) or not isinstance(value, int):
            return False, f"{name} debe ser un entero, recibido: {value!r}"
        if value < minimum:
            return False, f"{name} debe ser >= {minimum}, recibido: {value}"
        return True, ""

    @staticmethod
    def validate_tolerance(value: Any) -> Tuple[bool, str]:
        try:
            tol = float(value)
        except (TypeError, ValueError):
            return False, f"La tolerancia debe ser numérica, recibida: {value!r}"
        if not (math.isfinite(tol) and tol > 0):
            return False, f"La tolerancia debe ser positiva y finita, recibida: {value!r}"
        return True, ""

    @staticmethod
    def validate_bit_length(value: Any) -> Tuple[bool, str]:
        return NumericValidator.validate_positive_int(value, "La longitud en bits L", 64)

    @staticmethod
    def validate_seed(value: Any) -> Tuple[bool, str]:
        if isinstance(value, bool) or not isinstance(value, int):
            return False, f"La semilla debe ser un entero, recibida: {value!r}"
        if not (0 <= value < 1 << 64):
            return False, "La semilla debe estar en [0, 2^64)"
        return True, ""


class ConfigValidator:
    """Validador de los umbrales estadísticos."""

    @staticmethod
    def validate_thresholds(thresholds: Mapping[str, Any]) -> Tuple[bool, str]:
        known = Thresholds.__dataclass_fields__
        for name, value in thresholds.items():
            if name not in known:
                return False, f"Umbral desconocido: {name}"
            try:
                number = float(value)
            except (TypeError, ValueError):
                return False, f"Umbral no numérico: {name}={value!r}"
            if not (math.isfinite(number) and number > 0):
                return False, f"El umbral {name} debe ser positivo, recibido: {value!r}"
        for name in ("lil_fraction", "decay_fraction"):
            if name in thresholds and float(thresholds[name]) > 1:
                return False, f"{name} es una fracción y debe ser <= 1"
        low = float(thresholds.get("decade_ratio_low", Thresholds.decade_ratio_low))
        high = float(thresholds.get("decade_ratio_high", Thresholds.decade_ratio_high))
        if low > high:
            return False, "decade_ratio_low no puede superar decade_ratio_high"
        return True, ""


class ResourceValidator:
    """Validador de recursos del sistema."""

    @staticmethod
    def estimate_bytes(shard_rows: int, L: int, block: int = DEFAULT_BLOCK) -> int:
        """Memoria de un fragmento: sus palabras de L bits y los bloques de φ."""
        words = math.ceil(L / 64)
        per_row = (words * BYTES_PER_WORD * WORKING_SET_FACTOR
                   + block * BYTES_PER_WORD * PHI_BLOCK_ARRAYS)
        return shard_rows * per_row

    @staticmethod
    def check_memory(count: int, L: int, workers: int = 1, shard_size: Optional[int] = None,
                     block: int = DEFAULT_BLOCK) -> Tuple[bool, str]:
        """Comprueba que los fragmentos simultáneos de un lote caben en memoria.

        Args:
            count: Número de puntos del lote
            L: Bits por punto con los que se evalúa (ya ensanchado por el ejecutor)
            workers: Fragmentos evaluados a la vez
            shard_size: Puntos por fragmento (None: el lote completo)
            block: Columnas de cada bloque de φ

        Returns:
            Tupla (cabe, mensaje)
        """
        try:
            import psutil
        except ImportError:
            return True, "psutil no disponible: comprobación de memoria omitida"
        rows = min(count, shard_size or count)
        required = ResourceValidator.estimate_bytes(rows, L, block) * max(1, workers)
        available = psutil.virtual_memory().available
        if required > available * MEMORY_FRACTION:
            return False, (f"El lote necesita ~{required / 1024 ** 2:.1f} MB y solo hay "
                           f"{available / 1024 ** 2:.1f} MB disponibles")
        return True, ""


def validate_run_config(config: Dict[str, Any]) -> List[str]:
    """Valida los campos de una configuración de ejecución.

    Args:
        config: Diccionario de RunConfig

    Returns:
        Lista de errores (vacía si es válida)
    """
    errors = []
    if config.get("seq"):
        ok, msg = SequenceValidator.validate_spec(config["seq"])
        if not ok:
            errors.append(msg)
    for name in ("samples", "paths", "grid", "N_prime", "workers"):
        if name in config and config[name] is not None:
            ok, msg = NumericValidator.validate_positive_int(config[name], name)
            if not ok:
                errors.append(msg)
    if config.get("cesaro_paths") is not None:
        ok, msg = NumericValidator.validate_positive_int(config["cesaro_paths"], "cesaro_paths", 0)
        if not ok:
            errors.append(msg)
    for N in config.get("N") or []:
        ok, msg = NumericValidator.validate_positive_int(N, "N")
        if not ok:
            errors.append(msg)
    N_range = config.get("N_range") or []
    if N_range and (len(N_range) != 2 or N_range[0] < 1 or N_range[1] < N_range[0]):
        errors.append(f"Rango de N inválido: {N_range}")
    if "bit_length" in config:
        ok, msg = NumericValidator.validate_bit_length(config["bit_length"])
        if not ok:
            errors.append(msg)
    if "seed" in config:
        ok, msg = NumericValidator.validate_seed(config["seed"])
        if not ok:
            errors.append(msg)
    if "tol" in config:
        ok, msg = NumericValidator.validate_tolerance(config["tol"])
        if not ok:
            errors.append(msg)
    if config.get("format") not in (None, "json", "csv"):
        errors.append(f"Formato de salida inválido: {config['format']!r} (json o csv)")
    ok, msg = ConfigValidator.validate_thresholds(config.get("thresholds") or {})
    if not ok:
        errors.append(msg)
    return errors
