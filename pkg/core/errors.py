#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Jerarquía de Excepciones - Analizador Takagi

Este módulo define las excepciones propias del analizador. La interfaz de
línea de comandos traduce cada familia a un código de salida estable.
"""

from typing import Optional


class AnalysisError(Exception):
    """Excepción base del analizador."""
    pass


class DomainError(AnalysisError, ValueError):
    """Parámetro fuera de su dominio (p ≤ 0, i ≥ j, β ≥ 1 en el lema, etc.)."""
    pass


class SequenceSpecError(AnalysisError, ValueError):
    """Cadena de especificación de secuencia mal formada."""
    pass


class PrecisionError(AnalysisError):
    """La longitud en bits del punto no alcanza para la tolerancia pedida."""

    def __init__(self, message: str, required_length: Optional[int] = None):
        super().__init__(message)
        self.required_length = required_length

    def __str__(self) -> str:
        base = super().__str__()
        if self.required_length is not None:
            return f"{base} (longitud requerida: L >= {self.required_length})"
        return base


class HypothesisError(AnalysisError):
    """Hipótesis de un estadístico no satisfecha (m_N = 0, normalizador indefinido)."""
    pass


class ConfigError(AnalysisError, ValueError):
    """Archivo de configuración ilegible o con esquema incompatible."""
    pass
