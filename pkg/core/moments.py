#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Momentos Exactos - Analizador Takagi

Este módulo reúne las esperanzas, varianzas, covarianzas y cotas en forma
cerrada que usa el análisis de la cola M_N: m_N, s²_N, los momentos de φ*,
el error L² del cociente, la covarianza de cuadrados y la varianza de Q²_N.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict

import numpy as np

from .coefficients import CoefficientSeq, Explicit, MAX_TERMS
from .errors import DomainError, HypothesisError

# Truncamiento de la doble suma de var_Q2 en j - i
MAX_LAG = 64
Q2_REL_TOL = 1e-14
EPS = float(np.finfo(np.float64).eps)

VAR_SQUARE = Fraction(1, 80) - Fraction(1, 144)

Q2_BOUND_NOTE = ("paper_bound = (8/15)·sup c²/Σc² acota solo cross_term (covarianzas entre índices "
                 "distintos); exact incluye además el término diagonal y se acota con "
                 "complete_bound = (4/3)·sup c²/Σc²")


@dataclass(frozen=True)
class TailStats:
    """m_N = ½Σ_{n≥N}cₙ y s²_N = (1/12)Σ_{n≥N}cₙ² con sus cotas de error."""
    N: int
    m_N: float
    m_err: float
    s2_N: float
    s2_err: float

    def to_dict(self) -> Dict[str, float]:
        return {"N": self.N, "m_N": self.m_N, "m_err": self.m_err,
                "s2_N": self.s2_N, "s2_err": self.s2_err}


@dataclass(frozen=True)
class Q2Variance:
    """Var(Q²_N/s²_N) exacta y las cotas asociadas.

    cross_term es la contribución de las covarianzas entre índices distintos,
    que es la parte acotada por paper_bound = (8/15)·sup c²/Σc². complete_bound
    = (4/3)·sup c²/Σc² acota además el término diagonal (1/180)Σc⁴.
    """
    exact: float
    cross_term: float
    paper_bound: float
    complete_bound: float
    error_bound: float

    def to_dict(self) -> Dict[str, float]:
        return {"exact": self.exact, "cross_term": self.cross_term,
                "paper_bound": self.paper_bound, "complete_bound": self.complete_bound,
                "error_bound": self.error_bound}


def tail_stats(seq: CoefficientSeq, N: int) -> TailStats:
    """Momentos exactos de la cola en el índice N.

    Args:
        seq: Secuencia de coeficientes
        N: Índice (>= 1)

    Returns:
        TailStats con errores propagados desde tail_sum
    """
    first = seq.tail_sum(N, 1)
    second = seq.tail_sum(N, 2)
    return TailStats(N, 0.5 * first.value, 0.5 * first.error_bound,
                     second.value / 12.0, second.error_bound / 12.0)


def phi_star_moments() -> Dict[str, Fraction]:
    return {"mean": Fraction(0), "second": Fraction(1, 12), "fourth": Fraction(1, 80)}


def l2_ratio_error(seq: CoefficientSeq, N: int) -> float:
    """E[((f - f_N)/m_N - 1)²] = (1/3)·Σc² / (Σc)²."""
    s1 = seq.scaled_tail(N, 1).value
    if s1 == 0:
        raise HypothesisError(f"m_N = 0 en N={N}")
    return seq.scaled_tail(N, 2).value / (3.0 * s1 * s1)


def l2_ratio_error_powerlaw_limit(alpha: float) -> float:
    """Límite de N·l2_ratio_error para cₙ = n^{-α}: (α-1)²/(3(2α-1))."""
    return (alpha - 1.0) ** 2 / (3.0 * (2.0 * alpha - 1.0))


def pth_power_ratio_limit(alpha: float, p: int) -> float:
    """Límite de N·Σn^{-2pα}/(Σn^{-pα})²: (pα-1)²/(2pα-1)."""
    s = p * alpha
    return (s - 1.0) ** 2 / (2.0 * s - 1.0)


def cov_sq(i: int, j: int) -> Fraction:
    """Cov((φ*⁽ⁱ⁾)², (φ*⁽ʲ⁾)²) = (1/180)·4^{-(j-i)} para i < j."""
    if i < 1 or j < 1:
        raise DomainError(f"Los índices deben ser positivos: ({i}, {j})")
    if i >= j:
        raise DomainError(f"cov_sq requiere i < j, recibido: ({i}, {j})")
    return Fraction(1, 180 * 4 ** (j - i))


def _squared_block(seq: CoefficientSeq, N: int, stop: int, log_ref: float) -> np.ndarray:
    logs = seq.log_abs_terms(N, stop)
    with np.errstate(under="ignore"):
        return np.exp(2.0 * (logs - log_ref))


def var_Q2(seq: CoefficientSeq, N: int) -> Q2Variance:
    """Varianza exacta de Q²_N/s²_N con la doble suma truncada en j - i ≤ 64."""
    second = seq.scaled_tail(N, 2)
    if second.value <= 0:
        raise HypothesisError(f"s²_N degenerado en N={N}")
    s2_scaled = second.value
    fourth = seq.scaled_tail(N, 4)
    sup_sq = seq.sup_square(N)

    # Corte en i: la cola de cuadrados restante es despreciable frente a Σc²
    if isinstance(seq, Explicit):
        stop = seq.length + 1
        rest = 0.0
    else:
        stop = N + 256
        while True:
            rest_tail = seq.scaled_tail(stop, 2)
            rest = (rest_tail.value + rest_tail.error_bound) \
                * math.exp(2.0 * (rest_tail.log_scale - second.log_scale))
            if rest <= Q2_REL_TOL * s2_scaled or stop - N >= MAX_TERMS:
                break
            stop = N + 2 * (stop - N)
    if isinstance(seq, Explicit):
        squares = np.concatenate([np.asarray(seq.terms_[N - 1:], dtype=np.float64) ** 2,
                                  np.zeros(MAX_LAG)])
    else:
        squares = _squared_block(seq, N, stop + MAX_LAG, second.log_scale)
    head = squares[:stop - N]
    lagged = np.array([float(np.dot(head, squares[d:d + stop - N])) for d in range(1, MAX_LAG + 1)])
    weights = 0.25 ** np.arange(1, MAX_LAG + 1)
    cross = 2.0 * float(np.dot(weights, lagged)) / 180.0

    truncation = (2.0 / 180.0) * sup_sq * s2_scaled * 0.25 ** MAX_LAG / 3.0 \
        + rest * sup_sq / 270.0
    diagonal = fourth.value * float(VAR_SQUARE)
    denom = (s2_scaled / 12.0) ** 2
    exact = (diagonal + cross) / denom
    error = (fourth.error_bound / 180.0 + truncation) / denom \
        + 2.0 * exact * second.error_bound / s2_scaled + 8 * EPS * exact
    ratio = sup_sq / s2_scaled
    return Q2Variance(
        exact=exact,
        cross_term=cross / denom,
        paper_bound=(8.0 / 15.0) * ratio,
        complete_bound=(4.0 / 3.0) * ratio,
        error_bound=error,
    )


def azuma_tail_bound(seq: CoefficientSeq, N: int, c: float) -> float:
    """min(1, 2·exp(-c²/(2Σ_{n≥N}cₙ²))), cota de P(|M_N| > c)."""
    if not c > 0:
        raise DomainError(f"c debe ser positivo, recibido: {c}")
    s2 = seq.tail_sum(N, 2).value
    if s2 <= 0:
        return 0.0
    return min(1.0, 2.0 * math.exp(-c * c / (2.0 * s2)))
