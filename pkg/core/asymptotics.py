#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Asintótica de Colas Estiradas - Analizador Takagi

Este módulo certifica numéricamente las cotas integrales de ∫_a^∞ exp(-K·x^β)dx,
la equivalencia Σ_{n≥N} exp(-K·n^β) ≍ N^{1-β}·exp(-K·N^β) y las asintóticas de
cocientes de colas de las familias potencial y exponencial estirada.
"""

import math
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import mpmath
import numpy as np
from scipy import integrate

from .coefficients import PowerLaw, StretchedExp
from .errors import DomainError
from .moments import pth_power_ratio_limit
from .montecarlo import Thresholds
from .report import VerificationReport

QUAD_REL_TOL = 1e-13
TRUNCATION_FLOOR = 1e-30
MIN_REGIME_N = 16
INTEGRAL_BOUND_GRID = (4.0, 16.0, 64.0, 256.0)
TAIL_INDEX_GRID = (16, 64, 256)


@dataclass(frozen=True)
class Bracket:
    """Horquilla lower ≤ target ≤ upper; los valores reales son valor·exp(log_scale)."""
    lower: float
    upper: float
    target: float
    in_regime: bool = True
    log_scale: float = 0.0

    @property
    def holds(self) -> bool:
        return self.lower <= self.target <= self.upper

    def to_dict(self) -> Dict[str, float]:
        return {"lower": self.lower, "upper": self.upper, "target": self.target,
                "in_regime": self.in_regime, "log_scale": self.log_scale, "holds": self.holds}


def _check_params(K: float, beta: float, beta_max: float = 1.0, strict: bool = False) -> None:
    if not (math.isfinite(K) and K > 0):
        raise DomainError(f"K debe ser positivo, recibido: {K}")
    upper_ok = beta < beta_max if strict else beta <= beta_max
    if not (beta > 0 and upper_ok):
        rango = f"(0, {beta_max})" if strict else f"(0, {beta_max}]"
        raise DomainError(f"beta debe estar en {rango}, recibido: {beta}")


def stretch_integral(K: float, beta: float, a: float) -> float:
    """∫_a^∞ exp(-K·x^β) dx por cuadratura adaptativa.

    Con t = K·x^β la integral es Γ(1/β, K·a^β)/(β·K^{1/β}); el integrando
    desplazado (t₀+u)^{1/β-1}·e^{-u} se integra en [0, U] con U finito.
    """
    _check_params(K, beta)
    if not a > 0:
        raise DomainError(f"a debe ser positivo, recibido: {a}")
    s = 1.0 / beta
    t0 = K * a ** beta

    def integrand(u: float) -> float:
        return (1.0 + u / t0) ** (s - 1.0) * math.exp(-u)

    upper = 70.0
    while integrand(upper) > TRUNCATION_FLOOR:
        upper *= 2.0
    value, _ = integrate.quad(integrand, 0.0, upper, epsabs=0.0, epsrel=QUAD_REL_TOL, limit=200)
    return value * t0 ** (s - 1.0) * math.exp(-t0) / (beta * K ** s)


def stretch_integral_reference(K: float, beta: float, a: float) -> float:
    """La misma integral vía la gamma incompleta de mpmath, para contraste."""
    _check_params(K, beta)
    s = mpmath.mpf(1) / beta
    return float(mpmath.gammainc(s, K * mpmath.mpf(a) ** beta) / (beta * mpmath.mpf(K) ** s))


def lemma_constants(K: float, beta: float) -> Tuple[float, float]:
    """(C₁, C₂) de las cotas integrales; solo dependen de K y β.

    C₂ sale de integrar por partes s = ⌈1/β - 1⌉ veces: el producto Π(1/β - j)
    se acumula directamente, sin cocientes de funciones gamma.
    """
    _check_params(K, beta, strict=True)
    a = 1.0 / beta
    steps = math.ceil(a - 1.0)
    total = 0.0
    product = 1.0
    for i in range(1, steps + 1):
        total += product * K ** (a - i)
        product *= a - i
    total += product
    return 1.0 / (beta * K), total / (beta * K ** a)


def lemmaA1_bracket(K: float, beta: float, a: float) -> Bracket:
    """C₁·a^{1-β}e^{-Ka^β} ≤ ∫_a^∞ e^{-Kx^β}dx ≤ C₂·a^{1-β}e^{-Ka^β}.

    La cota superior solo se afirma si a ≥ 1 y K·a^β ≥ 1; fuera de ese
    régimen upper es infinito y la horquilla se marca fuera de régimen.
    """
    c1, c2 = lemma_constants(K, beta)
    if not a > 0:
        raise DomainError(f"a debe ser positivo, recibido: {a}")
    shape = a ** (1.0 - beta) * math.exp(-K * a ** beta)
    in_regime = a >= 1 and K * a ** beta >= 1
    upper = c2 * shape if in_regime else math.inf
    return Bracket(c1 * shape, upper, stretch_integral(K, beta, a), in_regime)


def tailsum_bracket(K: float, beta: float, N: int) -> Bracket:
    """Horquilla de Σ_{n≥N}e^{-Kn^β} en unidades de e^{-KN^β} (log_scale = -KN^β)."""
    c1, c2 = lemma_constants(K, beta)
    if N < 1:
        raise DomainError(f"N debe ser >= 1, recibido: {N}")
    shape = float(N) ** (1.0 - beta)
    in_regime = K * N ** beta >= 1 and N >= MIN_REGIME_N
    target = StretchedExp(K, beta).scaled_tail(N, 1).value
    upper = (1.0 + c2) * shape if in_regime else math.inf
    return Bracket(c1 * shape, upper, target, in_regime, -K * N ** beta)


def power_ratio_bracket(K: float, beta: float, N: int, p: int) -> Bracket:
    """N^{1-β}·Σc^{2p}/(Σc^p)² dentro de las constantes de las dos colas."""
    if p < 1:
        raise DomainError(f"p debe ser un entero positivo, recibido: {p}")
    c1_single, c2_single = lemma_constants(p * K, beta)
    c1_double, c2_double = lemma_constants(2 * p * K, beta)
    seq = StretchedExp(K, beta)
    target = seq.scaled_tail(N, 2 * p).value / seq.scaled_tail(N, p).value ** 2
    target *= float(N) ** (1.0 - beta)
    in_regime = p * K * N ** beta >= 1 and N >= MIN_REGIME_N
    lower = c1_double / (1.0 + c2_single) ** 2
    upper = (1.0 + c2_double) / c1_single ** 2 if in_regime else math.inf
    return Bracket(lower, upper, target, in_regime)


def powerlaw_ratio_asymptotic(alpha: float, N: int, p: int) -> Tuple[float, float]:
    """(N·Σn^{-2pα}/(Σn^{-pα})², límite (pα-1)²/(2pα-1))."""
    seq = PowerLaw(alpha)
    # El cociente de colas escaladas no depende de la escala |c_N|
    value = seq.scaled_tail(N, 2 * p).value / seq.scaled_tail(N, p).value ** 2
    return value * N, pth_power_ratio_limit(alpha, p)


@dataclass(frozen=True)
class RatioFloor:
    ratio: float
    floor: float

    @property
    def holds(self) -> bool:
        return self.ratio >= self.floor


def example16_lower(K: float, beta: float, N: int) -> RatioFloor:
    """Σc²/(Σc)² para cₙ = e^{-Kn^β} con β ≥ 1 frente al piso 1/(1 + β⁻¹K^{-1/β})²."""
    if not (math.isfinite(K) and K > 0):
        raise DomainError(f"K debe ser positivo, recibido: {K}")
    if beta < 1:
        raise DomainError(f"Se requiere beta >= 1, recibido: {beta}")
    if K * N ** beta < 1:
        raise DomainError(f"Se requiere K·N^β >= 1 (K={K}, beta={beta}, N={N})")
    sums = np.zeros(2)
    start = N
    while True:
        n = np.arange(start, start + 1024, dtype=np.float64)
        with np.errstate(under="ignore"):
            scaled = np.exp(-K * (n ** beta - float(N) ** beta))
        sums += [math.fsum(scaled), math.fsum(scaled ** 2)]
        if scaled[-1] < TRUNCATION_FLOOR:
            break
        start += 1024
    ratio = sums[1] / sums[0] ** 2
    floor = 1.0 / (1.0 + K ** (-1.0 / beta) / beta) ** 2
    return RatioFloor(ratio, floor)


def beta_half_closed_form(K: float, a: float) -> float:
    """∫_a^∞ e^{-K√x}dx = 2(K√a + 1)e^{-K√a}/K²."""
    root = K * math.sqrt(a)
    return 2.0 * (root + 1.0) * math.exp(-root) / (K * K)


def run_appendix(K: float, beta: float, thresholds: Optional[Thresholds] = None,
                 a_grid: Sequence[float] = INTEGRAL_BOUND_GRID,
                 N_grid: Sequence[int] = TAIL_INDEX_GRID) -> VerificationReport:
    """Tabla de horquillas integrales y de sumas de cola en una rejilla fija.

    Con beta >= 1 solo aplica el piso del cociente Σc²/(Σc)².
    """
    thresholds = thresholds or Thresholds()
    report = VerificationReport(
        test="appendix", seq=f"stretchexp:K={K},beta={beta}",
        params={"K": K, "beta": beta, "a": list(a_grid), "N": list(N_grid)},
        thresholds=thresholds.to_dict(),
    )
    if beta >= 1:
        for N in N_grid:
            floor = example16_lower(K, beta, N)
            report.add_metric("ratio", floor.ratio, N)
            report.add_metric("floor", floor.floor, N)
            report.add_check("ratio_floor", floor.ratio, floor.floor, ">=", N)
        report.note("beta >= 1: Σc²/(Σc)² no tiende a 0")
        return report

    c1, c2 = lemma_constants(K, beta)
    report.add_metric("C1", c1)
    report.add_metric("C2", c2)
    for a in a_grid:
        bracket = lemmaA1_bracket(K, beta, a)
        reference = stretch_integral_reference(K, beta, a)
        report.add_metric(f"integral_a={a}", bracket.target)
        report.add_metric(f"lower_a={a}", bracket.lower)
        report.add_metric(f"upper_a={a}", bracket.upper)
        report.add_check(f"integral_lower_a={a}", bracket.target, bracket.lower, ">=")
        if bracket.in_regime:
            report.add_check(f"integral_upper_a={a}", bracket.target, bracket.upper)
        report.add_check(f"quadrature_vs_gamma_a={a}",
                         abs(bracket.target - reference) / reference, thresholds.identity_gap)
        if beta == 0.5:
            closed = beta_half_closed_form(K, a)
            report.add_check(f"beta_half_closed_form_a={a}",
                             abs(bracket.target - closed) / closed, thresholds.identity_gap)
    for N in N_grid:
        bracket = tailsum_bracket(K, beta, N)
        report.add_metric("tail_sum_scaled", bracket.target, N)
        report.add_check("tail_sum_lower", bracket.target, bracket.lower, ">=", N)
        if bracket.in_regime:
            report.add_check("tail_sum_upper", bracket.target, bracket.upper, "<=", N)
        for p in (1, 2):
            ratio = power_ratio_bracket(K, beta, N, p)
            report.add_metric(f"power_ratio_p={p}", ratio.target, N)
            report.add_check(f"power_ratio_lower_p={p}", ratio.target, ratio.lower, ">=", N)
            if ratio.in_regime:
                report.add_check(f"power_ratio_upper_p={p}", ratio.target, ratio.upper, "<=", N)
    return report
