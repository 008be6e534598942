#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Evaluación Puntual Certificada - Analizador Takagi

Este módulo evalúa iterados del mapa tienda, funciones de Rademacher, f, f_N,
la cola M_N y los estadísticos normalizados en un punto dado por su desarrollo
binario, con cota certificada del error absoluto.

Los iterados se obtienen por aritmética entera sobre los bits del punto:
φ⁽ⁿ⁾(x) = 0.εₙ₊₁εₙ₊₂… si εₙ = 0 y 1 - 0.εₙ₊₁εₙ₊₂… si εₙ = 1.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Tuple, Union

from .coefficients import CoefficientSeq, Geometric
from .errors import DomainError, HypothesisError, PrecisionError

GUARD_BITS = 32
EXTRA_BITS = 64
UNIT_ROUNDOFF = 2.0 ** -53
DEFAULT_REL_TOL = 1e-12
# Para α = 2 y tol = 1e-10 la cola exige N ≈ 2·10^10: se corta antes
MAX_CUTOFF = 1 << 40

RealLike = Union[int, float, Fraction]


def default_length(max_n: int = 0) -> int:
    """Longitud por defecto: max(n, 64) + 64 bits de guarda."""
    return max(max_n, 64) + EXTRA_BITS


@dataclass(frozen=True)
class CertifiedValue:
    """Valor real con cota del error absoluto."""
    value: float
    abs_error: float

    def __post_init__(self):
        if not (self.abs_error >= 0 and math.isfinite(self.abs_error)):
            raise ValueError(f"Cota de error inválida: {self.abs_error}")

    def contains(self, target: float, slack: float = 0.0) -> bool:
        return abs(self.value - target) <= self.abs_error + slack


@dataclass(frozen=True)
class BitPoint:
    """Punto x ∈ [0,1) como desarrollo binario finito ε₁…ε_L.

    exact=True indica desarrollo terminante: los bits más allá de L son cero.
    exact=False indica truncamiento de un real con más bits desconocidos.
    """
    mantissa: int
    length: int
    exact: bool = True

    def __post_init__(self):
        if self.length < 1:
            raise DomainError(f"La longitud en bits debe ser >= 1, recibida: {self.length}")
        if not (0 <= self.mantissa < (1 << self.length)):
            raise DomainError("La mantisa no representa un punto de [0, 1)")

    @property
    def L(self) -> int:
        return self.length

    @classmethod
    def from_bits(cls, text: str, exact: bool = True) -> "BitPoint":
        """Construye desde la forma textual '0.' seguida de dígitos binarios."""
        cleaned = text.strip()
        if not cleaned.startswith("0."):
            raise DomainError(f"Forma binaria inválida (debe empezar con '0.'): {text!r}")
        digits = cleaned[2:] or "0"
        if any(ch not in "01" for ch in digits):
            raise DomainError(f"Dígitos binarios inválidos en {text!r}")
        return cls(int(digits, 2), len(digits), exact)

    @classmethod
    def from_fraction(cls, q: RealLike, length: Optional[int] = None) -> "BitPoint":
        """Los racionales diádicos se guardan en forma terminante y exacta."""
        q = Fraction(q)
        if not (0 <= q < 1):
            raise DomainError(f"El punto debe estar en [0, 1), recibido: {q}")
        den = q.denominator
        if den & (den - 1) == 0:
            m = max(den.bit_length() - 1, 1)
            return cls(q.numerator << (m - (den.bit_length() - 1)), m, True)
        L = length or default_length()
        return cls((q.numerator << L) // den, L, False)

    @classmethod
    def from_decimal(cls, text: str, length: Optional[int] = None) -> "BitPoint":
        try:
            q = Fraction(text.strip())
        except ValueError:
            raise DomainError(f"Número decimal inválido: {text!r}") from None
        return cls.from_fraction(q, length)

    @classmethod
    def parse(cls, text: str, length: Optional[int] = None) -> "BitPoint":
        """Binario si no se indica precisión; decimal truncado a `length` bits si se indica."""
        if length is None:
            return cls.from_bits(text)
        return cls.from_decimal(text, length)

    @property
    def value(self) -> Fraction:
        return Fraction(self.mantissa, 1 << self.length)

    def __float__(self) -> float:
        return self.mantissa / (1 << self.length)

    def to_bits(self) -> str:
        return "0." + format(self.mantissa, f"0{self.length}b")

    def bit(self, n: int) -> int:
        """Dígito εₙ(x)."""
        if n < 1:
            raise DomainError(f"Índice de bit inválido: {n}")
        if n > self.length:
            if self.exact:
                return 0
            raise PrecisionError(f"Bit {n} fuera de la precisión L={self.length}", n)
        return (self.mantissa >> (self.length - n)) & 1

    def shift(self, k: int) -> "BitPoint":
        """Transformación diádica B aplicada k veces: descarta los k primeros bits."""
        if k < 0:
            raise DomainError(f"Desplazamiento negativo: {k}")
        if k == 0:
            return self
        if k >= self.length:
            if self.exact:
                return BitPoint(0, 1, True)
            raise PrecisionError(f"Desplazamiento {k} agota la precisión L={self.length}",
                                 k + GUARD_BITS)
        rest = self.length - k
        return BitPoint(self.mantissa & ((1 << rest) - 1), rest, self.exact)

    def window(self, n: int) -> Tuple[int, int, int]:
        """(εₙ, numerador, k) con 0.εₙ₊₁εₙ₊₂… ≈ numerador / 2^k."""
        if n > self.length:
            if self.exact:
                return 0, 0, 0
            raise PrecisionError(f"n={n} supera la precisión L={self.length}", n + GUARD_BITS)
        k = self.length - n
        return self.bit(n), self.mantissa & ((1 << k) - 1), k


def _ratio(num: int, k: int) -> Tuple[float, float]:
    """num/2^k redondeado correctamente y su error de redondeo."""
    if num == 0:
        return 0.0, 0.0
    value = num / (1 << k)
    magnitude = abs(num)
    odd = magnitude >> ((magnitude & -magnitude).bit_length() - 1)
    return value, (0.0 if odd.bit_length() <= 53 else math.ulp(value) / 2)


def tent(x: RealLike) -> RealLike:
    """Mapa tienda: 2x en [0, 1/2] y 2(1-x) en [1/2, 1]."""
    if not (0 <= x <= 1):
        raise DomainError(f"tent requiere 0 <= x <= 1, recibido: {x}")
    half = Fraction(1, 2) if isinstance(x, (int, Fraction)) else 0.5
    return 2 * x if x <= half else 2 * (1 - x)


def _check_n(n: int) -> None:
    if n < 1:
        raise DomainError(f"El índice n debe ser >= 1, recibido: {n}")


def tent_iter(x: BitPoint, n: int) -> CertifiedValue:
    """φ⁽ⁿ⁾(x) = φ(2^{n-1}x) con error ≤ 2^{-(L-n)} por truncamiento."""
    _check_n(n)
    eps_n, frac, k = x.window(n)
    num = frac if eps_n == 0 else (1 << k) - frac
    value, rounding = _ratio(num, k)
    truncation = 0.0 if x.exact else math.ldexp(1.0, -k)
    return CertifiedValue(value, truncation + rounding)


def rademacher(x: BitPoint, n: int) -> int:
    """Rₙ(x) = 1 - 2εₙ(x)."""
    _check_n(n)
    return 1 - 2 * x.bit(n)


def _check_guard(x: BitPoint, n: int) -> None:
    if not x.exact and n > x.length - GUARD_BITS:
        raise PrecisionError(
            f"φ* en n={n} requiere {GUARD_BITS} bits de guarda (L={x.length})", n + GUARD_BITS)


def phi_star(x: BitPoint, n: int) -> CertifiedValue:
    """φ*⁽ⁿ⁾(x) = φ⁽ⁿ⁾(x) - 1/2 por la vía de desplazamiento y plegado."""
    _check_n(n)
    _check_guard(x, n)
    eps_n, frac, k = x.window(n)
    num = frac if eps_n == 0 else (1 << k) - frac
    value, rounding = _ratio(2 * num - (1 << k), k + 1)
    truncation = 0.0 if x.exact else math.ldexp(1.0, -k)
    return CertifiedValue(value, truncation + rounding)


def phi_star_rademacher(x: BitPoint, n: int) -> CertifiedValue:
    """φ*⁽ⁿ⁾(x) = -2^{n-1}Rₙ(x)·Σ_{k>n} R_k(x)2^{-k}, evaluada con enteros.

    Los dígitos con R_k = +1 forman el complemento de la ventana y los de
    R_k = -1 la ventana misma.
    """
    _check_n(n)
    _check_guard(x, n)
    eps_n, frac, k = x.window(n)
    r_n = 1 - 2 * eps_n
    positive = (~frac) & ((1 << k) - 1)
    series = positive - frac
    if x.exact:
        # Los bits más allá de L son cero: R_k = +1 y suman 2^{n-1-L}
        value, rounding = _ratio(-r_n * (series + 1), k + 1)
        return CertifiedValue(value, rounding)
    value, rounding = _ratio(-r_n * series, k + 1)
    return CertifiedValue(value, math.ldexp(1.0, -(k + 1)) + rounding)


# --- sumas de términos ---------------------------------------------------

def _sum_terms(seq: CoefficientSeq, x: BitPoint, start: int, stop: int,
               centered: bool = False) -> CertifiedValue:
    """Σ_{start≤n<stop} cₙ·φ⁽ⁿ⁾(x) (o φ*⁽ⁿ⁾ si centered) con error certificado."""
    products: List[float] = []
    bound = 0.0
    for n in range(start, stop):
        c = seq.term(n)
        if c == 0:
            continue
        phi = phi_star(x, n) if centered else tent_iter(x, n)
        product = c * phi.value
        products.append(product)
        bound += abs(c) * phi.abs_error + abs(product) * UNIT_ROUNDOFF
    total = math.fsum(products)
    return CertifiedValue(total, bound + abs(total) * UNIT_ROUNDOFF)


def cutoff_index(seq: CoefficientSeq, budget: float) -> int:
    """Menor N con Σ_{n≥N}|cₙ| ≤ budget (cota incluida)."""
    if budget <= 0:
        raise DomainError(f"La tolerancia debe ser positiva, recibida: {budget}")

    def fits(N: int) -> bool:
        tail = seq.abs_tail_sum(N)
        return tail.value + tail.error_bound <= budget

    hi = 1
    while not fits(hi):
        hi *= 2
        if hi > MAX_CUTOFF:
            raise PrecisionError(
                f"La tolerancia {budget:g} exige más de {MAX_CUTOFF} términos", MAX_CUTOFF)
    lo = hi // 2
    if lo < 1:
        return hi
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if fits(mid):
            hi = mid
        else:
            lo = mid
    return hi


def _required_length(seq: CoefficientSeq, stop: int, budget: float) -> int:
    """Menor L con Σ_{n<stop}|cₙ|·2^{n-L} ≤ budget."""
    logs = [math.log2(abs(seq.term(n))) + n for n in range(1, stop) if seq.term(n) != 0]
    if not logs:
        return stop
    top = max(logs)
    log_total = top + math.log2(math.fsum(2.0 ** (v - top) for v in logs))
    return max(stop - 1, math.ceil(log_total - math.log2(budget))) + GUARD_BITS


def _span(seq: CoefficientSeq, x: BitPoint, N: int, tol: float) -> Tuple[int, float]:
    """Último índice (exclusivo) a sumar desde N y cota de la cola descartada."""
    if x.exact:
        return max(N, x.length + 1), 0.0
    stop = max(N, cutoff_index(seq, tol / 2))
    if stop - 1 > x.length:
        raise PrecisionError(
            f"La tolerancia {tol:g} requiere sumar hasta n={stop - 1} con L={x.length}",
            _required_length(seq, stop, tol / 4))
    tail = seq.abs_tail_sum(stop)
    return stop, tail.value + tail.error_bound


def _check_budget(result: CertifiedValue, seq: CoefficientSeq, stop: int, tol: float,
                  x: BitPoint) -> CertifiedValue:
    if result.abs_error > tol:
        raise PrecisionError(
            f"Error {result.abs_error:.3e} supera la tolerancia {tol:g} con L={x.length}",
            _required_length(seq, stop, tol / 4))
    return result


def eval_f(seq: CoefficientSeq, x: BitPoint, tol: float) -> CertifiedValue:
    """f(x) = Σ cₙφ⁽ⁿ⁾(x) con |error| ≤ tol.

    Args:
        seq: Secuencia de coeficientes
        x: Punto como desarrollo binario
        tol: Tolerancia absoluta

    Returns:
        Valor certificado de f(x)
    """
    if not tol > 0:
        raise DomainError(f"La tolerancia debe ser positiva, recibida: {tol}")
    stop, tail_bound = _span(seq, x, 1, tol)
    partial = _sum_terms(seq, x, 1, stop)
    result = CertifiedValue(partial.value, partial.abs_error + tail_bound)
    return _check_budget(result, seq, stop, tol, x)


def eval_partial(seq: CoefficientSeq, x: BitPoint, N: int) -> CertifiedValue:
    """f_N(x) = Σ_{n<N} cₙφ⁽ⁿ⁾(x); N = 1 es la suma vacía."""
    if N < 1:
        raise DomainError(f"N debe ser >= 1, recibido: {N}")
    stop = min(N, x.length + 1) if x.exact else N
    if not x.exact and N - 1 > x.length:
        raise PrecisionError(f"f_N con N={N} supera la precisión L={x.length}",
                             N - 1 + GUARD_BITS)
    return _sum_terms(seq, x, 1, stop)


def eval_tail(seq: CoefficientSeq, x: BitPoint, N: int, tol: float) -> CertifiedValue:
    """f(x) - f_N(x) = Σ_{n≥N} cₙφ⁽ⁿ⁾(x) sumada directamente."""
    if N < 1:
        raise DomainError(f"N debe ser >= 1, recibido: {N}")
    if not tol > 0:
        raise DomainError(f"La tolerancia debe ser positiva, recibida: {tol}")
    stop, tail_bound = _span(seq, x, N, tol)
    partial = _sum_terms(seq, x, N, stop)
    result = CertifiedValue(partial.value, partial.abs_error + tail_bound)
    return _check_budget(result, seq, stop, tol, x)


def _route_direct(seq: CoefficientSeq, x: BitPoint, N: int, tol: float) -> CertifiedValue:
    stop, tail_bound = _span(seq, x, N, tol)
    partial = _sum_terms(seq, x, N, stop, centered=True)
    if x.exact:
        # Más allá de L todos los φ valen 0 y φ* = -1/2
        rest = seq.tail_sum(max(N, x.length + 1), 1)
        value = partial.value - 0.5 * rest.value
        error = partial.abs_error + 0.5 * rest.error_bound + abs(value) * UNIT_ROUNDOFF
        return CertifiedValue(value, error)
    result = CertifiedValue(partial.value, partial.abs_error + 0.5 * tail_bound)
    return _check_budget(result, seq, stop, tol, x)


def _route_difference(seq: CoefficientSeq, x: BitPoint, N: int, tol: float) -> CertifiedValue:
    whole = eval_f(seq, x, tol)
    head = eval_partial(seq, x, N)
    tail = seq.tail_sum(N, 1)
    value = whole.value - head.value - 0.5 * tail.value
    error = (whole.abs_error + head.abs_error + 0.5 * tail.error_bound
             + 3 * UNIT_ROUNDOFF * (abs(whole.value) + abs(head.value) + abs(value)))
    return CertifiedValue(value, error)


def tail_M(seq: CoefficientSeq, x: BitPoint, N: int, tol: float) -> CertifiedValue:
    """M_N(x) = Σ_{n≥N} cₙφ*⁽ⁿ⁾(x) = f - f_N - m_N."""
    if N < 1:
        raise DomainError(f"N debe ser >= 1, recibido: {N}")
    if not tol > 0:
        raise DomainError(f"La tolerancia debe ser positiva, recibida: {tol}")
    return _route_direct(seq, x, N, tol)


def tail_M_routes(seq: CoefficientSeq, x: BitPoint, N: int,
                  tol: float) -> Tuple[CertifiedValue, CertifiedValue]:
    """Las dos vías: cola directa de φ* y f - f_N - m_N."""
    return tail_M(seq, x, N, tol), _route_difference(seq, x, N, tol)


# --- estadísticos normalizados -------------------------------------------

def _m_N(seq: CoefficientSeq, N: int) -> float:
    m = 0.5 * seq.tail_sum(N, 1).value
    if m == 0:
        raise HypothesisError(f"m_N = 0 en N={N}: el cociente no está definido")
    return m


def _s2_N(seq: CoefficientSeq, N: int) -> float:
    s2 = seq.tail_sum(N, 2).value / 12.0
    if s2 <= 0:
        raise HypothesisError(f"s²_N degenerado en N={N}")
    return s2


def lil_normalizer(s2: float) -> float:
    """φ(t) = √(2t·log log(1/t)), definido para 0 < t < 1/e."""
    if not (0 < s2 < math.exp(-1)):
        raise HypothesisError(f"Normalizador no definido en este N (s²_N = {s2:.6g} >= 1/e)")
    return math.sqrt(2.0 * s2 * math.log(math.log(1.0 / s2)))


def stat_ratio(seq: CoefficientSeq, x: BitPoint, N: int, tol: Optional[float] = None) -> float:
    """(f - f_N) / m_N."""
    m = _m_N(seq, N)
    tol = tol if tol is not None else DEFAULT_REL_TOL * abs(m)
    return eval_tail(seq, x, N, tol).value / m


def stat_clt(seq: CoefficientSeq, x: BitPoint, N: int, tol: Optional[float] = None) -> float:
    """M_N / s_N."""
    s = math.sqrt(_s2_N(seq, N))
    tol = tol if tol is not None else DEFAULT_REL_TOL * s
    return tail_M(seq, x, N, tol).value / s


def stat_lil(seq: CoefficientSeq, x: BitPoint, N: int, tol: Optional[float] = None) -> float:
    """M_N / φ(s²_N)."""
    norm = lil_normalizer(_s2_N(seq, N))
    tol = tol if tol is not None else DEFAULT_REL_TOL * norm
    return tail_M(seq, x, N, tol).value / norm


@dataclass(frozen=True)
class SelfSimilarity:
    lhs: float
    rhs: float
    gap: float
    bound: float

    @property
    def holds(self) -> bool:
        return self.gap <= self.bound


def selfsim_check(r: float, x: BitPoint, N: int, tol: float = DEFAULT_REL_TOL) -> SelfSimilarity:
    """Compara (f_r - f_{r,N})/m_N con f_r(2^{N-1}x)/E[f_r].

    El punto desplazado se obtiene descartando N-1 bits, nunca multiplicando.
    """
    seq = Geometric(r)
    if N < 1:
        raise DomainError(f"N debe ser >= 1, recibido: {N}")
    if not x.exact and N > x.length - GUARD_BITS:
        raise PrecisionError(f"N={N} deja menos de {GUARD_BITS} bits útiles", N + GUARD_BITS)
    m = _m_N(seq, N)
    lhs_tail = eval_tail(seq, x, N, tol * abs(m))
    lhs = lhs_tail.value / m
    mean = 0.5 * r / (1.0 - r)
    rhs_value = eval_f(seq, x.shift(N - 1), tol * abs(mean))
    rhs = rhs_value.value / mean
    bound = (lhs_tail.abs_error / abs(m) + rhs_value.abs_error / abs(mean)
             + 64 * UNIT_ROUNDOFF * (abs(lhs) + abs(rhs) + 1.0))
    return SelfSimilarity(lhs, rhs, abs(lhs - rhs), bound)
