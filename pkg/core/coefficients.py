#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Secuencias de Coeficientes - Analizador Takagi

Este módulo representa las familias de coeficientes {cₙ} de la clase de Takagi,
calcula colas Σ_{n≥N}(cₙ)ᵖ con cota de error certificada y clasifica cada
secuencia frente a las condiciones de convergencia C14-C17 y frente a la
tricotomía de diferenciabilidad de Kôno.

Las colas se calculan escaladas respecto de |c_N| para que los cocientes entre
colas no sufran desbordamiento por debajo cuando N es grande.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import mpmath
import numpy as np

from .errors import DomainError, SequenceSpecError

logger = logging.getLogger(__name__)

# Política de corte de las sumas explícitas
REL_TOL = 1e-14
TERM_FLOOR = 1e-30
MAX_TERMS = 1 << 22
INITIAL_CHUNK = 256

EPS = float(np.finfo(np.float64).eps)

# Rejilla de evidencia para las condiciones
EVIDENCE_MAX_N = 1 << 16
EVIDENCE_LOG_FLOOR = math.log(1e-70)


class Condition(Enum):
    """Condiciones de velocidad de convergencia sobre las colas."""
    C14 = "C14"
    C15 = "C15"
    C16 = "C16"
    C17 = "C17"


class Verdict(Enum):
    HOLDS = "Holds"
    FAILS = "Fails"
    INCONCLUSIVE = "Inconclusive"


class DiffClass(Enum):
    """Clases de la tricotomía de Kôno."""
    ABSOLUTELY_CONTINUOUS = "AbsolutelyContinuous"
    AE_DIFFERENTIABLE_NOWHERE = "AEDifferentiableNowhere"
    NOWHERE_DIFFERENTIABLE = "NowhereDifferentiable"


@dataclass(frozen=True)
class TailSumResult:
    """Valor de Σ_{n≥N}(cₙ)ᵖ con |valor - suma real| ≤ error_bound."""
    value: float
    error_bound: float


@dataclass(frozen=True)
class ScaledTail:
    """Cola escalada: Σ_{n≥N}(cₙ)ᵖ = exp(p·log_scale)·value."""
    value: float
    error_bound: float
    log_scale: float
    lead: float

    def unscale(self, p: int) -> TailSumResult:
        factor = math.exp(p * self.log_scale) if self.log_scale > -745 else 0.0
        return TailSumResult(self.value * factor, self.error_bound * factor)


@dataclass(frozen=True)
class ConditionVerdict:
    """Veredicto de una condición con su tabla de evidencia numérica."""
    condition: Condition
    verdict: Verdict
    evidence: Tuple[Tuple[int, float], ...]
    rationale: str

    def to_dict(self) -> Dict:
        return {
            "condition": self.condition.value,
            "verdict": self.verdict.value,
            "evidence": [[n, v] for n, v in self.evidence],
            "rationale": self.rationale,
        }


@dataclass(frozen=True)
class DifferentiabilityClass:
    klass: DiffClass
    witness: str

    def to_dict(self) -> Dict:
        return {"class": self.klass.value, "witness": self.witness}


@dataclass(frozen=True)
class HypothesisStatus:
    """Estado de las hipótesis Σc² > 0 y Σc ≠ 0 a lo largo de la rejilla."""
    holds: bool
    first_failure: Optional[int]
    detail: str


def _check_order(p) -> int:
    if isinstance(p, bool) or not isinstance(p, (int, np.integer)) or p <= 0:
        raise DomainError(f"El exponente p debe ser un entero positivo, recibido: {p!r}")
    return int(p)


def _check_index(n, name: str = "n") -> int:
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
        raise DomainError(f"El índice {name} debe ser un entero >= 1, recibido: {n!r}")
    return int(n)


class CoefficientSeq:
    """Base común de las familias de coeficientes.

    Las subclases son dataclasses congeladas; todas las operaciones son puras
    y el resultado de las colas se guarda en caché.
    """

    family: str = ""

    # --- términos -------------------------------------------------------

    def term(self, n: int) -> float:
        raise NotImplementedError

    def log_abs_terms(self, start: int, stop: int) -> np.ndarray:
        """log|cₙ| para n en [start, stop)."""
        raise NotImplementedError

    def signs(self, start: int, stop: int) -> np.ndarray:
        return np.ones(stop - start)

    def log_abs_term(self, n: int) -> float:
        return float(self.log_abs_terms(n, n + 1)[0])

    def terms(self, start: int, stop: int) -> np.ndarray:
        """Vector de cₙ para n en [start, stop)."""
        with np.errstate(under="ignore"):
            return self.signs(start, stop) * np.exp(self.log_abs_terms(start, stop))

    @property
    def monotone(self) -> bool:
        """True si |cₙ| es no creciente."""
        return True

    def absolute(self) -> "CoefficientSeq":
        """Secuencia {|cₙ|}."""
        return self

    # --- colas ----------------------------------------------------------

    def scaled_tail(self, N: int, p: int) -> ScaledTail:
        """Σ_{n≥N}(cₙ/|c_N|)ᵖ con su cota de error."""
        return _cached_scaled_tail(self, _check_index(N, "N"), _check_order(p))

    def tail_sum(self, N: int, p: int) -> TailSumResult:
        return self.scaled_tail(N, p).unscale(_check_order(p))

    def abs_tail_sum(self, N: int) -> TailSumResult:
        """Σ_{n≥N}|cₙ|, la cota uniforme de |f - f_N|."""
        return self.absolute().tail_sum(N, 1)

    def _closed_form(self, N: int, p: int) -> Optional[Tuple[float, float]]:
        return None

    def _remainder_bracket(self, N: int, M: int, p: int, log_ref: float) -> Tuple[float, float]:
        """Cotas inferior y superior de Σ_{n≥M}(cₙ/|c_N|)ᵖ."""
        raise NotImplementedError

    def _summed_tail(self, N: int, p: int) -> ScaledTail:
        log_ref = self.log_abs_term(N)
        pieces: List[float] = []
        chunk = INITIAL_CHUNK
        M = N
        max_log = abs(log_ref)
        while True:
            stop = min(M + chunk, N + MAX_TERMS)
            logs = self.log_abs_terms(M, stop)
            with np.errstate(under="ignore"):
                block = np.exp(p * (logs - log_ref))
            pieces.append(math.fsum(block))
            max_log = max(max_log, float(np.max(np.abs(logs))))
            M = stop
            lower, upper = self._remainder_bracket(N, M, p, log_ref)
            partial = math.fsum(pieces)
            if upper - lower <= REL_TOL * partial or block[-1] < TERM_FLOOR:
                break
            if M - N >= MAX_TERMS:
                logger.warning(
                    "Cola %s truncada en %d términos (N=%d, p=%d)", self.to_spec(), M - N, N, p)
                break
            chunk *= 2
        rounding = EPS * partial * (4.0 + 4.0 * p * max_log)
        value = partial + 0.5 * (lower + upper)
        return ScaledTail(value, 0.5 * (upper - lower) + rounding, log_ref, 1.0)

    # --- clasificación ----------------------------------------------------

    def analytic_verdicts(self) -> Dict[Condition, Tuple[Verdict, str]]:
        return {c: (Verdict.INCONCLUSIVE, "Sin clasificación analítica") for c in Condition}

    def kono_analytic(self) -> DifferentiabilityClass:
        raise NotImplementedError

    def sup_square(self, N: int) -> float:
        """sup_{n≥N}(cₙ/escala)², igual a 1 en familias monótonas."""
        return 1.0

    def evidence_grid(self) -> List[int]:
        grid = []
        N = 1
        while N <= EVIDENCE_MAX_N and self.log_abs_term(N) > EVIDENCE_LOG_FLOOR:
            grid.append(N)
            N *= 2
        return grid

    def to_spec(self) -> str:
        raise NotImplementedError


@lru_cache(maxsize=4096)
def _cached_scaled_tail(seq: CoefficientSeq, N: int, p: int) -> ScaledTail:
    closed = seq._closed_form(N, p)
    if closed is not None:
        value, error = closed
        return ScaledTail(value, error, seq.log_abs_term(N), 1.0)
    return seq._summed_tail(N, p)


@dataclass(frozen=True)
class PowerLaw(CoefficientSeq):
    """cₙ = n^{-α}, α > 1."""
    alpha: float
    family: str = field(default="powerlaw", init=False, repr=False)

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and self.alpha > 1):
            raise DomainError(f"PowerLaw requiere alpha > 1, recibido: {self.alpha}")

    def term(self, n: int) -> float:
        return float(_check_index(n)) ** (-self.alpha)

    def log_abs_terms(self, start: int, stop: int) -> np.ndarray:
        return -self.alpha * np.log(np.arange(start, stop, dtype=np.float64))

    def _remainder_bracket(self, N, M, p, log_ref):
        # Euler-Maclaurin hasta el término en f'; la función es completamente monótona
        s = self.alpha * p
        f_M = math.exp(-s * math.log(M / N))
        integral = M * f_M / (s - 1.0)
        core = integral + 0.5 * f_M + s * f_M / (12.0 * M)
        next_term = s * (s + 1.0) * (s + 2.0) * f_M / (720.0 * M ** 3)
        return core - 2.0 * next_term, core + next_term

    def analytic_verdicts(self):
        why = (f"cₙ = n^-{self.alpha:g}: las colas son ≍ N^(1-pα); "
               "el cociente de C14 decae como 1/N y la serie de C17 como 1/N²")
        return {c: (Verdict.HOLDS, why) for c in Condition}

    def kono_analytic(self):
        return DifferentiabilityClass(
            DiffClass.NOWHERE_DIFFERENTIABLE,
            "2ⁿ·n^-α → ∞, luego limsup 2ⁿ|cₙ| > 0 (criterio iii)")

    def to_spec(self) -> str:
        return f"powerlaw:alpha={self.alpha!r}"


@dataclass(frozen=True)
class StretchedExp(CoefficientSeq):
    """cₙ = exp(-K·n^β), K > 0, 0 < β ≤ 1."""
    K: float
    beta: float
    family: str = field(default="stretchexp", init=False, repr=False)

    def __post_init__(self):
        if not (math.isfinite(self.K) and self.K > 0):
            raise DomainError(f"StretchedExp requiere K > 0, recibido: {self.K}")
        if not (0 < self.beta <= 1):
            raise DomainError(f"StretchedExp requiere 0 < beta <= 1, recibido: {self.beta}")

    def term(self, n: int) -> float:
        return math.exp(-self.K * float(_check_index(n)) ** self.beta)

    def log_abs_terms(self, start, stop):
        return -self.K * np.arange(start, stop, dtype=np.float64) ** self.beta

    def _closed_form(self, N, p):
        if self.beta != 1:
            return None
        value = 1.0 / (-math.expm1(-p * self.K))
        return value, 4.0 * EPS * value

    def _remainder_bracket(self, N, M, p, log_ref):
        a = p * self.K
        s = 1.0 / self.beta
        # ∫_M^∞ exp(-a x^β) dx = Γ(1/β, a M^β) / (β a^{1/β}), reescalada por exp(a N^β)
        integral = mpmath.gammainc(s, a * mpmath.mpf(M) ** self.beta) \
            * mpmath.exp(-p * log_ref) / (self.beta * mpmath.mpf(a) ** s)
        integral = float(integral)
        g_M = math.exp(-a * (M ** self.beta) - p * log_ref)
        return integral * (1.0 - 1e-13), integral * (1.0 + 1e-13) + g_M

    def analytic_verdicts(self):
        if self.beta == 1:
            return _geometric_verdicts(math.exp(-self.K), f"exp(-{self.K:g}·n)")
        holds = (f"exp(-K·n^β) con β={self.beta:g} < 1: Σc²/(Σc)² ≍ N^-(1-β) → 0 "
                 "y (Σc)²/Σc² ≍ N^(1-β) crece polinómicamente")
        c17 = (Verdict.HOLDS if self.beta < 0.5 else Verdict.FAILS,
               f"c_N⁴/(Σc²)² ≍ N^-2(1-β); sumable solo si β < 1/2 (β={self.beta:g})")
        return {
            Condition.C14: (Verdict.HOLDS, holds),
            Condition.C15: (Verdict.HOLDS, holds),
            Condition.C16: (Verdict.HOLDS, "c_N²/Σc² ≍ N^-(1-β) → 0"),
            Condition.C17: c17,
        }

    def kono_analytic(self):
        if self.beta < 1:
            return DifferentiabilityClass(
                DiffClass.NOWHERE_DIFFERENTIABLE,
                "2ⁿ·exp(-K·n^β) → ∞ para β < 1 (criterio iii)")
        return _geometric_kono(math.exp(-self.K), f"r = exp(-{self.K:g})")

    def to_spec(self) -> str:
        return f"stretchexp:K={self.K!r},beta={self.beta!r}"


@dataclass(frozen=True)
class Geometric(CoefficientSeq):
    """cₙ = rⁿ, 0 < |r| < 1; r negativo da coeficientes alternados."""
    r: float
    family: str = field(default="geometric", init=False, repr=False)

    def __post_init__(self):
        if not (0 < abs(self.r) < 1):
            raise DomainError(f"Geometric requiere 0 < |r| < 1, recibido: {self.r}")

    def term(self, n: int) -> float:
        return self.r ** _check_index(n)

    def log_abs_terms(self, start, stop):
        return np.arange(start, stop, dtype=np.float64) * math.log(abs(self.r))

    def signs(self, start, stop):
        if self.r > 0:
            return np.ones(stop - start)
        return np.where(np.arange(start, stop) % 2 == 0, 1.0, -1.0)

    def absolute(self):
        return self if self.r > 0 else Geometric(abs(self.r))

    def _closed_form(self, N, p):
        sign = -1.0 if (self.r < 0 and (N * p) % 2 == 1) else 1.0
        return sign / (1.0 - self.r ** p), 0.0

    def analytic_verdicts(self):
        return _geometric_verdicts(self.r, f"{self.r:g}ⁿ")

    def kono_analytic(self):
        return _geometric_kono(self.r, f"r = {self.r:g}")

    def to_spec(self) -> str:
        return f"geometric:r={self.r!r}"


@dataclass(frozen=True)
class DyadicRoot(CoefficientSeq):
    """cₙ = 2^{-n}/√n, variante de demostración para el caso (ii) de Kôno."""
    family: str = field(default="dyadicsqrt", init=False, repr=False)

    def term(self, n: int) -> float:
        n = _check_index(n)
        return math.ldexp(1.0 / math.sqrt(n), -n)

    def log_abs_terms(self, start, stop):
        n = np.arange(start, stop, dtype=np.float64)
        return -n * math.log(2.0) - 0.5 * np.log(n)

    def _remainder_bracket(self, N, M, p, log_ref):
        head = math.exp(p * (self.log_abs_term(M) - log_ref))
        return head, head / (1.0 - 2.0 ** (-p))

    def analytic_verdicts(self):
        ratio = "el cociente cₙ₊₁/cₙ → 1/2, las colas se comportan como las de 2^-n"
        return {c: (Verdict.FAILS, ratio) for c in Condition}

    def kono_analytic(self):
        return DifferentiabilityClass(
            DiffClass.AE_DIFFERENTIABLE_NOWHERE,
            "2ⁿcₙ = n^-1/2 → 0 pero Σ 1/n = ∞ (criterio ii)")

    def to_spec(self) -> str:
        return "dyadicsqrt"


@dataclass(frozen=True)
class Explicit(CoefficientSeq):
    """Lista finita de coeficientes; cₙ = 0 más allá de la lista."""
    terms_: Tuple[float, ...]
    source: str = ""
    family: str = field(default="explicit", init=False, repr=False)

    def __post_init__(self):
        if len(self.terms_) == 0:
            raise DomainError("Explicit requiere al menos un coeficiente")
        if not all(math.isfinite(c) for c in self.terms_):
            raise DomainError("Explicit contiene coeficientes no finitos")

    @property
    def length(self) -> int:
        return len(self.terms_)

    def term(self, n: int) -> float:
        n = _check_index(n)
        return float(self.terms_[n - 1]) if n <= self.length else 0.0

    def _padded(self, start, stop) -> np.ndarray:
        values = np.zeros(stop - start)
        hi = min(stop, self.length + 1)
        if hi > start:
            values[:hi - start] = self.terms_[start - 1:hi - 1]
        return values

    def log_abs_terms(self, start, stop):
        with np.errstate(divide="ignore"):
            return np.log(np.abs(self._padded(start, stop)))

    def signs(self, start, stop):
        return np.sign(self._padded(start, stop))

    @property
    def monotone(self) -> bool:
        mags = np.abs(np.asarray(self.terms_))
        return bool(np.all(np.diff(mags) <= 0))

    def absolute(self):
        return Explicit(tuple(abs(c) for c in self.terms_), self.source)

    def _closed_form(self, N, p):
        return math.fsum(c ** p for c in self.terms_[N - 1:]), 0.0

    def scaled_tail(self, N: int, p: int) -> ScaledTail:
        N, p = _check_index(N, "N"), _check_order(p)
        value, error = self._closed_form(N, p)
        return ScaledTail(value, error, 0.0, self.term(N))

    def sup_square(self, N: int) -> float:
        tail = self.terms_[N - 1:]
        return max((c * c for c in tail), default=0.0)

    def evidence_grid(self) -> List[int]:
        grid = []
        N = 1
        while N <= self.length:
            grid.append(N)
            N *= 2
        return grid

    def kono_analytic(self):
        return DifferentiabilityClass(
            DiffClass.ABSOLUTELY_CONTINUOUS,
            "secuencia finita: 2ⁿcₙ se anula desde n > longitud, pertenece a ℓ² (criterio i)")

    def to_spec(self) -> str:
        return f"explicit:file={self.source}" if self.source else f"explicit:n={self.length}"


def _geometric_verdicts(r: float, label: str) -> Dict[Condition, Tuple[Verdict, str]]:
    c14 = (1 - r) / (1 + r)
    c16 = 1 - r * r
    return {
        Condition.C14: (Verdict.FAILS,
                        f"cₙ = {label}: Σc²/(Σc)² = (1-r)/(1+r) = {c14:.6g} constante"),
        Condition.C15: (Verdict.FAILS,
                        "(Σc)²/Σc² es acotado, la serie de exponenciales diverge"),
        Condition.C16: (Verdict.FAILS, f"c_N²/Σc² = 1 - r² = {c16:.6g} constante"),
        Condition.C17: (Verdict.FAILS, f"c_N⁴/(Σc²)² = (1 - r²)² constante, la serie diverge"),
    }


def _geometric_kono(r: float, label: str) -> DifferentiabilityClass:
    if abs(r) < 0.5:
        return DifferentiabilityClass(
            DiffClass.ABSOLUTELY_CONTINUOUS, f"{label}: |2r| < 1, 2ⁿrⁿ ∈ ℓ² (criterio i)")
    return DifferentiabilityClass(
        DiffClass.NOWHERE_DIFFERENTIABLE, f"{label}: |2r| ≥ 1, limsup |2r|ⁿ > 0 (criterio iii)")


# --- operaciones públicas -------------------------------------------------

def term(seq: CoefficientSeq, n: int) -> float:
    return seq.term(n)


def tail_sum(seq: CoefficientSeq, N: int, p: int) -> TailSumResult:
    """Σ_{n≥N}(cₙ)ᵖ con cota de error certificada.

    Args:
        seq: Secuencia de coeficientes
        N: Índice inicial (>= 1)
        p: Exponente entero positivo

    Returns:
        TailSumResult con valor y cota de error
    """
    return seq.tail_sum(N, p)


def condition_ratio(seq: CoefficientSeq, which: Condition, N: int) -> float:
    """Valor del cociente que controla la condición en el índice N."""
    s1 = seq.scaled_tail(N, 1).value
    s2 = seq.scaled_tail(N, 2).value
    lead = seq.scaled_tail(N, 2).lead if isinstance(seq, Explicit) else 1.0
    if which is Condition.C14:
        return s2 / (s1 * s1) if s1 != 0 else math.inf
    if which is Condition.C15:
        return (s1 * s1) / s2 if s2 != 0 else math.inf
    if which is Condition.C16:
        return lead ** 2 / s2 if s2 != 0 else math.inf
    return lead ** 4 / (s2 * s2) if s2 != 0 else math.inf


def check_condition(seq: CoefficientSeq, which: Condition) -> ConditionVerdict:
    """Clasifica la secuencia frente a una condición y adjunta evidencia numérica."""
    if isinstance(which, str):
        which = Condition(which)
    evidence = tuple((N, condition_ratio(seq, which, N)) for N in seq.evidence_grid())
    verdict, rationale = seq.analytic_verdicts()[which]
    if isinstance(seq, Explicit):
        rationale = "Secuencia finita: solo evidencia numérica, la condición es asintótica"
    return ConditionVerdict(which, verdict, evidence, rationale)


def sup_ratio(seq: CoefficientSeq, N: int) -> float:
    """sup_{n≥N}(cₙ)² / Σ_{n≥N}(cₙ)²."""
    s2 = seq.scaled_tail(N, 2).value
    if s2 == 0:
        return math.inf
    return seq.sup_square(N) / s2


def check_hypotheses(seq: CoefficientSeq) -> HypothesisStatus:
    """Comprueba Σ_{n≥N}(cₙ)² > 0 y Σ_{n≥N}cₙ ≠ 0 sobre la rejilla de evidencia."""
    if not isinstance(seq, Explicit):
        return HypothesisStatus(True, None, "Familia incorporada: hipótesis satisfechas para todo N")
    last_nonzero = max((i + 1 for i, c in enumerate(seq.terms_) if c != 0), default=0)
    for N in range(1, seq.length + 1):
        s1 = seq.scaled_tail(N, 1)
        if s1.value == 0:
            return HypothesisStatus(False, N, f"Σ_(n≥{N}) cₙ = 0")
    return HypothesisStatus(
        False, last_nonzero + 1,
        f"Secuencia finita: Σ_(n≥N) cₙ² = 0 para N > {last_nonzero}")


def kono_classify(seq: CoefficientSeq) -> DifferentiabilityClass:
    return seq.kono_analytic()


# --- especificaciones de texto ------------------------------------------

def _parse_params(body: str) -> Dict[str, str]:
    params = {}
    for item in filter(None, (part.strip() for part in body.split(","))):
        if "=" not in item:
            raise SequenceSpecError(f"Parámetro sin '=': {item!r}")
        key, value = (s.strip() for s in item.split("=", 1))
        params[key] = value
    return params


def _float_param(params: Dict[str, str], key: str, family: str) -> float:
    if key not in params:
        raise SequenceSpecError(f"Falta el parámetro '{key}' para {family}")
    try:
        return float(params.pop(key))
    except ValueError:
        raise SequenceSpecError(f"Valor no numérico para '{key}' en {family}") from None


def load_explicit(path: str) -> Explicit:
    """Lee una secuencia explícita: un real por línea, '#' inicia comentario."""
    file_path = Path(path)
    if not file_path.is_file():
        raise SequenceSpecError(f"No existe el archivo de coeficientes: {path}")
    values = []
    for lineno, raw in enumerate(file_path.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            values.append(float(line))
        except ValueError:
            raise SequenceSpecError(f"{path}:{lineno}: valor no numérico {line!r}") from None
    try:
        return Explicit(tuple(values), str(path))
    except DomainError as e:
        raise SequenceSpecError(str(e)) from None


def from_spec(text: str) -> CoefficientSeq:
    """Construye una secuencia desde 'familia:clave=valor,...'."""
    if not text or not text.strip():
        raise SequenceSpecError("Especificación de secuencia vacía")
    family, _, body = text.strip().partition(":")
    family = family.strip().lower()
    params = _parse_params(body)
    try:
        if family == "powerlaw":
            seq = PowerLaw(_float_param(params, "alpha", family))
        elif family == "stretchexp":
            K = _float_param(params, "K", family)
            seq = StretchedExp(K, _float_param(params, "beta", family))
        elif family == "geometric":
            seq = Geometric(_float_param(params, "r", family))
        elif family == "dyadicsqrt":
            seq = DyadicRoot()
        elif family == "explicit":
            if "file" not in params:
                raise SequenceSpecError("explicit requiere 'file=<ruta>'")
            seq = load_explicit(params.pop("file"))
        else:
            raise SequenceSpecError(f"Familia desconocida: {family!r}")
    except DomainError as e:
        raise SequenceSpecError(str(e)) from None
    if params:
        raise SequenceSpecError(f"Parámetros no reconocidos para {family}: {sorted(params)}")
    return seq
