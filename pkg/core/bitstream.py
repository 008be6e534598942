#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Flujo de Bits Reproducible - Analizador Takagi

Este módulo genera lotes de puntos uniformes como palabras de 64 bits y evalúa
bloques de iterados φ⁽ⁿ⁾ de forma vectorizada.

Contrato del generador (fijo, versión 1):
    numpy.random.Philox (Philox4x64-10, basado en contador). La palabra w del
    punto i es la salida cruda número i del flujo con clave seed + 2^64·w.
    La palabra w contiene los dígitos binarios 64w+1 … 64w+64, el primero en
    el bit más significativo. Cada palabra depende solo de (seed, i, w), así
    que el reparto en fragmentos no altera el lote y alargar L conserva los
    bits ya generados.
"""

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .coefficients import CoefficientSeq
from .errors import DomainError
from .point_eval import BitPoint

PRNG_NAME = "numpy.random.Philox (Philox4x64-10)"
PRNG_VERSION = 1
WORD_BITS = 64
SEED_LIMIT = 1 << 64
DEFAULT_SHARD = 4096
FRACTION_SHIFT = np.uint64(11)
FRACTION_UNIT = 2.0 ** -53
TWO_THIRDS_WORD = np.uint64(0xAAAAAAAAAAAAAAAA)


def _word_column(seed: int, w: int, start: int, count: int) -> np.ndarray:
    generator = np.random.Philox(key=seed | (w << WORD_BITS), counter=start // 4)
    skip = start % 4
    return generator.random_raw(count + skip)[skip:]


@dataclass(frozen=True)
class SampleBatch:
    """Lote reproducible de puntos uniformes de [0, 1).

    dyadic_bits = m pone a cero todos los bits posteriores a m: los puntos
    son entonces racionales diádicos k/2^m exactos.
    """
    seed: int
    count: int
    length: int
    dyadic_bits: Optional[int] = None

    def __post_init__(self):
        if not (0 <= self.seed < SEED_LIMIT):
            raise DomainError(f"La semilla debe ser un entero de 64 bits, recibida: {self.seed}")
        if self.count < 1:
            raise DomainError(f"El tamaño del lote debe ser >= 1, recibido: {self.count}")
        if self.length < WORD_BITS:
            raise DomainError(f"La longitud en bits debe ser >= 64, recibida: {self.length}")
        if self.dyadic_bits is not None and not (1 <= self.dyadic_bits <= self.length):
            raise DomainError(f"dyadic_bits fuera de rango: {self.dyadic_bits}")

    @property
    def L(self) -> int:
        return self.length

    @property
    def nwords(self) -> int:
        return math.ceil(self.length / WORD_BITS)

    @property
    def exact(self) -> bool:
        return self.dyadic_bits is not None

    def with_length(self, length: int) -> "SampleBatch":
        """Mismo lote con al menos `length` bits; los bits previos no cambian."""
        if length <= self.length:
            return self
        return SampleBatch(self.seed, self.count, length, self.dyadic_bits)

    def independent(self, offset: int = 1) -> "SampleBatch":
        """Lote independiente del mismo tamaño (semilla desplazada)."""
        return SampleBatch((self.seed + offset) % SEED_LIMIT, self.count, self.length,
                           self.dyadic_bits)

    def words(self, start: int = 0, stop: Optional[int] = None) -> np.ndarray:
        """Matriz uint64 (puntos × palabras) de los puntos en [start, stop)."""
        stop = self.count if stop is None else stop
        if not (0 <= start <= stop <= self.count):
            raise DomainError(f"Rango de puntos inválido: [{start}, {stop})")
        rows = stop - start
        matrix = np.empty((rows, self.nwords), dtype=np.uint64)
        for w in range(self.nwords):
            matrix[:, w] = _word_column(self.seed, w, start, rows)
        self._mask_tail(matrix)
        return matrix

    def _mask_tail(self, matrix: np.ndarray) -> None:
        keep = self.dyadic_bits if self.dyadic_bits is not None else self.length
        full, partial = divmod(keep, WORD_BITS)
        if partial:
            mask = np.uint64(((1 << partial) - 1) << (WORD_BITS - partial))
            matrix[:, full] &= mask
            full += 1
        matrix[:, full:] = 0

    def shards(self, size: int = DEFAULT_SHARD) -> Iterator[Tuple[int, int]]:
        for start in range(0, self.count, size):
            yield start, min(start + size, self.count)

    def point(self, i: int) -> BitPoint:
        if not (0 <= i < self.count):
            raise DomainError(f"Índice de punto fuera de rango: {i}")
        return _point_from_row(self.words(i, i + 1)[0], self.length, self.dyadic_bits)

    @cached_property
    def points(self) -> List[BitPoint]:
        matrix = self.words()
        return [_point_from_row(row, self.length, self.dyadic_bits) for row in matrix]

    def x_values(self, start: int = 0, stop: Optional[int] = None) -> np.ndarray:
        """Valores de x redondeados a 53 bits."""
        first = self.words(start, stop)[:, 0]
        return (first >> FRACTION_SHIFT).astype(np.float64) * FRACTION_UNIT


def _point_from_row(row: np.ndarray, length: int, dyadic_bits: Optional[int]) -> BitPoint:
    mantissa = 0
    for word in row:
        mantissa = (mantissa << WORD_BITS) | int(word)
    mantissa >>= len(row) * WORD_BITS - length
    if dyadic_bits is None:
        return BitPoint(mantissa, length, False)
    return BitPoint(mantissa >> (length - dyadic_bits), dyadic_bits, True)


def sample(seed: int, count: int, L: int) -> SampleBatch:
    """Lote reproducible: mismo (seed, count, L) produce los mismos puntos."""
    return SampleBatch(seed, count, L)


def dyadic_sample(seed: int, count: int, m: int, L: int = WORD_BITS) -> SampleBatch:
    return SampleBatch(seed, count, max(L, WORD_BITS), m)


def exceptional_rows(words: np.ndarray) -> np.ndarray:
    """Filas que son 2/3 truncado (0.1010…₂) o cero: puntos excepcionales."""
    two_thirds = np.all(words == TWO_THIRDS_WORD, axis=1)
    zero = np.all(words == 0, axis=1)
    return two_thirds | zero


def phi_block(words: np.ndarray, n_start: int, n_stop: int) -> np.ndarray:
    """φ⁽ⁿ⁾ para n en [n_start, n_stop) y cada fila: matriz (puntos × n).

    Usa εₙ y los 64 bits siguientes; los bits más allá de las palabras
    disponibles se toman como cero.
    """
    if n_start < 1 or n_stop - 1 >= words.shape[1] * WORD_BITS:
        raise DomainError(
            f"Bloque [{n_start}, {n_stop}) fuera de los {words.shape[1] * WORD_BITS} bits")
    padded = np.concatenate([words, np.zeros((words.shape[0], 1), dtype=np.uint64)], axis=1)
    n = np.arange(n_start, n_stop)
    eps_word = (n - 1) // WORD_BITS
    eps_shift = (WORD_BITS - 1 - (n - 1) % WORD_BITS).astype(np.uint64)
    eps = (padded[:, eps_word] >> eps_shift) & np.uint64(1)
    first = n // WORD_BITS
    offset = (n % WORD_BITS).astype(np.uint64)
    high = padded[:, first] << offset
    low = (padded[:, first + 1] >> np.uint64(1)) >> (np.uint64(WORD_BITS - 1) - offset)
    frac = ((high | low) >> FRACTION_SHIFT).astype(np.float64) * FRACTION_UNIT
    return np.where(eps == 1, 1.0 - frac, frac)


def reference_logs(seq: CoefficientSeq, grid: Sequence[int]) -> np.ndarray:
    logs = np.array([seq.log_abs_term(N) for N in grid])
    return np.where(np.isfinite(logs), logs, 0.0)


def tail_profile(seq: CoefficientSeq, words: np.ndarray, grid: Sequence[int], stop: int,
                 block: int = 1024, exact_rest: bool = False) -> np.ndarray:
    """T[i, g] = Σ_{grid[g] ≤ n < stop} (cₙ/|c_{grid[g]}|)·φ*⁽ⁿ⁾(xᵢ).

    Cada tramo entre puntos de la rejilla se acumula con su propia escala y
    las colas se recomponen hacia atrás, sin desbordamientos por debajo.
    Con exact_rest se suma además la cola exacta -½Σ_{n≥stop}cₙ, válida
    para puntos diádicos cuyos bits posteriores a stop son cero.
    """
    grid = list(grid)
    refs = reference_logs(seq, grid)
    bounds = grid[1:] + [stop]
    segments = np.zeros((words.shape[0], len(grid)))
    for g, (lo, hi) in enumerate(zip(grid, bounds)):
        for start in range(lo, hi, block):
            end = min(start + block, hi)
            with np.errstate(under="ignore"):
                coefs = seq.signs(start, end) * np.exp(seq.log_abs_terms(start, end) - refs[g])
            segments[:, g] += (phi_block(words, start, end) - 0.5) @ coefs
    if exact_rest:
        rest = seq.scaled_tail(stop, 1)
        segments[:, -1] -= 0.5 * rest.value * math.exp(rest.log_scale - refs[-1])
    tails = np.empty_like(segments)
    tails[:, -1] = segments[:, -1]
    for g in range(len(grid) - 2, -1, -1):
        tails[:, g] = segments[:, g] + tails[:, g + 1] * math.exp(refs[g + 1] - refs[g])
    return tails


def truncation_index(seq: CoefficientSeq, N: int, eta: float, minimum_extra: int = 64) -> int:
    """Menor M con Σ_{n≥M}cₙ² ≤ η·Σ_{n≥N}cₙ² (al menos N + minimum_extra)."""
    base = seq.scaled_tail(N, 2)

    def fraction(M: int) -> float:
        tail = seq.scaled_tail(M, 2)
        return tail.value / base.value * math.exp(2.0 * (tail.log_scale - base.log_scale))

    lo = N + minimum_extra
    if fraction(lo) <= eta:
        return lo
    step = max(minimum_extra, N)
    hi = lo + step
    while fraction(hi) > eta:
        lo, hi = hi, hi + 2 * (hi - N)
    while hi - lo > max(1, (hi - N) // 256):
        mid = (lo + hi) // 2
        if fraction(mid) <= eta:
            hi = mid
        else:
            lo = mid
    return hi
