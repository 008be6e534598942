#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Analizador de Argumentos - Analizador Takagi

Este módulo define los subcomandos de la línea de comandos y traduce los
argumentos a las claves de RunConfig.
"""

import argparse
from typing import Any, Dict, List, Optional

SUITES = ("lln", "clt", "lil", "geometric", "appendix", "identities", "moments")
COMMANDS = ("eval", "moments", "classify", "verify", "sample", "asymptotics")

# Destino argparse -> campo de RunConfig
OVERRIDE_FIELDS = (
    "suite", "seq", "N", "N_range", "samples", "paths", "seed", "bit_length",
    "dyadic_bits", "tol", "grid", "x", "r", "K", "beta", "N_prime", "cesaro_paths",
    "profile", "output", "format", "workers",
)


def _threshold_pair(text: str) -> List[Any]:
    name, sep, value = text.partition("=")
    if not sep or not name.strip():
        raise argparse.ArgumentTypeError(f"Se esperaba NOMBRE=VALOR, recibido: {text!r}")
    try:
        return [name.strip(), float(value)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"Valor no numérico en {text!r}") from None


def _add_common(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("ejecución")
    group.add_argument("--profile", help="Perfil de config.json (acceptance, rapido, ...)")
    group.add_argument("--config", dest="config_path", metavar="RUTA",
                       help="RunConfig guardado en JSON; las opciones explícitas lo sustituyen")
    group.add_argument("--output", "-o", metavar="RUTA", help="Archivo de salida")
    group.add_argument("--format", choices=("csv", "json"), help="Formato de salida")
    group.add_argument("--no-timestamp", action="store_true",
                       help="Omitir la marca de tiempo (informes idénticos byte a byte)")
    group.add_argument("--log-level", choices=("DEBUG", "INFO", "WARNING", "ERROR"),
                       help="Nivel de log en consola y archivo")
    group.add_argument("--save-config", metavar="RUTA",
                       help="Guardar la configuración efectiva en RUTA")
    group.add_argument("--run-summary", metavar="RUTA",
                       help="Exportar el resumen de la ejecución (comprobaciones, duración, memoria)")


def _add_sequence(parser: argparse.ArgumentParser, required: bool = False) -> None:
    parser.add_argument("--seq", required=required, metavar="ESPEC",
                        help="Secuencia: powerlaw:alpha=2, stretchexp:K=1,beta=0.5, "
                             "geometric:r=0.5, dyadicsqrt, explicit:file=RUTA")


def _add_sampling(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("muestreo")
    group.add_argument("--samples", type=int, help="Número de puntos aleatorios")
    group.add_argument("--paths", type=int, help="Trayectorias (LIL)")
    group.add_argument("--seed", type=int, help="Semilla (por defecto TAKAGI_SEED o el perfil)")
    group.add_argument("--L", dest="bit_length", type=int, help="Bits por punto")
    group.add_argument("--dyadic-bits", type=int,
                       help="Puntos diádicos exactos k/2^m (bits posteriores a m a cero)")
    group.add_argument("--workers", type=int, help="Fragmentos evaluados en paralelo")


def build_parser() -> argparse.ArgumentParser:
    """Construye el analizador con todos los subcomandos."""
    parser = argparse.ArgumentParser(
        prog="analizador-takagi",
        description="Evaluación exacta y verificación Monte Carlo de funciones de la clase Takagi",
    )
    sub = parser.add_subparsers(dest="command", metavar="COMANDO")
    sub.required = True

    p_eval = sub.add_parser("eval", help="Tabla (x, f(x), error) en una rejilla diádica")
    _add_sequence(p_eval, required=True)
    p_eval.add_argument("--grid", type=int, help="Puntos de la rejilla (potencia de 2)")
    p_eval.add_argument("--tol", type=float, help="Tolerancia absoluta")
    p_eval.add_argument("--x", help="Evaluar solo este punto (binario '0.101' o decimal con --L)")
    p_eval.add_argument("--L", dest="bit_length", type=int, help="Bits para un punto decimal")
    _add_common(p_eval)

    p_mom = sub.add_parser("moments", help="m_N, s²_N, error L², Var(Q²_N/s²_N) y cota de Azuma")
    _add_sequence(p_mom, required=True)
    p_mom.add_argument("--N", type=int, nargs="+", help="Índices N")
    _add_common(p_mom)

    p_cls = sub.add_parser("classify", help="Veredictos de las condiciones y clase de diferenciabilidad")
    _add_sequence(p_cls, required=True)
    _add_common(p_cls)

    p_ver = sub.add_parser("verify", help="Ejecuta una batería de verificación")
    p_ver.add_argument("suite", choices=SUITES, help="Batería")
    _add_sequence(p_ver)
    p_ver.add_argument("--N", type=int, nargs="+", help="Índices N")
    p_ver.add_argument("--N-range", dest="N_range", type=int, nargs=2, metavar=("MIN", "MAX"),
                       help="Rango de N para la LIL")
    p_ver.add_argument("--r", type=float, help="Razón geométrica")
    p_ver.add_argument("--K", type=float, help="Constante K del caso exponencial estirado")
    p_ver.add_argument("--beta", type=float, help="Exponente β del caso exponencial estirado")
    p_ver.add_argument("--N-prime", dest="N_prime", type=int, help="Horizonte del promedio de Cesàro")
    p_ver.add_argument("--cesaro-paths", type=int, help="Trayectorias del promedio de Cesàro")
    p_ver.add_argument("--threshold", dest="thresholds", type=_threshold_pair, action="append",
                       metavar="NOMBRE=VALOR", help="Sustituir un umbral estadístico")
    _add_sampling(p_ver)
    _add_common(p_ver)

    p_smp = sub.add_parser("sample", help="Escribe un lote de puntos como texto binario")
    _add_sampling(p_smp)
    _add_common(p_smp)

    p_asy = sub.add_parser("asymptotics", help="Horquillas de las colas exponenciales estiradas")
    p_asy.add_argument("--K", type=float, help="Constante K")
    p_asy.add_argument("--beta", type=float, help="Exponente β")
    _add_common(p_asy)
    return parser


def overrides_from_args(args: argparse.Namespace) -> Dict[str, Any]:
    """Valores de RunConfig indicados explícitamente en la línea de comandos."""
    overrides: Dict[str, Any] = {}
    for name in OVERRIDE_FIELDS:
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = list(value) if isinstance(value, (list, tuple)) else value
    pairs: Optional[List[List[Any]]] = getattr(args, "thresholds", None)
    if pairs:
        overrides["thresholds"] = {name: value for name, value in pairs}
    if getattr(args, "no_timestamp", False):
        overrides["timestamp"] = False
    return overrides
