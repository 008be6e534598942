#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Comandos - Analizador Takagi

Este módulo ejecuta los subcomandos de la línea de comandos: construye la
configuración efectiva, llama a los motores de `core`, escribe los archivos de
salida y traduce las excepciones a códigos de salida estables.
"""

import argparse
import csv
import io
from datetime import datetime
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Sequence

from core.asymptotics import (INTEGRAL_BOUND_GRID, TAIL_INDEX_GRID, lemmaA1_bracket, run_appendix,
                              tailsum_bracket)
from core.bitstream import DEFAULT_SHARD, PRNG_NAME, PRNG_VERSION, SampleBatch, dyadic_sample, sample
from core.coefficients import (Condition, Geometric, check_condition, check_hypotheses, from_spec,
                               kono_classify, sup_ratio)
from core.config_manager import ConfigManager, RunConfig
from core.errors import ConfigError, DomainError, HypothesisError, PrecisionError, SequenceSpecError
from core.logger import CustomLogger
from core.moments import Q2_BOUND_NOTE, azuma_tail_bound, l2_ratio_error, tail_stats, var_Q2
from core.montecarlo import (RunSettings, required_length, run_clt, run_geometric, run_identities,
                             run_lil, run_lln, run_moments)
from core.point_eval import BitPoint, eval_f
from core.report import dump_json, format_float
from utils.helpers import PathUtils, PerformanceUtils, TimeUtils
from utils.validators import ResourceValidator, ValidationError, validate_run_config

from .parser import overrides_from_args

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3

DEFAULT_SEQ = "powerlaw:alpha=2"
MOMENT_N = [1, 10, 100, 1000]

# Valores propios de cada batería cuando ni las opciones ni el archivo los fijan
SUITE_DEFAULTS: Dict[str, Dict[str, Any]] = {
    "lln": {"seq": DEFAULT_SEQ, "N": [10, 100, 1000]},
    "clt": {"seq": DEFAULT_SEQ, "N": [1000]},
    "lil": {"seq": DEFAULT_SEQ, "N_range": [100, 10_000]},
    "geometric": {"r": 0.25, "N": [20]},
    "appendix": {"K": 1.0, "beta": 0.5},
    "identities": {},
    "moments": {},
}


class CommandRunner:
    """Ejecuta un subcomando y devuelve su código de salida."""

    def __init__(self, config_manager: ConfigManager, logger: CustomLogger):
        """Inicializa el ejecutor.

        Args:
            config_manager: Gestor de config.json
            logger: Logger de la aplicación
        """
        self.config_manager = config_manager
        self.logger = logger
        self.output_dir = config_manager.get_app_setting("output_dir", "reportes")

    def run(self, args: argparse.Namespace) -> int:
        """Construye la configuración, despacha el subcomando y traduce los errores."""
        self.logger.start_run(args.command)
        try:
            config = self.build_config(args)
            handler = getattr(self, f"cmd_{config.command}")
            return handler(config)
        except (ValidationError, SequenceSpecError, DomainError, ConfigError) as e:
            self.logger.log_operation('ERROR', f'Error de uso: {e}')
            return EXIT_USAGE
        except PrecisionError as e:
            self.logger.log_operation('ERROR', f'Precisión insuficiente: {e}')
            return EXIT_NUMERIC
        except (HypothesisError, ArithmeticError) as e:
            self.logger.log_operation('ERROR', f'Fallo numérico: {e}')
            return EXIT_NUMERIC
        finally:
            run = self.logger.end_run()
            if run is not None:
                memory = PerformanceUtils.get_memory_usage()
                run.memory_mb = memory['rss'] if memory else None
                self.logger.log_operation(
                    'DEBUG', f'Duración: {TimeUtils.format_duration(run.duration.total_seconds())}')
                summary_path = getattr(args, "run_summary", None)
                if summary_path:
                    Path(summary_path).parent.mkdir(parents=True, exist_ok=True)
                    self.logger.export_run_report(run, summary_path)
            self.logger.flush()

    def build_config(self, args: argparse.Namespace) -> RunConfig:
        """Configuración efectiva: opciones > --config > perfil > valores por defecto.

        Raises:
            ValidationError: Si algún campo no es válido
        """
        config = self.config_manager.build_run_config(
            args.command, overrides=overrides_from_args(args),
            config_path=getattr(args, "config_path", None))
        if config.command == "verify":
            if config.suite is None:
                raise ValidationError("verify requiere una batería")
            for name, value in SUITE_DEFAULTS[config.suite].items():
                if getattr(config, name) in (None, []):
                    setattr(config, name, list(value) if isinstance(value, list) else value)
        errors = validate_run_config(config.to_dict())
        if errors:
            raise ValidationError("; ".join(errors))
        save_path = getattr(args, "save_config", None)
        if save_path:
            config.save(save_path)
            self.logger.log_operation('INFO', f'Configuración guardada en {save_path}')
        return config

    # --- utilidades -------------------------------------------------------

    def _settings(self, config: RunConfig) -> RunSettings:
        return RunSettings(thresholds=self.config_manager.get_thresholds(config.thresholds),
                           workers=config.workers)

    def _batch(self, config: RunConfig, count: int, width: int = 0,
               block: int = 0) -> SampleBatch:
        """Lote del subcomando; la memoria se estima con los bits que usará el ejecutor."""
        fits, message = ResourceValidator.check_memory(count, max(config.bit_length, width),
                                                       config.workers, DEFAULT_SHARD, block)
        if not fits:
            raise ValidationError(message)
        if message:
            self.logger.log_operation('WARNING', message)
        if config.dyadic_bits is not None:
            return dyadic_sample(config.seed, count, config.dyadic_bits, config.bit_length)
        return sample(config.seed, count, config.bit_length)

    def _output_path(self, config: RunConfig, fmt: str) -> Path:
        if config.output:
            return Path(config.output)
        return PathUtils.default_output_path(config.command, config.suite, fmt, self.output_dir)

    def _write(self, path: Path, content: str) -> Path:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(content, encoding="utf-8")
        self.logger.log_operation('INFO', f'Salida escrita en {path}')
        return path

    def _payload(self, config: RunConfig, data: Dict[str, Any]) -> Dict[str, Any]:
        data["config"] = config.to_dict()
        if config.timestamp:
            data["timestamp"] = datetime.now().isoformat(timespec="seconds")
        return data

    def _count_points(self, count: int) -> None:
        if self.logger.current_run:
            self.logger.current_run.points_evaluated += count

    # --- subcomandos ------------------------------------------------------

    def cmd_eval(self, config: RunConfig) -> int:
        """Tabla (x, f(x), error) en la rejilla k/grid o en un único punto."""
        seq = from_spec(config.seq)
        if config.x is not None:
            points = [_parse_point(config.x, config.bit_length)]
        else:
            if config.grid & (config.grid - 1):
                raise ValidationError(f"La rejilla debe ser una potencia de 2, recibida: {config.grid}")
            points = [BitPoint.from_fraction(Fraction(k, config.grid)) for k in range(config.grid)]

        rows = []
        for x in points:
            value = eval_f(seq, x, config.tol)
            rows.append([float(x), value.value, value.abs_error])
        self._count_points(len(rows))

        path = self._output_path(config, config.format)
        if config.format == "csv":
            content = _csv_table(("x", "f", "err"), rows)
        else:
            content = dump_json(self._payload(config, {
                "seq": seq.to_spec(), "columns": ["x", "f", "err"], "rows": rows}))
        self._write(path, content)
        self.logger.log_operation('SUCCESS', f'{len(rows)} puntos evaluados para {seq.to_spec()}')
        return EXIT_PASS

    def cmd_moments(self, config: RunConfig) -> int:
        """Momentos exactos de la cola para cada N."""
        seq = from_spec(config.seq)
        rows: List[List[Any]] = []
        for N in config.N or MOMENT_N:
            stats = tail_stats(seq, N)
            rows.append([N, "m_N", stats.m_N])
            rows.append([N, "m_N_err", stats.m_err])
            rows.append([N, "s2_N", stats.s2_N])
            rows.append([N, "s2_N_err", stats.s2_err])
            rows.append([N, "sup_ratio", sup_ratio(seq, N)])
            rows.append([N, "l2_ratio_error", l2_ratio_error(seq, N)])
            q2 = var_Q2(seq, N)
            for key, value in q2.to_dict().items():
                rows.append([N, f"var_Q2_{key}", value])
            # P(|M_N| > m_N), es decir, desviación relativa del cociente mayor que 1
            if stats.m_N > 0:
                rows.append([N, "azuma_bound_at_m_N", azuma_tail_bound(seq, N, stats.m_N)])

        path = self._output_path(config, config.format)
        if config.format == "csv":
            content = _csv_table(("N", "metric", "value"), rows)
        else:
            content = dump_json(self._payload(config, {"seq": seq.to_spec(), "rows": rows,
                                                         "notes": [Q2_BOUND_NOTE]}))
        self._write(path, content)
        return EXIT_PASS

    def cmd_classify(self, config: RunConfig) -> int:
        """Veredictos de las condiciones y clase de diferenciabilidad, siempre en JSON."""
        seq = from_spec(config.seq)
        verdicts = {c.value: check_condition(seq, c).to_dict() for c in Condition}
        hypotheses = check_hypotheses(seq)
        klass = kono_classify(seq)
        data = self._payload(config, {
            "seq": seq.to_spec(),
            "conditions": verdicts,
            "differentiability": klass.to_dict(),
            "hypotheses": {"holds": hypotheses.holds, "first_failure": hypotheses.first_failure,
                           "detail": hypotheses.detail},
        })
        path = self._output_path(config, "json")
        if path.suffix == ".csv":
            path = path.with_suffix(".json")
        self._write(path, dump_json(data))
        summary = ", ".join(f"{name}={v['verdict']}" for name, v in verdicts.items())
        self.logger.log_operation('INFO', f'{seq.to_spec()}: {summary}; {klass.klass.value}')
        return EXIT_PASS

    def cmd_verify(self, config: RunConfig) -> int:
        """Ejecuta la batería indicada; el informe se escribe siempre."""
        suite = config.suite
        settings = self._settings(config)
        self.logger.log_operation('INFO', f'Batería {suite} (perfil {config.profile}, semilla {config.seed})',
                                  suite)
        if suite == "appendix":
            report = run_appendix(config.K, config.beta, settings.thresholds)
        elif suite == "identities":
            batch = self._batch(config, config.samples, block=settings.block)
            report = run_identities(batch, settings)
        elif suite == "moments":
            batch = self._batch(config, config.samples, block=settings.block)
            report = run_moments(batch, settings)
        elif suite == "geometric":
            r = config.r
            if config.seq:
                seq = from_spec(config.seq)
                if isinstance(seq, Geometric):
                    r = seq.r
            width = required_length(Geometric(r), config.N[0], settings.thresholds.eta)
            batch = self._batch(config, config.samples, width, settings.block)
            report = run_geometric(r, config.N[0], batch, settings,
                                   N_prime=config.N_prime, cesaro_paths=config.cesaro_paths)
        else:
            seq = from_spec(config.seq)
            eta = settings.thresholds.eta
            if suite == "lln":
                width = required_length(seq, max(config.N), eta)
                batch = self._batch(config, config.samples, width, settings.block)
                report = run_lln(seq, config.N, batch, settings)
            elif suite == "clt":
                width = required_length(seq, config.N[0], eta)
                batch = self._batch(config, config.samples, width, settings.block)
                report = run_clt(seq, config.N[0], batch, settings)
            else:
                width = required_length(seq, config.N_range[1], eta)
                batch = self._batch(config, config.paths, width, settings.block)
                report = run_lil(seq, batch, tuple(config.N_range), settings)

        self._count_points(report.sample_size)
        report.config = config.to_dict()
        if config.timestamp:
            report.stamp()
        for check in report.checks:
            self.logger.log_check(suite, check.name, check.passed, check.value, check.threshold)
        path = self._output_path(config, config.format)
        report.write(path, config.format)
        self.logger.log_report(suite, report.verdict, str(path))
        if report.negative_control:
            self.logger.log_operation('INFO', 'Control negativo: aprobar significa que el límite no se cumple',
                                      suite)
        return EXIT_PASS if report.passed else EXIT_FAIL

    def cmd_sample(self, config: RunConfig) -> int:
        """Escribe el lote como texto: una línea '0.ε₁ε₂…ε_L' por punto."""
        batch = self._batch(config, config.samples)
        lines = [
            f"# prng={PRNG_NAME} version={PRNG_VERSION} seed={batch.seed} "
            f"count={batch.count} L={batch.length} dyadic_bits={batch.dyadic_bits}",
        ]
        for start, stop in batch.shards(DEFAULT_SHARD):
            for row in batch.words(start, stop):
                digits = "".join(format(int(word), "064b") for word in row)
                lines.append("0." + digits[:batch.length])
        self._count_points(batch.count)
        path = self._output_path(config, "txt")
        self._write(path, "\n".join(lines) + "\n")
        return EXIT_PASS

    def cmd_asymptotics(self, config: RunConfig) -> int:
        """Filas de las horquillas integrales y de sumas de cola."""
        K = 1.0 if config.K is None else config.K
        beta = 0.5 if config.beta is None else config.beta
        rows = []
        for a in INTEGRAL_BOUND_GRID:
            rows.append(_bracket_row("integral", a, lemmaA1_bracket(K, beta, a).to_dict()))
        for N in TAIL_INDEX_GRID:
            rows.append(_bracket_row("tail_sum", N, tailsum_bracket(K, beta, N).to_dict()))

        header = ("kind", "param", "lower", "target", "upper", "log_scale", "in_regime", "holds")
        path = self._output_path(config, config.format)
        if config.format == "csv":
            content = _csv_table(header, rows)
        else:
            content = dump_json(self._payload(config, {
                "K": K, "beta": beta, "columns": list(header), "rows": rows}))
        self._write(path, content)
        return EXIT_PASS


def _parse_point(text: str, length: int) -> BitPoint:
    """'0b0101' se lee como 0.0101 en binario; cualquier otro texto como decimal o fracción."""
    cleaned = text.strip()
    if cleaned.startswith("0b"):
        return BitPoint.from_bits("0." + cleaned[2:])
    return BitPoint.from_decimal(cleaned, length)


def _bracket_row(kind: str, param: float, bracket: Dict[str, Any]) -> List[Any]:
    return [kind, param, bracket["lower"], bracket["target"], bracket["upper"],
            bracket["log_scale"], bracket["in_regime"], bracket["holds"]]


def _csv_table(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buffer.getvalue()


def _cell(value: Any) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return format_float(value)
    return str(value)
