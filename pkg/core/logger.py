#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Sistema de Logging Personalizado - Analizador Takagi

Este módulo proporciona el logging de la aplicación en consola y archivo, con
el nivel SUCCESS, estadísticas por ejecución de verificación y exportación de
un resumen de la ejecución.
"""

import json
import logging
import queue
import threading
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from pathlib import Path
from typing import Any, Dict, List, Optional

SUCCESS = 25
LIBRARY_LOGGER = "core"


@dataclass
class RunStats:
    """Estadísticas de una ejecución (un subcomando)."""
    run_id: str
    command: str
    start_time: datetime
    end_time: Optional[datetime] = None
    checks_passed: int = 0
    checks_failed: int = 0
    points_evaluated: int = 0
    reports: List[str] = field(default_factory=list)
    errors: List[str] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)
    memory_mb: Optional[float] = None

    @property
    def total_checks(self) -> int:
        return self.checks_passed + self.checks_failed

    @property
    def pass_rate(self) -> float:
        if self.total_checks == 0:
            return 0.0
        return (self.checks_passed / self.total_checks) * 100

    @property
    def duration(self) -> timedelta:
        end = self.end_time or datetime.now()
        return end - self.start_time


class CustomFormatter(logging.Formatter):
    """Formateador con colores ANSI para consola y texto plano para archivo."""

    COLORS = {
        'DEBUG': '\033[36m',     # Cyan
        'INFO': '\033[32m',      # Verde
        'WARNING': '\033[33m',   # Amarillo
        'ERROR': '\033[31m',     # Rojo
        'CRITICAL': '\033[35m',  # Magenta
        'SUCCESS': '\033[92m',   # Verde brillante
        'RESET': '\033[0m'
    }

    def __init__(self, use_colors: bool = True):
        super().__init__()
        self.use_colors = use_colors

    def format(self, record):
        log_format = '[%(asctime)s] %(levelname)s - %(message)s'
        if hasattr(record, 'test_id'):
            log_format = '[%(asctime)s] %(levelname)s - %(test_id)s: %(message)s'

        formatter = logging.Formatter(log_format, datefmt='%Y-%m-%d %H:%M:%S')
        formatted = formatter.format(record)

        if self.use_colors and record.levelname in self.COLORS:
            formatted = f"{self.COLORS[record.levelname]}{formatted}{self.COLORS['RESET']}"
        return formatted


class CustomLogger:
    """Logger de la aplicación con cola asíncrona y estadísticas por ejecución.

    Los handlers se instalan también en el logger del paquete `core`, de modo
    que los avisos de la biblioteca llegan a la consola y al archivo.
    """

    def __init__(self, name: str = "AnalizadorTakagi", log_dir: str = "logs",
                 level: str = "INFO", use_colors: bool = True, max_log_files: int = 30):
        """Inicializa el logger.

        Args:
            name: Nombre del logger
            log_dir: Directorio donde guardar los logs
            level: Nivel inicial (DEBUG, INFO, WARNING, ERROR)
            use_colors: Colores ANSI en consola
            max_log_files: Archivos de log conservados por cleanup_old_logs
        """
        self.name = name
        self.log_dir = Path(log_dir)
        self.log_dir.mkdir(parents=True, exist_ok=True)
        self.max_log_files = max_log_files
        self.log_level = getattr(logging, level.upper(), logging.INFO)
        self.use_colors = use_colors

        self.current_run: Optional[RunStats] = None
        self.runs_history: List[RunStats] = []

        self.log_queue: "queue.Queue" = queue.Queue()
        self.stop_logging = threading.Event()
        self.log_thread: Optional[threading.Thread] = None

        self._setup_logger()
        self._start_log_thread()

    def _setup_logger(self):
        logging.addLevelName(SUCCESS, 'SUCCESS')
        self.log_file = self.log_dir / f"analysis_{datetime.now().strftime('%Y-%m-%d')}.log"
        self.handlers: List[logging.Handler] = []

        # Consola en stderr: stdout queda libre para los datos
        console_handler = logging.StreamHandler()
        console_handler.setFormatter(CustomFormatter(use_colors=self.use_colors))
        self.handlers.append(console_handler)

        file_handler = logging.FileHandler(self.log_file, encoding='utf-8')
        file_handler.setFormatter(CustomFormatter(use_colors=False))
        self.handlers.append(file_handler)

        self.logger = logging.getLogger(self.name)
        self.library_logger = logging.getLogger(LIBRARY_LOGGER)
        for target in (self.logger, self.library_logger):
            target.handlers.clear()
            target.propagate = False
            for handler in self.handlers:
                target.addHandler(handler)
        self.set_log_level(logging.getLevelName(self.log_level))

    def _start_log_thread(self):
        self.log_thread = threading.Thread(target=self._log_worker, daemon=True)
        self.log_thread.start()

    def _log_worker(self):
        while True:
            item = self.log_queue.get()
            try:
                if item is None:
                    break
                level, message, test_id = item
                record = self.logger.makeRecord(
                    self.name, _level_number(level), '', 0, message, (), None)
                if test_id:
                    record.test_id = test_id
                self.logger.handle(record)
            except Exception as e:
                print(f"Error en log worker: {e}")
            finally:
                self.log_queue.task_done()

    def log_operation(self, level: str, message: str, test_id: Optional[str] = None):
        """Registra un mensaje de forma asíncrona.

        Args:
            level: Nivel de log (DEBUG, INFO, WARNING, ERROR, SUCCESS)
            message: Mensaje a registrar
            test_id: Identificador de la prueba relacionada (opcional)
        """
        if self.stop_logging.is_set():
            self.logger.log(_level_number(level), message)
            return
        self.log_queue.put((level, message, test_id))
        if self.current_run and level.upper() == 'ERROR':
            self.current_run.errors.append(message)
        elif self.current_run and level.upper() == 'WARNING':
            self.current_run.warnings.append(message)

    def flush(self):
        """Espera a que la cola de mensajes se vacíe."""
        if not self.stop_logging.is_set():
            self.log_queue.join()

    def start_run(self, command: str, run_id: Optional[str] = None) -> str:
        """Inicia una ejecución y devuelve su identificador."""
        if run_id is None:
            run_id = f"run_{datetime.now().strftime('%Y%m%d_%H%M%S')}"
        if self.current_run:
            self.end_run()
        self.current_run = RunStats(run_id=run_id, command=command, start_time=datetime.now())
        self.log_operation('INFO', f'Ejecución iniciada: {command} ({run_id})')
        return run_id

    def log_check(self, test_id: str, name: str, passed: bool, value: float, threshold: float):
        """Registra el resultado de una comprobación individual."""
        status = 'OK' if passed else 'FALLO'
        level = 'DEBUG' if passed else 'WARNING'
        self.log_operation(level, f'{status} {name}: {value:.6g} (umbral {threshold:.6g})', test_id)
        if self.current_run:
            if passed:
                self.current_run.checks_passed += 1
            else:
                self.current_run.checks_failed += 1

    def log_report(self, test_id: str, verdict: str, path: Optional[str] = None):
        level = 'SUCCESS' if verdict == 'pass' else 'ERROR'
        message = f'Veredicto: {verdict}'
        if path:
            message += f' - informe en {path}'
            if self.current_run:
                self.current_run.reports.append(path)
        self.log_operation(level, message, test_id)

    def end_run(self) -> Optional[RunStats]:
        """Finaliza la ejecución actual y la pasa al historial."""
        if not self.current_run:
            return None
        run = self.current_run
        run.end_time = datetime.now()
        self.log_operation('INFO',
            f'Ejecución completada: {run.checks_passed} comprobaciones superadas, '
            f'{run.checks_failed} fallidas en {run.duration.total_seconds():.2f}s')
        self.runs_history.append(run)
        self.current_run = None
        return run

    def set_log_level(self, level: str):
        self.log_level = getattr(logging, str(level).upper(), logging.INFO)
        for target in (self.logger, self.library_logger):
            target.setLevel(self.log_level)
        for handler in self.handlers:
            handler.setLevel(self.log_level)

    def cleanup_old_logs(self):
        """Conserva solo los max_log_files archivos de log más recientes."""
        try:
            log_files = sorted(self.log_dir.glob("analysis_*.log"),
                               key=lambda p: p.stat().st_mtime, reverse=True)
            for old_log in log_files[self.max_log_files:]:
                old_log.unlink()
                self.log_operation('INFO', f'Log antiguo eliminado: {old_log.name}')
        except OSError as e:
            self.log_operation('ERROR', f'Error al limpiar logs antiguos: {e}')

    def export_run_report(self, run: RunStats, export_path: str) -> bool:
        """Exporta el resumen de una ejecución a JSON."""
        try:
            data = _run_to_dict(run)
            data['errors'] = run.errors
            data['warnings'] = run.warnings
            data['export_date'] = datetime.now().isoformat()
            with open(export_path, 'w', encoding='utf-8') as f:
                json.dump(data, f, indent=2, ensure_ascii=False)
            return True
        except OSError as e:
            self.log_operation('ERROR', f'Error al exportar resumen: {e}')
            return False

    def shutdown(self):
        """Cierra el logging: finaliza la ejecución y detiene el hilo."""
        if self.current_run:
            self.end_run()
        self.cleanup_old_logs()
        if not self.stop_logging.is_set():
            self.log_queue.put(None)
            if self.log_thread and self.log_thread.is_alive():
                self.log_thread.join(timeout=5.0)
            self.stop_logging.set()
        for handler in self.handlers:
            handler.flush()
        for target in (self.logger, self.library_logger):
            for handler in self.handlers:
                target.removeHandler(handler)
        for handler in self.handlers:
            handler.close()


def _level_number(level: str) -> int:
    if level.upper() == 'SUCCESS':
        return SUCCESS
    return getattr(logging, level.upper(), logging.INFO)


def _run_to_dict(run: RunStats) -> Dict[str, Any]:
    return {
        'run_id': run.run_id,
        'command': run.command,
        'start_time': run.start_time.isoformat(),
        'end_time': run.end_time.isoformat() if run.end_time else None,
        'duration': str(run.duration),
        'checks_passed': run.checks_passed,
        'checks_failed': run.checks_failed,
        'points_evaluated': run.points_evaluated,
        'pass_rate': run.pass_rate,
        'reports': list(run.reports),
        'memory_mb': run.memory_mb,
    }
