#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Funciones Auxiliares - Analizador Takagi

Este módulo contiene utilidades de formateo de duraciones, rutas de salida de
informes, memoria del proceso e información del sistema.
"""

import platform
from pathlib import Path
from typing import Any, Dict, Optional


class TimeUtils:
    """Utilidades de tiempo."""

    @staticmethod
    def format_duration(seconds: float) -> str:
        """Formatea una duración en segundos (ej: '2m 5s' o '0.35s').

        Args:
            seconds: Duración en segundos

        Returns:
            Duración formateada
        """
        if seconds < 0:
            return "0s"
        if seconds < 60:
            return f"{seconds:.2f}s"
        minutes, secs = divmod(int(seconds), 60)
        hours, minutes = divmod(minutes, 60)
        parts = [f"{hours}h"] if hours else []
        if minutes:
            parts.append(f"{minutes}m")
        parts.append(f"{secs}s")
        return " ".join(parts)


class PathUtils:
    """Rutas de los archivos que genera la aplicación."""

    @staticmethod
    def default_output_path(command: str, suite: Optional[str], fmt: str,
                            output_dir: str = "reportes") -> Path:
        name = command if not suite else f"{command}_{suite}"
        return Path(output_dir) / f"{name}.{fmt}"


class PerformanceUtils:
    """Monitoreo de recursos del proceso."""

    @staticmethod
    def get_memory_usage() -> Optional[Dict[str, float]]:
        """Memoria del proceso en MB, o None si psutil no está disponible."""
        try:
            import psutil
        except ImportError:
            return None
        process = psutil.Process()
        info = process.memory_info()
        return {
            'rss': info.rss / 1024 / 1024,
            'vms': info.vms / 1024 / 1024,
            'percent': process.memory_percent(),
        }


def get_system_info() -> Dict[str, Any]:
    """Información del sistema y de las bibliotecas numéricas."""
    import mpmath
    import numpy
    import scipy

    info = {
        'platform': platform.system(),
        'python_version': platform.python_version(),
        'numpy': numpy.__version__,
        'scipy': scipy.__version__,
        'mpmath': mpmath.__version__,
    }
    try:
        import psutil
        info['cpu_count'] = psutil.cpu_count(logical=True)
        info['memory_total_gb'] = round(psutil.virtual_memory().total / 1024 ** 3, 2)
    except ImportError:
        pass
    return info
