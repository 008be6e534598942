#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Analizador Takagi v2.0.0
Evaluación con precisión garantizada y verificación Monte Carlo de funciones
de la clase Takagi desde la línea de comandos
"""

import json
import logging
import os
import sys
from pathlib import Path

# Agregar el directorio actual al path para importaciones
sys.path.insert(0, str(Path(__file__).parent))

VERSION_FILE = Path(__file__).parent / "version.json"


def check_python_version():
    """Verifica que la versión de Python sea compatible."""
    if sys.version_info < (3, 9):
        print(
            f"Esta aplicación requiere Python 3.9 o superior.\n"
            f"Versión actual: {sys.version_info.major}.{sys.version_info.minor}.{sys.version_info.micro}",
            file=sys.stderr,
        )
        sys.exit(1)


def check_dependencies(verbose: bool = False):
    """Verifica que las dependencias requeridas estén instaladas."""
    missing_deps = []
    optional_deps = []

    critical_deps = {
        'numpy': 'Vectores de bits y generador Philox',
        'scipy': 'Distribuciones y pruebas de Kolmogorov-Smirnov',
        'mpmath': 'Cuadratura de referencia de alta precisión',
        'packaging': 'Versión del esquema de configuración',
    }
    for dep, description in critical_deps.items():
        try:
            __import__(dep)
        except ImportError:
            missing_deps.append(f"{dep} ({description})")

    optional_deps_list = {
        'psutil': 'Comprobación de memoria disponible',
        'hypothesis': 'Pruebas basadas en propiedades',
    }
    for dep, description in optional_deps_list.items():
        try:
            __import__(dep)
        except ImportError:
            optional_deps.append(f"{dep} ({description})")

    if missing_deps:
        print(
            "Faltan dependencias críticas:\n\n" +
            "\n".join(f"• {dep}" for dep in missing_deps) +
            "\n\nInstale las dependencias con: pip install -r requirements.txt",
            file=sys.stderr,
        )
        sys.exit(1)

    if optional_deps:
        print(
            "ADVERTENCIA: dependencias opcionales no encontradas:\n" +
            "\n".join(f"• {dep}" for dep in optional_deps),
            file=sys.stderr,
        )
    elif verbose:
        print("Todas las dependencias están instaladas.")


def setup_environment():
    """Configura el entorno de la aplicación."""
    for directory in ('logs', 'reportes'):
        Path(directory).mkdir(exist_ok=True)
    os.environ.setdefault('PYTHONIOENCODING', 'utf-8')


def handle_exception(exc_type, exc_value, exc_traceback):
    """Maneja excepciones no capturadas."""
    if issubclass(exc_type, KeyboardInterrupt):
        sys.__excepthook__(exc_type, exc_value, exc_traceback)
        return

    logging.getLogger("AnalizadorTakagi").error(
        "Excepción no capturada", exc_info=(exc_type, exc_value, exc_traceback))
    print(
        f"ERROR CRÍTICO: {exc_type.__name__}: {exc_value}\n"
        f"Si el problema persiste, adjunte el log de 'logs/' al reportar el error.",
        file=sys.stderr,
    )


def read_version() -> str:
    try:
        with open(VERSION_FILE, 'r', encoding='utf-8') as f:
            return json.load(f).get("version", "desconocida")
    except (OSError, json.JSONDecodeError):
        return "desconocida"


def show_version():
    """Muestra información de versión."""
    from utils.helpers import get_system_info

    info = get_system_info()
    print(f"Analizador Takagi {read_version()}")
    for key, value in info.items():
        print(f"  {key}: {value}")
    print(f"  directorio: {Path(__file__).parent.absolute()}")


def main(argv=None) -> int:
    """Función principal de la aplicación."""
    argv = sys.argv[1:] if argv is None else argv
    if argv and argv[0] in ('-v', '--version'):
        show_version()
        return 0
    if argv and argv[0] == '--check-deps':
        check_python_version()
        check_dependencies(verbose=True)
        return 0

    check_python_version()
    check_dependencies()
    setup_environment()
    sys.excepthook = handle_exception

    from cli import main as cli_main

    try:
        return cli_main(argv)
    except KeyboardInterrupt:
        print("\nEjecución interrumpida por el usuario.", file=sys.stderr)
        return 130


if __name__ == "__main__":
    sys.exit(main())
