#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Interfaz de Línea de Comandos - Analizador Takagi

Códigos de salida: 0 aprobado, 1 prueba fallida, 2 error de uso,
3 fallo numérico o de precisión.
"""

import sys
from typing import List, Optional

from core.config_manager import ConfigManager
from core.errors import ConfigError
from core.logger import CustomLogger

from .commands import EXIT_USAGE, CommandRunner
from .parser import build_parser

CONFIG_FILE = "config.json"


def main(argv: Optional[List[str]] = None) -> int:
    """Punto de entrada de la CLI.

    Args:
        argv: Argumentos sin el nombre del programa (None: sys.argv[1:])

    Returns:
        Código de salida
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else 0

    try:
        config_manager = ConfigManager(CONFIG_FILE)
    except ConfigError as e:
        print(f"Error de configuración: {e}", file=sys.stderr)
        return EXIT_USAGE

    logger = CustomLogger(
        log_dir=config_manager.get_app_setting("log_dir", "logs"),
        level=args.log_level or config_manager.get_app_setting("log_level", "INFO"),
        use_colors=config_manager.get_app_setting("use_colors", True) and sys.stderr.isatty(),
        max_log_files=config_manager.get_app_setting("max_log_files", 30),
    )
    try:
        return CommandRunner(config_manager, logger).run(args)
    finally:
        logger.shutdown()


__all__ = ["main", "build_parser", "CommandRunner"]
