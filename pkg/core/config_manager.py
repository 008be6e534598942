#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Gestor de Configuración - Analizador Takagi

Este módulo maneja la carga y el guardado de config.json (perfiles de
verificación, umbrales estadísticos y ajustes de la aplicación) y construye
la configuración efectiva de cada ejecución.
"""

import json
import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional

from packaging.version import InvalidVersion, Version

from .errors import ConfigError
from .montecarlo import Thresholds

SCHEMA_VERSION = "1.0"
SEED_ENV = "TAKAGI_SEED"
DEFAULT_SEED = 7
DEFAULT_PROFILE = "acceptance"
PROFILE_KEYS = {
    "samples": int,
    "paths": int,
    "bit_length": int,
    "seed": int,
    "workers": int,
}


@dataclass
class RunConfig:
    """Configuración efectiva de una ejecución; se incrusta en cada informe."""
    command: str
    suite: Optional[str] = None
    seq: Optional[str] = None
    N: List[int] = field(default_factory=list)
    N_range: List[int] = field(default_factory=list)
    samples: int = 10_000
    paths: int = 100
    seed: int = DEFAULT_SEED
    bit_length: int = 128
    dyadic_bits: Optional[int] = None
    tol: float = 1e-12
    grid: int = 1024
    x: Optional[str] = None
    r: Optional[float] = None
    K: Optional[float] = None
    beta: Optional[float] = None
    N_prime: int = 10_000
    cesaro_paths: int = 10
    profile: str = DEFAULT_PROFILE
    output: Optional[str] = None
    format: str = "json"
    workers: int = 1
    timestamp: bool = True
    thresholds: Dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "RunConfig":
        names = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - names)
        if unknown:
            raise ConfigError(f"Claves desconocidas en la configuración: {unknown}")
        if "command" not in data:
            raise ConfigError("Falta la clave requerida: command")
        return cls(**dict(data))

    def save(self, path: str) -> None:
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True, ensure_ascii=False)

    @classmethod
    def load(cls, path: str) -> "RunConfig":
        try:
            with open(path, 'r', encoding='utf-8') as f:
                return cls.from_dict(json.load(f))
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"No se pudo leer la configuración {path}: {e}") from None


class ConfigManager:
    """Gestor de config.json con perfiles, umbrales y ajustes de la aplicación."""

    def __init__(self, config_file: str = "config.json", save_default: bool = True):
        """Inicializa el gestor de configuración.

        Args:
            config_file: Ruta al archivo de configuración
            save_default: Escribir la configuración por defecto si el archivo no existe
        """
        self.config_file = Path(config_file)
        self.config_data: Dict[str, Any] = {}
        self.save_default = save_default
        self.load_config()

    def load_config(self) -> bool:
        """Carga la configuración y comprueba la versión del esquema.

        Returns:
            True si se leyó del archivo, False si se usaron los valores por defecto

        Raises:
            ConfigError: Si el archivo no es JSON válido o su esquema es más nuevo
        """
        if not self.config_file.exists():
            self._create_default_config()
            if self.save_default:
                self.save_config()
            return False
        try:
            with open(self.config_file, 'r', encoding='utf-8') as f:
                self.config_data = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"Error al cargar configuración {self.config_file}: {e}") from None
        self._check_schema()
        return True

    def _check_schema(self):
        raw = str(self.config_data.get("schema_version", "0"))
        try:
            found = Version(raw)
        except InvalidVersion:
            raise ConfigError(f"schema_version inválida: {raw!r}") from None
        if found.major > Version(SCHEMA_VERSION).major:
            raise ConfigError(
                f"Esquema {found} más nuevo que el soportado ({SCHEMA_VERSION})")

    def save_config(self) -> bool:
        try:
            self.config_file.parent.mkdir(parents=True, exist_ok=True)
            with open(self.config_file, 'w', encoding='utf-8') as f:
                json.dump(self.config_data, f, indent=2, ensure_ascii=False)
            return True
        except OSError as e:
            print(f"Error al guardar configuración: {e}")
            return False

    def _create_default_config(self):
        defaults = Thresholds()
        self.config_data = {
            "schema_version": SCHEMA_VERSION,
            "profiles": {
                "acceptance": {
                    "samples": 100_000,
                    "paths": 100,
                    "bit_length": 128,
                    "seed": DEFAULT_SEED,
                    "workers": 4,
                },
                "rapido": {
                    "samples": 2_000,
                    "paths": 20,
                    "bit_length": 128,
                    "seed": DEFAULT_SEED,
                    "workers": 1,
                },
            },
            "thresholds": {k: v["value"] for k, v in defaults.to_dict().items() if k != "eta"},
            "thresholds_justification": dict(Thresholds.JUSTIFICATION),
            "app_settings": {
                "log_level": "INFO",
                "log_dir": "logs",
                "max_log_files": 30,
                "output_dir": "reportes",
                "output_format": "json",
                "float_format": "%.16e",
                "use_colors": True,
                "eta": defaults.eta,
            },
        }

    def get_profile(self, profile_name: str) -> Optional[Dict[str, Any]]:
        return self.config_data.get("profiles", {}).get(profile_name)

    def save_profile(self, profile_name: str, profile: Dict[str, Any]) -> bool:
        """Guarda un perfil tras validarlo.

        Raises:
            ConfigError: Si el perfil no es válido
        """
        errors = self.validate_profile(profile)
        if errors:
            raise ConfigError("; ".join(errors))
        self.config_data.setdefault("profiles", {})[profile_name] = dict(profile)
        return self.save_config()

    def list_profiles(self) -> List[str]:
        return list(self.config_data.get("profiles", {}).keys())

    def get_app_setting(self, setting_name: str, default_value: Any = None) -> Any:
        return self.config_data.get("app_settings", {}).get(setting_name, default_value)

    def get_thresholds(self, overrides: Optional[Mapping[str, float]] = None) -> Thresholds:
        """Umbrales por defecto, sustituidos por los del archivo y luego por `overrides`."""
        merged: Dict[str, float] = dict(self.config_data.get("thresholds", {}))
        eta = self.get_app_setting("eta")
        if eta is not None:
            merged["eta"] = eta
        merged.update(overrides or {})
        return Thresholds.from_dict(merged)

    def validate_profile(self, profile_data: Dict[str, Any]) -> List[str]:
        """Valida un perfil de verificación.

        Args:
            profile_data: Datos del perfil a validar

        Returns:
            Lista de errores encontrados (vacía si es válido)
        """
        errors = []
        for key, expected_type in PROFILE_KEYS.items():
            if key not in profile_data:
                errors.append(f"Falta la clave requerida: {key}")
            elif not isinstance(profile_data[key], expected_type) or isinstance(profile_data[key], bool):
                errors.append(f"Tipo incorrecto para {key}: esperado {expected_type.__name__}")
        if isinstance(profile_data.get("samples"), int) and profile_data["samples"] < 1:
            errors.append("samples debe ser >= 1")
        if isinstance(profile_data.get("paths"), int) and profile_data["paths"] < 1:
            errors.append("paths debe ser >= 1")
        if isinstance(profile_data.get("bit_length"), int) and profile_data["bit_length"] < 64:
            errors.append("bit_length debe ser >= 64")
        if isinstance(profile_data.get("seed"), int) and not (0 <= profile_data["seed"] < 1 << 64):
            errors.append("seed debe ser un entero de 64 bits sin signo")
        if isinstance(profile_data.get("workers"), int) and profile_data["workers"] < 1:
            errors.append("workers debe ser >= 1")
        return errors

    def build_run_config(self, command: str, profile: Optional[str] = None,
                         overrides: Optional[Mapping[str, Any]] = None,
                         config_path: Optional[str] = None,
                         environ: Optional[Mapping[str, str]] = None) -> RunConfig:
        """Configuración efectiva con precedencia opciones > archivo > valores por defecto.

        El archivo es primero el perfil de config.json y encima el RunConfig
        de `config_path`; la semilla por defecto sale de TAKAGI_SEED.
        """
        environ = os.environ if environ is None else environ
        overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
        profile = overrides.get("profile") or profile or DEFAULT_PROFILE
        base = self.get_profile(profile)
        if base is None:
            raise ConfigError(f"Perfil desconocido: {profile!r} (disponibles: {self.list_profiles()})")
        errors = self.validate_profile(base)
        if errors:
            raise ConfigError(f"Perfil {profile!r} inválido: " + "; ".join(errors))

        values: Dict[str, Any] = {"command": command, "profile": profile}
        values.update({k: base[k] for k in PROFILE_KEYS})
        values["format"] = self.get_app_setting("output_format", "json")
        if SEED_ENV in environ:
            try:
                values["seed"] = int(environ[SEED_ENV])
            except ValueError:
                raise ConfigError(f"{SEED_ENV} no es un entero: {environ[SEED_ENV]!r}") from None
        if config_path:
            stored = RunConfig.load(config_path).to_dict()
            stored.pop("command", None)
            values.update(stored)
        values.update(overrides)
        values["command"] = command
        return RunConfig.from_dict(values)
