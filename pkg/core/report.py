#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Informes de Verificación - Analizador Takagi

Este módulo define el registro de resultados de una prueba (métricas, umbrales
y comprobaciones) y su serialización determinista a JSON y CSV.
"""

import csv
import io
import json
import math
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

CSV_HEADER = ("test", "N", "metric", "value")
CSV_FLOAT_FORMAT = "%.16e"
REPORT_SCHEMA = 1


@dataclass(frozen=True)
class Check:
    """Comparación de una métrica con su umbral."""
    name: str
    value: float
    threshold: float
    comparison: str = "<="
    N: Optional[int] = None

    @property
    def passed(self) -> bool:
        if math.isnan(self.value):
            return False
        if self.comparison == "<=":
            return self.value <= self.threshold
        if self.comparison == ">=":
            return self.value >= self.threshold
        raise ValueError(f"Comparación desconocida: {self.comparison}")

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "N": self.N, "value": self.value,
                "threshold": self.threshold, "comparison": self.comparison,
                "passed": self.passed}


@dataclass
class Row:
    N: Optional[int]
    metric: str
    value: float


@dataclass
class VerificationReport:
    """Resultado serializable de una ejecución de verificación.

    El veredicto se deriva únicamente de las comprobaciones registradas; un
    informe sin comprobaciones no aprueba.
    """
    test: str
    seq: str
    params: Dict[str, Any] = field(default_factory=dict)
    seed: Optional[int] = None
    sample_size: int = 0
    negative_control: bool = False
    rows: List[Row] = field(default_factory=list)
    checks: List[Check] = field(default_factory=list)
    thresholds: Dict[str, Any] = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)
    config: Dict[str, Any] = field(default_factory=dict)
    timestamp: Optional[str] = None

    def add_metric(self, metric: str, value: float, N: Optional[int] = None) -> None:
        self.rows.append(Row(N, metric, float(value)))

    def add_check(self, name: str, value: float, threshold: float,
                  comparison: str = "<=", N: Optional[int] = None) -> Check:
        check = Check(name, float(value), float(threshold), comparison, N)
        self.checks.append(check)
        return check

    def note(self, text: str) -> None:
        self.notes.append(text)

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks)

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    @property
    def metrics(self) -> Dict[str, float]:
        return {_metric_key(r): r.value for r in self.rows}

    def failed_checks(self) -> List[Check]:
        return [c for c in self.checks if not c.passed]

    def stamp(self) -> None:
        self.timestamp = datetime.now().isoformat(timespec="seconds")

    def to_dict(self) -> Dict[str, Any]:
        data = {
            "schema": REPORT_SCHEMA,
            "test": self.test,
            "seq": self.seq,
            "params": self.params,
            "seed": self.seed,
            "sample_size": self.sample_size,
            "negative_control": self.negative_control,
            "metrics": self.metrics,
            "rows": [[r.N, r.metric, r.value] for r in self.rows],
            "checks": [c.to_dict() for c in self.checks],
            "thresholds": self.thresholds,
            "verdict": self.verdict,
            "notes": list(self.notes),
            "config": self.config,
        }
        if self.timestamp is not None:
            data["timestamp"] = self.timestamp
        return data

    def to_json(self) -> str:
        return dump_json(self.to_dict())

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for r in self.rows:
            writer.writerow([self.test, "" if r.N is None else r.N, r.metric,
                             format_float(r.value)])
        for c in self.checks:
            writer.writerow([self.test, "" if c.N is None else c.N, f"check:{c.name}",
                             format_float(c.value)])
        return buffer.getvalue()

    def write(self, path: Union[str, Path], fmt: str = "json") -> Path:
        """Escribe el informe; el directorio padre se crea si no existe."""
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        if fmt == "json":
            content = self.to_json()
        elif fmt == "csv":
            content = self.to_csv()
        else:
            raise ValueError(f"Formato de salida desconocido: {fmt}")
        target.write_text(content, encoding="utf-8")
        return target


def _metric_key(row: Row) -> str:
    return row.metric if row.N is None else f"{row.metric}@N={row.N}"


def format_float(value: float) -> str:
    """Notación científica con 17 cifras significativas, sin pérdida."""
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return CSV_FLOAT_FORMAT % value


def _finite(obj: Any) -> Any:
    # JSON estricto: los no finitos se escriben como cadenas
    if isinstance(obj, float) and not math.isfinite(obj):
        return format_float(obj)
    if isinstance(obj, dict):
        return {str(k): _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    return obj


def dump_json(data: Any) -> str:
    """JSON determinista: claves ordenadas, sangría 2 y UTF-8."""
    return json.dumps(_finite(data), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def load_report(path: Union[str, Path]) -> Dict[str, Any]:
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)
