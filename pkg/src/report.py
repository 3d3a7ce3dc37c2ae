# SPDX-FileCopyrightText: Copyright (c) 2025 NVIDIA CORPORATION & AFFILIATES. All rights reserved.
# SPDX-License-Identifier: Apache-2.0

"""
Deterministic report files for batch runs.

JSON is written with sorted keys and every float printed with 17 significant digits;
CSV rows echo the tolerances of the run. No timestamps are written, so identical
inputs give byte-identical files.
"""

import csv
import json
import logging
import math
import os
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from tabulate import tabulate

from src.constants import FLOAT_SIG_DIGITS

logger = logging.getLogger(__name__)

TOLERANCE_COLUMN_PREFIX = "tol_"


def format_float(x: float) -> str:
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if x == 0:
        return "0.0"
    text = f"{x:.{FLOAT_SIG_DIGITS}g}"
    if all(c not in text for c in '.eE'):
        text += ".0"
    return text


def to_jsonable(obj: Any) -> Any:
    """Plain Python values for numpy scalars/arrays, tuples and objects with to_json()."""
    if hasattr(obj, 'to_json'):
        return to_jsonable(obj.to_json())
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def _encode(obj: Any, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return format_float(obj) if math.isfinite(obj) else json.dumps(format_float(obj))
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k, ensure_ascii=False)}: {_encode(obj[k], indent, level + 1)}" for k in sorted(obj)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _encode(v, indent, level + 1) for v in obj) + "\n" + end + "]"
    raise TypeError(f"Cannot encode {type(obj).__name__} as JSON")


def dumps(obj: Any, indent: int = 2) -> str:
    """JSON text with sorted keys and 17-significant-digit floats; non-finite floats become strings."""
    return _encode(to_jsonable(obj), indent, 0) + "\n"


def write_json(path: str, obj: Any) -> str:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        f.write(dumps(obj))
    logger.debug(f"Wrote {path}")
    return path


def write_text(path: str, text: str) -> str:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        f.write(text)
    logger.debug(f"Wrote {path}")
    return path


def _cell(value: Any) -> str:
    value = to_jsonable(value)
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format_float(value)
    if isinstance(value, (list, dict)):
        return dumps(value, indent=0).replace("\n", "")
    return str(value)


def write_csv(path: str, columns: Sequence[str], rows: Sequence[Dict[str, Any]],
              tolerances: Optional[Dict[str, float]] = None) -> str:
    """
    Write rows as CSV with a header; every row gets one tol_<name> column per tolerance.

    Args:
        path: Output file
        columns: Column order; keys missing from a row are left empty
        rows: Row dictionaries
        tolerances: Tolerances echoed on every row

    Returns:
        The path written
    """
    tolerances = tolerances or {}
    tol_columns = [f"{TOLERANCE_COLUMN_PREFIX}{name}" for name in sorted(tolerances)]
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(list(columns) + tol_columns)
        for row in rows:
            cells = [_cell(row.get(c)) for c in columns]
            cells += [_cell(float(tolerances[name])) for name in sorted(tolerances)]
            writer.writerow(cells)
    logger.debug(f"Wrote {len(rows)} row(s) to {path}")
    return path


def render_table(columns: Sequence[str], rows: Sequence[Dict[str, Any]], title: Optional[str] = None) -> str:
    """tabulate grid of the rows, floats at 17 significant digits."""
    table = tabulate([[_cell(row.get(c)) for c in columns] for row in rows], headers=list(columns),
                     tablefmt="grid", disable_numparse=True)
    return f"{title}\n{table}\n" if title else table + "\n"


@dataclass
class Report:
    """
    Rows and summary of one batch run.

    write() produces <prefix>/<csv_name> (rows plus tolerance columns),
    <prefix>/report.json (everything) and <prefix>/report.txt (tabulate grid).
    """

    command: str
    prefix: str = "work"
    columns: List[str] = field(default_factory=list)
    tolerances: Dict[str, float] = field(default_factory=dict)
    seed: Optional[int] = None
    csv_name: str = "metrics.csv"
    rows: List[Dict[str, Any]] = field(default_factory=list)
    summary: Dict[str, Any] = field(default_factory=dict)
    artifacts: List[str] = field(default_factory=list)

    def add_row(self, **values: Any) -> None:
        for key in values:
            if key not in self.columns:
                self.columns.append(key)
        self.rows.append(values)

    def add_artifact(self, name: str) -> str:
        if name not in self.artifacts:
            self.artifacts.append(name)
        return os.path.join(self.prefix, name)

    def to_json(self) -> Dict[str, Any]:
        return {
            'command': self.command,
            'seed': self.seed,
            'tolerances': self.tolerances,
            'columns': self.columns,
            'rows': self.rows,
            'summary': self.summary,
            'artifacts': sorted(self.artifacts + [self.csv_name, "report.json", "report.txt"]),
        }

    def format_summary(self) -> str:
        if not self.summary:
            return ""
        pairs = [[key, _cell(self.summary[key])] for key in sorted(self.summary)]
        return tabulate(pairs, headers=["Summary", "Value"], tablefmt="grid", disable_numparse=True) + "\n"

    def write(self) -> List[str]:
        os.makedirs(self.prefix, exist_ok=True)
        paths = [
            write_csv(os.path.join(self.prefix, self.csv_name), self.columns, self.rows, self.tolerances),
            write_json(os.path.join(self.prefix, "report.json"), self),
        ]
        text = render_table(self.columns, self.rows, title=f"{self.command} ({len(self.rows)} row(s))")
        summary = self.format_summary()
        paths.append(write_text(os.path.join(self.prefix, "report.txt"), text + ("\n" + summary if summary else "")))
        logger.info(f"Report written to {self.prefix}")
        return paths


def read_rows(path: str) -> Dict[str, Any]:
    """Load a CSV or report JSON back as {'columns', 'rows', 'summary'} for re-rendering."""
    if path.lower().endswith('.csv'):
        with open(path, newline='', encoding='utf-8') as f:
            reader = csv.DictReader(f)
            rows = list(reader)
            return {'columns': list(reader.fieldnames or []), 'rows': rows, 'summary': {}}
    with open(path, encoding='utf-8') as f:
        data = json.load(f)
    if isinstance(data, dict) and 'rows' in data:
        return {'columns': data.get('columns') or sorted({k for r in data['rows'] for k in r}),
                'rows': data['rows'], 'summary': data.get('summary', {})}
    if isinstance(data, dict):
        return {'columns': ['key', 'value'], 'rows': [{'key': k, 'value': data[k]} for k in sorted(data)],
                'summary': {}}
    raise ValueError(f"{path} holds no rows")
