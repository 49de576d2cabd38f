"""Report serialization: JSON with 17 significant digits and CSV series for plotting."""
import csv
import io
import json
import math
import sys
from enum import Enum
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np

INDENT = "  "


def format_float(value: float) -> str:
    """17 significant digits; non-finite values become ``null``."""
    if not math.isfinite(value):
        return "null"
    return format(value, ".17g")


def _encode(value: Any, depth: int) -> str:
    if isinstance(value, Enum):
        value = value.value
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, np.ndarray):
        value = value.tolist()
    if value is None or isinstance(value, bool):
        return json.dumps(value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format_float(value)
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    pad, inner = INDENT * depth, INDENT * (depth + 1)
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [
            f"{inner}{json.dumps(str(k))}: {_encode(v, depth + 1)}"
            for k, v in sorted(value.items())
        ]
        return "{\n" + ",\n".join(items) + f"\n{pad}}}"
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        items = [f"{inner}{_encode(v, depth + 1)}" for v in value]
        return "[\n" + ",\n".join(items) + f"\n{pad}]"
    raise TypeError(f"cannot serialize {type(value).__name__}")


def format_json(payload: Any) -> str:
    """Deterministic JSON: sorted keys, two-space indent, 17-digit floats."""
    return _encode(payload, 0) + "\n"


def write_text(text: str, path: Optional[str] = None):
    """Write to ``path`` (parents created) or to stdout."""
    if path is None or path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(text)


def write_report(payload: Any, path: Optional[str] = None):
    write_text(format_json(payload), path)


def format_csv(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format(v, ".17g") if isinstance(v, float) else v for v in row])
    return buffer.getvalue()


def emit_plot_data(
    header: Sequence[str], rows: Sequence[Sequence[Any]], path: Optional[str] = None
):
    """Write a CSV series with a header row, rows in the given order."""
    write_text(format_csv(header, rows), path)
