"""JSON wire formats and canonical report rendering.

Matrix format::

    {"rows": m, "cols": n, "data": [[[re, im], ...n pairs], ...m rows]}

Canonical output sorts keys and prints every float with ``%.17g`` so that
identical inputs give byte-identical files.
"""

from __future__ import annotations

import dataclasses
import json
import math
from pathlib import Path
from typing import Any

import numpy as np


class SchemaError(ValueError):
    """Input JSON does not match the expected layout; ``pointer`` locates it."""

    code = "SCHEMA_ERROR"
    exit_code = 1

    def __init__(self, pointer: str, message: str):
        super().__init__(f"{pointer}: {message}")
        self.pointer = pointer
        self.message = f"{pointer}: {message}"
        self.details = {"pointer": pointer}

    def to_dict(self) -> dict:
        return {"code": self.code, "message": self.message, "details": self.details}


def _reject_constant(name):
    raise ValueError(f"non-finite number {name} is not allowed")


def load_json(path) -> Any:
    text = Path(path).read_text()
    try:
        return json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"line {exc.lineno} col {exc.colno}", exc.msg) from exc
    except ValueError as exc:
        raise SchemaError("/", str(exc)) from exc


def _number(x, pointer: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise SchemaError(pointer, f"expected a number, got {json.dumps(x)}")
    v = float(x)
    if not math.isfinite(v):
        raise SchemaError(pointer, "non-finite value")
    return v


def _positive_int(x, pointer: str) -> int:
    if isinstance(x, bool) or not isinstance(x, int) or x < 1:
        raise SchemaError(pointer, f"expected a positive integer, got {json.dumps(x)}")
    return x


def matrix_from_json(obj, pointer: str = "") -> np.ndarray:
    if not isinstance(obj, dict):
        raise SchemaError(pointer or "/", "expected a matrix object")
    extra = set(obj) - {"rows", "cols", "data"}
    if extra:
        raise SchemaError(pointer or "/", f"unknown fields {sorted(extra)}")
    for key in ("rows", "cols", "data"):
        if key not in obj:
            raise SchemaError(pointer or "/", f"missing field {key!r}")
    m = _positive_int(obj["rows"], f"{pointer}/rows")
    n = _positive_int(obj["cols"], f"{pointer}/cols")
    data = obj["data"]
    if not isinstance(data, list) or len(data) != m:
        got = len(data) if isinstance(data, list) else type(data).__name__
        raise SchemaError(f"{pointer}/data", f"expected {m} rows, got {got}")
    out = np.empty((m, n), dtype=np.complex128)
    for i, row in enumerate(data):
        rp = f"{pointer}/data/{i}"
        if not isinstance(row, list) or len(row) != n:
            got = len(row) if isinstance(row, list) else type(row).__name__
            raise SchemaError(rp, f"row {i} must have {n} entries, got {got}")
        for j, entry in enumerate(row):
            ep = f"{rp}/{j}"
            if not isinstance(entry, list) or len(entry) != 2:
                raise SchemaError(ep, f"entry must be a [re, im] pair, got {json.dumps(entry)}")
            out[i, j] = complex(_number(entry[0], f"{ep}/0"), _number(entry[1], f"{ep}/1"))
    return out


def matrix_to_json(a) -> dict:
    a = np.asarray(a, dtype=np.complex128)
    return {
        "rows": int(a.shape[0]),
        "cols": int(a.shape[1]),
        "data": [[[float(z.real), float(z.imag)] for z in row] for row in a],
    }


def parse_matrix_file(path) -> np.ndarray:
    return matrix_from_json(load_json(path))


def parse_trace_file(path) -> tuple[list[np.ndarray], np.ndarray]:
    obj = load_json(path)
    if not isinstance(obj, dict):
        raise SchemaError("/", "expected an object with 'limit' and 'samples'")
    extra = set(obj) - {"limit", "samples"}
    if extra:
        raise SchemaError("/", f"unknown fields {sorted(extra)}")
    if "limit" not in obj or "samples" not in obj:
        raise SchemaError("/", "missing 'limit' or 'samples'")
    if not isinstance(obj["samples"], list):
        raise SchemaError("/samples", "expected a list of matrices")
    limit = matrix_from_json(obj["limit"], "/limit")
    samples = [matrix_from_json(s, f"/samples/{i}") for i, s in enumerate(obj["samples"])]
    return samples, limit


def parse_family_file(path) -> list[np.ndarray]:
    obj = load_json(path)
    if not isinstance(obj, dict) or set(obj) != {"coefficients"}:
        raise SchemaError("/", "expected an object with exactly the field 'coefficients'")
    coeffs = obj["coefficients"]
    if not isinstance(coeffs, list) or not coeffs:
        raise SchemaError("/coefficients", "expected a non-empty list of matrices")
    return [matrix_from_json(c, f"/coefficients/{i}") for i, c in enumerate(coeffs)]


def to_jsonable(obj) -> Any:
    """Convert reports (dataclasses, arrays, numpy scalars) to plain JSON data.

    Non-finite floats become ``None``; a BoundReport without a bound value
    reports the string ``"hypothesis violated"``.
    """
    from .perturb import BoundReport

    if isinstance(obj, BoundReport):
        d = {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
        if obj.bound_value is None:
            d["bound_value"] = "hypothesis violated"
        return d
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, np.ndarray):
        if obj.ndim == 2:
            return matrix_to_json(obj)
        return [to_jsonable(x) for x in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(x) for x in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def canonical_dumps(data) -> str:
    """Sorted keys, no whitespace variation, floats as ``%.17g``."""
    if data is None:
        return "null"
    if isinstance(data, bool):
        return "true" if data else "false"
    if isinstance(data, int):
        return str(data)
    if isinstance(data, float):
        if not math.isfinite(data):
            return "null"
        return "%.17g" % data
    if isinstance(data, str):
        return json.dumps(data)
    if isinstance(data, dict):
        items = sorted(data.items())
        return "{" + ",".join(json.dumps(str(k)) + ":" + canonical_dumps(v) for k, v in items) + "}"
    if isinstance(data, (list, tuple)):
        return "[" + ",".join(canonical_dumps(v) for v in data) + "]"
    raise TypeError(f"cannot serialize {type(data).__name__}")


def _text(data, indent: int = 0) -> list[str]:
    pad = "  " * indent
    if isinstance(data, dict) and set(data) == {"rows", "cols", "data"}:
        arr = matrix_from_json(data)
        body = np.array2string(arr, precision=6, suppress_small=True)
        return [pad + line for line in body.splitlines()]
    if isinstance(data, dict):
        lines = []
        for k in sorted(data):
            v = data[k]
            if isinstance(v, (dict, list)) and v:
                lines.append(f"{pad}{k}:")
                lines.extend(_text(v, indent + 1))
            else:
                lines.append(f"{pad}{k}: {_scalar(v)}")
        return lines
    if isinstance(data, list):
        if all(not isinstance(v, (dict, list)) for v in data):
            return [pad + "[" + ", ".join(_scalar(v) for v in data) + "]"]
        lines = []
        for i, v in enumerate(data):
            lines.append(f"{pad}- [{i}]")
            lines.extend(_text(v, indent + 1))
        return lines
    return [pad + _scalar(data)]


def _scalar(v) -> str:
    if isinstance(v, float):
        return f"{v:.10g}"
    if v is None:
        return "-"
    return str(v)


def render(report, fmt: str = "json") -> str:
    data = to_jsonable(report)
    if fmt == "json":
        return canonical_dumps(data) + "\n"
    if fmt == "text":
        return "\n".join(_text(data)) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def emit_report(report, fmt: str = "json", destination=None) -> None:
    """Write ``report`` to ``destination`` (path) or stdout when ``None``."""
    out = render(report, fmt)
    if destination is None or str(destination) == "-":
        import sys

        sys.stdout.write(out)
        sys.stdout.flush()
    else:
        Path(destination).write_text(out)
