"""Bit-stable CSV/JSON writers and trajectory re-ingestion.

Floats are written with 17 significant digits, which round-trips every
double exactly.  JSON keys are sorted and non-finite numbers are written
as the strings "NaN", "Infinity" and "-Infinity".
"""

from __future__ import annotations

import enum
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import curvature
from .solver import CylinderSolution, RadialSolution, Status

SCHEMA = "curvlab.output/1"

_NONFINITE = {"NaN": math.nan, "Infinity": math.inf, "-Infinity": -math.inf}


def fmt_float(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    s = "%.17g" % x
    if not any(c in s for c in ".en"):
        s += ".0"
    return s


def _cell(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return fmt_float(x)
    if x is None:
        return ""
    return str(x)


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    lines = [f"# schema={SCHEMA}", ",".join(header)]
    for row in rows:
        lines.append(",".join(_cell(c) for c in row))
    return "\n".join(lines) + "\n"


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.write_bytes(csv_text(header, rows).encode("utf-8"))
    return path


def _parse_cell(c: str):
    if c == "":
        return None
    if c in _NONFINITE:
        return _NONFINITE[c]
    try:
        return float(c)
    except ValueError:
        return c


def read_table(path) -> tuple[list[str], list[list]]:
    """Header and rows of a file written by write_csv; empty cells become None."""
    lines = [ln for ln in Path(path).read_text().splitlines() if not ln.startswith("#")]
    return lines[0].split(","), [[_parse_cell(c) for c in ln.split(",")] for ln in lines[1:]]


def read_csv(path) -> tuple[list[str], np.ndarray]:
    """Header and numeric body of a file written by write_csv (empty cells read as NaN)."""
    header, rows = read_table(path)
    body = [[math.nan if c is None else c for c in row] for row in rows]
    return header, np.array(body, dtype=float).reshape(len(body), len(header))


def jsonable(obj):
    """Plain containers of str/int/float/bool/None; numpy and enums unwrapped."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if obj is None or isinstance(obj, str):
        return obj
    if hasattr(obj, "to_dict"):
        return jsonable(obj.to_dict())
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _encode(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{_string(k)}: {_encode(obj[k], indent, level + 1)}" for k in sorted(obj)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _encode(v, indent, level + 1) for v in obj) + "\n" + end + "]"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if obj is None:
        return "null"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        s = fmt_float(obj)
        return _string(s) if s in _NONFINITE else s
    return _string(obj)


def _string(s: str) -> str:
    import json
    return json.dumps(str(s), ensure_ascii=False)


def dumps(obj) -> str:
    """Deterministic JSON text: sorted keys, 2-space indent, trailing LF."""
    return _encode(jsonable(obj), 2, 0) + "\n"


def write_json(path, obj) -> Path:
    path = Path(path)
    path.write_bytes(dumps(obj).encode("utf-8"))
    return path


def loads(text: str):
    import json
    return _restore(json.loads(text))


def _restore(obj):
    if isinstance(obj, dict):
        return {k: _restore(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_restore(v) for v in obj]
    if isinstance(obj, str) and obj in _NONFINITE:
        return _NONFINITE[obj]
    return obj


def read_json(path):
    return loads(Path(path).read_text())


# -- trajectories ---------------------------------------------------------------

def _status(d) -> Status:
    return Status(d["kind"], None if d.get("at") is None else float(d["at"]))


def solution_from_dict(d: dict):
    """Rebuild a RadialSolution or CylinderSolution from its ``to_dict`` form."""
    d = d.get("solution", d)
    profile = curvature.from_dict(d["profile"])
    tol = d["tolerances"]
    if d.get("picture") == "cylinder":
        return CylinderSolution(int(d["n"]), profile, np.asarray(d["s"], dtype=float),
                                np.asarray(d["v"], dtype=float),
                                np.asarray(d["vprime"], dtype=float), _status(d["status"]),
                                float(tol["rel_tol"]), float(tol["abs_tol"]))
    return RadialSolution(int(d["n"]), profile, np.asarray(d["r"], dtype=float),
                          np.asarray(d["u"], dtype=float), np.asarray(d["uprime"], dtype=float),
                          _status(d["status"]), float(tol["rel_tol"]), float(tol["abs_tol"]),
                          h0=float(d.get("h0", 0.0)), regular=bool(d.get("regular", True)))


def load_trajectory(path):
    return solution_from_dict(read_json(path))
