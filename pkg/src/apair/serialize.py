"""JSON emission with fixed float formatting, and Signal / IndexSet files.

Floats are written with 17 significant digits so that a report parsed and
re-emitted is byte-identical.  Infinite values are written as the string
``"inf"`` (``"-inf"``, ``"nan"``) since JSON has no literal for them.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .group import GroupSpec, IndexSet, Signal


def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return "%.17g" % x


def dumps(obj, indent: int | None = None, _level: int = 0) -> str:
    """Serialize ``obj`` to JSON text (dicts keep insertion order)."""
    nl = "" if indent is None else "\n" + " " * (indent * (_level + 1))
    end = "" if indent is None else "\n" + " " * (indent * _level)
    sep = ", " if indent is None else ","
    if hasattr(obj, "to_dict"):
        obj = obj.to_dict()
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [json.dumps(str(k)) + ": " + dumps(v, indent, _level + 1) for k, v in obj.items()]
        return "{" + nl + (sep + nl).join(items) + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        items = [dumps(v, indent, _level + 1) for v in obj]
        return "[" + nl + (sep + nl).join(items) + end + "]"
    if isinstance(obj, (complex, np.complexfloating)):
        return dumps([obj.real, obj.imag])
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def decode_float(v) -> float:
    if isinstance(v, str):
        return float(v)
    return float(v)


# -- signals and index sets ------------------------------------------------------------

def signal_to_dict(f: Signal) -> dict:
    return {"group": f.spec.to_dict(), "values": [[z.real, z.imag] for z in f.values.tolist()]}


def signal_from_dict(doc: dict) -> Signal:
    spec = GroupSpec(doc["group"]["N"], doc["group"].get("d", 1))
    vals = np.array([[decode_float(a), decode_float(b)] for a, b in doc["values"]], dtype=np.float64)
    if vals.size == 0:
        vals = vals.reshape(0, 2)
    return Signal(spec, vals[:, 0] + 1j * vals[:, 1])


def indexset_to_dict(s: IndexSet) -> dict:
    return {"group": s.spec.to_dict(), "indices": list(s.members)}


def indexset_from_dict(doc: dict) -> IndexSet:
    spec = GroupSpec(doc["group"]["N"], doc["group"].get("d", 1))
    idx = doc["indices"]
    if list(idx) != sorted(set(idx)):
        raise ValueError("index file must list sorted, distinct indices")
    return IndexSet(spec, idx)


def write_signal(path, f: Signal) -> None:
    Path(path).write_text(dumps(signal_to_dict(f)) + "\n")


def read_signal(path) -> Signal:
    return signal_from_dict(json.loads(Path(path).read_text()))


def write_indexset(path, s: IndexSet) -> None:
    Path(path).write_text(dumps(indexset_to_dict(s)) + "\n")


def read_indexset(path) -> IndexSet:
    return indexset_from_dict(json.loads(Path(path).read_text()))
