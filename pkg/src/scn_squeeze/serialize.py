"""JSON/CSV emission helpers with fixed float formatting.

Artifacts print IEEE-754 doubles with 17 significant digits so that emitted
files round-trip bit-exactly and byte-identical reruns can be checksummed.
"""

import json
from typing import Any, Iterable, Sequence

import numpy as np

__all__ = ["fmt_float", "dumps_17g", "write_csv"]


def fmt_float(x: float) -> str:
    if isinstance(x, float) and (x != x):  # NaN
        return "NaN"
    return f"{float(x):.17g}"


def _emit(obj: Any, parts: list, indent: int, level: int) -> None:
    pad = " " * (indent * level)
    pad_in = " " * (indent * (level + 1))
    if isinstance(obj, dict):
        if not obj:
            parts.append("{}")
            return
        parts.append("{\n")
        for k, (key, val) in enumerate(obj.items()):
            parts.append(f"{pad_in}{json.dumps(str(key))}: ")
            _emit(val, parts, indent, level + 1)
            parts.append(",\n" if k < len(obj) - 1 else "\n")
        parts.append(pad + "}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        seq = np.asarray(obj).tolist() if isinstance(obj, np.ndarray) else list(obj)
        scalars = all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in seq)
        if scalars:
            parts.append("[" + ", ".join(_scalar(v) for v in seq) + "]")
        else:
            parts.append("[\n")
            for k, val in enumerate(seq):
                parts.append(pad_in)
                _emit(val, parts, indent, level + 1)
                parts.append(",\n" if k < len(seq) - 1 else "\n")
            parts.append(pad + "]")
    else:
        parts.append(_scalar(obj))


def _scalar(v: Any) -> str:
    if isinstance(v, bool) or v is None or isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return fmt_float(float(v))
    raise TypeError(f"cannot serialize {type(v)!r}")


def dumps_17g(obj: Any, indent: int = 2) -> str:
    """Serialize nested dict/list/scalar data to JSON with %.17g floats."""
    parts: list = []
    _emit(obj, parts, indent, 0)
    return "".join(parts) + "\n"


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence], comments: Sequence[str] = ()) -> None:
    """Write rows as CSV, floats at 17 significant digits.

    ``comments`` are emitted first as ``#``-prefixed lines (provenance
    metadata such as config hashes).
    """
    with open(path, "w") as fh:
        for line in comments:
            fh.write(f"# {line}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_scalar(v).strip('"') for v in row) + "\n")
