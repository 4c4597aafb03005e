"""Bit-stable report serialization (canonical JSON and CSV).

Identical inputs must yield byte-identical files: keys are sorted, reals are
printed with 17 significant digits (round-trip exact for doubles), lines end
with LF, and the file ends with a single LF.  Infinities serialize as the
strings "inf"/"-inf" (JSON has no literal for them); NaN is rejected because
no report field is allowed to be NaN.
"""

from __future__ import annotations

import dataclasses
import json
import math
from enum import Enum
from typing import Any, Mapping, Sequence

__all__ = [
    "format_real",
    "to_jsonable",
    "canonical_json",
    "canonical_csv",
    "write_text",
]


def format_real(x: float) -> str:
    """Decimal form with 17 significant digits; normalizes -0.0 to 0."""
    if math.isnan(x):
        raise ValueError("NaN is not serializable in reports")
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if x == 0.0:
        x = 0.0
    return format(x, ".17g")


def to_jsonable(obj: Any) -> Any:
    """Recursively convert dataclasses/enums/sequences to plain containers."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {
            f.name: to_jsonable(getattr(obj, f.name))
            for f in dataclasses.fields(obj)
        }
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, Mapping):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if hasattr(obj, "tolist"):  # ndarray / numpy scalars
        return to_jsonable(obj.tolist())
    return obj


def _emit(obj: Any, out: list[str]) -> None:
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=False))
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        if math.isinf(obj):
            out.append(json.dumps(format_real(obj)))
        else:
            out.append(format_real(obj))
    elif isinstance(obj, Mapping):
        out.append("{")
        first = True
        for key in sorted(obj):
            if not isinstance(key, str):
                raise TypeError(f"JSON object keys must be str, got {key!r}")
            if not first:
                out.append(",")
            first = False
            out.append(json.dumps(key, ensure_ascii=False))
            out.append(":")
            _emit(obj[key], out)
        out.append("}")
    elif isinstance(obj, Sequence):
        out.append("[")
        for i, item in enumerate(obj):
            if i:
                out.append(",")
            _emit(item, out)
        out.append("]")
    else:
        raise TypeError(f"not canonically serializable: {type(obj)!r}")


def canonical_json(obj: Any) -> str:
    out: list[str] = []
    _emit(to_jsonable(obj), out)
    return "".join(out) + "\n"


def _csv_cell(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format_real(value)
    if isinstance(value, int):
        return str(value)
    text = str(value)
    if any(c in text for c in ",\"\n"):
        text = '"' + text.replace('"', '""') + '"'
    return text


def canonical_csv(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    lines = [",".join(header)]
    for row in rows:
        if len(row) != len(header):
            raise ValueError("CSV row length does not match header")
        lines.append(",".join(_csv_cell(v) for v in row))
    return "\n".join(lines) + "\n"


def write_text(path: str, text: str) -> None:
    """Write with LF endings regardless of platform."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
