"""Deterministic JSON rendering for metric reports.

The emitter is intentionally small: insertion-ordered keys, floats
printed with 17 significant digits (enough to round-trip float64), and
no environment-dependent content, so identical runs produce identical
bytes.
"""

from __future__ import annotations

import json
import math

from .errors import NumericalError


def _render(value) -> str:
    if value is None:
        return "null"
    if value is True:
        return "true"
    if value is False:
        return "false"
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise NumericalError(f"cannot serialize non-finite value {value!r}")
        return format(value, ".17g")
    raise NumericalError(f"cannot serialize {type(value).__name__} value")


def dumps_report(obj, indent: int = 0) -> str:
    """Render a report document (dicts, lists, scalars) as JSON text."""
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        parts = [f"{inner}{json.dumps(str(k))}: {dumps_report(v, indent + 1)}"
                 for k, v in obj.items()]
        return "{\n" + ",\n".join(parts) + f"\n{pad}}}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        parts = [f"{inner}{dumps_report(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(parts) + f"\n{pad}]"
    return _render(obj)


def report_text(document: dict) -> str:
    return dumps_report(document) + "\n"
