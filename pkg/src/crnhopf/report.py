"""Deterministic rendering of analysis results as JSON and plain text."""

from __future__ import annotations

import json
import math
from fractions import Fraction
from typing import Any

import numpy as np

__all__ = ["rational_repr", "to_plain", "render_json", "render_text", "render_report", "format_float"]

SIG_DIGITS = 15


def rational_repr(q) -> int | str | float:
    """Integers stay integers, other rationals become ``"p/q"`` strings."""
    if isinstance(q, bool):
        return q
    if isinstance(q, (int, np.integer)):
        return int(q)
    if isinstance(q, Fraction):
        return q.numerator if q.denominator == 1 else f"{q.numerator}/{q.denominator}"
    return format_float(q)


def format_float(x) -> float | str | None:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(f"{x:.{SIG_DIGITS}g}")


def to_plain(obj: Any) -> Any:
    """JSON-ready copy: rationals exact, floats at 15 significant digits."""
    if hasattr(obj, "to_json"):
        return to_plain(obj.to_json())
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_plain(v) for v in obj.tolist()]
    if obj is None or isinstance(obj, (str, bool)):
        return obj
    if isinstance(obj, (int, np.integer, Fraction)):
        return rational_repr(obj)
    if isinstance(obj, (float, np.floating)):
        return format_float(obj)
    try:
        return format_float(obj)
    except (TypeError, ValueError):
        return str(obj)


def _needs_normalization(obj: Any) -> bool:
    if isinstance(obj, dict):
        return any(k == "focalValues" or _needs_normalization(v) for k, v in obj.items())
    if isinstance(obj, list):
        return any(_needs_normalization(v) for v in obj)
    return False


def render_json(results: Any) -> str:
    plain = to_plain(results)
    if _needs_normalization(plain) and isinstance(plain, dict) and "normalization" not in plain:
        from .focal import NORMALIZATION

        plain["normalization"] = NORMALIZATION
    return json.dumps(plain, sort_keys=True, indent=2) + "\n"


def _flatten(prefix: str, obj: Any, out: list[str]) -> None:
    if isinstance(obj, dict):
        for k in sorted(obj):
            _flatten(f"{prefix}.{k}" if prefix else str(k), obj[k], out)
    elif isinstance(obj, list) and obj and all(isinstance(v, (dict, list)) for v in obj):
        for i, v in enumerate(obj):
            _flatten(f"{prefix}[{i}]", v, out)
    else:
        out.append(f"{prefix}: {json.dumps(obj)}")


def render_text(results: Any) -> str:
    plain = json.loads(render_json(results))
    lines: list[str] = []
    if isinstance(plain, dict) and plain.get("kind") == "NotApplicable":
        cert = plain.get("certificate") or {}
        lines.append(f"not applicable: {cert.get('violated', 'hypothesis')} fails ({cert.get('detail', '')})")
    _flatten("", plain, lines)
    return "\n".join(lines) + "\n"


def render_report(results: Any) -> tuple[str, str]:
    """``(text, json)`` renderings; identical input gives identical bytes."""
    return render_text(results), render_json(results)
