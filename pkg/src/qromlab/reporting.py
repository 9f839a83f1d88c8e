"""Deterministic JSON/CSV rendering for machine reports.

Floats are normalized to 12 significant digits so that identical runs produce
byte-identical artifacts; field order follows insertion order.
"""

from __future__ import annotations

import json
import math


def normalize_float(x: float) -> float:
    if isinstance(x, float) and math.isfinite(x):
        return float(f"{x:.12g}")
    return x


def _normalize(obj):
    if isinstance(obj, float):
        return normalize_float(obj)
    if isinstance(obj, dict):
        return {k: _normalize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_normalize(v) for v in obj]
    return obj


def render_json(obj) -> str:
    return json.dumps(_normalize(obj), indent=2) + "\n"


def _cell(value) -> str:
    if isinstance(value, float):
        return f"{normalize_float(value):.12g}"
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return ""
    text = str(value)
    if any(c in text for c in ",\"\n"):
        text = '"' + text.replace('"', '""') + '"'
    return text


def render_csv(records) -> str:
    records = list(records)
    if not records:
        return "\n"
    columns = list(records[0].keys())
    for rec in records[1:]:
        for key in rec:
            if key not in columns:
                columns.append(key)
    lines = [",".join(columns)]
    for rec in records:
        lines.append(",".join(_cell(rec.get(c)) for c in columns))
    return "\n".join(lines) + "\n"


def wilson_interval(successes: int, trials: int, z: float = 1.96) -> tuple:
    """Wilson score interval for a binomial proportion."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    phat = successes / trials
    denom = 1.0 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    return (max(0.0, center - half), min(1.0, center + half))
