"""CSV and JSON output. Identical inputs always give identical bytes."""
from __future__ import annotations

import json
from typing import Mapping

import numpy as np

from .sweeps import SweepTable

SIG_DIGITS = 12


def fmt(value: float) -> str:
    """Fixed 12-significant-digit rendering with ``.`` as decimal separator."""
    v = float(value)
    if not np.isfinite(v):
        return str(v)
    # decimal exponent after rounding to the kept digits, so 9.99...95 counts as 10
    exponent = int(f"{v:.{SIG_DIGITS - 1}e}".split("e")[1])
    return f"{v:.{max(SIG_DIGITS - 1 - exponent, 0)}f}"


def table_csv(table: SweepTable) -> str:
    header = ["x"]
    for s in table.series:
        header += [f"{s.label}_xi2", f"{s.label}_db"]
    lines = [",".join(header)]
    for i, x in enumerate(table.grid):
        cells = [fmt(x)]
        for s in table.series:
            cells += [fmt(s.rows[i].xi2), fmt(s.rows[i].xi2_db)]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def table_json(table: SweepTable) -> str:
    return json.dumps(table.to_dict(), sort_keys=True, indent=2) + "\n"


def serialize(table: SweepTable, format: str = "csv") -> bytes:
    if format == "csv":
        return table_csv(table).encode("utf-8")
    if format == "json":
        return table_json(table).encode("utf-8")
    raise ValueError(f"unknown format {format!r}")


def deserialize_json(data: bytes | str) -> SweepTable:
    return SweepTable.from_dict(json.loads(data))


def mapping_bytes(values: Mapping[str, object], format: str = "csv") -> bytes:
    """Flat ``quantity,value`` CSV or sorted JSON of a report dictionary."""
    if format == "json":
        return (json.dumps(dict(values), sort_keys=True, indent=2) + "\n").encode("utf-8")
    lines = ["quantity,value"]
    for k in sorted(values):
        v = values[k]
        if isinstance(v, float):
            v = fmt(v)
        lines.append(f"{k},{v}")
    return ("\n".join(lines) + "\n").encode("utf-8")
