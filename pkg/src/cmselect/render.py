"""Table / CSV / JSON rendering for CLI reports.

CSV and JSON carry unrounded values. Table output rounds half away from
zero: matrix cells to integers, everything else to two decimals.
"""

from __future__ import annotations

import csv
import io
import json
from typing import Any, Optional, Sequence

from .protection import DangerMatrix, round_half_away

NA = "N/A"
OUTPUT_SCHEMA_VERSION = 1


def fmt_int(x: Optional[float]) -> str:
    if x is None:
        return NA
    return str(int(round_half_away(x)))


def fmt_2(x: Optional[float]) -> str:
    if x is None:
        return NA
    return f"{round_half_away(x, 2):.2f}"


def fmt_raw(x: Any) -> str:
    if x is None:
        return NA
    if isinstance(x, float):
        return repr(x)
    return str(x)


def text_table(header: Sequence[str], rows: Sequence[Sequence[str]], left: Sequence[int] = (0,)) -> str:
    """Fixed-width table; columns listed in ``left`` are left-aligned, the rest right."""
    widths = [len(h) for h in header]
    for row in rows:
        widths = [max(w, len(c)) for w, c in zip(widths, row)]

    def line(cells: Sequence[str]) -> str:
        parts = [c.ljust(w) if k in left else c.rjust(w) for k, (c, w) in enumerate(zip(cells, widths))]
        return "  ".join(parts).rstrip()

    rule = "  ".join("-" * w for w in widths)
    return "\n".join([line(header), rule, *(line(r) for r in rows)]) + "\n"


def csv_text(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt_raw(c) for c in row])
    return buf.getvalue()


def json_text(payload: dict) -> str:
    return json.dumps({"schema_version": OUTPUT_SCHEMA_VERSION, **payload}, indent=2, ensure_ascii=False) + "\n"


def matrix_table(m: DangerMatrix, title: str) -> str:
    rows = [[t, *(fmt_int(c) for c in cells)] for t, cells in m.rows()]
    return f"{title}\n" + text_table(["threat", *m.services], rows)


def matrix_csv(m: DangerMatrix) -> str:
    return csv_text(["threat", *m.services], [[t, *cells] for t, cells in m.rows()])


def matrix_json(m: DangerMatrix) -> dict:
    return {
        "threats": list(m.threats),
        "services": list(m.services),
        "cells": [cells for _, cells in m.rows()],
    }
