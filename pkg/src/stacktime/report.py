"""Report serialization.

A report is a plain dict. The JSON form (sorted keys, fixed indentation)
is the machine contract and is byte-stable for identical inputs; the
``table`` entry is a human rendering of the same content.
"""

from __future__ import annotations

import json


def _fmt(v):
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "yes" if v else "no"
    if isinstance(v, (list, tuple)):
        return "(" + ",".join(_fmt(x) for x in v) + ")"
    return str(v)


def table(rows: list[dict], columns: list[str]) -> str:
    cells = [[_fmt(r.get(c)) for c in columns] for r in rows]
    widths = [max([len(c)] + [len(row[i]) for row in cells]) for i, c in enumerate(columns)]
    line = "  ".join(c.ljust(w) for c, w in zip(columns, widths))
    out = [line, "  ".join("-" * w for w in widths)]
    out += ["  ".join(x.ljust(w) for x, w in zip(row, widths)) for row in cells]
    return "\n".join(s.rstrip() for s in out)


def with_table(report: dict, rows: list[dict], columns: list[str]) -> dict:
    report["table"] = table(rows, columns)
    return report


def to_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def render(report: dict, fmt: str = "json") -> str:
    if fmt == "json":
        return to_json(report)
    head = f"{report.get('command', 'report')}: {'PASS' if report.get('ok', True) else 'FAIL'}"
    return head + "\n" + report.get("table", "") + "\n"
