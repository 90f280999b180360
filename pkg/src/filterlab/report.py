"""Serialize reports as JSON, CSV or plain text with a version stamp.

Every format is a pure function of the report: dict key order is the
insertion order chosen by the producing module, floats are written with
``repr`` precision and nothing time-dependent is added, so identical reports
give identical bytes.
"""

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .errors import ReportWriteError

FORMATS = ("json", "csv", "text")
TOOL = "filterlab"
TEXT_LIST_MAX = 8


def _version():
    from . import __version__

    return __version__


def jsonable(obj):
    """Recursively convert numpy values, vectors, tuples and sets into JSON types.

    Non-finite floats become the strings ``"inf"``, ``"-inf"`` and ``"nan"``
    so the output stays strict JSON.
    """
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, (set, frozenset)):
        return [jsonable(v) for v in sorted(obj, key=str)]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if obj is None or isinstance(obj, str):
        return obj
    if hasattr(obj, "to_dict"):
        return jsonable(obj.to_dict())
    if hasattr(obj, "to_jsonable"):
        return jsonable(obj.to_jsonable())
    return str(obj)


def envelope(kind, payload):
    """Wrap a payload with the tool name, version and report kind."""
    return {"tool": TOOL, "version": _version(), "kind": kind, "result": jsonable(payload)}


def emit_report(report, fmt="json"):
    """Render an enveloped report (see :func:`envelope`) to bytes.

    ``json``: indented JSON.  ``csv``: a ``# filterlab <version>`` line, then
    rows chosen by the payload shape (``n,ratio`` samples for density
    estimates, one row per sub-verdict for gallery reports, one row per
    check for verdicts).  ``text``: a short human-readable summary.
    """
    if fmt not in FORMATS:
        raise ValueError(f"format must be one of {FORMATS}, got {fmt!r}")
    if fmt == "json":
        return (json.dumps(report, indent=2, ensure_ascii=False) + "\n").encode("utf-8")
    if fmt == "csv":
        return _emit_csv(report).encode("utf-8")
    return _emit_text(report).encode("utf-8")


def write_report(data, path):
    """Write bytes to ``path``; ``-`` or ``None`` means standard output."""
    if path in (None, "-"):
        import sys

        sys.stdout.buffer.write(data)
        sys.stdout.flush()
        return
    try:
        Path(path).write_bytes(data)
    except OSError as exc:
        raise ReportWriteError(f"cannot write report to {path}: {exc.strerror or exc}") from None


def _rows(result):
    if isinstance(result, dict) and "samples" in result:
        return ["n", "ratio"], [[n, r] for n, r in result["samples"]]
    if isinstance(result, list) and result and isinstance(result[0], dict) and "sub_verdicts" in result[0]:
        rows = []
        for rep in result:
            for sub in rep["sub_verdicts"] or [{"name": "", "outcome": ""}]:
                rows.append([rep["name"], rep["status"], sub["name"], sub["outcome"]])
        return ["experiment", "status", "sub_verdict", "outcome"], rows
    if isinstance(result, dict) and "sub_verdicts" in result:
        return _rows([result])
    if isinstance(result, dict) and isinstance(result.get("diagnostics"), dict):
        diag = result["diagnostics"]
        checks = diag.get("checks") or diag.get("rows")
        if isinstance(checks, list) and checks and isinstance(checks[0], dict):
            keys = []
            for c in checks:
                keys += [k for k in c if k not in keys]
            return ["outcome"] + keys, [[result["outcome"]] + [_cell(c.get(k, "")) for k in keys] for c in checks]
        return ["outcome"], [[result["outcome"]]]
    if isinstance(result, list):
        keys = []
        for c in result:
            keys += [k for k in c if k not in keys]
        return keys, [[_cell(c.get(k, "")) for k in keys] for c in result]
    flat = _flatten(result)
    return ["key", "value"], [[k, v] for k, v in flat]


def _cell(v):
    if isinstance(v, (dict, list)):
        return json.dumps(v, ensure_ascii=False)
    return v


def _flatten(d, prefix=""):
    out = []
    if isinstance(d, dict):
        for k, v in d.items():
            out += _flatten(v, f"{prefix}{k}.")
    elif isinstance(d, list):
        out.append((prefix[:-1], json.dumps(d, ensure_ascii=False)))
    else:
        out.append((prefix[:-1], d))
    return out


def _emit_csv(report):
    buf = io.StringIO()
    buf.write(f"# {report['tool']} {report['version']} {report['kind']}\n")
    header, rows = _rows(report["result"])
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _emit_text(report):
    lines = [f"{report['tool']} {report['version']} {report['kind']}"]
    result = report["result"]
    items = result if isinstance(result, list) else [result]
    for item in items:
        if isinstance(item, dict) and "sub_verdicts" in item:
            lines.append(f"{item['name']}: {item['status']} (expected {item['expected']})")
            for sub in item["sub_verdicts"]:
                lines.append(f"  {sub['name']}: {sub['outcome']}")
            for note in item["notes"]:
                lines.append(f"  note: {note}")
        elif isinstance(item, dict) and "outcome" in item:
            lines.append(f"outcome: {item['outcome']}")
            diag = item.get("diagnostics", {})
            for c in diag.get("checks", []):
                parts = " ".join(f"{k}={v}" for k, v in c.items() if k not in ("evidence",))
                lines.append(f"  {parts}")
            for k, v in diag.items():
                if k != "checks" and not isinstance(v, (dict, list)):
                    lines.append(f"  {k}: {v}")
        elif isinstance(item, dict):
            for k, v in item.items():
                if isinstance(v, list) and len(v) > TEXT_LIST_MAX:
                    lines.append(f"{k}: [{len(v)} entries]")
                else:
                    lines += [f"{kk}: {vv}" for kk, vv in _flatten({k: v})]
        else:
            lines.append(str(item))
    return "\n".join(lines) + "\n"
