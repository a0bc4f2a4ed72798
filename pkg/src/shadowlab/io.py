"""Orbit CSV files (hexadecimal floats) and JSON reports."""
import csv
import json
import math
from pathlib import Path

import numpy as np

from .errors import OrbitFormatError


def _hex(v):
    return float(v).hex()


def save_orbit_csv(path, states, extra=None, decimal_mirror=True):
    """Write one row per index: ``k, x0, ..., x{n-1}`` as hexadecimal floats.

    ``extra`` maps column names to per-row values appended after the state.
    A decimal copy is written next to the file as ``<stem>.decimal.csv``.
    """
    path = Path(path)
    X = np.atleast_2d(np.asarray(states, dtype=float))
    extra = dict(extra or {})
    header = ["k"] + [f"x{i}" for i in range(X.shape[1])] + list(extra)
    cols = [np.asarray(v, dtype=float) for v in extra.values()]
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for k, row in enumerate(X):
            w.writerow([k] + [_hex(v) for v in row] + [_hex(c[k]) for c in cols])
    if decimal_mirror:
        with path.with_name(path.stem + ".decimal.csv").open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for k, row in enumerate(X):
                w.writerow([k] + [repr(float(v)) for v in row] + [repr(float(c[k])) for c in cols])
    return path


def _parse_float(text):
    text = text.strip()
    if "0x" in text.lower() or text.lower().lstrip("+-") in ("inf", "nan"):
        return float.fromhex(text)
    return float(text)


def load_orbit_csv(path):
    """Read the state columns ``x0..`` of an orbit CSV.

    Hexadecimal and decimal floats are both accepted.  Malformed input raises
    :class:`OrbitFormatError` carrying the 1-based line number.
    """
    path = Path(path)
    try:
        fh = path.open(newline="")
    except OSError as exc:
        raise OrbitFormatError(f"cannot open {path}: {exc}", 0) from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise OrbitFormatError("empty file", 1) from None
        idx = [i for i, name in enumerate(header) if name.strip().startswith("x")]
        if not idx:
            raise OrbitFormatError("header has no state columns x0, x1, ...", 1)
        rows = []
        for line, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise OrbitFormatError(
                    f"expected {len(header)} fields, found {len(row)}", line)
            try:
                k = int(row[0])
                vals = [_parse_float(row[i]) for i in idx]
            except ValueError as exc:
                raise OrbitFormatError(f"unparsable value ({exc})", line) from None
            if k != len(rows):
                raise OrbitFormatError(f"index {k} out of sequence", line)
            if not all(math.isfinite(v) for v in vals):
                raise OrbitFormatError("non-finite value", line)
            rows.append(vals)
    if not rows:
        raise OrbitFormatError("no data rows", 2)
    return np.array(rows, dtype=float)


def to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, Path):
        return str(obj)
    return obj


def dumps_report(report) -> str:
    return json.dumps(to_jsonable(report), indent=2, sort_keys=True) + "\n"


def write_json(path, report):
    path = Path(path)
    path.write_text(dumps_report(report))
    return path


def write_sweep_csv(path, rows):
    """Columns d, sup_error, bound (decimal repr, round-trip exact)."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["d", "sup_error", "bound"])
        for d, e, b in rows:
            w.writerow([repr(float(d)), repr(float(e)), repr(float(b))])
    return path
