"""CSV input/output. Every written file opens with ``#`` metadata lines."""

import csv
import json

import numpy as np

from . import __version__
from .errors import ConfigError, InvalidPmf

SIG = 12


def fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.{SIG}g}"
    if isinstance(v, (list, tuple, np.ndarray)):
        return ";".join(fmt(x) for x in v)
    return str(v)


def header_lines(meta):
    lines = [f"# scanopt {__version__}"]
    for key, value in meta.items():
        if isinstance(value, dict):
            value = json.dumps(value, sort_keys=True, default=str)
        else:
            value = fmt(value)
        lines.append(f"# {key}: {value}")
    return lines


def write_table(path, meta, columns, rows):
    with open(path, "w", newline="") as fh:
        for line in header_lines(meta):
            fh.write(line + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def write_trace(path, meta, trace):
    with open(path, "w", newline="") as fh:
        for line in header_lines(meta):
            fh.write(line + "\n")
        fh.write(",".join(trace.columns + ("coord",)) + "\n")
        data = np.column_stack([trace.states, trace.coordinate_visits])
        if trace.is_discrete:
            np.savetxt(fh, data, fmt="%d", delimiter=",")
        else:
            fmts = [f"%.{SIG}g"] * trace.states.shape[1] + ["%d"]
            np.savetxt(fh, data, fmt=fmts, delimiter=",")


def read_table(path):
    """Rows of a CSV, skipping ``#`` lines; returns (header, rows)."""
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
    rows = list(csv.reader(lines))
    if not rows:
        raise ConfigError(f"{path}: no data")
    return rows[0], rows[1:]


def read_matrix(path):
    """Square numeric matrix, one row per line (no header)."""
    with open(path, newline="") as fh:
        rows = [
            [float(x) for x in row if x.strip()]
            for row in csv.reader(ln for ln in fh if ln.strip() and not ln.lstrip().startswith("#"))
        ]
    if not rows or any(len(r) != len(rows) for r in rows):
        raise ConfigError(f"{path}: expected a square numeric matrix")
    return np.array(rows)


def read_pmf(path):
    """Joint pmf with columns x, theta, prob."""
    header, rows = read_table(path)
    names = [h.strip().lower() for h in header]
    try:
        ix, it, ip = names.index("x"), names.index("theta"), names.index("prob")
    except ValueError:
        raise InvalidPmf(f"{path}: expected columns x, theta, prob") from None
    pmf = {}
    for r in rows:
        key = (int(r[ix]), int(r[it]))
        if key in pmf:
            raise InvalidPmf(f"{path}: duplicate state {key}")
        pmf[key] = float(r[ip])
    return pmf


def read_state_values(path, model):
    """Per-state h values: columns x, theta, value (any order) or one value per state."""
    header, rows = read_table(path)
    names = [h.strip().lower() for h in header]
    if {"x", "theta", "value"} <= set(names):
        ix, it, iv = names.index("x"), names.index("theta"), names.index("value")
        table = {(int(r[ix]), int(r[it])): float(r[iv]) for r in rows}
        missing = [s for s in model.states if s not in table]
        if missing:
            raise ConfigError(f"{path}: no value for states {missing[:5]}")
        return np.array([table[s] for s in model.states])
    try:
        first = [float(header[0])]
    except ValueError:
        first = []
    return np.array(first + [float(r[0]) for r in rows])
