"""Trace files and the diagnostics summary shared by ``sample`` and ``analyze``.

Trace CSV: header ``t,x_1,...,x_D,alpha,accepted``; floats are written with
``repr`` so reading them back is lossless.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from .diagnostics import acceptance_rate, efficiency_report
from .errors import DegenerateSeriesError


@dataclass
class TraceTable:
    iterations: np.ndarray
    states: np.ndarray
    alpha_values: np.ndarray
    accepted: np.ndarray


def _fmt(v: float) -> str:
    return repr(float(v))


def write_trace_csv(path, trace) -> None:
    d = trace.states.shape[1]
    header = ["t"] + [f"x_{i + 1}" for i in range(d)] + ["alpha", "accepted"]
    lines = [",".join(header)]
    for t, row, a, acc in zip(trace.iterations, trace.states, trace.alpha_values, trace.accepted):
        lines.append(",".join([str(int(t)), *map(_fmt, row), _fmt(a), "1" if acc else "0"]))
    Path(path).write_text("\n".join(lines) + "\n")


def read_trace_csv(path) -> TraceTable:
    with open(path) as fh:
        header = fh.readline().strip().split(",")
    if len(header) < 4 or header[0] != "t" or header[-2:] != ["alpha", "accepted"]:
        raise ValueError(f"{path}: not a trace file (header {header!r})")
    d = len(header) - 3
    if header[1:-2] != [f"x_{i + 1}" for i in range(d)]:
        raise ValueError(f"{path}: unexpected state columns {header[1:-2]!r}")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[0] == 0:
        raise ValueError(f"{path}: trace has no rows")
    return TraceTable(
        iterations=data[:, 0].astype(np.int64),
        states=data[:, 1 : 1 + d],
        alpha_values=data[:, 1 + d],
        accepted=data[:, 2 + d] != 0,
    )


FUNCTION_MAPS = {
    "identity": lambda s: s,
    "squared": lambda s: s * s,
}


def _report_dict(series, k_max):
    try:
        r = efficiency_report(series, k_max)
    except DegenerateSeriesError:
        return None, None
    return r.to_dict(), r.autocorrelations


def summarize(trace, functions: Sequence[str] = ("identity",), k_max: Optional[int] = None):
    """Diagnostics for every coordinate of every function of interest.

    The identity function is always included; it defines
    ``ess_per_iteration`` (mean ESS over coordinates divided by the number of
    rows). Returns ``(summary, acf)`` where ``acf`` holds the identity
    autocorrelations per coordinate. Coordinates with zero variance get
    ``null`` diagnostics.
    """
    functions = ["identity"] + [f for f in functions if f != "identity"]
    n, d = trace.states.shape
    mean_alpha, empirical = acceptance_rate(trace)
    funcs: Dict[str, Dict[str, List]] = {}
    acf = None
    fields = ("mean", "variance_f", "ess", "iat", "iat_full", "ess_full", "estimator_variance", "cutoff")
    for name in functions:
        values = FUNCTION_MAPS[name](trace.states)
        per = {k: [] for k in fields}
        rhos = []
        for i in range(d):
            rep, rho = _report_dict(values[:, i], k_max)
            for k in fields:
                per[k].append(None if rep is None else rep[k])
            rhos.append(rho)
        funcs[name] = per
        if name == "identity":
            acf = rhos
    ess_id = funcs["identity"]["ess"]
    if all(e is not None for e in ess_id):
        ess_per_iteration = float(np.mean(ess_id)) / n
    else:
        ess_per_iteration = None
    summary = {
        "rows": int(n),
        "dimension": int(d),
        "acceptance_rate": {"mean_alpha": mean_alpha, "empirical": empirical},
        "ess_per_iteration": ess_per_iteration,
        "functions": funcs,
    }
    return summary, acf


def write_acf_csv(path, acf) -> None:
    """Columns ``k,rho`` for one coordinate, ``k,rho_1,...,rho_D`` otherwise."""
    if acf is None:
        return
    d = len(acf)
    length = max((len(r) for r in acf if r is not None), default=0)
    header = ["k", "rho"] if d == 1 else ["k"] + [f"rho_{i + 1}" for i in range(d)]
    lines = [",".join(header)]
    for k in range(length):
        cells = [str(k)]
        for r in acf:
            cells.append(_fmt(r[k]) if r is not None and k < len(r) else "")
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n")


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def write_json(path, obj) -> None:
    Path(path).write_text(dump_json(obj))
