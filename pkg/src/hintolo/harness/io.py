"""CSV trace and JSON summary emission."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

TRACE_COLUMNS = (
    "trial", "t", "queried", "abstained", "loss", "cum_loss", "cum_regret",
    "query_cost_cum", "p_t", "z_t", "sigma_prefix", "prefix_norm",
)
TRACE_FILE = "trace.csv"
COSTS_FILE = "costs.csv"
SUMMARY_FILE = "summary.json"


def _fmt(v) -> str:
    return repr(float(v))


def write_trace_csv(path, traces, alpha: float) -> None:
    s = traces.series
    T, n = s["loss"].shape
    charged = s["queried"] | s["abstained"]
    cum_loss = np.cumsum(s["loss"], axis=0)
    cum_regret = cum_loss + s["prefix_norm"]
    qcost = np.cumsum(np.where(charged, alpha * s["sigma"], 0.0), axis=0)
    sig_prefix = np.cumsum(s["sigma"], axis=0)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRACE_COLUMNS)
        for j in range(n):
            for t in range(T):
                w.writerow((
                    j, t + 1, int(s["queried"][t, j]), int(s["abstained"][t, j]),
                    _fmt(s["loss"][t, j]), _fmt(cum_loss[t, j]), _fmt(cum_regret[t, j]),
                    _fmt(qcost[t, j]), _fmt(s["p"][t, j]), _fmt(s["z"][t, j]),
                    _fmt(sig_prefix[t, j]), _fmt(s["prefix_norm"][t, j]),
                ))


def write_costs_csv(path, traces) -> None:
    """Costs and hints per round, readable by the ``replay_file`` environment."""
    C, H = traces.costs, traces.hints
    T, n, d = C.shape
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["trial", "t"] + [f"c{i}" for i in range(d)] + [f"h{i}" for i in range(d)])
        for j in range(n):
            for t in range(T):
                w.writerow([j, t + 1] + [_fmt(v) for v in C[t, j]] + [_fmt(v) for v in H[t, j]])


def write_summary_json(path, summary: dict) -> None:
    with open(path, "w") as fh:
        json.dump(summary, fh, indent=2, default=_json_default)


def _json_default(v):
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    raise TypeError(f"not serialisable: {type(v)}")


def emit_outputs(cfg, traces, summary: dict) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if "csv" in cfg.emit:
        write_trace_csv(out / TRACE_FILE, traces, cfg.alpha)
        write_costs_csv(out / COSTS_FILE, traces)
    if "json" in cfg.emit:
        write_summary_json(out / SUMMARY_FILE, summary)
    return out


def read_trace_csv(path) -> dict[int, dict[str, np.ndarray]]:
    """Columns per trial, keyed by trial index."""
    cols: dict[int, dict[str, list]] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames) != TRACE_COLUMNS:
            raise ValueError(f"unexpected trace columns {reader.fieldnames}")
        for row in reader:
            bucket = cols.setdefault(int(row["trial"]), {k: [] for k in TRACE_COLUMNS})
            for k in TRACE_COLUMNS:
                bucket[k].append(float(row[k]))
    return {j: {k: np.array(v) for k, v in b.items()} for j, b in cols.items()}


def recompute_from_csv(path, alpha: float) -> dict:
    """Regret and query cost per trial rebuilt from the per-round columns."""
    table = read_trace_csv(path)
    regrets, costs = [], []
    for j in sorted(table):
        b = table[j]
        sigma = np.diff(np.concatenate([[0.0], b["sigma_prefix"]]))
        charged = (b["queried"] > 0) | (b["abstained"] > 0)
        regrets.append(float(np.sum(b["loss"]) + b["prefix_norm"][-1]))
        costs.append(float(alpha * np.sum(sigma[charged])))
    return {
        "regret": np.array(regrets),
        "query_cost": np.array(costs),
        "mean_regret": float(np.mean(regrets)),
        "mean_query_cost": float(np.mean(costs)),
    }


def load_summary(path) -> dict:
    with open(path) as fh:
        return json.load(fh)
