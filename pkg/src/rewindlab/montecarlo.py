"""Monte Carlo orchestration: seeded trial runs, per-trial CSV, aggregate
JSON with confidence intervals.

Trials are embarrassingly parallel; every trial derives its own named random
streams from (master_seed, trial_index), so results are byte-identical for
any thread count once rows are sorted by trial index.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor

from . import randomness, scheme
from .config import ExperimentConfig


def csv_columns(layer_count: int) -> list:
    return [
        "trial_index",
        "e1",
        "e2",
        "jA_final",
        "jB_final",
        "n_target",
        "N_used",
    ] + [f"rewinds_l{l}" for l in range(1, layer_count + 1)]


def run_trial(cfg: ExperimentConfig, trial_index: int) -> dict:
    """One seeded trial, returned as a CSV-ready row dict."""
    protocol = cfg.protocol.build()
    channel = cfg.channel.build()
    seed = randomness.derive_seed(cfg.master_seed, "trial", trial_index)
    result = scheme.simulate(protocol, channel, cfg.scheme, master_seed=seed)
    row = {
        "trial_index": trial_index,
        "e1": int(result.e1),
        "e2": int(result.e2),
        "jA_final": result.final_cursor_alice,
        "jB_final": result.final_cursor_bob,
        "n_target": result.n_target,
        "N_used": result.channel_uses,
    }
    for l in range(1, cfg.scheme.layer_count + 1):
        row[f"rewinds_l{l}"] = result.joint_rewinds[l]
    return row


def _worker(payload):
    cfg_dict, trial_index = payload
    return run_trial(ExperimentConfig.from_dict(cfg_dict), trial_index)


def run_experiment(cfg: ExperimentConfig, threads: int = 1) -> list:
    """All trials, as rows sorted by trial index."""
    if threads <= 1:
        rows = [run_trial(cfg, i) for i in range(cfg.trials)]
    else:
        payloads = [(cfg.to_dict(), i) for i in range(cfg.trials)]
        with ProcessPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(_worker, payloads, chunksize=8))
    rows.sort(key=lambda r: r["trial_index"])
    return rows


def rows_to_csv(rows: list, layer_count: int) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=csv_columns(layer_count), lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def csv_to_rows(text: str) -> list:
    reader = csv.DictReader(io.StringIO(text))
    return [{k: int(v) for k, v in row.items()} for row in reader]


def _freq_ci(count: int, n: int) -> dict:
    """Frequency with a normal-approximation 3-sigma confidence interval."""
    p = count / n
    sigma = math.sqrt(p * (1.0 - p) / n)
    return {
        "count": count,
        "frequency": p,
        "ci_low": max(0.0, p - 3.0 * sigma),
        "ci_high": min(1.0, p + 3.0 * sigma),
    }


def aggregate(rows: list, cfg: ExperimentConfig) -> dict:
    """Deterministic fold over trial-index order; recomputable from the CSV."""
    n = len(rows)
    layer_count = cfg.scheme.layer_count
    windows = {l: cfg.scheme.k ** (layer_count - l) for l in range(1, layer_count + 1)}
    agg = {
        "config_hash": cfg.config_hash(),
        "label": cfg.label,
        "trials": n,
        "e1": _freq_ci(sum(r["e1"] for r in rows), n),
        "e2": _freq_ci(sum(r["e2"] for r in rows), n),
        "either_error": _freq_ci(sum(int(r["e1"] or r["e2"]) for r in rows), n),
        "mean_min_cursor": sum(min(r["jA_final"], r["jB_final"]) for r in rows) / n,
        "n_target": rows[0]["n_target"] if rows else None,
        "channel_uses": rows[0]["N_used"] if rows else None,
        "rewind_frequency": {},
    }
    for l in range(1, layer_count + 1):
        total = sum(r[f"rewinds_l{l}"] for r in rows)
        agg["rewind_frequency"][str(l)] = _freq_ci(total, n * windows[l])
    return agg


def verify_aggregate(agg: dict, rows: list, cfg: ExperimentConfig):
    """Check on load that the stored aggregates match the per-trial rows."""
    fresh = aggregate(rows, cfg)
    if json.dumps(fresh, sort_keys=True) != json.dumps(agg, sort_keys=True):
        raise ValueError("aggregate statistics do not match the per-trial rows")
