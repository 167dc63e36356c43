"""Command-line lab: analytic bounds, Monte Carlo runs, oracle verification,
and parameter sweeps.

Exit codes: 0 success, 1 infeasible parameters, 2 oracle or regression
failure, 3 I/O error.
"""

from __future__ import annotations

import json
import pathlib
import sys

import click

from . import analysis, montecarlo, verification
from .config import ExperimentConfig

EXIT_OK = 0
EXIT_INFEASIBLE = 1
EXIT_ORACLE = 2
EXIT_IO = 3


@click.group()
def main():
    """Rewind-if-error interactive coding lab."""


@main.command()
@click.option("--delta", type=float, default=None, help="Target BSC crossover probability.")
@click.option("--k", "k", type=int, default=None, help="Block size (power of two).")
@click.option("--variant-bits", type=int, default=3, help="Layer-1 detection bit accounting (2 or 3).")
@click.option("--reproduce-paper", is_flag=True, help="Evaluate the published headline parameters.")
def bound(delta, k, variant_bits, reproduce_paper):
    """Evaluate the achievable rate and the capacity-ratio lower bound."""
    if reproduce_paper:
        delta = analysis.HEADLINE_DELTA
        k = analysis.HEADLINE_K
        variant_bits = analysis.HEADLINE_VARIANT_BITS
    if delta is None or k is None:
        click.echo("need --delta and --k (or --reproduce-paper)", err=True)
        sys.exit(EXIT_INFEASIBLE)
    try:
        br = analysis.rate_bsc(delta, k, variant_bits=variant_bits)
        ratio = analysis.capacity_ratio_lower_bound(delta, k, variant_bits=variant_bits)
    except analysis.InfeasibleParameters as exc:
        click.echo(f"infeasible parameters: {exc}", err=True)
        sys.exit(EXIT_INFEASIBLE)
    click.echo(f"delta           = {br.eps:.8g}")
    click.echo(f"k               = {br.k}")
    click.echo(f"numerator terms : k*eps={br.kx_eps:.6g}  layer1={br.layer1_comm:.6g}  "
               f"layers={br.layer_sum:.6g}  tail={br.geometric_tail:.6g}")
    click.echo(f"rate            = {br.rate:.6f}  (numerator {br.numerator:.6f} / "
               f"denominator {br.denominator:.6f})")
    click.echo(f"capacity ratio >= {ratio:.4f}")


@main.command()
@click.option("--config", "config_path", type=click.Path(), required=True)
@click.option("--seed", type=int, default=None, help="Override the master seed.")
@click.option("--threads", type=int, default=1)
@click.option("--out", "out_dir", type=click.Path(), default=None, help="Override the output directory.")
def simulate(config_path, seed, threads, out_dir):
    """Run the Monte Carlo trials of a config file; write CSV and JSON."""
    try:
        text = pathlib.Path(config_path).read_text()
    except OSError as exc:
        click.echo(f"cannot read config: {exc}", err=True)
        sys.exit(EXIT_IO)
    try:
        cfg = ExperimentConfig.from_json(text)
    except (ValueError, KeyError, analysis.InfeasibleParameters) as exc:
        click.echo(f"invalid or infeasible config: {exc}", err=True)
        sys.exit(EXIT_INFEASIBLE)
    if seed is not None or out_dir is not None:
        d = cfg.to_dict()
        if seed is not None:
            d["master_seed"] = seed
        if out_dir is not None:
            d["out_dir"] = out_dir
        cfg = ExperimentConfig.from_dict(d)
    rows = montecarlo.run_experiment(cfg, threads=threads)
    agg = montecarlo.aggregate(rows, cfg)
    try:
        out = pathlib.Path(cfg.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{cfg.label}_trials.csv").write_text(
            montecarlo.rows_to_csv(rows, cfg.scheme.layer_count)
        )
        (out / f"{cfg.label}_aggregate.json").write_text(json.dumps(agg, indent=2, sort_keys=True))
    except OSError as exc:
        click.echo(f"cannot write results: {exc}", err=True)
        sys.exit(EXIT_IO)
    click.echo(f"{cfg.trials} trials done; e1 freq {agg['e1']['frequency']:.4g}, "
               f"e2 freq {agg['e2']['frequency']:.4g}; results in {out}")


@main.command()
def verify():
    """Run the oracle suite; nonzero exit on any failure."""
    results = verification.run_all()
    failed = [r for r in results if not r.passed]
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        click.echo(f"[{status}] {r.name}: {r.detail}")
    if failed:
        click.echo(f"{len(failed)} oracle(s) failed", err=True)
        sys.exit(EXIT_ORACLE)
    click.echo(f"all {len(results)} oracles passed")


@main.command()
@click.option("--delta", type=float, required=True)
@click.option("--k-min", type=int, default=8)
@click.option("--k-max", type=int, default=4096)
@click.option("--variant-bits", type=int, default=3)
@click.option("--out", "out_path", type=click.Path(), default=None, help="Write a plot-ready CSV.")
def sweep(delta, k_min, k_max, variant_bits, out_path):
    """Sweep block sizes at fixed delta, reporting the best capacity ratio."""
    lines = ["k,rate,capacity_ratio"]
    best = None
    k = k_min
    while k <= k_max:
        try:
            br = analysis.rate_bsc(delta, k, variant_bits=variant_bits)
            ratio = analysis.capacity_ratio_lower_bound(delta, k, variant_bits=variant_bits)
            lines.append(f"{k},{br.rate:.8f},{ratio:.8f}")
            click.echo(f"k={k:6d}  rate={br.rate:.6f}  ratio={ratio:.6f}")
            if best is None or ratio > best[1]:
                best = (k, ratio)
        except analysis.InfeasibleParameters as exc:
            click.echo(f"k={k:6d}  infeasible: {exc}")
        k *= 2
    if best is None:
        click.echo("no feasible block size in the sweep range", err=True)
        sys.exit(EXIT_INFEASIBLE)
    click.echo(f"best: k={best[0]} with capacity ratio {best[1]:.6f}")
    if out_path is not None:
        try:
            pathlib.Path(out_path).write_text("\n".join(lines) + "\n")
        except OSError as exc:
            click.echo(f"cannot write sweep CSV: {exc}", err=True)
            sys.exit(EXIT_IO)


if __name__ == "__main__":
    main()
