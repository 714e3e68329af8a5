"""Command-line front end: simulate | sweep | classify | verify.

Outputs are a JSON result document per run (config echo, status, final
norms, series reference) plus flat tab-delimited tables for plotting.
Exit codes: 0 success, 1 usage/config error, 2 verification failure,
3 internal numerical failure.
"""

from __future__ import annotations

import argparse
import itertools
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .capacity import RegimeLabel, classify_regime, mass_nonexistence_criterion, tail_nonexistence_criterion
from .config import ConfigError, ExperimentConfig, load_config
from .operators import RieszKernel
from .solver import RunOutcome, integrate
from .verify import run_suites

_FMT = "%.15g"


def _write_series(path: Path, outcome: RunOutcome) -> None:
    with path.open("w") as fh:
        fh.write("t\tlinf\tls\tqsc\tmass\n")
        for row in outcome.time_series:
            fh.write("\t".join(_FMT % v for v in row) + "\n")


def _result_document(cfg: ExperimentConfig, outcome: RunOutcome, series_name: str) -> dict:
    final = outcome.final
    return {
        "version": __version__,
        "config": cfg.echo(),
        "status": outcome.status,
        "blowup_time": outcome.blowup_time,
        "final_norms": {
            "linf": final.linf,
            "ls": final.ls,
            "qsc": final.qsc,
            "mass": final.mass,
        },
        "series_file": series_name,
    }


def predicted_label(cfg: ExperimentConfig) -> str:
    """Regime prediction for one resolved configuration.

    Riesz kernels go through the exponent classifier; for general kernels
    only the sufficient growth/tail criteria are available, so anything
    they do not cover is reported as outside the hypotheses.
    """
    spec = cfg.problem_spec()
    n = spec.grid.dim
    gamma = cfg.gamma_hint()
    if isinstance(spec.kernel, RieszKernel):
        return classify_regime(n, spec.kernel.alpha, spec.beta, spec.p, spec.q, gamma).label.value
    if spec.p + spec.q <= 2:
        return RegimeLabel.OUTSIDE_HYPOTHESES.value
    radii = np.geomspace(max(1.0, spec.kernel.tail_threshold * 1.01), 1e6, 25)
    if mass_nonexistence_criterion(spec.kernel, n, spec.beta, spec.p, spec.q, radii) == "diverges":
        return RegimeLabel.NONEXISTENCE_MASS.value
    if gamma is not None and tail_nonexistence_criterion(
        spec.kernel, n, spec.beta, spec.p, spec.q, gamma, radii
    ) == "vanishes":
        return RegimeLabel.NONEXISTENCE_TAIL.value
    return RegimeLabel.OUTSIDE_HYPOTHESES.value


def cmd_simulate(cfg: ExperimentConfig, out_dir: Path) -> int:
    spec = cfg.problem_spec()
    outcome = integrate(spec)
    out_dir.mkdir(parents=True, exist_ok=True)
    series_name = f"{cfg.prefix}_series.tsv"
    _write_series(out_dir / series_name, outcome)
    doc = _result_document(cfg, outcome, series_name)
    (out_dir / f"{cfg.prefix}_result.json").write_text(json.dumps(doc, indent=2) + "\n")
    print(f"status={outcome.status}", end="")
    if outcome.blowup_time is not None:
        print(f" blowup_time={outcome.blowup_time:.6g}", end="")
    print(f" final_linf={outcome.final.linf:.6g} steps={outcome.steps_taken}")
    print(f"wrote {out_dir / (cfg.prefix + '_result.json')}")
    return 0


def _sweep_point(args: tuple) -> dict:
    cfg, keys, values = args
    point = dict(zip(keys, values))
    row: dict = {k: v for k, v in point.items()}
    sub = cfg.with_overrides(point)
    try:
        row["predicted"] = predicted_label(sub)
    except (ConfigError, ValueError) as exc:
        row.update(predicted="error", status=f"error: {exc}")
        return row
    try:
        outcome = integrate(sub.problem_spec())
        row.update(
            status=outcome.status,
            blowup_time=outcome.blowup_time,
            final_linf=outcome.final.linf,
            final_mass=outcome.final.mass,
        )
    except Exception as exc:  # per-point failures land in the row, never abort
        row["status"] = f"error: {exc}"
    return row


def cmd_sweep(cfg: ExperimentConfig, out_dir: Path, workers: int) -> int:
    keys = sorted(cfg.sweep_axes)
    combos = list(itertools.product(*(cfg.sweep_axes[k] for k in keys))) if keys else [()]
    tasks = [(cfg, keys, values) for values in combos]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_point, tasks))
    else:
        rows = [_sweep_point(task) for task in tasks]
    rows.sort(key=lambda r: tuple(r.get(k, 0.0) for k in keys))

    out_dir.mkdir(parents=True, exist_ok=True)
    columns = keys + ["predicted", "status", "blowup_time", "final_linf", "final_mass"]
    table = out_dir / f"{cfg.prefix}_sweep.tsv"
    with table.open("w") as fh:
        fh.write("\t".join(columns) + "\n")
        for row in rows:
            cells = []
            for col in columns:
                val = row.get(col)
                if isinstance(val, float):
                    cells.append(_FMT % val)
                else:
                    cells.append("" if val is None else str(val))
            fh.write("\t".join(cells) + "\n")
    doc = {"version": __version__, "config": cfg.echo(), "rows": rows}
    (out_dir / f"{cfg.prefix}_sweep.json").write_text(json.dumps(doc, indent=2) + "\n")
    n_blow = sum(1 for r in rows if r.get("status") == "blowup")
    print(f"swept {len(rows)} points ({n_blow} blow-ups); wrote {table}")
    return 0


def cmd_classify(cfg: ExperimentConfig, out_dir: Path) -> int:
    keys = sorted(cfg.sweep_axes)
    combos = list(itertools.product(*(cfg.sweep_axes[k] for k in keys))) if keys else [()]
    out_dir.mkdir(parents=True, exist_ok=True)
    table = out_dir / f"{cfg.prefix}_classify.tsv"
    columns = keys + ["p_blowup", "p_global", "p_scaling", "q_scaling", "label"]
    rows = []
    for values in combos:
        sub = cfg.with_overrides(dict(zip(keys, values)))
        spec = sub.problem_spec()
        row = dict(zip(keys, values))
        if isinstance(spec.kernel, RieszKernel):
            cls = classify_regime(
                spec.grid.dim, spec.kernel.alpha, spec.beta, spec.p, spec.q, sub.gamma_hint()
            )
            row.update(
                p_blowup=cls.p_blowup,
                p_global=cls.p_global,
                p_scaling=cls.p_scaling,
                q_scaling=cls.q_scaling,
                label=cls.label.value,
            )
        else:
            row["label"] = predicted_label(sub)
        rows.append(row)
    with table.open("w") as fh:
        fh.write("\t".join(columns) + "\n")
        for row in rows:
            cells = []
            for col in columns:
                val = row.get(col)
                cells.append((_FMT % val) if isinstance(val, float) else ("" if val is None else str(val)))
            fh.write("\t".join(cells) + "\n")
    doc = {"version": __version__, "config": cfg.echo(), "rows": rows}
    (out_dir / f"{cfg.prefix}_classify.json").write_text(json.dumps(doc, indent=2) + "\n")
    print(f"classified {len(rows)} points; wrote {table}")
    return 0


def cmd_verify(suite: str, seed: int) -> int:
    results = run_suites(suite, seed=seed)
    for res in results:
        print(res.line())
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return 2 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hartreelab",
        description="Simulations and verification for the fractional heat flow "
        "with a convolution nonlinearity",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="path to the experiment config")
    common.add_argument("--out", default="results", help="output directory")
    common.add_argument("--workers", type=int, default=1, help="worker processes")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized checks")

    sub.add_parser("simulate", parents=[common], help="run one simulation")
    sub.add_parser("sweep", parents=[common], help="run a parameter sweep")
    sub.add_parser("classify", parents=[common], help="tabulate regime predictions")

    ver = sub.add_parser("verify", help="run invariant suites")
    ver.add_argument(
        "--suite",
        default="all",
        help="spectral | semigroup | operators | capacity | solver | all",
    )
    ver.add_argument("--seed", type=int, default=0)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            return cmd_verify(args.suite, args.seed)
        cfg = load_config(args.config)
        out_dir = Path(args.out)
        if args.command == "simulate":
            return cmd_simulate(cfg, out_dir)
        if args.command == "sweep":
            return cmd_sweep(cfg, out_dir, max(1, args.workers))
        if args.command == "classify":
            return cmd_classify(cfg, out_dir)
        raise AssertionError(f"unhandled command {args.command}")
    except (ConfigError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (FloatingPointError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
