"""Command-line entry point: ``heuristics-lab {run,oracle,verify,dist,drift}``.

Every config key can be given as a flag of the same dotted name
(``--alg.kind ea``); the common ones also have short aliases (``--alg ea``).
Flags override values read from ``--config``.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np
from scipy.stats import binom

from . import __version__
from .benchmarks import BenchmarkSpec, benchmark_from_config
from .core import BitString, RngStream
from .harness import experiment_from_config, load_config, run_experiment
from .heuristics import AlgorithmSpec, algorithm_from_config
from .noise import NoiseSpec, noise_from_config
from .oracle import (
    LumpingError,
    TransitionMatrix,
    comma_exact_drift,
    condition_constant,
    drift_per_state,
    expected_hitting_time,
    full_chain,
    hitting_times,
    lumped_chain,
    path_probability,
    runtime_bound,
)
from .stats import check_dominated_by_scaled_geom, estimate_drift, survival_table

# (config key, short aliases, help)
SPEC_FLAGS = [
    ("alg.kind", ["--alg"], "rls, metropolis, sa, ea, fast_ea, fp_ea, comma, simple_ga"),
    ("alg.T", ["--T"], "Metropolis temperature"),
    ("alg.schedule", ["--schedule"], "SA schedule, geometric:T0,r or log:c"),
    ("alg.beta", ["--beta"], "power-law exponent of the fast EA"),
    ("alg.lambda", ["--lambda"], "offspring count of the (1,lambda) EA"),
    ("alg.mu", ["--mu"], "population size of the simple GA"),
    ("alg.rate", ["--rate"], "mutation rate (default 1/n)"),
    ("bench.kind", ["--bench"], "onemax, linear, leadingones, jump, plateau, needle, monotone_polynomial"),
    ("bench.n", ["--n"], "problem size"),
    ("bench.k", ["--k"], "jump/plateau parameter"),
    ("bench.weights", ["--weights"], "comma-separated linear weights"),
    ("bench.monomials", ["--monomials"], "monomials as coef:i,j;coef:k"),
    ("noise.kind", ["--noise"], "none, onebit, bitwise, pq, additive, adversarial"),
    ("noise.p", ["--p"], "noise probability p"),
    ("noise.q", ["--q"], "per-bit noise probability q"),
    ("noise.dist", ["--dist"], "additive distribution, e.g. gaussian:0,10"),
    ("noise.adversary", ["--adversary"], "anti or constant:v"),
    ("run.replicates", ["--replicates"], "number of replicates"),
    ("run.budget", ["--budget"], "iteration budget per replicate"),
    ("run.seed", ["--seed"], "master seed"),
    ("run.init", ["--init"], "uniform, optimum, zeros or a bit string"),
    ("output.path", ["--out"], "output file (default stdout)"),
    ("output.format", ["--format"], "csv or json"),
]


class UsageError(Exception):
    pass


def _add_spec_flags(p: argparse.ArgumentParser, keys: tuple[str, ...] = ("alg.", "bench.", "noise.", "run.", "output.")) -> None:
    p.add_argument("--config", "-c", help="key=value config file")
    group = p.add_argument_group("config keys")
    for key, aliases, text in SPEC_FLAGS:
        if key.startswith(keys):
            group.add_argument(f"--{key}", *aliases, dest=key, default=None, help=text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="heuristics-lab",
        description="Simulate and verify randomized search heuristics on noisy pseudo-Boolean functions.",
        allow_abbrev=False,
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("run", help="run replicates of an experiment config", allow_abbrev=False)
    _add_spec_flags(p)
    p.add_argument("--workers", type=int, default=None, help="worker processes")

    p = sub.add_parser("oracle", help="exact chain computations", allow_abbrev=False)
    _add_spec_flags(p, ("alg.", "bench.", "noise."))
    p.add_argument("--start", default="uniform", help="bit string or 'uniform'")
    p.add_argument("--horizon", type=int, default=None, help="path-probability horizon")
    p.add_argument("--chain", choices=("auto", "lumped", "full"), default="auto")
    p.add_argument("--matrix", action="store_true", help="include the transition matrix")

    p = sub.add_parser("verify", help="run the acceptance suite", allow_abbrev=False)
    p.add_argument("--only", default=None, help="comma-separated check numbers")

    p = sub.add_parser("dist", help="runtime distribution and dominance verdict", allow_abbrev=False)
    _add_spec_flags(p)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--confidence", type=float, default=0.99)
    p.add_argument("--out-dir", default=None, help="directory for tables and the survival plot")
    p.add_argument("--no-plot", action="store_true")

    p = sub.add_parser("drift", help="per-level drift estimates", allow_abbrev=False)
    _add_spec_flags(p, ("alg.", "bench.", "noise.", "run.seed"))
    p.add_argument("--levels", default=None, help="comma-separated distances (default 1..n)")
    p.add_argument("--samples", type=int, default=10000, help="samples per level")
    p.add_argument("--epsilon", type=float, default=None, help="exponent for d0 = 2e^2 n^eps / lambda")
    p.add_argument("--out-dir", default=None)
    p.add_argument("--no-plot", action="store_true")
    return parser


def _resolve_config(args: argparse.Namespace) -> dict[str, str]:
    cfg: dict[str, str] = {}
    if getattr(args, "config", None):
        path = Path(args.config)
        if not path.is_file():
            raise UsageError(f"config file not found: {args.config}")
        cfg.update(load_config(path))
    for key, _, _ in SPEC_FLAGS:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    return cfg


def _specs(cfg: dict[str, str]) -> tuple[AlgorithmSpec, BenchmarkSpec, NoiseSpec]:
    for key in ("alg.kind", "bench.kind", "bench.n"):
        if not cfg.get(key):
            raise UsageError(f"missing {key} (flag --{key})")
    return algorithm_from_config(cfg), benchmark_from_config(cfg), noise_from_config(cfg)


def _finite(x: float):
    return x if math.isfinite(x) else None


def _dump(doc) -> str:
    return json.dumps(doc, indent=2) + "\n"


# -- subcommands --------------------------------------------------------------------


def cmd_run(args) -> int:
    config = experiment_from_config(_resolve_config(args))
    result = run_experiment(config, workers=args.workers)
    if config.output:
        result.write(config.output, config.output_format)
    else:
        sys.stdout.write(result.to_csv() if config.output_format == "csv" else result.to_json())
    sys.stderr.write(_dump(result.summary))
    return 0


def _oracle_chain(alg, spec, noise, which: str) -> tuple[str, TransitionMatrix]:
    if which in ("auto", "lumped"):
        try:
            return "lumped", lumped_chain(alg, spec, noise)
        except LumpingError:
            if which == "lumped":
                raise
    return "full", full_chain(alg, spec, noise)


def cmd_oracle(args) -> int:
    alg, spec, noise = _specs(_resolve_config(args))
    n = spec.n
    doc: dict = {
        "algorithm": alg.to_config(),
        "benchmark": spec.to_config(),
        "noise": noise.to_config(),
        "start": args.start,
    }
    start = None if args.start == "uniform" else BitString.from_str(args.start)
    if start is not None and start.n != n:
        raise UsageError("--start length differs from n")
    try:
        c = condition_constant(alg, noise, n)
    except ValueError:
        c = math.nan
    doc["condition_constant"] = _finite(c)
    doc["runtime_bound"] = _finite(runtime_bound(n, c)) if math.isfinite(c) else None

    if alg.kind != "sa":
        kind, M = _oracle_chain(alg, spec, noise, args.chain)
        if kind == "lumped":
            vec = binom.pmf(np.arange(n + 1), n, 0.5) if start is None else n - start.ones_count()
        else:
            vec = np.full(1 << n, 2.0**-n) if start is None else start
        times = hitting_times(M)
        e = expected_hitting_time(M, vec)
        doc["chain"] = kind
        doc["states"] = len(M.states)
        doc["expected_hitting_time"] = _finite(e)
        doc["max_expected_hitting_time"] = _finite(float(times.max()))
        if doc["runtime_bound"] is not None:
            doc["bound_holds"] = bool(float(times.max()) <= doc["runtime_bound"])
        if args.matrix:
            doc["matrix"] = {
                "states": [s if isinstance(s, int) else str(s) for s in M.states],
                "target": M.target,
                "probs": M.probs.tolist(),
            }
    elif args.horizon is None:
        raise UsageError("simulated annealing is time-inhomogeneous; pass --horizon")

    if args.horizon is not None:
        if start is None:
            raise UsageError("--horizon needs a fixed --start")
        r = path_probability(alg, spec, noise, start, args.horizon)
        doc["path_probability"] = {
            "horizon": r.horizon,
            "exact_prob": r.exact_prob,
            "lower_bound": _finite(r.lower_bound),
            "holds": r.holds if math.isfinite(r.lower_bound) else None,
        }
    sys.stdout.write(_dump(doc))
    return 0


def cmd_verify(args) -> int:
    from .acceptance import run_all

    numbers = None
    if args.only:
        try:
            numbers = {int(v) for v in args.only.split(",") if v.strip()}
        except ValueError:
            raise UsageError(f"--only expects numbers, got {args.only!r}") from None
    results = run_all(numbers)
    for r in results:
        print(r.line(), flush=True)
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return 1 if failed else 0


def _write_rows(path: Path, rows: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\r\n")
        w.writeheader()
        w.writerows(rows)


def cmd_dist(args) -> int:
    cfg = _resolve_config(args)
    cfg.setdefault("run.replicates", "1000")
    config = experiment_from_config(cfg)
    n = config.benchmark.n
    try:
        c = condition_constant(config.algorithm, config.noise, n)
    except ValueError as exc:
        raise UsageError(f"no dominance bound for this configuration: {exc}") from None
    p = (c / math.e) ** n
    result = run_experiment(config, workers=args.workers)
    times = [r.hitting_time for r in result.records]
    cens = [r.censored for r in result.records]
    verdict = check_dominated_by_scaled_geom(times, n, p, args.confidence, censored=cens)
    curve = survival_table(times, n, p)
    levels = (0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95, 0.99, 1.0)
    qs = np.quantile(np.asarray(times, dtype=float), levels, method="inverted_cdf")
    quantiles = [
        {"quantile": q, "hitting_time": int(t),
         "bound_survival": float(survival_table([t], n, p)[0]["bound_survival"])}
        for q, t in zip(levels, qs)
    ]
    doc = {
        "config": result.config_echo,
        "bound": {"scale": n, "p": p, "c": c},
        "verdict": verdict.to_dict(),
        "summary": result.summary,
        "quantiles": quantiles,
    }
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        result.write(out / "records.csv")
        _write_rows(out / "quantiles.csv", quantiles)
        _write_rows(out / "survival.csv", curve)
        (out / "verdict.json").write_text(_dump(doc))
        if not args.no_plot:
            from .plotting import survival_figure

            survival_figure(curve, verdict, out / "survival.png",
                            title=f"{config.algorithm.kind} on {config.benchmark}")
    sys.stdout.write(_dump(doc))
    return 0


def cmd_drift(args) -> int:
    cfg = _resolve_config(args)
    alg, spec, noise = _specs(cfg)
    n = spec.n
    if args.levels:
        levels = sorted({int(v) for v in args.levels.split(",") if v.strip()})
    else:
        levels = list(range(1, n + 1))
    rng = RngStream(int(cfg.get("run.seed", 0)), 0)
    est = estimate_drift(alg, spec, noise, levels, args.samples, rng, epsilon=args.epsilon)
    exact = _exact_drift(alg, spec, noise, levels)
    rows = []
    for d, lev in est.per_level.items():
        row = {"level": d, "mean": lev.mean, "stderr": lev.stderr, "count": lev.count}
        if exact is not None:
            row["exact"] = exact[d]
        rows.append(row)
    doc = {
        "algorithm": alg.to_config(),
        "benchmark": spec.to_config(),
        "noise": noise.to_config(),
        "d0": est.d0,
        "epsilon": args.epsilon,
        "per_level": rows,
    }
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        _write_rows(out / "drift.csv", rows)
        (out / "drift.json").write_text(_dump(doc))
        if not args.no_plot:
            from .plotting import drift_figure

            drift_figure(est, out / "drift.png", exact, title=f"{alg.kind} on {spec}")
    sys.stdout.write(_dump(doc))
    return 0


def _exact_drift(alg, spec, noise, levels) -> dict[int, float] | None:
    """Exact one-step drift where an oracle exists, else ``None``."""
    if alg.kind == "comma" and noise.kind == "none" and alg.rate is None:
        return {d: comma_exact_drift(spec.n, d, alg.lam) for d in levels}
    try:
        M = lumped_chain(alg, spec, noise)
    except (LumpingError, ValueError):
        return None
    drift = drift_per_state(M, lambda d: d)
    return {d: float(drift[d]) for d in levels}


COMMANDS = {"run": cmd_run, "oracle": cmd_oracle, "verify": cmd_verify, "dist": cmd_dist, "drift": cmd_drift}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"heuristics-lab {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError, OSError) as exc:
        print(f"heuristics-lab {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
