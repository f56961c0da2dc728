"""Experiment configuration, replicate scheduling and result files.

Configs are flat ``key=value`` text with dotted keys::

    alg.kind=ea
    bench.kind=leadingones
    bench.n=7
    noise.kind=onebit
    noise.p=0.9
    run.replicates=1000
    run.seed=42
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .benchmarks import BenchmarkSpec, benchmark_from_config, optimum
from .core import BitString, derive_stream
from .heuristics import AlgorithmSpec, HittingRecord, algorithm_from_config, run_until_hit
from .noise import NO_NOISE, NoiseSpec, noise_from_config
from .stats import mean_ci

DEFAULT_BUDGET = 10**7
CSV_COLUMNS = ("replicate_index", "hitting_time", "censored", "evaluations", "seed")
THREADS_ENV = "HEURISTICS_LAB_THREADS"
# replicates per task handed to a worker process
_CHUNK = 2048


def parse_config_text(text: str) -> dict[str, str]:
    cfg = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise ValueError(f"line {lineno}: expected key=value, got {raw!r}")
        cfg[key.strip()] = value.strip()
    return cfg


def load_config(path: str | os.PathLike) -> dict[str, str]:
    return parse_config_text(Path(path).read_text())


@dataclass(frozen=True)
class ExperimentConfig:
    algorithm: AlgorithmSpec
    benchmark: BenchmarkSpec
    noise: NoiseSpec = NO_NOISE
    replicates: int = 1
    budget: int = DEFAULT_BUDGET
    master_seed: int = 0
    init: str = "uniform"
    output: str = ""
    output_format: str = "csv"

    def __post_init__(self):
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if self.budget < 1:
            raise ValueError("budget must be >= 1")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master seed must be a 64-bit unsigned integer")
        if self.output_format not in ("csv", "json"):
            raise ValueError(f"unknown output format {self.output_format!r}")
        self.initial_point()

    def initial_point(self) -> BitString | str:
        """``"uniform"`` or the fixed start; ``optimum``/``zeros`` are accepted names."""
        init = self.init.strip().lower()
        if init == "uniform":
            return "uniform"
        if init == "optimum":
            return optimum(self.benchmark)
        if init == "zeros":
            return BitString.zeros(self.benchmark.n)
        x = BitString.from_str(self.init)
        if x.n != self.benchmark.n:
            raise ValueError("dimension mismatch")
        return x

    def to_config(self) -> dict[str, str]:
        out = {}
        out.update(self.algorithm.to_config())
        out.update(self.benchmark.to_config())
        out.update(self.noise.to_config())
        out["run.replicates"] = str(self.replicates)
        out["run.budget"] = str(self.budget)
        out["run.seed"] = str(self.master_seed)
        out["run.init"] = self.init
        if self.output:
            out["output.path"] = self.output
        out["output.format"] = self.output_format
        return out

    def to_text(self) -> str:
        return "".join(f"{k}={v}\n" for k, v in self.to_config().items())


def experiment_from_config(cfg: dict[str, str]) -> ExperimentConfig:
    known_prefixes = ("alg.", "bench.", "noise.", "run.", "output.")
    unknown = [k for k in cfg if not k.startswith(known_prefixes)]
    if unknown:
        raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")
    for key in ("alg.kind", "bench.kind", "bench.n"):
        if not cfg.get(key):
            raise ValueError(f"missing config key {key}")
    return ExperimentConfig(
        algorithm=algorithm_from_config(cfg),
        benchmark=benchmark_from_config(cfg),
        noise=noise_from_config(cfg),
        replicates=int(cfg.get("run.replicates", 1)),
        budget=int(float(cfg.get("run.budget", DEFAULT_BUDGET))),
        master_seed=int(cfg.get("run.seed", 0)),
        init=cfg.get("run.init", "uniform"),
        output=cfg.get("output.path", ""),
        output_format=cfg.get("output.format", "csv"),
    )


@dataclass
class ResultSet:
    records: list[HittingRecord]
    config_echo: dict[str, str]
    summary: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(CSV_COLUMNS)
        for r in self.records:
            w.writerow((r.replicate_index, r.hitting_time, int(r.censored), r.evaluations, r.seed))
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {
            "config": self.config_echo,
            "summary": self.summary,
            "records": [
                {k: v for k, v in asdict(r).items() if k != "budget"} for r in self.records
            ],
        }
        return json.dumps(doc, indent=2) + "\n"

    def write(self, path: str | os.PathLike, fmt: str = "csv") -> None:
        text = self.to_csv() if fmt == "csv" else self.to_json()
        with open(path, "w", newline="") as fh:
            fh.write(text)


def summarize(records: list[HittingRecord], budget: int) -> dict:
    times = [r.hitting_time for r in records]
    n = len(times)
    if n >= 2:
        mean, half = mean_ci(times, 0.95)
    else:
        mean, half = float(times[0]), None
    return {
        "replicates": n,
        "budget": budget,
        "mean": mean,
        "ci95_half_width": half,
        "stderr": half / 1.959963984540054 if n >= 2 else None,
        "censored_fraction": sum(r.censored for r in records) / n,
        "min": min(times),
        "max": max(times),
    }


def _run_chunk(config: ExperimentConfig, start: int, stop: int) -> list[HittingRecord]:
    init = config.initial_point()
    return [
        run_until_hit(
            config.algorithm,
            config.benchmark,
            config.noise,
            init,
            config.budget,
            derive_stream(config.master_seed, i),
            replicate_index=i,
        )
        for i in range(start, stop)
    ]


def default_workers() -> int:
    cap = os.environ.get(THREADS_ENV)
    cpus = os.cpu_count() or 1
    if cap:
        try:
            return max(1, min(cpus, int(cap)))
        except ValueError:
            raise ValueError(f"{THREADS_ENV} must be an integer, got {cap!r}") from None
    return cpus


def run_experiment(config: ExperimentConfig, workers: int | None = None) -> ResultSet:
    """Run all replicates; replicate ``i`` draws from ``derive_stream(seed, i)``.

    Results do not depend on ``workers``: every replicate owns its stream
    and records are collected in replicate order.
    """
    workers = default_workers() if workers is None else max(1, workers)
    bounds = [(s, min(s + _CHUNK, config.replicates)) for s in range(0, config.replicates, _CHUNK)]
    if workers == 1:
        chunks = [_run_chunk(config, a, b) for a, b in bounds]
    else:
        if len(bounds) < workers:
            step = max(1, math.ceil(config.replicates / workers))
            bounds = [(s, min(s + step, config.replicates)) for s in range(0, config.replicates, step)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_run_chunk, [config] * len(bounds), *zip(*bounds)))
    records = [r for chunk in chunks for r in chunk]
    return ResultSet(records, config.to_config(), summarize(records, config.budget))
