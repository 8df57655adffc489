"""Command-line harness: single runs, grid sweeps, bound verification, and
adversary-trace checking.  All output is deterministic CSV; exit codes are
0 (success / bounds hold), 1 (bound violation), 2 (usage or config error).
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

from .adversary import check_admissible, check_admissible_individual, parse_rate, parse_trace, trace_totals
from .algorithms import ALGORITHM_NAMES, station_class
from .bounds import DEFAULT_BOUND_HORIZON, THEOREM_NAMES, verify_bounds
from .channel import ChannelConfig
from .dispatch import AdversarySpec, run_execution
from .engine import StageVerdict
from .errors import ConfigError, IncompatibleAlgorithm, MacsimError, OutOfRange
from .metrics import DEFAULT_K, DEFAULT_ROUND_CAP, DEFAULT_STAGE_CAP

CSV_HEADER = "algorithm,n,rho,beta,seed,cd,verdict,avg_latency,stages,max_latency,max_total_queue,rounds"


@dataclass(frozen=True)
class ExperimentConfig:
    """One run's parameters; round-trips through the flat key=value format."""

    algorithm: str
    n: int
    rho: str
    beta: str = "10"
    collision_detection: bool | None = None  # None: the algorithm's native channel
    seed: int = 0
    k: int = DEFAULT_K
    stage_cap: int = DEFAULT_STAGE_CAP
    round_cap: int = DEFAULT_ROUND_CAP
    adversary: str = "randomized"
    rates: tuple[str, ...] | None = None
    output: str | None = None

    def cd(self) -> bool:
        if self.collision_detection is None:
            return station_class(self.algorithm).requires_cd
        return self.collision_detection

    def emit(self) -> str:
        lines = [
            f"algorithm = {self.algorithm}",
            f"n = {self.n}",
            f"rho = {self.rho}",
            f"beta = {self.beta}",
        ]
        if self.collision_detection is not None:
            lines.append(f"collision_detection = {'true' if self.collision_detection else 'false'}")
        lines.append(f"seed = {self.seed}")
        lines.append(f"k = {self.k}")
        lines.append(f"stage_cap = {self.stage_cap}")
        lines.append(f"round_cap = {self.round_cap}")
        lines.append(f"adversary = {self.adversary}")
        if self.rates is not None:
            lines.append(f"rates = {','.join(self.rates)}")
        if self.output is not None:
            lines.append(f"output = {self.output}")
        return "\n".join(lines) + "\n"


def parse_config_file(text: str) -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, eq, value = line.partition("=")
        if not eq:
            raise ConfigError(f"config line {lineno}: expected 'key = value', got {line!r}")
        values[key.strip()] = value.strip()
    return values


def config_from_mapping(values: dict[str, str]) -> ExperimentConfig:
    def parse_bool(s: str) -> bool:
        if s.lower() in ("true", "1", "yes"):
            return True
        if s.lower() in ("false", "0", "no"):
            return False
        raise ConfigError(f"expected boolean, got {s!r}")

    try:
        kwargs: dict = {
            "algorithm": values["algorithm"],
            "n": int(values["n"]),
            "rho": values["rho"],
        }
    except KeyError as exc:
        raise ConfigError(f"missing required config key: {exc.args[0]}") from None
    if "beta" in values:
        kwargs["beta"] = values["beta"]
    if "collision_detection" in values:
        kwargs["collision_detection"] = parse_bool(values["collision_detection"])
    for int_key in ("seed", "k", "stage_cap", "round_cap"):
        if int_key in values:
            kwargs[int_key] = int(values[int_key])
    if "adversary" in values:
        kwargs["adversary"] = values["adversary"]
    if "rates" in values:
        kwargs["rates"] = tuple(r.strip() for r in values["rates"].split(","))
    if "output" in values:
        kwargs["output"] = values["output"]
    return ExperimentConfig(**kwargs)


def _adversary_spec(cfg: ExperimentConfig) -> AdversarySpec:
    kind = cfg.adversary
    if kind.startswith("trace:"):
        path = kind[len("trace:") :]
        with open(path) as fh:
            rounds = parse_trace(fh)
        return AdversarySpec("trace", cfg.rho, cfg.beta, trace_rounds=rounds)
    return AdversarySpec(kind, cfg.rho, cfg.beta, rates=cfg.rates)


def _fmt(value: float | None) -> str:
    return "" if value is None else f"{value:.6f}"


def run_one(cfg: ExperimentConfig) -> tuple[str, object]:
    """Execute one config; returns (CSV row, report)."""
    config = ChannelConfig(cfg.n, cfg.cd())
    report = run_execution(
        config,
        cfg.algorithm,
        _adversary_spec(cfg),
        cfg.seed,
        StageVerdict(),
        k=cfg.k,
        stage_cap=cfg.stage_cap,
        round_cap=cfg.round_cap,
    )
    rho_str = f"{float(parse_rate(cfg.rho)):.6f}"
    beta_str = f"{float(parse_rate(cfg.beta)):.6f}"
    row = ",".join(
        [
            cfg.algorithm,
            str(cfg.n),
            rho_str,
            beta_str,
            str(cfg.seed),
            "true" if cfg.cd() else "false",
            report.verdict,
            _fmt(report.avg_latency),
            str(report.stages),
            str(report.max_delay),
            str(report.max_total_queue),
            str(report.rounds),
        ]
    )
    return row, report


def _sweep_cell(cfg: ExperimentConfig) -> str:
    try:
        row, _ = run_one(cfg)
        return row
    except MacsimError as exc:
        rho_str = f"{float(parse_rate(cfg.rho)):.6f}"
        beta_str = f"{float(parse_rate(cfg.beta)):.6f}"
        return ",".join(
            [
                cfg.algorithm,
                str(cfg.n),
                rho_str,
                beta_str,
                str(cfg.seed),
                "true" if cfg.cd() else "false",
                f"error:{type(exc).__name__}",
                "",
                "0",
                "0",
                "0",
                "0",
            ]
        )


# -- subcommands -------------------------------------------------------------


def _base_config(args) -> ExperimentConfig:
    values: dict[str, str] = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            values = parse_config_file(fh.read())
    overrides = {
        "algorithm": getattr(args, "algorithm", None),
        "n": getattr(args, "n", None),
        "rho": getattr(args, "rho", None),
        "beta": getattr(args, "beta", None),
        "seed": getattr(args, "seed", None),
        "k": getattr(args, "K", None),
        "stage_cap": getattr(args, "stage_cap", None),
        "round_cap": getattr(args, "round_cap", None),
        "adversary": getattr(args, "adversary", None),
        "rates": getattr(args, "rates", None),
        "output": getattr(args, "output", None),
    }
    for key, value in overrides.items():
        if value is not None:
            values[key] = str(value)
    if getattr(args, "collision_detection", None) is not None:
        values["collision_detection"] = "true" if args.collision_detection else "false"
    if "seed" not in values and os.environ.get("MACSIM_SEED"):
        values["seed"] = os.environ["MACSIM_SEED"]
    return config_from_mapping(values)


def cmd_run(args) -> int:
    cfg = _base_config(args)
    row, report = run_one(cfg)
    out = CSV_HEADER + "\n" + row + "\n"
    if cfg.output:
        with open(cfg.output, "w") as fh:
            fh.write(out)
    sys.stdout.write(out)
    if args.stages:
        with open(args.stages, "w") as fh:
            fh.write("stage,avg_latency\n")
            for i, avg in enumerate(report.stage_averages, start=1):
                fh.write(f"{i},{avg:.6f}\n")
    return 0


def sweep_rows(cells: list[ExperimentConfig], jobs: int) -> list[str]:
    if jobs <= 1:
        return [_sweep_cell(c) for c in cells]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_sweep_cell, cells, chunksize=1))


def cmd_sweep(args) -> int:
    algorithms = [a for a in args.algorithms.split(",") if a]
    for a in algorithms:
        if a not in ALGORITHM_NAMES:
            raise ConfigError(f"unknown algorithm {a!r}")
    rhos = [r for r in args.rhos.split(",") if r]
    ns = [int(x) for x in args.ns.split(",") if x]
    seeds = list(range(args.seeds))
    base = {
        "beta": args.beta,
        "k": args.K,
        "stage_cap": args.stage_cap,
        "round_cap": args.round_cap,
        "adversary": args.adversary,
    }
    cells = [
        ExperimentConfig(
            algorithm=a,
            n=n,
            rho=rho,
            seed=seed,
            collision_detection=args.collision_detection,
            **base,
        )
        for a in sorted(algorithms)
        for n in sorted(ns)
        for rho in sorted(rhos, key=lambda r: Fraction(parse_rate(r)))
        for seed in seeds
    ]
    rows = sweep_rows(cells, args.jobs)
    text = CSV_HEADER + "\n" + "".join(r + "\n" for r in rows)
    with open(args.out, "w") as fh:
        fh.write(text)
    sys.stdout.write(f"wrote {len(rows)} rows to {args.out}\n")
    return 0


def cmd_verify_bounds(args) -> int:
    report = verify_bounds(
        args.theorem,
        args.algorithm,
        args.n,
        args.rho,
        args.beta,
        seeds=args.seeds,
        strategy=args.strategy,
        horizon=args.horizon,
    )
    qb = "-" if report.queue_bound is None else f"{report.queue_bound:.6f}"
    sys.stdout.write(
        f"theorem={report.theorem} algorithm={report.algorithm} n={report.n} "
        f"rho={report.rho} beta={report.beta} queue_bound={qb} "
        f"latency_bound={report.latency_bound:.6f}\n"
    )
    for run in report.runs:
        sys.stdout.write(
            f"  adversary={run.adversary} seed={run.seed} "
            f"max_queue={run.max_queue} max_latency={run.max_latency} "
            f"{'ok' if run.ok else 'VIOLATION'}\n"
        )
    if report.passed:
        sys.stdout.write("PASS\n")
        return 0
    sys.stdout.write("FAIL\n")
    return 1


def cmd_check_adversary(args) -> int:
    with open(args.trace) as fh:
        rounds = parse_trace(fh)
    if args.rates is not None:
        rates = [r.strip() for r in args.rates.split(",")]
        n = len(rates)
        matrix = [[r.get(s, 0) for s in range(n)] for r in rounds]
        for r in rounds:
            if any(s >= n for s in r):
                raise ConfigError(f"trace mentions station >= {n} but only {n} rates given")
        result = check_admissible_individual(matrix, rates, args.beta, rho=args.rho)
    else:
        if args.rho is None:
            raise ConfigError("--rho is required without --rates")
        result = check_admissible(trace_totals(rounds), args.rho, args.beta)
    if result.ok:
        sys.stdout.write("admissible\n")
        return 0
    where = f"interval [{result.interval[0]}, {result.interval[1]}]"
    if result.station is not None:
        where = f"station {result.station}, {where}"
    sys.stdout.write(f"violation at {where}\n")
    return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="macsim",
        description="Simulate broadcasting on adversarial multiple-access channels.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="flat key=value config file; flags override")
        p.add_argument("--algorithm", choices=ALGORITHM_NAMES)
        p.add_argument("--n", type=int)
        p.add_argument("--rho")
        p.add_argument("--beta")
        p.add_argument("--seed", type=int)
        p.add_argument("--K", type=int, dest="K")
        p.add_argument("--stage-cap", type=int, dest="stage_cap")
        p.add_argument("--round-cap", type=int, dest="round_cap")
        p.add_argument(
            "--adversary",
            help="randomized | randomized-individual | <strategy> | trace:<path>",
        )
        p.add_argument("--rates", help="comma-separated individual rates")
        cd = p.add_mutually_exclusive_group()
        cd.add_argument(
            "--collision-detection", dest="collision_detection", action="store_true", default=None
        )
        cd.add_argument(
            "--no-collision-detection", dest="collision_detection", action="store_false"
        )

    p_run = sub.add_parser("run", help="one execution, stage-verdict stop rule")
    add_common(p_run)
    p_run.add_argument("--output", help="also write the summary CSV here")
    p_run.add_argument("--stages", help="write per-stage averages CSV here")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="grid of (algorithm x n x rho x seed) runs")
    p_sweep.add_argument("--algorithms", required=True, help="comma-separated names")
    p_sweep.add_argument("--rhos", required=True, help="comma-separated rates")
    p_sweep.add_argument("--ns", required=True, help="comma-separated station counts")
    p_sweep.add_argument("--seeds", type=int, default=5, help="seeds per cell (0..s-1)")
    p_sweep.add_argument("--beta", default="10")
    p_sweep.add_argument("--K", type=int, default=DEFAULT_K, dest="K")
    p_sweep.add_argument("--stage-cap", type=int, default=DEFAULT_STAGE_CAP, dest="stage_cap")
    p_sweep.add_argument("--round-cap", type=int, default=DEFAULT_ROUND_CAP, dest="round_cap")
    p_sweep.add_argument("--adversary", default="randomized")
    p_sweep.add_argument("--jobs", type=int, default=1)
    p_sweep.add_argument("--out", required=True)
    cd = p_sweep.add_mutually_exclusive_group()
    cd.add_argument(
        "--collision-detection", dest="collision_detection", action="store_true", default=None
    )
    cd.add_argument("--no-collision-detection", dest="collision_detection", action="store_false")
    p_sweep.set_defaults(func=cmd_sweep)

    p_vb = sub.add_parser("verify-bounds", help="check measured maxima against a theorem")
    p_vb.add_argument("--theorem", required=True, choices=THEOREM_NAMES)
    p_vb.add_argument("--algorithm", default=None, choices=ALGORITHM_NAMES)
    p_vb.add_argument("--n", type=int, required=True)
    p_vb.add_argument("--rho", required=True)
    p_vb.add_argument("--beta", default="10")
    p_vb.add_argument("--seeds", type=int, default=10)
    p_vb.add_argument("--strategy", default=None)
    p_vb.add_argument("--horizon", type=int, default=DEFAULT_BOUND_HORIZON)
    p_vb.set_defaults(func=cmd_verify_bounds)

    p_ca = sub.add_parser("check-adversary", help="admissibility oracle on a trace file")
    p_ca.add_argument("trace")
    p_ca.add_argument("--rho")
    p_ca.add_argument("--beta", required=True)
    p_ca.add_argument("--rates", help="comma-separated individual rates")
    p_ca.set_defaults(func=cmd_check_adversary)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except (ConfigError, OutOfRange, IncompatibleAlgorithm, ValueError, OSError, KeyError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
