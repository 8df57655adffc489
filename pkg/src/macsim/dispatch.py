"""Execution dispatch: compiled kernel when possible, pure Python otherwise.

The Cython kernel (macsim._kernel) reproduces the reference engine
bit-for-bit for randomized adversaries (equivalence is pinned by tests), so
runs are routed to it whenever it supports the requested configuration:
randomized or randomized-individual injection, no round-log retention, no
preloaded queues.  Scripted strategies and traces always run on the
reference engine.  Set MACSIM_PURE=1 to force the fallback.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

from .adversary import (
    AdversaryType,
    RandomizedAdversary,
    RandomizedIndividualAdversary,
    parse_rate,
)
from .algorithms import station_class
from .channel import ChannelConfig
from .engine import Engine, ExecutionReport, FixedHorizon, StageVerdict
from .errors import IncompatibleAlgorithm
from .metrics import DEFAULT_K, DEFAULT_ROUND_CAP, DEFAULT_STAGE_CAP, StageLedger
from .rng import ADVERSARY_STREAM, Stream, station_stream_id, substream
from .strategies import STRATEGIES, TraceStrategy, make_strategy

try:  # pragma: no cover - exercised implicitly by the equivalence tests
    from . import _kernel

    if not hasattr(_kernel, "run"):
        _kernel = None
except ImportError:  # pragma: no cover
    _kernel = None

_FORCE_PURE = os.environ.get("MACSIM_PURE", "") not in ("", "0")


def kernel_available() -> bool:
    return _kernel is not None and not _FORCE_PURE


KERNEL_ADVERSARIES = ("randomized", "randomized-individual")


@dataclass
class AdversarySpec:
    """Declarative adversary description, buildable on either engine."""

    kind: str  # randomized | randomized-individual | <strategy name> | trace
    rho: str | float
    beta: str | float
    rates: tuple | None = None  # individual rates; None means uniform rho/n
    trace_rounds: list | None = None

    def adv_type(self) -> AdversaryType:
        return AdversaryType.of(self.rho, self.beta)

    def build(self, n: int, seed: int):
        """Instantiate the pure-engine adversary object."""
        adv_type = self.adv_type()
        if self.kind == "randomized":
            return RandomizedAdversary(n, adv_type, Stream.for_consumer(seed, ADVERSARY_STREAM))
        if self.kind == "randomized-individual":
            stream = Stream.for_consumer(seed, ADVERSARY_STREAM)
            if self.rates is None:
                return RandomizedIndividualAdversary.uniform(n, adv_type, stream)
            return RandomizedIndividualAdversary(n, adv_type, list(self.rates), stream)
        if self.kind == "trace":
            return TraceStrategy(n, adv_type, self.trace_rounds or [])
        if self.kind in STRATEGIES:
            return make_strategy(self.kind, n, adv_type)
        raise ValueError(f"unknown adversary kind {self.kind!r}")


ALGORITHM_IDS = {
    "rrw": 0,
    "of-rrw": 1,
    "srr": 2,
    "of-srr": 3,
    "mbtf": 4,
    "counting-backoff": 5,
    "quadruple-round": 6,
    "queue-backoff": 7,
    "beb": 8,
    "beb-capped": 9,
    "qb": 10,
    "qb-capped": 11,
}


def _kernel_run(
    config: ChannelConfig,
    algorithm: str,
    spec: AdversarySpec,
    seed: int,
    stop,
    k: int,
    stage_cap: int,
    round_cap: int,
    check_invariants: bool,
    need_stages: bool,
) -> ExecutionReport:
    adv_type = spec.adv_type()
    n = config.n
    cls = station_class(algorithm)
    if cls.requires_cd and not config.collision_detection:
        raise IncompatibleAlgorithm(f"{algorithm} requires a channel with collision detection")
    if spec.kind == "randomized-individual":
        rates = spec.rates
        if rates is None:
            rates = [adv_type.rho / n] * n
        rates_f = [float(parse_rate(r)) for r in rates]
        individual = 1
    else:
        rates_f = []
        individual = 0
    station_bitgens = (
        [substream(seed, station_stream_id(s)) for s in range(n)] if cls.randomized else []
    )
    horizon = stop.rounds if isinstance(stop, FixedHorizon) else -1
    out = _kernel.run(
        ALGORITHM_IDS[algorithm],
        n,
        1 if config.collision_detection else 0,
        float(adv_type.rho),
        float(adv_type.beta),
        individual,
        rates_f,
        substream(seed, ADVERSARY_STREAM),
        station_bitgens,
        horizon,
        k if need_stages else 0,
        stage_cap,
        round_cap,
        1 if check_invariants else 0,
    )
    verdict = out["verdict"]
    return ExecutionReport(
        algorithm=algorithm,
        n=n,
        seed=seed,
        cd=config.collision_detection,
        verdict=verdict,
        avg_latency=out["avg_latency"],
        stage_averages=out["stage_averages"],
        max_delay=out["max_delay"],
        max_total_queue=out["max_total_queue"],
        rounds=out["rounds"],
        injected=out["injected"],
        delivered=out["delivered"],
        max_pending_age=out["max_pending_age"],
    )


def run_execution(
    config: ChannelConfig,
    algorithm: str,
    spec: AdversarySpec,
    seed: int,
    stop,
    *,
    k: int = DEFAULT_K,
    stage_cap: int = DEFAULT_STAGE_CAP,
    round_cap: int = DEFAULT_ROUND_CAP,
    retain_log: bool = False,
    check_invariants: bool = True,
    force_pure: bool = False,
) -> ExecutionReport:
    """Run one execution to its stop rule; deterministic in (config, spec, seed)."""
    need_stages = isinstance(stop, StageVerdict)
    use_kernel = (
        kernel_available()
        and not force_pure
        and not retain_log
        and spec.kind in KERNEL_ADVERSARIES
    )
    if use_kernel:
        return _kernel_run(
            config, algorithm, spec, seed, stop, k, stage_cap, round_cap,
            check_invariants, need_stages,
        )
    ledger = StageLedger(k=k, stage_cap=stage_cap, round_cap=round_cap) if need_stages else None
    engine = Engine(
        config,
        algorithm,
        spec.build(config.n, seed),
        seed,
        ledger=ledger,
        retain_log=retain_log,
        check_invariants=check_invariants,
    )
    return engine.run(stop)
