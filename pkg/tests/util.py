"""Shared helpers: drive the reference engine from explicit injection traces
and render event sequences compactly."""

from __future__ import annotations

from macsim.adversary import AdversaryType
from macsim.channel import COLLISION, HEARD, SILENCE, ChannelConfig
from macsim.engine import Engine
from macsim.metrics import StageLedger
from macsim.strategies import TraceStrategy

EVENT_CHARS = {SILENCE: "S", HEARD: "H", COLLISION: "C"}


def trace_engine(
    algorithm: str,
    n: int,
    rounds: list[dict[int, int]],
    horizon: int,
    *,
    cd: bool | None = None,
    preload: dict[int, int] | None = None,
    rho="1",
    beta="1000000",
    activation_bound: int = 1,
    ledger: StageLedger | None = None,
) -> Engine:
    """Engine fed by an explicit per-round injection schedule (padded with
    empty rounds up to the horizon); the generous default type keeps the
    trace bucket-unconstrained unless a test narrows it."""
    from macsim.algorithms import station_class

    if cd is None:
        cd = station_class(algorithm).requires_cd
    padded = list(rounds) + [{}] * max(0, horizon - len(rounds))
    adversary = TraceStrategy(n, AdversaryType.of(rho, beta), padded)
    engine = Engine(
        ChannelConfig(n, cd, activation_bound),
        algorithm,
        adversary,
        retain_log=True,
        ledger=ledger,
    )
    for sid, count in (preload or {}).items():
        engine.preload(sid, count)
    for _ in range(horizon):
        engine.run_round()
    return engine


def events(engine: Engine) -> str:
    return "".join(EVENT_CHARS[r.event] for r in engine.round_log)


def deliveries(engine: Engine) -> list[tuple[int, int, int]]:
    """(packet id, station, delay) in delivery order."""
    out = []
    for rec in engine.round_log:
        if rec.delivered is not None:
            pkt = engine.packets[rec.delivered]
            out.append((pkt.id, pkt.station, pkt.delivered_round - pkt.injected_round))
    return out
