"""Algorithm registry: CLI names to station-automaton classes."""

from __future__ import annotations

from .adhoc import CountingBackoffStation, QuadrupleRoundStation, QueueBackoffStation
from .backoff import (
    BEB,
    BEB_CAPPED,
    QB,
    QB_CAPPED,
    BackoffPolicy,
    BebCappedStation,
    BebStation,
    QbCappedStation,
    QbStation,
    window_size,
)
from .base import Station
from .token import MbtfStation, OfRrwStation, OfSrrStation, RrwStation, SrrStation

REGISTRY: dict[str, type[Station]] = {
    cls.name: cls
    for cls in (
        RrwStation,
        OfRrwStation,
        SrrStation,
        OfSrrStation,
        MbtfStation,
        CountingBackoffStation,
        QuadrupleRoundStation,
        QueueBackoffStation,
        BebStation,
        BebCappedStation,
        QbStation,
        QbCappedStation,
    )
}

ALGORITHM_NAMES = sorted(REGISTRY)


def station_class(name: str) -> type[Station]:
    try:
        return REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown algorithm {name!r}; known: {', '.join(ALGORITHM_NAMES)}") from None
