"""Randomized windowed backoff: binary-exponential and quadratic, each in
unbounded and capped variants.

Acknowledgement-based: a transmitter detects failure solely by not hearing
its own message, so the algorithms run with or without collision detection.
The window after a success has size 1, so fresh packets go out immediately;
the k-th retry window starts the round after the failed attempt.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..channel import Feedback
from .base import Station

# Windows above 2**62 would overflow the schedule arithmetic; a station that
# far gone waits longer than any simulated horizon anyway.
_MAX_EXPONENT = 62


@dataclass(frozen=True)
class BackoffPolicy:
    kind: str  # "beb" | "qb"
    cap: int | None = None  # BEB: cap exponent; QB: cap index


BEB = BackoffPolicy("beb")
BEB_CAPPED = BackoffPolicy("beb", 10)
QB = BackoffPolicy("qb")
QB_CAPPED = BackoffPolicy("qb", 32)


def window_size(policy: BackoffPolicy, k: int) -> int:
    """Length of the k-th retry window (k >= 1)."""
    if k < 1:
        raise ValueError(f"attempt count must be >= 1, got {k}")
    if policy.kind == "beb":
        exp = k if policy.cap is None else min(policy.cap, k)
        return 2 ** min(exp, _MAX_EXPONENT)
    if policy.kind == "qb":
        i = k if policy.cap is None else min(policy.cap, k)
        return min(i, 2**31) ** 2
    raise ValueError(f"unknown backoff kind {policy.kind!r}")


class _BackoffStation(Station):
    """Shared machinery for all four policy variants."""

    full_sensing = False
    randomized = True
    policy = BEB

    __slots__ = ("stream", "k", "pending", "last_window")

    def __init__(self, sid: int, n: int, stream=None):
        super().__init__(sid, n, stream)
        if stream is None:
            raise ValueError("backoff stations need a per-station random stream")
        self.stream = stream
        self.k = 0
        self.pending = 0  # rounds left before the scheduled transmission
        self.last_window = None  # (window length, chosen slot), for tests

    def activate(self, t: int) -> None:
        self.k = 0
        self.pending = 0
        self.decision = self.head_message()

    def observe(self, fb: Feedback, injected: int) -> None:
        transmitted = self.decision is not None
        if transmitted:
            if fb.heard:
                assert fb.message.station == self.sid
                self.k = 0
                # Next packet (if any) rides the size-1 window immediately.
                self.decision = self.head_message() if self.queue else None
            else:
                self.k += 1
                w = window_size(self.policy, self.k)
                slot = self.stream.randint(w) if w > 1 else 0
                self.last_window = (w, slot)
                self.pending = slot
                self.decision = self.head_message() if slot == 0 else None
        else:
            assert self.pending > 0
            self.pending -= 1
            self.decision = self.head_message() if self.pending == 0 else None


class BebStation(_BackoffStation):
    name = "beb"
    policy = BEB


class BebCappedStation(_BackoffStation):
    name = "beb-capped"
    policy = BEB_CAPPED


class QbStation(_BackoffStation):
    name = "qb"
    policy = QB


class QbCappedStation(_BackoffStation):
    name = "qb-capped"
    policy = QB_CAPPED
