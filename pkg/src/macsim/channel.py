"""Channel model: round events, station-visible feedback, packets and messages.

The channel is perfectly synchronous.  Exactly one message fits in a round;
the round outcome is determined solely by the number of simultaneous
transmitters (0 / 1 / >= 2).  Stations never see the raw event directly: they
see its projection, which collapses silence and collision into an
indistinguishable void round when the channel has no collision detection.
"""

from __future__ import annotations

from dataclasses import dataclass, field

# Round events (ground truth) and feedback kinds (station view).
SILENCE = 0
HEARD = 1
COLLISION = 2
VOID = 3  # silence-or-collision, only observable on channels without CD

EVENT_NAMES = {SILENCE: "silence", HEARD: "heard", COLLISION: "collision", VOID: "void"}


@dataclass(frozen=True)
class ChannelConfig:
    """Static channel parameters.

    ``activation_bound`` is the maximum number of passive stations the
    adversary may activate in a single round (k-activation; this artifact
    uses k=1 everywhere, which is also the default).
    """

    n: int
    collision_detection: bool = False
    activation_bound: int = 1

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"station count must be >= 1, got {self.n}")
        if self.activation_bound < 1:
            raise ValueError(f"activation bound must be >= 1, got {self.activation_bound}")


@dataclass(frozen=True)
class Message:
    """One transmission: at most one packet plus optional control bits.

    Plain-packet algorithms leave every control field at its default, which
    encodes "zero control bits".  Adaptive algorithms (MBTF, Queue-Backoff)
    use the extra fields.
    """

    station: int
    packet: int | None = None
    big: bool = False              # MBTF: sender's queue reached the big threshold
    queue_size: int | None = None  # Queue-Backoff: sender's queue-size estimate
    over: bool = False             # Queue-Backoff: last pending packet
    joiner: bool = False           # Queue-Backoff: first transmission after joining

    @property
    def has_control(self) -> bool:
        return self.big or self.over or self.joiner or self.queue_size is not None


@dataclass(frozen=True)
class Feedback:
    """Station-visible projection of a round event.

    ``kind`` is HEARD, VOID (no collision detection), or SILENCE/COLLISION
    (with collision detection).  The same value is handed to every invoked
    station in a round.
    """

    kind: int
    message: Message | None = None

    @property
    def heard(self) -> bool:
        return self.kind == HEARD


FB_VOID = Feedback(VOID)
FB_SILENCE = Feedback(SILENCE)
FB_COLLISION = Feedback(COLLISION)


@dataclass
class Packet:
    """A packet's whole life: injection, owner, and (eventual) delivery."""

    id: int
    station: int
    injected_round: int
    delivered_round: int | None = None

    @property
    def delay(self) -> int | None:
        if self.delivered_round is None:
            return None
        return self.delivered_round - self.injected_round


@dataclass
class RoundRecord:
    """Per-round log entry (kept only when log retention is on)."""

    round: int
    transmitters: int
    event: int
    delivered: int | None = None
    injections: list[tuple[int, int]] = field(default_factory=list)
    queued: int = 0


def compute_feedback(transmissions: list[Message]) -> tuple[int, Message | None]:
    """Map this round's transmissions to the ground-truth event.

    Returns ``(event, message)`` where the message is set only for HEARD.
    Total function: zero transmitters give silence, one gives its message,
    two or more give a collision.
    """
    count = len(transmissions)
    if count == 0:
        return SILENCE, None
    if count == 1:
        return HEARD, transmissions[0]
    return COLLISION, None


def project_feedback(event: int, message: Message | None, cd: bool) -> Feedback:
    """Project a round event onto what stations can actually observe."""
    if event == HEARD:
        return Feedback(HEARD, message)
    if cd:
        return FB_SILENCE if event == SILENCE else FB_COLLISION
    return FB_VOID
