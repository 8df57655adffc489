"""Station-automaton contract shared by every broadcast algorithm.

A station commits its transmission for round t+1 while observing round t
(``decision``), so a packet injected at round t is never transmitted before
round t+1 and every delivered packet has delay >= 1.

Full-sensing stations are invoked every round.  Activation-based stations
exist only while they hold packets: the engine calls ``activate`` when an
injection lands on a passive station (the activation round's feedback is
not used -- the station was not listening), ``observe`` on every later
round while the queue is nonempty, and drops the automaton state entirely
when the queue empties.
"""

from __future__ import annotations

from collections import deque

from ..channel import Feedback, Message


class Station:
    """Base automaton: queue bookkeeping plus the decide/observe contract."""

    name = "?"
    full_sensing = True
    requires_cd = False
    plain_packet = True
    randomized = False
    collision_free = False  # asserted for rrw / of-rrw / mbtf runs

    __slots__ = ("sid", "n", "queue", "decision")

    def __init__(self, sid: int, n: int, stream=None):
        self.sid = sid
        self.n = n
        self.queue: deque[tuple[int, int]] = deque()  # (packet id, injected round)
        self.decision: Message | None = None

    # -- queue hooks -------------------------------------------------------

    def enqueue(self, pid: int, round_: int) -> None:
        self.queue.append((pid, round_))

    def dequeue_head(self) -> tuple[int, int]:
        """Engine-side dequeue when this station's packet is heard."""
        return self.queue.popleft()

    def eligible(self) -> int:
        """Packets currently transmittable (old-go-first variants restrict this)."""
        return len(self.queue)

    def head_message(self, **control) -> Message:
        return Message(self.sid, self.queue[0][0], **control)

    # -- transitions -------------------------------------------------------

    def initial_decision(self) -> None:
        """Decision for round 0, from the initial state (empty unless preloaded)."""
        self.decision = None

    def observe(self, fb: Feedback, injected: int) -> None:
        raise NotImplementedError

    def activate(self, t: int) -> None:
        """Activation-based algorithms only: injection hit a passive station."""
        raise NotImplementedError(f"{self.name} stations are full-sensing")

    def deactivate(self) -> None:
        """Drop per-activation state; the engine calls this when the queue empties."""
        self.decision = None

    def control_key(self):
        """Replicated control state, for the engine's synchrony check."""
        return None
