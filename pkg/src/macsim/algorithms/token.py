"""Full-sensing deterministic algorithms for perpetual channels:
round-robin withholding (plain and old-go-first), search round robin over a
binary station tree (plain and old-go-first), and move-big-to-front.

Every station replicates the shared control state (token position, search
cursor, station list) and keeps it synchronized purely through the common
feedback; the engine cross-checks the replicas in debug runs.
"""

from __future__ import annotations

from ..channel import COLLISION, HEARD, SILENCE, Feedback, Message
from .base import Station


class RrwStation(Station):
    """Round-robin withholding.

    The token holder transmits while it has eligible packets; a void round
    advances the token.  No two stations are ever simultaneously eligible,
    so the algorithm never collides and runs on channels without collision
    detection.
    """

    name = "rrw"
    collision_free = True
    old_first = False

    __slots__ = ("token", "old_count")

    def __init__(self, sid: int, n: int, stream=None):
        super().__init__(sid, n, stream)
        self.token = 0
        self.old_count = 0  # used by the old-go-first variant only

    def eligible(self) -> int:
        return self.old_count if self.old_first else len(self.queue)

    def dequeue_head(self):
        if self.old_first:
            self.old_count -= 1
        return self.queue.popleft()

    def _decide(self) -> None:
        if self.token == self.sid and self.eligible() > 0:
            self.decision = self.head_message()
        else:
            self.decision = None

    def initial_decision(self) -> None:
        if self.old_first:
            self.old_count = len(self.queue)  # preloaded packets start old
        self._decide()

    def observe(self, fb: Feedback, injected: int) -> None:
        if not fb.heard:
            self.token += 1
            if self.token == self.n:
                self.token = 0
                if self.old_first:
                    # Phase boundary: everything pending (including this
                    # round's injections) becomes old.
                    self.old_count = len(self.queue)
        self._decide()

    def control_key(self):
        return self.token


class OfRrwStation(RrwStation):
    """Old-go-first round-robin withholding: packets injected during a phase
    are ignored until the token completes its cycle."""

    name = "of-rrw"
    old_first = True


class SrrStation(Station):
    """Search round robin: depth-first search over a complete binary tree
    whose leaves are the stations (phantom leaves pad to a power of two).

    At the current node every covered station with eligible packets
    transmits.  Silence prunes the node, collision descends left-first, and
    a heard message locks the channel for the (unique) transmitter until it
    drains, whereupon the first silence prunes.  Requires collision
    detection to tell pruning silences from descent collisions.
    """

    name = "srr"
    requires_cd = True
    old_first = False

    __slots__ = ("leaves", "stack", "lock", "i_am_locked", "old_count")

    def __init__(self, sid: int, n: int, stream=None):
        super().__init__(sid, n, stream)
        leaves = 1
        while leaves < n:
            leaves *= 2
        self.leaves = leaves
        self.stack: list[tuple[int, int]] = [(0, leaves)]
        self.lock = False
        self.i_am_locked = False
        self.old_count = 0

    def eligible(self) -> int:
        return self.old_count if self.old_first else len(self.queue)

    def dequeue_head(self):
        if self.old_first:
            self.old_count -= 1
        return self.queue.popleft()

    def _covered(self) -> bool:
        lo, hi = self.stack[-1]
        return lo <= self.sid < hi

    def _decide(self) -> None:
        if self.lock:
            self.decision = self.head_message() if self.i_am_locked and self.eligible() else None
        elif self._covered() and self.eligible() > 0:
            self.decision = self.head_message()
        else:
            self.decision = None

    def initial_decision(self) -> None:
        if self.old_first:
            self.old_count = len(self.queue)
        self._decide()

    def _new_cycle(self) -> None:
        self.stack = [(0, self.leaves)]
        if self.old_first:
            self.old_count = len(self.queue)

    def observe(self, fb: Feedback, injected: int) -> None:
        if fb.kind == HEARD:
            if not self.lock:
                self.lock = True
                self.i_am_locked = fb.message.station == self.sid
            # Under the lock the transmitter withholds until it drains.
        elif fb.kind == SILENCE:
            # Prune the current node (also releases a finished heard run).
            self.lock = False
            self.i_am_locked = False
            self.stack.pop()
            if not self.stack:
                self._new_cycle()
        elif fb.kind == COLLISION:
            lo, hi = self.stack.pop()
            mid = (lo + hi) // 2
            self.stack.append((mid, hi))
            self.stack.append((lo, mid))
        self._decide()

    def control_key(self):
        return (tuple(self.stack), self.lock)


class OfSrrStation(SrrStation):
    """Old-go-first search round robin: new packets wait out the search cycle
    of their injection."""

    name = "of-srr"
    old_first = True


class MbtfStation(Station):
    """Move-big-to-front.

    All stations replicate an ordered list of station names with a cursor.
    The cursor station transmits while nonempty, flagging its message "big"
    when its queue has reached the station count; a heard big message moves
    the sender to the front of the list (cursor included).  Adaptive (the
    message carries the sender name and the big bit) but collision-free.
    """

    name = "mbtf"
    plain_packet = False
    collision_free = True

    __slots__ = ("order", "cursor")

    def __init__(self, sid: int, n: int, stream=None):
        super().__init__(sid, n, stream)
        self.order = list(range(n))
        self.cursor = 0

    def _decide(self) -> None:
        if self.order[self.cursor] == self.sid and self.queue:
            self.decision = self.head_message(big=len(self.queue) >= self.n)
        else:
            self.decision = None

    def initial_decision(self) -> None:
        self._decide()

    def observe(self, fb: Feedback, injected: int) -> None:
        if fb.heard:
            msg = fb.message
            if msg.big:
                self.order.remove(msg.station)
                self.order.insert(0, msg.station)
                self.cursor = 0
            # Non-big: cursor stays on the sender while it withholds.
        else:
            self.cursor += 1
            if self.cursor == self.n:
                self.cursor = 0
        self._decide()

    def control_key(self):
        return (tuple(self.order), self.cursor)
