"""Deterministic algorithms designed for 1-activating ad-hoc channels,
executed here on perpetual channels: Counting-Backoff (distributed stack),
Quadruple-Round (segmented binary search), Queue-Backoff (distributed FIFO).

The first two need collision detection; Queue-Backoff distinguishes only
heard rounds from void rounds and runs on either channel kind.
"""

from __future__ import annotations

from ..channel import COLLISION, HEARD, SILENCE, Feedback, Message
from .base import Station


class CountingBackoffStation(Station):
    """Counting-Backoff: active stations form a virtual stack, each
    remembering its distance ``c`` from the top.

    The c=0 station transmits every round.  A newly activated station
    transmits immediately in the round after activation; the resulting
    collision pushes it on top (it fixes c=0, everyone previously active
    increments).  A heard message changes no counters; when the transmitter
    drains it deactivates, and the following silence lets every station
    decrement, filling the vacated top.
    """

    name = "counting-backoff"
    full_sensing = False
    requires_cd = True

    __slots__ = ("c", "newcomer")

    def __init__(self, sid: int, n: int, stream=None):
        super().__init__(sid, n, stream)
        self.c = 0
        self.newcomer = False

    def _decide(self) -> None:
        self.decision = self.head_message() if self.c == 0 and self.queue else None

    def activate(self, t: int) -> None:
        self.c = 0
        self.newcomer = True
        self._decide()

    def observe(self, fb: Feedback, injected: int) -> None:
        if fb.kind == COLLISION:
            if self.newcomer:
                self.c = 0
                self.newcomer = False
            else:
                self.c += 1
        elif fb.kind == HEARD:
            # No counter changes; a drained transmitter is deactivated by the
            # engine, and one that got refilled this round keeps the top.
            self.newcomer = False
        else:  # silence: the top spot was vacated
            self.c -= 1
        self._decide()


class QuadrupleRoundStation(Station):
    """Quadruple-Round: time is split into segments of four rounds, processed
    in order once elapsed.

    Processing a segment repeats depth-first searches over the 7-node binary
    tree whose leaves are the segment's rounds; a station activated in a
    round under the current node and still holding packets transmits.
    Silence prunes (at the root it closes the segment), collision descends
    left-first, a heard transmitter does not withhold: its node is pruned
    and it re-enters at the next root iteration.  Full sensing: every
    station replicates the cursor.
    """

    name = "quadruple-round"
    requires_cd = True

    __slots__ = ("round", "seg", "processing", "stack", "activation_round")

    def __init__(self, sid: int, n: int, stream=None):
        super().__init__(sid, n, stream)
        self.round = -1
        self.seg = 0
        self.processing = False
        self.stack: list[tuple[int, int]] = []
        self.activation_round = -1

    def _decide(self) -> None:
        self.decision = None
        if self.processing and self.queue:
            lo, hi = self.stack[-1]
            base = 4 * self.seg
            if base + lo <= self.activation_round < base + hi:
                self.decision = self.head_message()

    def observe(self, fb: Feedback, injected: int) -> None:
        self.round += 1
        t = self.round
        if injected:
            mine = 1 if fb.heard and fb.message.station == self.sid else 0
            if len(self.queue) - injected + mine == 0:
                # Passive at the start of this round: a fresh activation.
                self.activation_round = t
        if self.processing:
            node = self.stack.pop()
            if fb.kind == COLLISION:
                lo, hi = node
                mid = (lo + hi) // 2
                self.stack.append((mid, hi))
                self.stack.append((lo, mid))
            elif not self.stack:
                if fb.kind == SILENCE and node == (0, 4):
                    # Root silence: the segment is clear.
                    self.seg += 1
                    self.processing = False
                else:
                    self.stack.append((0, 4))  # next iteration from the root
        if not self.processing and t + 1 >= 4 * (self.seg + 1):
            self.processing = True
            self.stack = [(0, 4)]
        self._decide()

    def control_key(self):
        return (self.seg, self.processing, tuple(self.stack))


class QueueBackoffStation(Station):
    """Queue-Backoff: active stations form a distributed FIFO joined in
    activation order.

    The front transmits every round, attaching its queue-size estimate and
    an over bit on its last packet.  A joiner transmits once immediately
    (colliding with the front unless the queue is empty), then derives its
    position from the first heard size, minus the voids it observed after
    its own joining round.  Works without collision detection: void rounds
    carry all the needed information.
    """

    name = "queue-backoff"
    full_sensing = False
    plain_packet = False

    JOINER = 0
    POSITIONED = 1

    __slots__ = ("role", "sent_join", "voids", "pos", "q")

    def __init__(self, sid: int, n: int, stream=None):
        super().__init__(sid, n, stream)
        self.role = self.JOINER
        self.sent_join = False
        self.voids = 0
        self.pos = 0
        self.q = 0

    def _decide(self) -> None:
        if self.role == self.POSITIONED and self.pos == 0 and self.queue:
            self.decision = self.head_message(queue_size=self.q, over=len(self.queue) == 1)
        elif self.role == self.JOINER and not self.sent_join and self.queue:
            self.decision = self.head_message(joiner=True, over=len(self.queue) == 1)
        else:
            self.decision = None

    def activate(self, t: int) -> None:
        self.role = self.JOINER
        self.sent_join = False
        self.voids = 0
        self._decide()

    def observe(self, fb: Feedback, injected: int) -> None:
        heard = fb.heard
        msg = fb.message if heard else None
        if self.role == self.JOINER:
            if not self.sent_join:
                # This round carried my joining transmission.
                self.sent_join = True
                if heard:
                    assert msg.station == self.sid
                    # Alone on an empty queue: I am the front now.
                    self.role = self.POSITIONED
                    self.pos = 0
                    self.q = 1
            elif heard:
                assert msg.queue_size is not None, "joiner heard while a front exists"
                self.pos = msg.queue_size - 1 - self.voids
                self.q = msg.queue_size
                if msg.over:
                    self.pos -= 1
                    self.q -= 1
                self.role = self.POSITIONED
            else:
                self.voids += 1
        else:
            if heard:
                if msg.station == self.sid:
                    if msg.over and self.queue:
                        # Sent my last packet but got refilled this round:
                        # rejoin as a fresh joiner next round.
                        self.role = self.JOINER
                        self.sent_join = False
                        self.voids = 0
                elif msg.over:
                    self.pos -= 1
                    self.q -= 1
            else:
                self.q += 1  # a joiner collided with the front
        self._decide()
