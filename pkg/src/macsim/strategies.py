"""Scripted worst-case adversary strategies.

Each strategy emits per-round injection plans driven only by public channel
history (the feedback sequence) plus its own injection records; private
station state is never consulted.  Every plan is paced by leaky buckets, so
emitted traces are admissible for the declared type by construction (tests
double-check them against the brute-force oracle).
"""

from __future__ import annotations

from .adversary import AdversaryType, Bucket
from .channel import COLLISION, SILENCE, Feedback
from .errors import TraceExhausted


class Strategy:
    """Base: a deterministic injection plan source with a public queue model."""

    kind = "?"

    def __init__(self, n: int, adv_type: AdversaryType):
        self.n = n
        self.type = adv_type
        self.pending = [0] * n  # exact public model: own injections - heard deliveries

    def _observe_delivery(self, feedback: Feedback) -> None:
        if feedback is not None and feedback.heard and feedback.message.packet is not None:
            self.pending[feedback.message.station] -= 1

    def plan(self, t: int, feedback: Feedback, active) -> list[tuple[int, int]]:
        self._observe_delivery(feedback)
        grants = self.step(t)
        for sid, count in grants:
            self.pending[sid] += count
        return grants

    def step(self, t: int) -> list[tuple[int, int]]:
        raise NotImplementedError


class IndividualSaturator(Strategy):
    """Full-power injection under individual rates rho_i = rho/n.

    A global (rho, beta) bucket and per-station (rho/n, beta) buckets are
    stepped every round; available capacity is granted one packet at a time
    round-robin, which converges to evenly spaced per-station injections
    (spacing fluctuating by one round from floor effects) after an initial
    burst.  At most one passive station is granted per round.
    """

    kind = "rrw-saturator"

    def __init__(self, n: int, adv_type: AdversaryType):
        super().__init__(n, adv_type)
        rho = float(adv_type.rho)
        beta = float(adv_type.beta)
        self.global_bucket = Bucket(rho, beta)
        self.buckets = [Bucket(rho / n, beta) for _ in range(n)]
        self.pointer = 0

    def step(self, t: int) -> list[tuple[int, int]]:
        cap = self.global_bucket.peek_capacity()
        station_cap = [b.peek_capacity() for b in self.buckets]
        grants = [0] * self.n
        activated = -1
        granted = 0
        while granted < cap:
            progress = False
            for off in range(self.n):
                if granted >= cap:
                    break
                s = (self.pointer + off) % self.n
                if station_cap[s] - grants[s] < 1:
                    continue
                if self.pending[s] + grants[s] == 0:
                    if activated not in (-1, s):
                        continue  # one activation per round
                    activated = s
                grants[s] += 1
                granted += 1
                progress = True
            if not progress:
                break
        if granted:
            self.pointer = (self.pointer + 1) % self.n
        consumed = self.global_bucket.step(granted)
        assert consumed == granted
        for s, b in enumerate(self.buckets):
            assert b.step(grants[s]) == grants[s]
        return [(s, g) for s, g in enumerate(grants) if g]


class SrrSaturatorAlias(IndividualSaturator):
    kind = "srr-saturator"


class QuadrupleSaturator(Strategy):
    """Quadruple-Round pressure: three activations per segment while passive
    stations remain, then re-injected triples into the oldest still-active
    stations, everything paced by one (rho, beta) bucket."""

    kind = "quadruple-saturator"

    def __init__(self, n: int, adv_type: AdversaryType):
        super().__init__(n, adv_type)
        self.bucket = Bucket(float(adv_type.rho), float(adv_type.beta))
        self.activation_order: list[int] = []  # still-active stations, oldest first

    def step(self, t: int) -> list[tuple[int, int]]:
        self.activation_order = [s for s in self.activation_order if self.pending[s] > 0]
        cap = self.bucket.peek_capacity()
        grants: dict[int, int] = {}
        granted = 0
        # One activation per round, skipping the last round of each segment so
        # activations land three per segment.
        if granted < cap and t % 4 != 3:
            passive = [s for s in range(self.n) if self.pending[s] == 0 and s not in grants]
            if passive:
                s = passive[0]
                grants[s] = 1
                granted += 1
                self.activation_order.append(s)
        targets = self.activation_order[:3]
        while granted < cap and targets:
            for s in targets:
                if granted >= cap:
                    break
                grants[s] = grants.get(s, 0) + 1
                granted += 1
        assert self.bucket.step(granted) == granted
        return sorted(grants.items())


class QueueBackoffDelayer(Strategy):
    """Two-part Queue-Backoff attack: grow the distributed FIFO by activating
    stations and saturating the newest, then inject one dedicated packet and
    feed only stations ahead of it."""

    kind = "queue-backoff-delayer"

    def __init__(self, n: int, adv_type: AdversaryType):
        super().__init__(n, adv_type)
        if n < 2:
            raise ValueError("the delayer needs at least two stations")
        self.bucket = Bucket(float(adv_type.rho), float(adv_type.beta))
        self.reserve = n - 1
        self.order: list[int] = []  # activation order of currently active stations
        self.phase = 1
        self.dedicated_round: int | None = None
        rho = float(adv_type.rho)
        # Phase 1 runs until the backlog nears its equilibrium rho/(1-rho)*n
        # (reached only asymptotically, hence the margin) or the warmup cap.
        self.pending_target = 0.85 * rho / (1.0 - rho) * (n - 1)
        self.warmup_cap = int(4 * (n + float(adv_type.beta)) / max((1.0 - rho) ** 2, 0.01)) + 64

    def _observe_delivery(self, feedback: Feedback) -> None:
        if feedback is not None and feedback.heard and feedback.message.packet is not None:
            s = feedback.message.station
            self.pending[s] -= 1
            if self.pending[s] == 0 and s in self.order:
                self.order.remove(s)

    def step(self, t: int) -> list[tuple[int, int]]:
        cap = self.bucket.peek_capacity()
        grants: dict[int, int] = {}
        granted = 0
        if self.phase == 1:
            if granted < cap:
                passive = [
                    s for s in range(self.n) if self.pending[s] == 0 and s != self.reserve
                ]
                if passive:
                    s = passive[0]
                    grants[s] = 1
                    granted += 1
                    self.order.append(s)
            newest = self.order[-1] if self.order else None
            while granted < cap and newest is not None:
                grants[newest] = grants.get(newest, 0) + 1
                granted += 1
            active = sum(1 for p in self.pending if p > 0)
            backlog = sum(self.pending) + granted
            if (active >= self.n - 1 and backlog >= self.pending_target) or t >= self.warmup_cap:
                self.phase = 2
        elif self.phase == 2:
            if cap >= 1 and self.pending[self.reserve] == 0:
                grants[self.reserve] = 1
                granted += 1
                self.order.append(self.reserve)
                self.dedicated_round = t
                self.phase = 3
        else:
            # Feed only stations ahead of the dedicated one.  A station whose
            # over bit was heard this round already left the model, so no
            # injection can ever make a front rejoin behind the dedicated
            # packet.
            if self.reserve in self.order:
                ahead = self.order[: self.order.index(self.reserve)]
                if ahead:
                    target = ahead[0]
                    while granted < cap:
                        grants[target] = grants.get(target, 0) + 1
                        granted += 1
        assert self.bucket.step(granted) == granted
        return sorted(grants.items())


class CountingStarver(Strategy):
    """Counting-Backoff starvation: stack two stations, then keep injecting
    single-packet newcomers timed so the starved pair collides whenever it
    surfaces at the top of the stack.

    The anchor is station 0, the starved companion station 1; newcomers
    cycle through the remaining names.  All timing is read off a replicated
    model of the counting-backoff state machine driven by public feedback.
    """

    kind = "counting-starver"

    def __init__(self, n: int, adv_type: AdversaryType):
        super().__init__(n, adv_type)
        if n < 4:
            raise ValueError("the starver needs at least four stations")
        self.bucket = Bucket(float(adv_type.rho), float(adv_type.beta))
        self.anchor = 0
        self.companion = 1
        self.spare = 2  # next disposable newcomer name
        self.stage = "anchor"
        self.counters: dict[int, int] = {}
        self.newcomers: set[int] = set()

    # -- replicated counting-backoff model ----------------------------------

    def _observe_delivery(self, feedback: Feedback) -> None:
        if feedback is None:
            return
        if feedback.heard:
            s = feedback.message.station
            self.pending[s] -= 1
            if s in self.newcomers:
                # A newcomer heard alone takes the top with c = 0.
                self.newcomers.discard(s)
                if self.pending[s] > 0:
                    self.counters[s] = 0
            elif self.pending[s] == 0:
                self.counters.pop(s, None)
        elif feedback.kind == COLLISION:
            for s in list(self.counters):
                self.counters[s] += 1
            for s in self.newcomers:
                self.counters[s] = 0
            self.newcomers.clear()
        elif feedback.kind == SILENCE and self.counters:
            for s in list(self.counters):
                self.counters[s] -= 1

    def _activate(self, s: int, count: int, grants: dict[int, int]) -> None:
        grants[s] = count
        self.newcomers.add(s)

    def _next_spare(self) -> int:
        for off in range(self.n - 2):
            s = 2 + (self.spare - 2 + off) % (self.n - 2)
            if self.pending[s] == 0:
                self.spare = 2 + (s - 2 + 1) % (self.n - 2)
                return s
        return -1

    def step(self, t: int) -> list[tuple[int, int]]:
        cap = self.bucket.peek_capacity()
        grants: dict[int, int] = {}
        if self.stage == "anchor":
            if cap >= 2 and self.pending[self.anchor] == 0:
                self._activate(self.anchor, 2, grants)
                self.stage = "companion"
        elif self.stage == "companion":
            if cap >= 1:
                self._activate(self.companion, 1, grants)
                self.stage = "guard"
            else:
                # The anchor will drain before the companion can collide with
                # it; wait for it to drain and start over.
                self.stage = "recover"
        elif self.stage == "recover":
            if all(p == 0 for p in self.pending) and cap >= 2:
                self._activate(self.anchor, 2, grants)
                self.stage = "companion"
        else:  # guard: keep the protected pair from transmitting alone
            top = next(
                (s for s, c in self.counters.items() if c == 0 and self.pending[s] > 0),
                None,
            )
            threatened = top in (self.anchor, self.companion) and top is not None
            pending_newcomer = bool(self.newcomers)
            if threatened and not pending_newcomer:
                if cap >= 1:
                    s = self._next_spare()
                    if s >= 0:
                        self._activate(s, 1, grants)
                # If no budget or no spare station, the protected packet
                # escapes next round; the model simply tracks it.
        granted = sum(grants.values())
        assert self.bucket.step(granted) == granted
        return sorted(grants.items())


class TraceStrategy(Strategy):
    """Replay a parsed trace file; raises once asked past its end."""

    kind = "trace"

    def __init__(self, n: int, adv_type: AdversaryType, rounds: list[dict[int, int]]):
        super().__init__(n, adv_type)
        self.rounds = rounds

    def step(self, t: int) -> list[tuple[int, int]]:
        if t >= len(self.rounds):
            raise TraceExhausted(f"trace has {len(self.rounds)} rounds, asked for round {t}")
        return sorted(self.rounds[t].items())


STRATEGIES: dict[str, type[Strategy]] = {
    "rrw-saturator": IndividualSaturator,
    "srr-saturator": SrrSaturatorAlias,
    "quadruple-saturator": QuadrupleSaturator,
    "queue-backoff-delayer": QueueBackoffDelayer,
    "counting-starver": CountingStarver,
}


def make_strategy(name: str, n: int, adv_type: AdversaryType) -> Strategy:
    try:
        cls = STRATEGIES[name]
    except KeyError:
        raise KeyError(f"unknown strategy {name!r}; known: {', '.join(sorted(STRATEGIES))}") from None
    return cls(n, adv_type)
