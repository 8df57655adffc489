"""The round loop: collects pre-committed transmissions, computes and
projects feedback, applies the adversary's injections (enforcing the
activation bound), and invokes station transitions in the mandated order.

This is the reference engine: one automaton object per station, each holding
its own replica of any shared control state.  The compiled kernel
(macsim._kernel) reproduces the same executions for randomized adversaries;
see macsim.dispatch.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .algorithms import station_class
from .algorithms.base import Station
from .channel import (
    COLLISION,
    HEARD,
    ChannelConfig,
    Packet,
    RoundRecord,
    compute_feedback,
    project_feedback,
)
from .errors import ActivationBoundViolated, IncompatibleAlgorithm
from .metrics import STABILIZED, StageLedger
from .rng import Stream, station_stream_id


@dataclass(frozen=True)
class FixedHorizon:
    rounds: int


@dataclass(frozen=True)
class StageVerdict:
    """Run until the stage ledger reaches a stabilized/unstable verdict."""


@dataclass
class ExecutionReport:
    algorithm: str
    n: int
    seed: int
    cd: bool
    verdict: str  # "stabilized" | "unstable" | "horizon"
    avg_latency: float | None
    stage_averages: list[float]
    max_delay: int
    max_total_queue: int
    rounds: int
    injected: int
    delivered: int
    max_pending_age: int
    round_log: list[RoundRecord] | None = None
    packets: dict[int, Packet] | None = None

    @property
    def stages(self) -> int:
        return len(self.stage_averages)


class Engine:
    """One execution: all state confined to this object."""

    def __init__(
        self,
        config: ChannelConfig,
        algorithm: str,
        adversary,
        seed: int = 0,
        *,
        ledger: StageLedger | None = None,
        retain_log: bool = False,
        check_invariants: bool = True,
        sync_check: bool | None = None,
    ):
        cls = station_class(algorithm)
        if cls.requires_cd and not config.collision_detection:
            raise IncompatibleAlgorithm(
                f"{algorithm} requires a channel with collision detection"
            )
        self.config = config
        self.algorithm = algorithm
        self.cls = cls
        self.adversary = adversary
        self.seed = seed
        self.ledger = ledger
        self.retain_log = retain_log
        self.check_invariants = check_invariants
        # Replica synchrony is a debug check; it is O(n) per round, so it is
        # on by default only for small systems.
        if sync_check is None:
            sync_check = check_invariants and config.n <= 64 and cls.full_sensing
        self.sync_check = sync_check and cls.full_sensing

        def make(sid: int) -> Station:
            stream = (
                Stream.for_consumer(seed, station_stream_id(sid)) if cls.randomized else None
            )
            return cls(sid, config.n, stream)

        self.stations = [make(sid) for sid in range(config.n)]
        self.t = 0
        self.next_pid = 0
        self.injected = 0
        self.delivered = 0
        self.total_queued = 0
        self.max_delay = 0
        self.max_total_queue = 0
        self.active: set[int] = set()  # nonempty queues
        self.engaged: set[int] = set()  # activation-based automata currently alive
        self.round_log: list[RoundRecord] | None = [] if retain_log else None
        self.packets: dict[int, Packet] | None = {} if retain_log else None
        if cls.full_sensing:
            for st in self.stations:
                st.initial_decision()

    # -- test fixtures -----------------------------------------------------

    def preload(self, station: int, count: int) -> None:
        """Pre-execution injection (tests only); callable before round 0."""
        assert self.t == 0 and self.next_pid == self.injected
        st = self.stations[station]
        for _ in range(count):
            pid = self.next_pid
            self.next_pid += 1
            st.enqueue(pid, -1)
            if self.packets is not None:
                self.packets[pid] = Packet(pid, station, -1)
        self.injected += count
        self.total_queued += count
        self.active.add(station)
        if self.cls.full_sensing:
            st.initial_decision()
        else:
            st.activate(-1)
            self.engaged.add(station)

    # -- the round loop ----------------------------------------------------

    def run_round(self) -> RoundRecord | None:
        t = self.t
        stations = self.stations
        cls = self.cls

        # (1) transmissions committed at the end of round t-1
        txs = [st.decision for st in stations if st.decision is not None]

        # (2) feedback; a heard packet is delivered and dequeued
        event, msg = compute_feedback(txs)
        delivered_pid = None
        delivered_station = -1
        if event == HEARD and msg.packet is not None:
            tx = stations[msg.station]
            pid, inj_round = tx.dequeue_head()
            assert pid == msg.packet
            delay = t - inj_round
            assert delay >= 1, "transmission decisions precede injections"
            delivered_pid = pid
            delivered_station = msg.station
            self.delivered += 1
            self.total_queued -= 1
            if delay > self.max_delay:
                self.max_delay = delay
            if not tx.queue:
                self.active.discard(msg.station)
            if self.ledger is not None:
                self.ledger.on_delivery(pid, delay)
            if self.packets is not None:
                self.packets[pid].delivered_round = t
        fb = project_feedback(event, msg, self.config.collision_detection)

        # (3) adversary injections for round t
        plan = self.adversary.plan(t, fb, self.active)
        injected_by: dict[int, int] = {}
        activations = 0
        generated = 0
        log_injections: list[tuple[int, int]] = []
        for sid, count in plan:
            if count <= 0:
                continue
            st = stations[sid]
            at_start = len(st.queue) + (1 if sid == delivered_station else 0)
            if at_start == 0:
                activations += 1
                if activations > self.config.activation_bound:
                    raise ActivationBoundViolated(
                        f"round {t}: more than {self.config.activation_bound} "
                        "passive stations activated"
                    )
            for _ in range(count):
                pid = self.next_pid
                self.next_pid += 1
                st.enqueue(pid, t)
                if self.packets is not None:
                    self.packets[pid] = Packet(pid, sid, t)
                if self.retain_log:
                    log_injections.append((sid, pid))
            injected_by[sid] = count
            generated += count
            self.active.add(sid)
        if generated:
            self.injected += generated
            self.total_queued += generated
            if self.ledger is not None:
                self.ledger.on_generated(generated)

        # (4) observe transitions
        if cls.full_sensing:
            for st in stations:
                st.observe(fb, injected_by.get(st.sid, 0))
        else:
            touched = self.engaged | set(injected_by)
            if delivered_station >= 0:
                touched.add(delivered_station)
            for sid in sorted(touched):
                st = stations[sid]
                if not st.queue:
                    if sid in self.engaged:
                        st.deactivate()
                        self.engaged.discard(sid)
                elif sid in self.engaged:
                    st.observe(fb, injected_by.get(sid, 0))
                else:
                    st.activate(t)
                    self.engaged.add(sid)

        # (5) accounting and invariants
        if self.total_queued > self.max_total_queue:
            self.max_total_queue = self.total_queued
        if self.check_invariants:
            self._check_invariants(event)
        if self.ledger is not None:
            self.ledger.on_round_end(t)
        record = None
        if self.retain_log:
            record = RoundRecord(t, len(txs), event, delivered_pid, log_injections, self.total_queued)
            self.round_log.append(record)
        self.t += 1
        return record

    def _check_invariants(self, event: int) -> None:
        assert self.injected == self.delivered + self.total_queued, "conservation"
        if self.cls.collision_free:
            assert event != COLLISION, f"{self.algorithm} must never collide"
        if self.sync_check:
            keys = {st.control_key() for st in self.stations}
            assert len(keys) <= 1, "replicated control state diverged"
        name = self.cls.name
        if name == "counting-backoff":
            # A newly activated station is not on the stack until its first
            # transmission resolves; after a departure the stack sits at
            # {1..m} for one round until the repairing silence.
            counters = sorted(
                self.stations[sid].c for sid in self.engaged if not self.stations[sid].newcomer
            )
            m = len(counters)
            ok = counters == list(range(m)) or counters == list(range(1, m + 1))
            assert ok, f"counter multiset {counters} is not contiguous"
        elif name == "queue-backoff":
            positions = sorted(
                self.stations[sid].pos
                for sid in self.engaged
                if self.stations[sid].role == self.stations[sid].POSITIONED
            )
            assert positions == list(range(len(positions))), f"positions {positions}"

    # -- execution driver ----------------------------------------------------

    def max_pending_age(self) -> int:
        worst = 0
        t = self.t
        for st in self.stations:
            if st.queue:
                age = t - st.queue[0][1]  # head is the oldest
                if age > worst:
                    worst = age
        return worst

    def run(self, stop) -> ExecutionReport:
        if isinstance(stop, FixedHorizon):
            for _ in range(stop.rounds):
                self.run_round()
            verdict = "horizon"
            avg = None
        elif isinstance(stop, StageVerdict):
            if self.ledger is None:
                raise ValueError("StageVerdict runs need a stage ledger")
            while self.ledger.verdict is None:
                self.run_round()
            verdict = self.ledger.verdict
            avg = self.ledger.value if verdict == STABILIZED else None
        else:
            raise TypeError(f"unknown stop rule {stop!r}")
        return ExecutionReport(
            algorithm=self.algorithm,
            n=self.config.n,
            seed=self.seed,
            cd=self.config.collision_detection,
            verdict=verdict,
            avg_latency=avg,
            stage_averages=list(self.ledger.averages) if self.ledger else [],
            max_delay=self.max_delay,
            max_total_queue=self.max_total_queue,
            rounds=self.t,
            injected=self.injected,
            delivered=self.delivered,
            max_pending_age=self.max_pending_age(),
            round_log=self.round_log,
            packets=self.packets,
        )
