"""Latency and queue metrics: the marked-packet stage protocol and the
stabilization verdict.

A stage marks K consecutively generated packets and closes when the last of
them is heard; its measurement is the mean of the K marked delays.  The run
stabilizes when some window of four consecutive completed stages has every
pair of averages within 5% relative difference (denominator: the smaller
average), and the reported value is the mean of the first qualifying
window.  Runs that exhaust the stage or round cap without stabilizing are
declared unstable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

STABILIZATION_WINDOW = 4
STABILIZATION_THRESHOLD = 0.05
DEFAULT_K = 5000
DEFAULT_STAGE_CAP = 200
DEFAULT_ROUND_CAP = 10_000_000

STABILIZED = "stabilized"
UNSTABLE = "unstable"
UNDECIDED = "undecided"


def window_stabilizes(averages: list[float]) -> bool:
    """True if every pair in this window differs by < 5% of the smaller."""
    lo = min(averages)
    hi = max(averages)
    if lo <= 0.0:
        return hi <= 0.0
    return (hi - lo) / lo < STABILIZATION_THRESHOLD


def detect_stabilization(averages: list[float]) -> tuple[str, float | None]:
    """Scan stage averages for the first qualifying 4-stage window.

    Returns (verdict, value); the verdict here is Stabilized or Undecided --
    the cap-driven Unstable verdict belongs to the ledger, which knows the
    caps.
    """
    w = STABILIZATION_WINDOW
    for end in range(w, len(averages) + 1):
        window = averages[end - w : end]
        if window_stabilizes(window):
            return STABILIZED, sum(window) / w
    return UNDECIDED, None


@dataclass
class StageLedger:
    """Tracks marked batches, per-stage averages, and the run verdict."""

    k: int = DEFAULT_K
    stage_cap: int = DEFAULT_STAGE_CAP
    round_cap: int = DEFAULT_ROUND_CAP

    averages: list[float] = field(default_factory=list)
    verdict: str | None = None
    value: float | None = None

    batch_lo: int = 0  # marked pids are [batch_lo, batch_lo + k)
    generated: int = 0
    delivered_marked: int = 0
    delay_sum: int = 0

    def on_generated(self, count: int) -> None:
        """Account ``count`` packets generated this round (pids are sequential)."""
        self.generated += count

    def on_delivery(self, pid: int, delay: int) -> None:
        if self.verdict is not None:
            return
        if not self.batch_lo <= pid < self.batch_lo + self.k:
            return  # unmarked packets are not measured
        self.delivered_marked += 1
        self.delay_sum += delay
        if self.delivered_marked == self.k:
            self.averages.append(self.delay_sum / self.k)
            # Marking resumes with the next generated packet.
            self.batch_lo = self.generated
            self.delivered_marked = 0
            self.delay_sum = 0
            if len(self.averages) >= STABILIZATION_WINDOW and window_stabilizes(
                self.averages[-STABILIZATION_WINDOW:]
            ):
                self.verdict = STABILIZED
                self.value = sum(self.averages[-STABILIZATION_WINDOW:]) / STABILIZATION_WINDOW
            elif len(self.averages) >= self.stage_cap:
                self.verdict = UNSTABLE

    def on_round_end(self, t: int) -> None:
        if self.verdict is None and t + 1 >= self.round_cap:
            self.verdict = UNSTABLE

    @property
    def stages_completed(self) -> int:
        return len(self.averages)
