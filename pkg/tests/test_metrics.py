from macsim.metrics import (
    STABILIZED,
    UNDECIDED,
    UNSTABLE,
    StageLedger,
    detect_stabilization,
)


def test_stage_closes_when_last_marked_packet_lands():
    ledger = StageLedger(k=2, stage_cap=10, round_cap=1000)
    ledger.on_generated(2)  # pids 0, 1 marked
    ledger.on_delivery(1, delay=4)
    assert ledger.stages_completed == 0
    ledger.on_delivery(0, delay=2)
    assert ledger.averages == [3.0]


def test_unmarked_packets_do_not_affect_averages():
    ledger = StageLedger(k=2, stage_cap=10, round_cap=1000)
    ledger.on_generated(2)  # pids 0,1 marked (stage 1)
    ledger.on_generated(3)  # pids 2-4: batch already full, unmarked
    ledger.on_delivery(2, delay=50)
    ledger.on_delivery(0, delay=1)
    ledger.on_delivery(1, delay=3)
    assert ledger.averages == [2.0]
    # Next batch marks the next *generated* packets: pids 5,6.
    ledger.on_generated(2)
    ledger.on_delivery(3, delay=99)  # still unmarked
    ledger.on_delivery(5, delay=2)
    ledger.on_delivery(6, delay=2)
    assert ledger.averages == [2.0, 2.0]


def test_round_cap_declares_unstable():
    ledger = StageLedger(k=5, stage_cap=10, round_cap=100)
    ledger.on_generated(3)
    ledger.on_round_end(98)
    assert ledger.verdict is None
    ledger.on_round_end(99)
    assert ledger.verdict == UNSTABLE


def test_stage_cap_declares_unstable():
    ledger = StageLedger(k=1, stage_cap=3, round_cap=10**9)
    for pid, delay in enumerate([1, 100, 1]):
        ledger.on_generated(1)
        ledger.on_delivery(pid, delay)
    assert ledger.verdict == UNSTABLE


def test_stabilization_window_within_five_percent():
    verdict, value = detect_stabilization([100.0, 101.0, 102.0, 103.0])
    assert verdict == STABILIZED
    assert value == 101.5


def test_stabilization_rejects_ten_percent_gap():
    verdict, _ = detect_stabilization([100.0, 110.0, 100.0, 100.0])
    assert verdict == UNDECIDED


def test_stabilization_needs_four_stages():
    assert detect_stabilization([100.0, 100.0, 100.0]) == (UNDECIDED, None)


def test_stabilization_reports_first_qualifying_window():
    averages = [10.0, 50.0, 50.0, 50.0, 50.5, 999.0]
    verdict, value = detect_stabilization(averages)
    assert verdict == STABILIZED
    assert value == sum([50.0, 50.0, 50.0, 50.5]) / 4


def test_ledger_stabilizes_incrementally():
    ledger = StageLedger(k=1, stage_cap=100, round_cap=10**9)
    for pid, delay in enumerate([7, 7, 7, 7]):
        ledger.on_generated(1)
        ledger.on_delivery(pid, delay)
    assert ledger.verdict == STABILIZED
    assert ledger.value == 7.0


def test_boundary_exactly_five_percent_is_not_stabilized():
    # Relative difference uses the smaller average as denominator: 5% exactly
    # fails the strict < 0.05 test.
    verdict, _ = detect_stabilization([100.0, 105.0, 100.0, 100.0])
    assert verdict == UNDECIDED
