"""The compiled kernel must reproduce the reference engine exactly: same
RNG consumption, same deliveries, same stage averages, same maxima.

Any divergence here means one of the two implementations drifted; the pure
engine is the reference.
"""

import pytest

from macsim.channel import ChannelConfig
from macsim.dispatch import ALGORITHM_IDS, AdversarySpec, kernel_available, run_execution
from macsim.engine import FixedHorizon, StageVerdict

pytestmark = pytest.mark.skipif(not kernel_available(), reason="compiled kernel not built")

ALGORITHMS = sorted(ALGORITHM_IDS)


def compare(algorithm, spec, n, seed, stop, **kw):
    from macsim.algorithms import station_class

    cd = station_class(algorithm).requires_cd
    cfg = ChannelConfig(n, cd)
    pure = run_execution(cfg, algorithm, spec, seed, stop, force_pure=True, **kw)
    fast = run_execution(cfg, algorithm, spec, seed, stop, **kw)
    assert fast == pure, f"{algorithm} diverged (seed {seed})"
    return pure


@pytest.mark.parametrize("algorithm", ALGORITHMS)
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_fixed_horizon_randomized(algorithm, seed):
    spec = AdversarySpec("randomized", "0.7", "6")
    report = compare(algorithm, spec, 5, seed, FixedHorizon(4000))
    assert report.injected > 0


@pytest.mark.parametrize("algorithm", ALGORITHMS)
def test_fixed_horizon_randomized_individual(algorithm):
    spec = AdversarySpec("randomized-individual", "0.6", "5")
    compare(algorithm, spec, 6, 3, FixedHorizon(3000))


@pytest.mark.parametrize("algorithm", ALGORITHMS)
def test_stage_verdict_short(algorithm):
    spec = AdversarySpec("randomized", "0.5", "10")
    report = compare(
        algorithm, spec, 4, 1, StageVerdict(), k=40, stage_cap=30, round_cap=40_000
    )
    assert report.verdict in ("stabilized", "unstable")


@pytest.mark.parametrize("rho,beta", [("0.9", "10"), ("0.3", "2"), ("1", "1")])
def test_high_and_low_rates(rho, beta):
    spec = AdversarySpec("randomized", rho, beta)
    for algorithm in ("rrw", "srr", "queue-backoff", "beb-capped", "counting-backoff"):
        compare(algorithm, spec, 7, 5, FixedHorizon(5000))


def test_larger_system_token_algorithms():
    spec = AdversarySpec("randomized", "0.9", "10")
    for algorithm in ("rrw", "of-rrw", "srr", "of-srr", "mbtf"):
        compare(algorithm, spec, 40, 2, FixedHorizon(6000))


def test_explicit_rates_vector():
    spec = AdversarySpec(
        "randomized-individual", "0.6", "4", rates=("0.3", "0.2", "0.1", "0", "0")
    )
    compare("rrw", spec, 5, 4, FixedHorizon(3000))
