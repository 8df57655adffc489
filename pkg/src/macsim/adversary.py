"""Leaky-bucket adversaries: the four-step bucket process, randomized
injection, individual rates, and brute-force admissibility oracles.

Rates and burstiness are given as decimal strings with at most six
fractional digits.  Generation runs on floats (the decimal grid keeps every
floor/threshold decision at least 1e-6 away from a representability issue),
while the admissibility oracles compare with exact rational arithmetic so a
sum landing exactly on rho*|tau| + beta is accepted.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .rng import Stream

MAX_RATE_DIGITS = 6
RATE_SUM_TOL = Fraction(1, 10**9)


def parse_rate(value: str | float | int | Fraction) -> Fraction:
    """Exact rational from a decimal string (or int/Fraction).

    Denominators are capped at 10**6: that keeps every floor/threshold in
    the float-driven generators at least 1e-6 away from the exact value, so
    float generation can never cross a boundary the exact oracle sees
    differently (and it keeps the oracle's integer arithmetic in range).
    """
    if isinstance(value, Fraction):
        frac = value
    elif isinstance(value, float):
        frac = Fraction(str(value))
    else:
        frac = Fraction(str(value))
    if frac.denominator > 10**MAX_RATE_DIGITS:
        raise ValueError(
            f"rate {value!r} needs a denominator above 10^{MAX_RATE_DIGITS}"
        )
    return frac


@dataclass(frozen=True)
class AdversaryType:
    """Leaky-bucket type (rho, beta): at most rho*|tau| + beta packets may be
    generated in any contiguous interval tau."""

    rho: Fraction
    beta: Fraction

    def __post_init__(self) -> None:
        if not 0 < self.rho <= 1:
            raise ValueError(f"injection rate must satisfy 0 < rho <= 1, got {self.rho}")
        if self.beta < 1:
            raise ValueError(f"burstiness component must satisfy beta >= 1, got {self.beta}")

    @classmethod
    def of(cls, rho, beta) -> "AdversaryType":
        return cls(parse_rate(rho), parse_rate(beta))

    @property
    def burstiness(self) -> int:
        """Maximum packets generable in a single round."""
        return int(self.rho + self.beta)


def bucket_step(d: float, rho: float, beta: float, x: int) -> tuple[int, float]:
    """One round of the four-step bucket process.

    Leak (capped at beta), take the proposed count ``x``, cap it by the
    bucket floor, debit.  Returns (generated count, new level).  The
    invariant 0 <= level <= beta holds before and after.
    """
    d = d + rho
    if d > beta:
        d = beta
    cap = int(d)
    j = x if x < cap else cap
    return j, d - j


class Bucket:
    """Mutable bucket holding the level D, initialized full (D = beta)."""

    __slots__ = ("rho", "beta", "level")

    def __init__(self, rho: float, beta: float):
        self.rho = rho
        self.beta = beta
        self.level = beta

    def step(self, x: int) -> int:
        j, self.level = bucket_step(self.level, self.rho, self.beta, x)
        return j

    def peek_capacity(self) -> int:
        """Capacity this round's step would offer, without consuming it."""
        d = self.level + self.rho
        if d > self.beta:
            d = self.beta
        return int(d)


@dataclass(frozen=True)
class Admissibility:
    ok: bool
    station: int | None = None
    interval: tuple[int, int] | None = None

    def __bool__(self) -> bool:
        return self.ok


def check_admissible(totals, rho, beta) -> Admissibility:
    """Brute-force interval oracle for the leaky-bucket constraint.

    Accepts iff every contiguous interval [t1, t2] has sum <= rho*|tau| +
    beta, checking all O(T^2) intervals with exact rational comparisons.
    On rejection the witness is the first violating interval in (t1, t2)
    lexicographic order.
    """
    rho = parse_rate(rho)
    beta = parse_rate(beta)
    g = np.asarray(list(totals), dtype=np.int64)
    if (g < 0).any():
        raise ValueError("per-round totals must be non-negative")
    t_len = len(g)
    if t_len == 0:
        return Admissibility(True)
    # sum <= rho*L + beta  <=>  sum*qr*qb <= pr*L*qb + pb*qr  (integers)
    pr, qr = rho.numerator, rho.denominator
    pb, qb = beta.numerator, beta.denominator
    scale = qr * qb
    prefix = np.concatenate(([0], np.cumsum(g, dtype=np.int64)))
    lengths = np.arange(1, t_len + 1, dtype=np.int64)
    for t1 in range(t_len):
        sums = prefix[t1 + 1 :] - prefix[t1]
        lhs = sums * scale
        rhs = pr * qb * lengths[: t_len - t1] + pb * qr
        bad = np.nonzero(lhs > rhs)[0]
        if bad.size:
            return Admissibility(False, interval=(t1, t1 + int(bad[0])))
    return Admissibility(True)


def check_admissible_individual(per_station, rates, beta, rho=None) -> Admissibility:
    """Per-station oracle: station i is bound by (rho_i, beta) and the global
    totals by (sum rho_i, beta)."""
    beta = parse_rate(beta)
    rates = [parse_rate(r) for r in rates]
    total_rate = sum(rates, Fraction(0))
    if rho is not None:
        rho = parse_rate(rho)
        if abs(total_rate - rho) > RATE_SUM_TOL:
            raise ValueError(f"individual rates sum to {total_rate}, expected {rho}")
    else:
        rho = total_rate
    counts = np.asarray(per_station, dtype=np.int64)
    if counts.ndim != 2 or counts.shape[1] != len(rates):
        raise ValueError("per_station must be a T x n matrix matching the rates")
    for i, rate in enumerate(rates):
        if rate == 0:
            # Zero-rate station: any interval may carry at most beta packets,
            # so the whole trace's total is bounded by beta.
            if counts[:, i].sum() > beta:
                nz = np.nonzero(counts[:, i])[0]
                t2 = int(nz[np.searchsorted(np.cumsum(counts[nz, i]), float(beta), "right")])
                return Admissibility(False, station=i, interval=(0, t2))
            continue
        result = check_admissible(counts[:, i], rate, beta)
        if not result:
            return Admissibility(False, station=i, interval=result.interval)
    global_result = check_admissible(counts.sum(axis=1), rho, beta)
    if not global_result:
        return Admissibility(False, interval=global_result.interval)
    return Admissibility(True)


class RandomizedAdversary:
    """Randomized leaky-bucket adversary for a perpetual channel.

    Each round: the bucket proposes X ~ Poisson(rho); bucket capping yields
    the generated count j.  One passive station (if any) is drawn uniformly
    as virtually active; each of the j packets is assigned independently and
    uniformly over eligible = active + {virtually active}.  At most one
    passive station can therefore be activated per round.

    ``x_source`` replaces the Poisson draws with a deterministic sequence
    (the test seam used for the reachability property).
    """

    kind = "randomized"

    def __init__(self, n: int, adv_type: AdversaryType, stream: Stream, x_source=None):
        self.n = n
        self.type = adv_type
        self.rho_f = float(adv_type.rho)
        self.bucket = Bucket(self.rho_f, float(adv_type.beta))
        self.stream = stream
        self.x_source = x_source

    def _propose(self) -> int:
        if self.x_source is not None:
            return next(self.x_source)
        return self.stream.poisson(self.rho_f)

    def plan(self, t: int, feedback, active: set[int]) -> list[tuple[int, int]]:
        x = self._propose()
        j = self.bucket.step(x)
        if j == 0:
            return []
        eligible = sorted(active)
        if len(eligible) < self.n:
            passive = [s for s in range(self.n) if s not in active]
            virtual = passive[self.stream.randint(len(passive))]
            eligible.append(virtual)
            eligible.sort()
        counts: dict[int, int] = {}
        for _ in range(j):
            s = eligible[self.stream.randint(len(eligible))]
            counts[s] = counts.get(s, 0) + 1
        return sorted(counts.items())


class RandomizedIndividualAdversary:
    """Randomized adversary additionally constrained by individual rates.

    The paper defines individual rates only for worst-case adversaries; this
    randomized variant is a declared extension.  Station i draws
    X_i ~ Poisson(rho_i) and receives min(X_i, floor(D_i), remaining global
    capacity) packets, with per-station buckets (rho_i, beta) and a global
    bucket (rho, beta) all stepping every round.  One-activation is enforced
    by granting injections to at most one currently passive station per
    round: the first passive station in a uniformly shuffled order; other
    passive stations' draws are deferred (their buckets simply stay full).
    """

    kind = "randomized-individual"

    def __init__(self, n: int, adv_type: AdversaryType, rates, stream: Stream):
        rates = [parse_rate(r) for r in rates]
        if len(rates) != n:
            raise ValueError(f"expected {n} rates, got {len(rates)}")
        for r in rates:
            if not 0 <= r <= 1:
                raise ValueError(f"individual rate out of [0, 1]: {r}")
        total = sum(rates, Fraction(0))
        if abs(total - adv_type.rho) > RATE_SUM_TOL:
            raise ValueError(f"rates sum to {total}, expected rho = {adv_type.rho}")
        self.n = n
        self.type = adv_type
        self.rates = rates
        self.rates_f = [float(r) for r in rates]
        beta_f = float(adv_type.beta)
        self.global_bucket = Bucket(float(adv_type.rho), beta_f)
        self.station_buckets = [Bucket(rf, beta_f) for rf in self.rates_f]
        self.stream = stream

    @classmethod
    def uniform(cls, n: int, adv_type: AdversaryType, stream: Stream):
        rate = adv_type.rho / n
        return cls(n, adv_type, [rate] * n, stream)

    def plan(self, t: int, feedback, active: set[int]) -> list[tuple[int, int]]:
        remaining = self.global_bucket.peek_capacity()
        order = list(range(self.n))
        self.stream.shuffle(order)
        allowed_passive = -1
        for s in order:
            if s not in active:
                allowed_passive = s
                break
        grants: dict[int, int] = {}
        total = 0
        for s in order:
            bucket = self.station_buckets[s]
            if self.rates_f[s] <= 0.0:
                bucket.step(0)
                continue
            x = self.stream.poisson(self.rates_f[s])
            if s not in active and s != allowed_passive:
                x = 0  # deferred: this round would activate a second station
            if x > remaining:
                x = remaining
            g = bucket.step(x)
            if g:
                grants[s] = g
                total += g
                remaining -= g
        consumed = self.global_bucket.step(total)
        assert consumed == total
        return sorted(grants.items())


def parse_trace(lines) -> list[dict[int, int]]:
    """Parse a trace file: one line per round.

    Global format: a single non-negative integer (total generated; assigned
    to station 0 when the trace drives injections).  Individual format:
    comma-separated ``station:count`` pairs.  Blank lines mean zero.
    """
    rounds: list[dict[int, int]] = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            rounds.append({})
            continue
        if ":" in line:
            counts: dict[int, int] = {}
            for pair in line.split(","):
                station_s, _, count_s = pair.partition(":")
                try:
                    station, count = int(station_s), int(count_s)
                except ValueError as exc:
                    raise ValueError(f"line {lineno}: malformed pair {pair!r}") from exc
                if station < 0 or count < 0:
                    raise ValueError(f"line {lineno}: negative value in {pair!r}")
                if count:
                    counts[station] = counts.get(station, 0) + count
            rounds.append(counts)
        else:
            try:
                total = int(line)
            except ValueError as exc:
                raise ValueError(f"line {lineno}: malformed count {line!r}") from exc
            if total < 0:
                raise ValueError(f"line {lineno}: negative count")
            rounds.append({0: total} if total else {})
    return rounds


def trace_totals(rounds: list[dict[int, int]]) -> list[int]:
    return [sum(r.values()) for r in rounds]
