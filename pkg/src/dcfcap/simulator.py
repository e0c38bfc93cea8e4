"""Slot-synchronous Monte-Carlo simulation of n saturated stations.

Each station runs the loss-differentiating backoff: it keeps its stage after
a NAK (channel error), doubles the window after an uncaptured collision and
returns to stage 0 after a success or a captured collision.  Idle stretches
are skipped in one step, so the cost is proportional to the number of busy
slots.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba
import numpy as np

from .chain import contention_window, data_frame_error
from .params import ChannelParams, MacParams
from .throughput import slot_durations

CAPTURE_MODES = ("analytic", "sampled")
RNG_ALGORITHM = "numpy.random.PCG64"

# slot outcome indices in the counts vector
IDLE, SUCCESS, CAPTURE, ERROR, COLLISION = range(5)


@dataclass(frozen=True)
class SimConfig:
    n: int
    mac: MacParams = field(default_factory=MacParams)
    channel: ChannelParams = field(default_factory=ChannelParams)
    slots: int = 1_000_000
    seed: int = 0
    capture_mode: str = "analytic"

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.slots < 1:
            raise ValueError("slots must be >= 1")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.capture_mode not in CAPTURE_MODES:
            raise ValueError(f"capture_mode must be one of {CAPTURE_MODES}")


@dataclass(frozen=True)
class StationTallies:
    attempts: tuple[int, ...]
    successes: tuple[int, ...]
    captures: tuple[int, ...]
    error_losses: tuple[int, ...]
    collision_losses: tuple[int, ...]


@dataclass(frozen=True)
class SimStats:
    empirical_tau: float
    empirical_s: float
    idle_slots: int
    success_slots: int
    capture_slots: int
    error_slots: int
    collision_slots: int
    slots: int
    total_virtual_time_us: float
    payload_time_us: float
    p_e: float
    seed: int
    rng_algorithm: str
    stations: StationTallies
    counter_violations: int

    @property
    def slot_counts(self) -> dict[str, int]:
        return {"idle": self.idle_slots, "success": self.success_slots,
                "capture": self.capture_slots, "error": self.error_slots,
                "collision": self.collision_slots}


@numba.njit(cache=True)
def _simulate(rng, n, slots, windows, p_e, threshold, sampled, mean_power,
              capture_then_error, t_s, t_c, t_e, sigma, payload_us):
    m = windows.size - 1
    stage = np.zeros(n, dtype=np.int64)
    counter = np.empty(n, dtype=np.int64)
    for s in range(n):
        counter[s] = rng.integers(0, windows[0])
    tally = np.zeros((5, n), dtype=np.int64)  # attempts, successes, captures, errors, collisions
    counts = np.zeros(5, dtype=np.int64)
    tx = np.empty(n, dtype=np.int64)
    powers = np.empty(n)
    total_time = 0.0
    payload_time = 0.0
    violations = 0

    slot = 0
    while slot < slots:
        kmin = counter.min()
        if kmin > 0:
            skip = min(kmin, slots - slot)
            counter -= skip
            counts[0] += skip
            total_time += skip * sigma
            slot += skip
            continue

        k = 0
        for s in range(n):
            if counter[s] == 0:
                tx[k] = s
                k += 1
                tally[0, s] += 1
            else:
                counter[s] -= 1

        if k == 1:
            s = tx[0]
            if rng.random() < p_e:
                counts[3] += 1
                tally[3, s] += 1
                total_time += t_e
            else:
                counts[1] += 1
                tally[1, s] += 1
                stage[s] = 0
                total_time += t_s
                payload_time += payload_us
        else:
            d = tx[rng.integers(0, k)]
            captured = False
            if not math.isinf(threshold):
                if sampled:
                    interference = 0.0
                    for j in range(k):
                        powers[j] = rng.exponential(mean_power)
                        if tx[j] != d:
                            interference += powers[j]
                    for j in range(k):
                        if tx[j] == d:
                            captured = powers[j] > threshold * interference
                else:
                    captured = rng.random() < (1.0 + threshold) ** (-(k - 1))
            if captured and capture_then_error and rng.random() < p_e:
                counts[3] += 1
                tally[3, d] += 1
                total_time += t_e
            elif captured:
                counts[2] += 1
                tally[2, d] += 1
                stage[d] = 0
                total_time += t_s
                payload_time += payload_us
            else:
                counts[4] += 1
                total_time += t_c
            for j in range(k):
                s = tx[j]
                if captured and s == d:
                    continue
                tally[4, s] += 1
                stage[s] = min(stage[s] + 1, m)

        for j in range(k):
            s = tx[j]
            counter[s] = rng.integers(0, windows[stage[s]])
            if counter[s] >= windows[stage[s]] or counter[s] < 0:
                violations += 1
        slot += 1

    return counts, tally, total_time, payload_time, violations


def run(config: SimConfig) -> SimStats:
    """Simulate ``config.slots`` backoff slots; deterministic for a given seed."""
    mac, channel = config.mac, config.channel
    params = mac.backoff
    windows = np.array([contention_window(i, params) for i in range(params.m + 1)], dtype=np.int64)
    d = slot_durations(mac)
    p_e = data_frame_error(mac, channel)
    rng = np.random.Generator(np.random.PCG64(config.seed))
    counts, tally, total_time, payload_time, violations = _simulate(
        rng, config.n, config.slots, windows, p_e, channel.capture.threshold,
        config.capture_mode == "sampled", channel.capture.mean_power,
        channel.capture_then_error, d.t_s_us, d.t_c_us, d.t_e_us, d.sigma_us, d.payload_us)
    stations = StationTallies(*(tuple(int(v) for v in row) for row in tally))
    return SimStats(
        empirical_tau=float(tally[0].sum()) / (config.n * config.slots),
        empirical_s=payload_time / total_time,
        idle_slots=int(counts[IDLE]),
        success_slots=int(counts[SUCCESS]),
        capture_slots=int(counts[CAPTURE]),
        error_slots=int(counts[ERROR]),
        collision_slots=int(counts[COLLISION]),
        slots=config.slots,
        total_virtual_time_us=float(total_time),
        payload_time_us=float(payload_time),
        p_e=p_e,
        seed=config.seed,
        rng_algorithm=RNG_ALGORITHM,
        stations=stations,
        counter_violations=int(violations),
    )


@dataclass(frozen=True)
class ReplicationSummary:
    tau_mean: float
    tau_se: float
    s_mean: float
    s_se: float
    runs: tuple[SimStats, ...]


def replicate(config: SimConfig, replications: int, seed_increment: int = 1) -> ReplicationSummary:
    """Independent runs with seeds ``seed + r * seed_increment``."""
    if replications < 2:
        raise ValueError("need at least 2 replications")
    runs = []
    for r in range(replications):
        seed = (config.seed + r * seed_increment) % 2 ** 64
        cfg = SimConfig(n=config.n, mac=config.mac, channel=config.channel, slots=config.slots,
                        seed=seed, capture_mode=config.capture_mode)
        runs.append(run(cfg))
    taus = np.array([s.empirical_tau for s in runs])
    ss = np.array([s.empirical_s for s in runs])
    root = math.sqrt(replications)
    return ReplicationSummary(
        tau_mean=float(taus.mean()), tau_se=float(taus.std(ddof=1) / root),
        s_mean=float(ss.mean()), s_se=float(ss.std(ddof=1) / root),
        runs=tuple(runs),
    )
