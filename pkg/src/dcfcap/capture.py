"""Rayleigh-fading capture model for a DSSS correlation receiver."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np


@dataclass(frozen=True)
class CaptureParams:
    z0: float                      # linear capture ratio
    spreading_factor: int = 11
    path_loss_exponent: float = 4.0
    mean_power: float = 1.0        # homogeneous local mean power p0
    # optional deterministic path loss: p0 = A * r**-x * p_t
    gain_a: Optional[float] = None
    distance: Optional[float] = None
    tx_power: Optional[float] = None

    def __post_init__(self):
        if not self.z0 > 0:
            raise ValueError(f"capture ratio z0 must be > 0, got {self.z0}")
        if self.spreading_factor < 1:
            raise ValueError("spreading factor must be >= 1")
        geometry = (self.gain_a, self.distance, self.tx_power)
        if any(v is not None for v in geometry):
            if any(v is None for v in geometry):
                raise ValueError("geometry needs gain_a, distance and tx_power together")
            p0 = self.gain_a * self.distance ** (-self.path_loss_exponent) * self.tx_power
            if not p0 > 0:
                raise ValueError("geometry yields a non-positive mean power")
            object.__setattr__(self, "mean_power", p0)
        if not self.mean_power > 0:
            raise ValueError("mean power must be > 0")

    @property
    def threshold(self) -> float:
        """SIR threshold z0 * g(Sf) the detected frame has to exceed."""
        return self.z0 * processing_gain(self.spreading_factor)


def processing_gain(spreading_factor: int) -> float:
    if spreading_factor < 1:
        raise ValueError("spreading factor must be >= 1")
    return 2.0 / (3.0 * spreading_factor)


def _survival(threshold: float, i: int) -> float:
    if i == 0:
        return 1.0
    if math.isinf(threshold):
        return 0.0
    return (1.0 + threshold) ** (-i)


def conditional_capture(z0: float, spreading_factor: int, i: int) -> float:
    """P(SIR of the detected frame > z0*g) given ``i`` interfering frames."""
    if i < 0:
        raise ValueError("interferer count must be >= 0")
    if not z0 > 0:
        raise ValueError("z0 must be > 0")
    return _survival(z0 * processing_gain(spreading_factor), i)


def interferer_weight(n: int, tau: float, i: int) -> float:
    """Probability that a slot holds exactly i+1 simultaneous transmissions."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 <= tau <= 1.0:
        raise ValueError(f"tau must be in [0, 1], got {tau}")
    if not 0 <= i <= n - 1:
        raise ValueError(f"interferer count {i} out of range [0, {n - 1}]")
    return math.comb(n, i + 1) * tau ** (i + 1) * (1.0 - tau) ** (n - i - 1)


def capture_prob(params: CaptureParams, n: int, tau: float) -> float:
    """Per-slot probability that a collision occurs and one frame is captured."""
    return sum(interferer_weight(n, tau, i) * _survival(params.threshold, i)
               for i in range(1, n))


def tagged_capture_prob(params: CaptureParams, n: int, tau: float) -> float:
    """P(a transmitting station is the captured one | it collided).

    The receiver locks onto one of the i+1 colliding frames uniformly at
    random, so a colliding station wins with (1+z0 g)^-i / (i+1).  Equals
    ``capture_prob / (n * tau * p_col)`` where that ratio is defined.
    """
    if n < 2 or tau <= 0.0:
        return 0.0
    p_col = 1.0 - (1.0 - tau) ** (n - 1)
    joint = sum(math.comb(n - 1, i) * tau ** i * (1.0 - tau) ** (n - 1 - i)
                * _survival(params.threshold, i) / (i + 1)
                for i in range(1, n))
    return min(1.0, joint / p_col)


def sample_capture(powers: Sequence[float], z0: float, spreading_factor: int,
                   detected: Optional[int] = None) -> Optional[int]:
    """Decide which of several overlapping frames (if any) is captured.

    ``detected`` is the frame the receiver synchronised on; by default the
    strongest one (lowest index on ties).  Returns its index if its SIR over
    the sum of the others exceeds z0*g, else None.
    """
    p = np.asarray(powers, dtype=float)
    if p.ndim != 1 or p.size < 2:
        raise ValueError("capture needs at least two simultaneous frames")
    if np.any(p <= 0):
        raise ValueError("powers must be positive")
    d = int(np.argmax(p)) if detected is None else int(detected)
    if not 0 <= d < p.size:
        raise ValueError(f"detected index {d} out of range")
    interference = p.sum() - p[d]
    if p[d] > z0 * processing_gain(spreading_factor) * interference:
        return d
    return None


def draw_powers(rng: np.random.Generator, k: int, mean_power: float = 1.0) -> np.ndarray:
    """Instantaneous received powers of k Rayleigh-faded frames."""
    return rng.exponential(mean_power, size=k)
