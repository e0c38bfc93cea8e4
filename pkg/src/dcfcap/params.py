"""Network, channel and model-option parameters (802.11b defaults)."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .capture import CaptureParams
from .phy import SER_FORMULAS, FrameLayout, RateModel, rate_model

CAPTURE_SEMANTICS = ("conditional", "aggregate")
TIMING_MODES = ("verbatim", "extended")


def db_to_linear(db: float) -> float:
    return 10.0 ** (float(db) / 10.0)


@dataclass(frozen=True)
class BackoffParams:
    w0: int = 32
    m: int = 5

    def __post_init__(self):
        if self.w0 < 2:
            raise ValueError(f"w0 must be >= 2, got {self.w0}")
        if self.m < 0:
            raise ValueError(f"m must be >= 0, got {self.m}")

    @property
    def w_max(self) -> int:
        return 2 ** self.m * self.w0


@dataclass(frozen=True)
class MacParams:
    """MAC/PHY timing and frame sizes. Times in microseconds, sizes in bytes."""
    mac_header_bytes: int = 24
    phy_header_bytes: int = 16
    payload_bytes: int = 1024
    ack_bytes: int = 14
    nak_bytes: int = 14
    basic_rate_mbps: float = 1
    data_rate_mbps: float = 11
    slot_us: float = 20.0
    sifs_us: float = 10.0
    difs_us: float = 50.0
    ack_timeout_us: float = 300.0
    prop_delay_us: float = 1.0
    w0: int = 32
    m: int = 5
    strict_timing: str = "verbatim"

    def __post_init__(self):
        for name in ("mac_header_bytes", "phy_header_bytes", "ack_bytes", "nak_bytes"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.payload_bytes < 0:
            raise ValueError("payload_bytes must be >= 0")
        for name in ("slot_us", "sifs_us", "difs_us", "ack_timeout_us", "prop_delay_us"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        for name in ("basic_rate_mbps", "data_rate_mbps"):
            if getattr(self, name) not in (1, 2, 5.5, 11):
                raise ValueError(f"{name} must be one of 1, 2, 5.5, 11")
        if self.nak_bytes != self.ack_bytes:
            raise ValueError("nak_bytes must equal ack_bytes")
        if self.strict_timing not in TIMING_MODES:
            raise ValueError(f"strict_timing must be one of {TIMING_MODES}")
        BackoffParams(self.w0, self.m)

    @property
    def backoff(self) -> BackoffParams:
        return BackoffParams(self.w0, self.m)

    @property
    def layout(self) -> FrameLayout:
        return FrameLayout(
            phy_header_bits=8 * self.phy_header_bytes,
            mac_header_bits=8 * self.mac_header_bytes,
            payload_bits=8 * self.payload_bytes,
            ack_bits=8 * self.ack_bytes,
            nak_bits=8 * self.nak_bytes,
        )


@dataclass(frozen=True)
class ChannelParams:
    """Channel state plus the switches selecting between model variants.

    capture_semantics: ``conditional`` feeds the chain with the probability
    that a colliding station is the captured one; ``aggregate`` feeds it the
    per-slot capture probability directly.
    capture_then_error: captured frames are also exposed to the frame error
    probability (chain, throughput and simulator alike).
    """
    sinr: float = math.inf
    capture: CaptureParams = field(default_factory=lambda: CaptureParams(z0=math.inf))
    ser_formula: str = "corrected"
    capture_semantics: str = "conditional"
    capture_then_error: bool = False

    def __post_init__(self):
        if math.isnan(self.sinr) or self.sinr < 0:
            raise ValueError(f"sinr must be a non-negative linear ratio, got {self.sinr}")
        if self.ser_formula not in SER_FORMULAS:
            raise ValueError(f"ser_formula must be one of {SER_FORMULAS}")
        if self.capture_semantics not in CAPTURE_SEMANTICS:
            raise ValueError(f"capture_semantics must be one of {CAPTURE_SEMANTICS}")

    @classmethod
    def from_db(cls, sinr_db: float, capture_db: float, spreading_factor: int = 11,
                **kwargs) -> "ChannelParams":
        return cls(sinr=db_to_linear(sinr_db),
                   capture=CaptureParams(z0=db_to_linear(capture_db),
                                         spreading_factor=spreading_factor),
                   **kwargs)

    def data_model(self, mac: MacParams) -> RateModel:
        return rate_model(mac.data_rate_mbps, self.ser_formula)

    def basic_model(self, mac: MacParams) -> RateModel:
        return rate_model(mac.basic_rate_mbps, self.ser_formula)
