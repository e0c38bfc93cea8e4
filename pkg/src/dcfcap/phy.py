"""802.11b DSSS/CCK error model: SER, BER and frame error probability vs. SINR.

All SINR arguments are linear power ratios. Conversion from dB happens at the
configuration boundary (see :mod:`dcfcap.config`).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

SER_FORMULAS = ("corrected", "paper-literal")


def q_function(x: float) -> float:
    """Gaussian tail probability Q(x) = P(N(0,1) > x)."""
    x = float(x)
    if math.isnan(x):
        raise ValueError("q_function: argument is NaN")
    if math.isinf(x):
        return 0.0 if x > 0 else 1.0
    return 0.5 * math.erfc(x / math.sqrt(2.0))


def _ber_factor(bits_per_symbol: int) -> Fraction:
    if bits_per_symbol == 1:
        return Fraction(1)
    return Fraction(2 ** (bits_per_symbol - 1), 2 ** bits_per_symbol - 1)


@dataclass(frozen=True)
class RateModel:
    rate_mbps: float
    bits_per_symbol: int
    # (multiplicity, argument_scale): SER = sum(mult * Q(sqrt(scale * sinr)))
    ser_terms: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if self.rate_mbps not in (1, 2, 5.5, 11):
            raise ValueError(f"unsupported 802.11b rate {self.rate_mbps} Mbps")
        if self.bits_per_symbol < 1:
            raise ValueError("bits_per_symbol must be >= 1")
        if not self.ser_terms:
            raise ValueError("ser_terms must be nonempty")
        for mult, scale in self.ser_terms:
            if not (mult > 0 and scale > 0):
                raise ValueError(f"ser term ({mult}, {scale}) must be strictly positive")

    @property
    def ber_factor(self) -> Fraction:
        return _ber_factor(self.bits_per_symbol)


# CCK union bound at 11 Mbps. The literal variant keeps the printed Q(sqrt(4*SINR))
# as the last term instead of Q(sqrt(16*SINR)).
_CCK11 = ((24, 4), (16, 6), (174, 8), (16, 10), (24, 12), (1, 16))
_CCK11_LITERAL = _CCK11[:-1] + ((1, 4),)


def rate_model(rate_mbps: float, ser_formula: str = "corrected") -> RateModel:
    """Return the error model for one of the four 802.11b rates."""
    if ser_formula not in SER_FORMULAS:
        raise ValueError(f"ser_formula must be one of {SER_FORMULAS}, got {ser_formula!r}")
    if rate_mbps == 11:
        terms = _CCK11_LITERAL if ser_formula == "paper-literal" else _CCK11
        return RateModel(11, 8, terms)
    if rate_mbps == 5.5:
        return RateModel(5.5, 4, ((14, 8), (1, 16)))
    if rate_mbps == 2:
        # the DQPSK expression already is the bit error rate
        return RateModel(2, 1, ((1, 5.5),))
    if rate_mbps == 1:
        return RateModel(1, 1, ((1, 11),))
    raise ValueError(f"unsupported 802.11b rate {rate_mbps} Mbps")


def _check_sinr(sinr: float) -> float:
    sinr = float(sinr)
    if math.isnan(sinr) or sinr < 0:
        raise ValueError(f"sinr must be a non-negative linear ratio, got {sinr}")
    return sinr


def ser(model: RateModel, sinr: float) -> float:
    """Symbol error rate, clamped to [0, 1] (union bounds exceed 1 at low SINR)."""
    sinr = _check_sinr(sinr)
    total = sum(mult * q_function(math.sqrt(scale * sinr)) for mult, scale in model.ser_terms)
    return min(1.0, total)


def ber(model: RateModel, sinr: float) -> float:
    return float(model.ber_factor) * ser(model, sinr)


@dataclass(frozen=True)
class FrameLayout:
    phy_header_bits: int
    mac_header_bits: int
    payload_bits: int
    ack_bits: int
    nak_bits: int

    def __post_init__(self):
        for name in ("phy_header_bits", "mac_header_bits", "payload_bits", "ack_bits", "nak_bits"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.nak_bits != self.ack_bits:
            raise ValueError("NAK must have the same length as ACK")


def _log_survival(p_bit: float, bits: int) -> float:
    if bits == 0:
        return 0.0
    if p_bit >= 1.0:
        return -math.inf
    return bits * math.log1p(-p_bit)


def frame_error_prob(layout: FrameLayout, data_model: RateModel, basic_model: RateModel,
                     sinr: float) -> float:
    """Probability that a data frame carries at least one bit error.

    The PHY header is sent at the basic rate, MAC header and payload at the
    data rate; bit errors are independent.
    """
    ber_basic = ber(basic_model, sinr)
    ber_data = ber(data_model, sinr)
    log_ok = (_log_survival(ber_basic, layout.phy_header_bits)
              + _log_survival(ber_data, layout.mac_header_bits + layout.payload_bits))
    return -math.expm1(log_ok)
