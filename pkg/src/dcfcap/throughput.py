"""Slot durations and saturation throughput of the basic access scheme."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

from .chain import ChainSolution
from .params import MacParams

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SlotDurations:
    t_s_us: float
    t_c_us: float
    t_e_us: float
    sigma_us: float
    header_us: float
    payload_us: float
    ack_us: float


def slot_durations(mac: MacParams) -> SlotDurations:
    """Channel-busy times for success, collision and error slots (microseconds).

    The PHY header, ACK and NAK go out at the basic rate; the MAC header and
    payload at the data rate.  ACK/NAK carry their own PHY header.
    """
    layout = mac.layout
    header = layout.phy_header_bits / mac.basic_rate_mbps + layout.mac_header_bits / mac.data_rate_mbps
    payload = layout.payload_bits / mac.data_rate_mbps
    ack = (layout.phy_header_bits + layout.ack_bits) / mac.basic_rate_mbps
    nak = (layout.phy_header_bits + layout.nak_bits) / mac.basic_rate_mbps
    t_c = header + payload + mac.ack_timeout_us
    t_s = header + payload + mac.sifs_us + ack + mac.difs_us + 2.0 * mac.prop_delay_us
    t_e = header + payload + nak
    if mac.strict_timing == "extended":
        t_e += mac.sifs_us + mac.difs_us
    return SlotDurations(t_s_us=t_s, t_c_us=t_c, t_e_us=t_e, sigma_us=mac.slot_us,
                         header_us=header, payload_us=payload, ack_us=ack)


def p_transmit(n: int, tau: float) -> float:
    """Probability that at least one of n stations transmits in a slot."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 <= tau <= 1.0:
        raise ValueError(f"tau must be in [0, 1], got {tau}")
    return -math.expm1(n * math.log1p(-tau)) if tau < 1.0 else 1.0


def p_success(n: int, tau: float, p_cap: float) -> float:
    """Probability that a busy slot carries a successful (or captured) frame."""
    p_tr = p_transmit(n, tau)
    if p_tr == 0.0:
        raise ValueError("p_success undefined when nobody transmits (tau = 0)")
    single = n * tau * (1.0 - tau) ** (n - 1)
    ps = (single + p_cap) / p_tr
    if ps > 1.0:
        log.warning("p_success %.6g > 1 clamped (n=%d tau=%g p_cap=%g)", ps, n, tau, p_cap)
        ps = 1.0
    return ps


@dataclass(frozen=True)
class ThroughputReport:
    tau: float
    p_tr: float
    p_s: float
    p_e: float          # frame error probability of a single transmission
    p_e_success: float  # error probability of a frame in a successful-access slot
    p_cap: float        # per-slot capture probability
    durations: SlotDurations
    s: float            # fraction of time spent carrying payload
    s_mbps: float


def saturation_throughput(sol: ChainSolution, mac: MacParams) -> ThroughputReport:
    """Normalised saturation throughput S of the converged chain.

    Unless captured frames are exposed to channel errors, only the
    single-transmitter share of successful-access slots can end in a NAK, so
    the error probability inside P_s is weighted by that share.
    """
    d = slot_durations(mac)
    n, tau, p_e = sol.n, sol.tau, sol.p_e
    p_tr = p_transmit(n, tau)
    if p_tr == 0.0:
        return ThroughputReport(tau, 0.0, 0.0, p_e, p_e, sol.p_cap_slot, d, 0.0, 0.0)
    p_s = p_success(n, tau, sol.p_cap_slot)
    if sol.inputs.capture_then_error:
        p_e_succ = p_e
    else:
        single = n * tau * (1.0 - tau) ** (n - 1)
        p_e_succ = p_e * single / (p_tr * p_s) if p_s > 0 else 0.0
    good = p_tr * p_s * (1.0 - p_e_succ)
    denom = ((1.0 - p_tr) * d.sigma_us
             + p_tr * (1.0 - p_s) * d.t_c_us
             + p_tr * p_s * p_e_succ * d.t_e_us
             + good * d.t_s_us)
    s = good * d.payload_us / denom
    return ThroughputReport(tau=tau, p_tr=p_tr, p_s=p_s, p_e=p_e, p_e_success=p_e_succ,
                            p_cap=sol.p_cap_slot, durations=d, s=s,
                            s_mbps=s * mac.data_rate_mbps)
