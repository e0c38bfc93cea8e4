"""Bi-dimensional backoff Markov chain with error-aware stage holding and capture.

A station in state (i, 0) transmits. Afterwards it

* resets to stage 0 on success (no collision and no error, or collision won
  through capture),
* stays in stage i when the frame was hit by channel errors (NAK received),
* moves to stage min(i+1, m) on a collision it did not capture,

and draws a fresh counter uniformly from [0, W_j - 1] of its new stage j.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .capture import capture_prob, tagged_capture_prob
from .params import BackoffParams, ChannelParams, MacParams
from .phy import frame_error_prob

log = logging.getLogger(__name__)


class DegenerateChainError(ValueError):
    """Raised when the retry loop is absorbing and no stationary law exists."""


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, tau: float, residual: float):
        super().__init__(f"{message} (last tau={tau!r}, residual={residual:.3e})")
        self.tau = tau
        self.residual = residual


def contention_window(i: int, params: BackoffParams) -> int:
    if i < 0:
        raise ValueError("backoff stage must be >= 0")
    return 2 ** min(i, params.m) * params.w0


def _windows(params: BackoffParams) -> np.ndarray:
    return np.array([contention_window(i, params) for i in range(params.m + 1)])


@dataclass(frozen=True)
class ChainInputs:
    p_col: float
    p_e: float
    p_cap: float
    capture_then_error: bool = False

    def __post_init__(self):
        for name in ("p_col", "p_e", "p_cap"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")

    def outcome_masses(self) -> tuple[float, float, float]:
        """Return (reset, hold, escalate) probabilities out of a transmit state."""
        pc, pe, pcap = self.p_col, self.p_e, self.p_cap
        captured = pc * pcap
        if self.capture_then_error:
            reset = (1.0 - pc) * (1.0 - pe) + captured * (1.0 - pe)
            hold = ((1.0 - pc) + captured) * pe
        else:
            reset = (1.0 - pc) * (1.0 - pe) + captured
            hold = (1.0 - pc) * pe
        return reset, hold, pc * (1.0 - pcap)


def stationary_head(inputs: ChainInputs, params: BackoffParams) -> np.ndarray:
    """Stationary probabilities b_{i,0}, i = 0..m, of the transmit states."""
    _, hold, esc = inputs.outcome_masses()
    stay_out = 1.0 - hold
    if stay_out <= 0.0:
        raise DegenerateChainError(f"stage holding is absorbing for {inputs}")
    m = params.m
    ratio = np.ones(m + 1)
    if m >= 1:
        top_out = 1.0 - hold - esc
        if top_out <= 0.0:
            raise DegenerateChainError(f"stage {m} is absorbing for {inputs}")
        q = esc / stay_out
        ratio[1:m] = q ** np.arange(1, m)
        ratio[m] = q ** (m - 1) * esc / top_out
    w = _windows(params)
    b00 = 1.0 / np.sum(ratio * (w + 1) / 2.0)
    return ratio * b00


def expand_distribution(head: np.ndarray, params: BackoffParams) -> np.ndarray:
    """Full distribution b_{i,k} = (W_i - k)/W_i * b_{i,0}, stage-major order."""
    parts = []
    for i, w in enumerate(_windows(params)):
        k = np.arange(w)
        parts.append((w - k) / w * head[i])
    return np.concatenate(parts)


def transition_matrix(inputs: ChainInputs, params: BackoffParams) -> np.ndarray:
    """Row-stochastic matrix over all (i, k) states, stage-major order."""
    w = _windows(params)
    offset = np.concatenate(([0], np.cumsum(w)[:-1]))
    size = int(w.sum())
    reset, hold, esc = inputs.outcome_masses()
    P = np.zeros((size, size))
    m = params.m
    for i in range(m + 1):
        base = offset[i]
        for k in range(1, w[i]):
            P[base + k, base + k - 1] = 1.0
        row = base
        P[row, offset[0]:offset[0] + w[0]] += reset / w[0]
        P[row, base:base + w[i]] += hold / w[i]
        j = min(i + 1, m)
        P[row, offset[j]:offset[j] + w[j]] += esc / w[j]
    return P


def power_iteration(P: np.ndarray, tol: float = 1e-15, max_squarings: int = 64) -> np.ndarray:
    """Stationary row vector of an ergodic stochastic matrix via repeated squaring."""
    A = P.copy()
    for _ in range(max_squarings):
        A = A @ A
        A /= A.sum(axis=1, keepdims=True)
        if np.max(A.max(axis=0) - A.min(axis=0)) < tol:
            break
    pi = A.mean(axis=0)
    return pi / pi.sum()


def chain_tau(inputs: ChainInputs, params: BackoffParams) -> float:
    return float(np.sum(stationary_head(inputs, params)))


@dataclass(frozen=True)
class BianchiResult:
    tau: float
    p: float
    residual: float


def _bianchi_map(p: float, params: BackoffParams) -> float:
    w = params.w0
    series = sum((2.0 * p) ** i for i in range(params.m))
    return 2.0 / (1.0 + w + p * w * series)


def bianchi_tau(n: int, params: BackoffParams, tol: float = 1e-15) -> BianchiResult:
    """Error-free, capture-free saturation fixed point, solved by bisection."""
    if n < 1:
        raise ValueError("n must be >= 1")

    def f(tau):
        return _bianchi_map(1.0 - (1.0 - tau) ** (n - 1), params) - tau

    lo, hi = 0.0, 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < tol * max(mid, 1e-300):
            break
    tau = 0.5 * (lo + hi)
    residual = abs(f(tau))
    if residual > 1e-9:
        raise ConvergenceError("Bianchi bisection failed", tau, residual)
    return BianchiResult(tau=tau, p=1.0 - (1.0 - tau) ** (n - 1), residual=residual)


@dataclass(frozen=True)
class ChainSolution:
    b_head: np.ndarray
    tau: float
    inputs: ChainInputs
    n: int
    iterations: int
    residual: float
    p_cap_slot: float      # per-slot capture probability, feeds P_s
    method: str = "damped"

    @property
    def p_col(self) -> float:
        return self.inputs.p_col

    @property
    def p_e(self) -> float:
        return self.inputs.p_e

    @property
    def p_cap(self) -> float:
        return self.inputs.p_cap


def _chain_inputs(tau: float, n: int, p_e: float, channel: ChannelParams) -> tuple[ChainInputs, float]:
    p_col = 1.0 - (1.0 - tau) ** (n - 1)
    slot_cap = capture_prob(channel.capture, n, tau)
    if channel.capture_semantics == "aggregate":
        p_cap = slot_cap
    else:
        p_cap = tagged_capture_prob(channel.capture, n, tau)
    inputs = ChainInputs(p_col=p_col, p_e=p_e, p_cap=p_cap,
                         capture_then_error=channel.capture_then_error)
    return inputs, slot_cap


def data_frame_error(mac: MacParams, channel: ChannelParams) -> float:
    return frame_error_prob(mac.layout, channel.data_model(mac), channel.basic_model(mac),
                            channel.sinr)


def _upper_bracket(residual_at) -> float:
    # near tau = 1 the collision probability rounds to 1 and, without capture,
    # the top stage becomes absorbing; back off until the chain is regular
    for gap in (1e-9, 1e-6, 1e-3, 1e-2, 0.1, 0.5):
        try:
            residual_at(1.0 - gap)
        except DegenerateChainError:
            continue
        return 1.0 - gap
    raise DegenerateChainError("no regular chain near tau = 1 for bisection")


def solve_fixed_point(n: int, mac: MacParams, channel: ChannelParams, *, alpha: float = 0.5,
                      tol: float = 1e-12, max_iter: int = 10_000) -> ChainSolution:
    """Solve tau = tau_chain(P_col(tau), P_e, P_cap(tau)) for n saturated stations.

    Damped iteration first; switches to bisection once the residual has
    changed sign three times.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    params = mac.backoff
    p_e = data_frame_error(mac, channel)

    def residual_at(tau):
        inputs, _ = _chain_inputs(tau, n, p_e, channel)
        return chain_tau(inputs, params) - tau

    tau = 2.0 / (params.w0 + 1)
    flips = 0
    last_sign = 0
    method = "damped"
    r = residual_at(tau)
    it = 0
    while abs(r) > tol:
        if it >= max_iter:
            raise ConvergenceError("fixed point did not converge", tau, abs(r))
        sign = 1 if r > 0 else -1
        if last_sign and sign != last_sign:
            flips += 1
        last_sign = sign
        if flips >= 3:
            method = "bisection"
            break
        tau = tau + alpha * r
        r = residual_at(tau)
        it += 1

    if method == "bisection":
        log.debug("oscillating iterate at tau=%g, falling back to bisection", tau)
        lo = 1e-9
        hi = _upper_bracket(residual_at)
        if not (residual_at(lo) > 0 > residual_at(hi)):
            raise ConvergenceError("no sign change for bisection", tau, abs(r))
        while abs(r) > tol:
            if it >= max_iter or hi - lo < 1e-17:
                raise ConvergenceError("bisection did not converge", tau, abs(r))
            tau = 0.5 * (lo + hi)
            r = residual_at(tau)
            if r > 0:
                lo = tau
            else:
                hi = tau
            it += 1

    inputs, slot_cap = _chain_inputs(tau, n, p_e, channel)
    head = stationary_head(inputs, params)
    return ChainSolution(b_head=head, tau=tau, inputs=inputs, n=n, iterations=it,
                         residual=abs(r), p_cap_slot=slot_cap, method=method)
