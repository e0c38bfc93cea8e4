"""Saturation throughput of 802.11b DCF with loss differentiation and capture."""
from .capture import (CaptureParams, capture_prob, conditional_capture, interferer_weight,
                      processing_gain, sample_capture, tagged_capture_prob)
from .chain import (BackoffParams, ChainInputs, ChainSolution, ConvergenceError,
                    DegenerateChainError, bianchi_tau, contention_window, solve_fixed_point,
                    stationary_head, transition_matrix)
from .params import ChannelParams, MacParams, db_to_linear
from .phy import FrameLayout, RateModel, ber, frame_error_prob, q_function, rate_model, ser
from .simulator import SimConfig, SimStats, replicate, run
from .throughput import (SlotDurations, ThroughputReport, p_success, p_transmit,
                         saturation_throughput, slot_durations)

__version__ = "0.1.0"
