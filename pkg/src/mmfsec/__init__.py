"""Achievable secrecy rates for multi-mode fiber wiretap channels with artificial noise."""

__version__ = "0.1.0"

from .channel import (
    ChannelMatrix,
    MdlProfile,
    draw_eve_channel,
    draw_haar_unitary,
    draw_mdl_matrix,
    gen_synthetic_channel,
    load_channel,
    save_channel,
)
from .rates import (
    NoiseModel,
    eve_rate_bounds,
    estimated_secrecy_rate,
    jensen_secrecy_lower_bound,
    rate,
    secrecy_rate,
)
from .precoding import (
    PowerAllocation,
    PrecoderSolution,
    build_precoder,
    greedy_an_search,
    threshold_allocation,
    waterfilling,
)
from .montecarlo import SweepConfig, TrialStats, run_sweep, unimodality_surface
from .rng import SeededRng

__all__ = [
    "ChannelMatrix",
    "MdlProfile",
    "draw_eve_channel",
    "draw_haar_unitary",
    "draw_mdl_matrix",
    "gen_synthetic_channel",
    "load_channel",
    "save_channel",
    "NoiseModel",
    "eve_rate_bounds",
    "estimated_secrecy_rate",
    "jensen_secrecy_lower_bound",
    "rate",
    "secrecy_rate",
    "PowerAllocation",
    "PrecoderSolution",
    "build_precoder",
    "greedy_an_search",
    "threshold_allocation",
    "waterfilling",
    "SweepConfig",
    "TrialStats",
    "run_sweep",
    "unimodality_surface",
    "SeededRng",
]
