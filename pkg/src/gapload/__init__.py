"""Coding-aware bit and energy loading for DMT and linear-precoded DMT."""

from .channel import (
    AttenuationParams,
    FrequencyGrid,
    MultipathChannelModel,
    PathParams,
    frequency_response,
    length_profile_channel,
    reference_channel,
    subchannel_gains,
)
from .coding import (
    CodingConfig,
    GapTable,
    RsCodeParams,
    TrellisCodeParams,
    build_gap_table,
    q_function,
    q_inverse,
    rate_loss_db,
    rs_gain_db,
    rs_output_ser,
    solve_input_ser,
    trellis_gain_db,
    uncoded_gap,
)
from .loading import (
    LoadingInputs,
    Subset,
    SubsetAllocation,
    allocate_subset,
    allocate_system,
    min_energy_for_rate,
)
from .scenario import SystemConfig, run_scenario, run_variants

__version__ = "0.1.0"

__all__ = [
    "AttenuationParams", "FrequencyGrid", "MultipathChannelModel", "PathParams",
    "frequency_response", "length_profile_channel", "reference_channel", "subchannel_gains",
    "CodingConfig", "GapTable", "RsCodeParams", "TrellisCodeParams", "build_gap_table",
    "q_function", "q_inverse", "rate_loss_db", "rs_gain_db", "rs_output_ser",
    "solve_input_ser", "trellis_gain_db", "uncoded_gap",
    "LoadingInputs", "Subset", "SubsetAllocation", "allocate_subset", "allocate_system",
    "min_energy_for_rate",
    "SystemConfig", "run_scenario", "run_variants",
]
