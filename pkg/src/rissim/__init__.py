"""Link-level simulator for RIS-assisted downlink MIMO systems.

Channel models of increasing fidelity (iid Rayleigh through near-field
geometric), tile/codebook surface configuration, SINR-constrained
power-minimization precoding, and a reproducible Monte Carlo sweep harness.
"""

from .channels import (
    Box,
    ChannelMatrix,
    ChannelModel,
    LinkParams,
    LinkRole,
    ScatteringCluster,
    los_matrix,
    nearfield_los,
    pathloss,
    sample_iid_rayleigh,
    sample_lowrank_geometric,
    sample_nearfield_geometric,
    sample_rician,
)
from .correlation import (
    CorrelationMatrix,
    path_sum_covariance_error,
    matrix_sqrt_factor,
    sample_matrix_normal_factor,
    sample_matrix_normal_vec,
    sinc_correlation,
)
from .geometry import (
    Angle,
    ArrayGeometry,
    direction_from_angle,
    fraunhofer_distance,
    kron_steering,
    pairwise_distance,
    steering_vector,
)
from .harness import noise_power, run_sweep, run_trial
from .precoding import InfeasibleError, PrecodingSolution, achieved_sinr, min_power_precoder
from .ris import (
    Codebook,
    EffectiveChannel,
    RisConfiguration,
    TilePartition,
    assemble_gamma,
    build_codebook,
    build_tile_partition,
    configure_tiles,
    tile_effective_channel,
)
from .scenario import ScenarioConfig, default_config, full_config, load_config

__version__ = "0.1.0"

__all__ = [
    "Angle",
    "ArrayGeometry",
    "Box",
    "ChannelMatrix",
    "ChannelModel",
    "Codebook",
    "CorrelationMatrix",
    "EffectiveChannel",
    "InfeasibleError",
    "LinkParams",
    "LinkRole",
    "PrecodingSolution",
    "RisConfiguration",
    "ScatteringCluster",
    "ScenarioConfig",
    "TilePartition",
    "achieved_sinr",
    "assemble_gamma",
    "build_codebook",
    "build_tile_partition",
    "configure_tiles",
    "default_config",
    "direction_from_angle",
    "path_sum_covariance_error",
    "fraunhofer_distance",
    "full_config",
    "kron_steering",
    "load_config",
    "los_matrix",
    "matrix_sqrt_factor",
    "min_power_precoder",
    "nearfield_los",
    "noise_power",
    "pairwise_distance",
    "pathloss",
    "run_sweep",
    "run_trial",
    "sample_iid_rayleigh",
    "sample_lowrank_geometric",
    "sample_matrix_normal_factor",
    "sample_matrix_normal_vec",
    "sample_nearfield_geometric",
    "sample_rician",
    "sinc_correlation",
    "steering_vector",
    "tile_effective_channel",
]
