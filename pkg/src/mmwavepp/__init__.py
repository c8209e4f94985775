"""Off-grid aware channel and spatial covariance estimation for hybrid mmWave MIMO."""

from .channel import (
    ArrayGeometry,
    ChannelParams,
    ChannelRealization,
    PathSet,
    array_response,
    array_response_derivative,
    draw_gains,
    draw_paths,
    empirical_covariance,
    synthesize_channel,
    true_covariance,
)
from .dictionary import (
    Dictionary,
    Grid,
    GridScheme,
    PerturbationBounds,
    build_dictionary,
    build_grid,
    perturbation_bounds,
)
from .estimators import (
    ChannelEstimate,
    CovarianceEstimate,
    SolverOptions,
    SupportEntry,
    channel_gradient,
    covariance_gradient,
    dcomp,
    dsomp,
    indirect_covariance,
    measurement_covariances,
    perturb_channel,
    perturb_covariance,
    ppcomp,
    ppsomp,
)
from .metrics import MetricReport, nmse_c, nmse_h, relative_efficiency
from .sensing import (
    BeamformerSet,
    BeamformerStyle,
    SensingBlock,
    TrainingConfig,
    aggregate_sensing,
    draw_beamformers,
    measure,
)

__version__ = "0.1.0"
