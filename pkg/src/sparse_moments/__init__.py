"""Learning sparse mixtures (k spikes) from noisy moments.

1-D recovery on [0, 1], 2-D recovery on the unit triangle through complex
moments, and high-dimensional recovery from a projected-moment oracle, plus
oracles for synthetic data, topic models and Gaussian location mixtures.
"""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    InputError,
    NumericalFailure,
    SparseMomentsError,
)
from .highdim import RecoveryConfigHD, random_unit_direction, recover_highdim, weight_threshold
from .mixtures import (
    Domain,
    SignedSpikeMixture,
    SpikeMixture,
    random_mixture,
    repair_negative_weights,
    transport_1d,
    transport_complex,
    transport_general,
    transport_signed,
)
from .moments import (
    MomentGrid2D,
    MomentVector1D,
    complex_transform,
    moment_distance,
    moments_1d,
    moments_2d,
    projected_moments,
)
from .prony1d import RecoveryConfig1D, RecoveryReport, recover_1d
from .prony2d import RecoveryConfig2D, recover_2d

__all__ = [
    "ConfigError",
    "Domain",
    "InputError",
    "MomentGrid2D",
    "MomentVector1D",
    "NumericalFailure",
    "RecoveryConfig1D",
    "RecoveryConfig2D",
    "RecoveryConfigHD",
    "RecoveryReport",
    "SignedSpikeMixture",
    "SparseMomentsError",
    "SpikeMixture",
    "complex_transform",
    "moment_distance",
    "moments_1d",
    "moments_2d",
    "projected_moments",
    "random_mixture",
    "random_unit_direction",
    "recover_1d",
    "recover_2d",
    "recover_highdim",
    "repair_negative_weights",
    "transport_1d",
    "transport_complex",
    "transport_general",
    "transport_signed",
    "weight_threshold",
]
