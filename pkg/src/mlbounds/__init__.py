"""Upper and lower bounds on the ML decoding error probability of binary linear codes and turbo ensembles."""

__version__ = "0.1.0"

from .channels import ChannelModel, bhattacharyya, joint_pairwise_error, pairwise_error, q_function
from .codebook import (
    IOWEF,
    DistanceSpectrum,
    LinearCode,
    enumerate_iowef,
    enumerate_spectrum,
    load_code,
    load_spectrum,
    store_code,
    store_spectrum,
)
from .curves import evaluate_lower, evaluate_upper, lower_curve, truncation_tail, upper_curve
from .density import DensityPoint, h2, h2_inverse, min_density, normalized_density, pb_lower_from_entropy
from .ensemble import (
    ConvolutionalComponent,
    EnsembleSpec,
    conv_iowef,
    ensemble_spectrum,
    load_ensemble,
    uniform_interleaver_combine,
)
from .errors import BoundsError, ConfigError, NumericalError, SizeGuardError
from .gallager import (
    BoundParams,
    TiltingMeasure,
    bhattacharyya_bound,
    ds2_bit_error_bound,
    ds2_bound,
    gallager65_bound,
    optimize_bound,
)
from .geometric import Region, region_bound, region_bound_mc, sphere_bound, tsb_quadrature, union_bound
from .oracle import OracleResult, exact_ml_bsc, mc_ml_awgn, mc_ml_bsc, permute_average_iowef
from .results import BoundCurve, BoundResult
from .union_lower import (
    EventSystem,
    cohen_merhav_bound,
    decaen_bound,
    decaen_ml_bound,
    load_events,
    ml_lower_bound,
)

__all__ = [
    "BoundCurve",
    "BoundParams",
    "BoundResult",
    "BoundsError",
    "ChannelModel",
    "ConfigError",
    "ConvolutionalComponent",
    "DensityPoint",
    "DistanceSpectrum",
    "EnsembleSpec",
    "EventSystem",
    "IOWEF",
    "LinearCode",
    "NumericalError",
    "OracleResult",
    "Region",
    "SizeGuardError",
    "TiltingMeasure",
    "bhattacharyya",
    "bhattacharyya_bound",
    "cohen_merhav_bound",
    "conv_iowef",
    "decaen_bound",
    "decaen_ml_bound",
    "ds2_bit_error_bound",
    "ds2_bound",
    "ensemble_spectrum",
    "enumerate_iowef",
    "enumerate_spectrum",
    "evaluate_lower",
    "evaluate_upper",
    "exact_ml_bsc",
    "gallager65_bound",
    "h2",
    "h2_inverse",
    "joint_pairwise_error",
    "load_code",
    "load_ensemble",
    "load_events",
    "load_spectrum",
    "lower_curve",
    "mc_ml_awgn",
    "mc_ml_bsc",
    "min_density",
    "ml_lower_bound",
    "normalized_density",
    "optimize_bound",
    "pairwise_error",
    "pb_lower_from_entropy",
    "permute_average_iowef",
    "q_function",
    "region_bound",
    "region_bound_mc",
    "sphere_bound",
    "store_code",
    "store_spectrum",
    "truncation_tail",
    "tsb_quadrature",
    "union_bound",
    "upper_curve",
]
