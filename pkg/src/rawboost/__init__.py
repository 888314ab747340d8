"""rawboost: deterministic raw-waveform data boosting and augmentation.

Three noise processes (linear/non-linear convolutive, impulsive
signal-dependent, stationary signal-independent) composable in series or
parallel, with bit-exact provenance, a batch CLI and scikit-learn style
transformers.
"""

__version__ = "0.1.0"

from .core import (
    ConvolutiveConfig,
    ImpulsiveConfig,
    ParameterRanges,
    RandomSource,
    StationaryConfig,
    Waveform,
    db_to_linear,
    derive_utterance_rng,
    sample_convolutive_config,
    sample_impulsive_config,
    sample_stationary_config,
)
from .distortions import apply_convolutive, apply_impulsive, apply_stationary, sample_dr
from .errors import (
    ChainParseError,
    ConfigurationError,
    DegenerateFilterError,
    DegenerateInputError,
    DegenerateSpecError,
    RawboostError,
    ReplayError,
    UnsupportedFormatError,
)
from .estimators import ConvolutiveNoise, ImpulsiveNoise, RawBoost, StationaryNoise
from .filters import (
    FirFilter,
    NotchSpec,
    cascade,
    convolve_same,
    design_multiband_fir,
    design_notch_fir,
    frequency_response,
)
from .pipeline import (
    ChainSpec,
    ProvenanceRecord,
    Technique,
    normalize,
    parse_chain,
    replay,
    run_chain,
    run_parallel,
    run_series,
)

__all__ = [
    "__version__",
    "Waveform",
    "RandomSource",
    "derive_utterance_rng",
    "db_to_linear",
    "ParameterRanges",
    "ConvolutiveConfig",
    "ImpulsiveConfig",
    "StationaryConfig",
    "sample_convolutive_config",
    "sample_impulsive_config",
    "sample_stationary_config",
    "NotchSpec",
    "FirFilter",
    "design_notch_fir",
    "design_multiband_fir",
    "cascade",
    "frequency_response",
    "convolve_same",
    "sample_dr",
    "apply_convolutive",
    "apply_impulsive",
    "apply_stationary",
    "ChainSpec",
    "Technique",
    "parse_chain",
    "normalize",
    "run_series",
    "run_parallel",
    "run_chain",
    "replay",
    "ProvenanceRecord",
    "RawBoost",
    "ConvolutiveNoise",
    "ImpulsiveNoise",
    "StationaryNoise",
    "RawboostError",
    "ConfigurationError",
    "ChainParseError",
    "DegenerateSpecError",
    "DegenerateInputError",
    "DegenerateFilterError",
    "UnsupportedFormatError",
    "ReplayError",
]
