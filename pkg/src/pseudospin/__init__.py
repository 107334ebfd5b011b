"""Two-detector pseudo-spin pointer for weak-measurement angle estimation."""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .model import (  # noqa: F401
    EXACT,
    FIRSTORDER,
    MeterSpec,
    OutcomeProbabilities,
    SystemObservable,
    TwoLevelState,
    WeakMeasurementModel,
    contrast_firstorder,
    contrast_general_firstorder,
    kraus_amplitude,
    outcome_probabilities,
    outcome_probabilities_exact,
    postselect_angle_states,
    postselection_probability,
    weak_value,
)
from .optics import FresnelCoefficients, OpticalSetup, fresnel, shel_contrast, shel_shift, to_model  # noqa: F401
from .estimation import (  # noqa: F401
    EstimationReport,
    crb_variance,
    estimate_theta,
    fisher_information,
    pointer_variance,
    sensitivity,
)
from .montecarlo import CountRecord, NoiseSpec, SourceSpec, run_trials, simulate_window, sweep  # noqa: F401
