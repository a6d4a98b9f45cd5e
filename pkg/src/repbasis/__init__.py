"""Random additive k-bases whose window targets have order log n representations."""

from .bounds import (
    BoundsReport,
    av_limit_prob,
    bounds_report,
    chernoff_solve,
    constants,
    expected_count,
    expected_overlap,
    talagrand_tail,
)
from .counting import (
    RepProfile,
    count_all,
    count_brute,
    count_fast_k2,
    enumerate_reps,
    rho_lower_bound,
    rho_max,
)
from .experiments import (
    ScanReport,
    TrialReport,
    concentration_check,
    decay_scan,
    run_trials,
    threshold_scan,
)
from .model import (
    BandPolicy,
    BasisSample,
    ComputationError,
    ExperimentParams,
    ParamError,
    RepBasisError,
    Window,
    validate_params,
    window_of,
)
from .packing import PackingResult, overlap_pairs, pack, pack_exact, pack_greedy
from .sampling import ProbabilityRule, probability_for, sample_basis, trial_seed

__version__ = "0.1.0"
