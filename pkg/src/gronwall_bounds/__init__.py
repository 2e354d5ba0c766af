"""A priori bounds of Gronwall-Bellman type and their Riccati comparison check."""

from ._kernels import USE_NUMBA
from .errors import EvaluationError, GronwallError, ValidationError
from .gronwall import BoundProblem, Envelope, classic_bound, general_bound, two_sided_envelope
from .linsys import (
    LinearSystem,
    NormEnvelopeReport,
    TensorSignal,
    integrate_system,
    norm_envelope,
    operator_norm,
)
from .riccati import (
    ComparisonSetup,
    RiccatiCoeffs,
    Trajectory,
    build_comparison,
    check_theorem21,
    residual_slack,
    riccati_residual,
    solve_linear_cauchy,
    solve_riccati,
    verify_comparison,
)
from .signal import Grid, Signal, cumulative, weighted_tail_curve, weighted_tail_integral

__version__ = "0.1.0"
