"""Prufer/EFGP toolkit for half-line discrete Schrodinger operators."""

__version__ = "0.1.0"

from . import errors
from ._kernels import backend
from .analysis import (
    BoundReport,
    OscSumSeries,
    SumDiagnostics,
    WeightedVector,
    almost_orthogonality_check,
    check_theorem,
    log_bound_check,
    oscillatory_partial_sums,
    prufer_sum_diagnostics,
    theorem_bound,
    theorem_weight,
    weighted_dot,
)
from .operators import (
    JacobiMatrix,
    OperatorSpec,
    Potential,
    build_jacobi,
    envelope_constant,
    make_potential,
)
from .prufer import (
    PruferTrajectory,
    Solution,
    SpectralParam,
    angle_increment_check,
    evolve_trajectory,
    prufer_step,
    solve_recurrence,
    to_prufer,
    transfer_step,
    verify_recursions,
)
from .spectral import (
    Certificate,
    EigenvalueRecord,
    EigenvalueSet,
    classify_point_spectrum,
    eigenvalues_in_window,
    eigenvector,
    make_eigenvalue_set,
    resonance_construct,
    sturm_count,
)

__all__ = [
    "__version__",
    "backend",
    "errors",
    "BoundReport",
    "OscSumSeries",
    "SumDiagnostics",
    "WeightedVector",
    "almost_orthogonality_check",
    "check_theorem",
    "log_bound_check",
    "oscillatory_partial_sums",
    "prufer_sum_diagnostics",
    "theorem_bound",
    "theorem_weight",
    "weighted_dot",
    "JacobiMatrix",
    "OperatorSpec",
    "Potential",
    "build_jacobi",
    "envelope_constant",
    "make_potential",
    "PruferTrajectory",
    "Solution",
    "SpectralParam",
    "angle_increment_check",
    "evolve_trajectory",
    "prufer_step",
    "solve_recurrence",
    "to_prufer",
    "transfer_step",
    "verify_recursions",
    "Certificate",
    "EigenvalueRecord",
    "EigenvalueSet",
    "classify_point_spectrum",
    "eigenvalues_in_window",
    "eigenvector",
    "make_eigenvalue_set",
    "resonance_construct",
    "sturm_count",
]
