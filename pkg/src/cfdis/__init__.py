"""Christoffel functions from moment data, and their disintegration.

The package computes Christoffel functions of measures given by samples or
closed forms, factorizes the joint CF into marginal and conditional parts,
and recovers the conditional's Hankel moment matrix and atomic representing
measure through a built-in max-det Newton solver.
"""

from .basis import OrderedBasis, basis_size, enumerate_basis, monomial_vector
from .christoffel import (
    CfEvaluator,
    OrthonormalFamily,
    build_cf,
    cd_kernel,
    cf_value,
    inverse_cf_sum,
    orthonormal_chol,
    orthonormal_det,
    score_points,
    uniform_interval_cf,
)
from .disintegration import (
    DisintegrationResult,
    asymptotic_sweep,
    cf_from_hankel,
    conditional_sos,
    conjecture_probe,
    decay_sweep,
    disintegrate_at,
    factorization_residual,
)
from .errors import (
    CfError,
    IllConditionedError,
    InvalidRegionError,
    MaxIterationsError,
    NotInInteriorError,
    NotPositiveDefiniteError,
)
from .estimator import ChristoffelOutlierDetector
from .maxdet import (
    MaxDetResult,
    UnivariateSos,
    WeightedCone,
    WeightedMaxDetResult,
    maxdet_hankel,
    weighted_maxdet,
)
from .moments import (
    MeasureSpec,
    MomentMatrix,
    MomentSequence,
    affine_rescale,
    localize_sequence,
    marginal_sequence,
    moment_matrix,
    moments_curve_region,
    moments_from_samples,
    moments_from_spec,
    moments_uniform_box,
    riesz_eval,
)
from .quadrature import AtomicMeasure, atoms_moments, gauss_legendre, hankel_to_atoms

__version__ = "0.1.0"

__all__ = [
    "AtomicMeasure",
    "CfError",
    "CfEvaluator",
    "ChristoffelOutlierDetector",
    "DisintegrationResult",
    "IllConditionedError",
    "InvalidRegionError",
    "MaxDetResult",
    "MaxIterationsError",
    "MeasureSpec",
    "MomentMatrix",
    "MomentSequence",
    "NotInInteriorError",
    "NotPositiveDefiniteError",
    "OrderedBasis",
    "OrthonormalFamily",
    "UnivariateSos",
    "WeightedCone",
    "WeightedMaxDetResult",
    "affine_rescale",
    "asymptotic_sweep",
    "atoms_moments",
    "basis_size",
    "build_cf",
    "cd_kernel",
    "cf_from_hankel",
    "cf_value",
    "conditional_sos",
    "conjecture_probe",
    "decay_sweep",
    "disintegrate_at",
    "enumerate_basis",
    "factorization_residual",
    "gauss_legendre",
    "hankel_to_atoms",
    "inverse_cf_sum",
    "localize_sequence",
    "marginal_sequence",
    "maxdet_hankel",
    "moment_matrix",
    "moments_curve_region",
    "moments_from_samples",
    "moments_from_spec",
    "moments_uniform_box",
    "monomial_vector",
    "orthonormal_chol",
    "orthonormal_det",
    "riesz_eval",
    "score_points",
    "uniform_interval_cf",
    "weighted_maxdet",
]
