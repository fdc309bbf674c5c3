"""Exact counting, asymptotics and uniform sampling of level-1 and level-2
phylogenetic networks, rooted and unrooted."""

from .asymptotics import (
    AnalysisError,
    AsymptoticReport,
    HypothesisViolation,
    MomentReport,
    Parameter,
    asymptotic_constants,
    asymptotic_estimate,
    characteristic_root,
    drmota_moments,
)
from .classes import (
    NetworkClass,
    RefinedCountTable,
    closed_count,
    count,
    counts,
    egf_coefficients,
    eval_closed_R,
    phi,
    refined_closed_rooted1,
    refined_counts,
    refined_series,
)
from .graph import (
    Network,
    NetworkError,
    blob_decomposition,
    canonical_form,
    isomorphic,
    parameters,
    root_at,
    rootings,
    to_dot,
    unroot,
    validate,
)
from .oracle import ResourceError, generate_all, verify_counts
from .sampler import WeightTable, preprocess, sample, sample_many

__version__ = "0.1.0"
