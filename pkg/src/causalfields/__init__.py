"""Lattice toolkit for covariant field theory on 1+1 Lorentzian cylinders.

Subpackages cover geometry sampling, causal-structure combinatorics, metric
deformation with certified flat pockets, scalar and spinor field solvers with
their quantized CCR/CAR representations, spinor-group representation tools,
a covariant net functor over lattice isometries, and a reporting harness.
"""

from .backend import active_backend
from .causal import (
    CausalGraph,
    Region,
    causal_complement,
    causal_graph,
    causal_hull,
    causally_determined,
    closure,
    determination_depth,
    domain_of_dependence,
    double_cone,
    future,
    interior,
    future_domain,
    past,
    past_domain,
    separation_margin,
    truncated_diamond,
)
from .deformation import Atlas, Certificate, Deformation, build_atlas, build_deformation, certify
from .diracfield import CAROperators, CARSpace, DiracKernel, SpinorTestFunction, spinor_bump
from .errors import (
    CausalFieldsError,
    ConfigurationError,
    CovarianceError,
    DomainError,
    SolverInconsistencyError,
)
from .geometry import (
    Lattice,
    MetricModel,
    build_lattice,
    bump_profile,
    generic_model,
    lightcone_slopes,
    minkowski,
    ricci_scalar,
    sample_metric,
    sandwich,
    smoothstep,
)
from .netfunctor import (
    TRIVIAL,
    LatticeIso,
    SpacetimeObject,
    compose,
    functor_law_samples,
    identity_morphism,
    verify_isometry,
)
from .scalarfield import (
    FockRep,
    QuasifreeState,
    SymplecticSpace,
    TestFunction,
    WaveKernel,
    bump,
    local_algebra,
    strict_causal_law,
    symplectic_pairing,
)
from .spin import (
    ETA,
    SpinRep,
    boost,
    check_equivalence,
    covering_map,
    random_unimodular,
    rep_matrix,
    rotation,
    sample_group_elements,
    spin_type,
    statistics_sign,
)

__version__ = "0.1.0"

__all__ = [
    "active_backend",
    "CausalGraph",
    "Region",
    "causal_complement",
    "causal_graph",
    "causal_hull",
    "causally_determined",
    "closure",
    "determination_depth",
    "domain_of_dependence",
    "double_cone",
    "future",
    "interior",
    "future_domain",
    "past",
    "past_domain",
    "separation_margin",
    "truncated_diamond",
    "Atlas",
    "Certificate",
    "Deformation",
    "build_atlas",
    "build_deformation",
    "certify",
    "CAROperators",
    "CARSpace",
    "DiracKernel",
    "SpinorTestFunction",
    "spinor_bump",
    "CausalFieldsError",
    "ConfigurationError",
    "CovarianceError",
    "DomainError",
    "SolverInconsistencyError",
    "Lattice",
    "MetricModel",
    "build_lattice",
    "bump_profile",
    "generic_model",
    "lightcone_slopes",
    "minkowski",
    "ricci_scalar",
    "sample_metric",
    "sandwich",
    "smoothstep",
    "TRIVIAL",
    "LatticeIso",
    "SpacetimeObject",
    "compose",
    "functor_law_samples",
    "identity_morphism",
    "verify_isometry",
    "FockRep",
    "QuasifreeState",
    "SymplecticSpace",
    "TestFunction",
    "WaveKernel",
    "bump",
    "local_algebra",
    "strict_causal_law",
    "symplectic_pairing",
    "ETA",
    "SpinRep",
    "boost",
    "check_equivalence",
    "covering_map",
    "random_unimodular",
    "rep_matrix",
    "rotation",
    "sample_group_elements",
    "spin_type",
    "statistics_sign",
    "__version__",
]
