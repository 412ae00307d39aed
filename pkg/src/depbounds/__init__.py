"""
Dependence uncertainty bounds for energy distances and energy scores.

The central quantity is ``S_beta(F, G) = E ||X - Y||**beta`` for independent
``X ~ F`` and ``Y ~ G``, where each law is a copula coupled with univariate
marginals. The package computes it exactly, by quadrature or by Monte
Carlo, brackets it between marginal-only bounds and searches permutation
copulas for its extremes.
"""
from .bounds import (
    Bound,
    BoundsReport,
    bounds_report,
    lower_bound_s,
    lower_bound_score,
    sharp_upper_scc,
    upper_bound_s,
)
from .copulas import (
    ConstructionError,
    Copula,
    DiscreteCopula,
    JointDist,
    Symmetry,
    apply_symmetry,
    comonotone,
    countermonotone,
    discretize,
    hat,
    independence,
    mix,
    parallel,
    parse_copula,
    read_discrete_copula,
    sample,
    sample_copula,
    spherical,
    symmetrize,
    symmetry_group,
    write_discrete_copula,
)
from .functionals import (
    CacheIntegrityError,
    CapabilityError,
    Estimate,
    FunctionalParams,
    SwapState,
    energy_distance,
    energy_score,
    expected_energy_score,
    s_beta,
    s_beta_discrete_delta,
    s_beta_point,
)
from .marginals import (
    DegenerateInputError,
    MarginalDist,
    diamond_cdf,
    diamond_quantile,
    empirical,
    gini_m,
    m2_cross,
    parse_marginal,
    point,
    uniform,
)
from .optimizer import SearchProblem, SearchResult, brute_force, local_search, verify_hat_counterexample

__version__ = "0.1.0"
