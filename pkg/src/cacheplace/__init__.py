"""Delivery-secrecy tradeoff toolkit for cache-enabled stochastic networks.

Closed-form hit and secrecy probabilities, the globally optimal
probabilistic content placement under per-file secrecy constraints, and a
Monte Carlo simulator for validating the closed forms.
"""

from .analytic import (
    DerivedConstants,
    NetworkParams,
    conditional_hit_probability,
    db_to_linear,
    derive_constants,
    hit_probability,
    placement_cap,
    rate_redundancy,
    secrecy_probability_exact,
    secrecy_probability_lower_bound,
)
from .catalog import (
    CatalogError,
    FileCatalog,
    PlacementPolicy,
    make_catalog,
    sample_secrecy_levels,
    zipf_popularity,
)
from .optimizer import (
    OcpSolution,
    dual_bisection,
    lcc_placement,
    mpc_placement,
    placement_caps,
    solve_ocp,
)
from .simulator import (
    HitSimResult,
    SimConfig,
    SimEstimate,
    sample_ppp,
    simulate_hit,
    simulate_secrecy,
)
from .special import (
    ConvergenceError,
    QuadratureConfig,
    beta,
    hyp2f1_1b,
    integrate_semi_infinite,
)

__version__ = "0.1.0"
