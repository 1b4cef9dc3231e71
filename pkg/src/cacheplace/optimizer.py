"""Optimal and baseline content placement under per-file secrecy caps.

The hit-probability objective is concave in each caching probability, the
secrecy constraints reduce to per-file upper caps, and the storage budget
couples the files. The global optimum is a water-filling solution found by
bisection on the budget's dual variable; MPC (most popular first) and LCC
(lowest secrecy level first) are greedy baselines.
"""

import math
from dataclasses import dataclass

import numpy as np

from .analytic import derive_constants, hit_probability, placement_cap
from .catalog import PlacementPolicy

__all__ = [
    "OcpSolution",
    "placement_caps",
    "solve_ocp",
    "dual_bisection",
    "mpc_placement",
    "lcc_placement",
]

_BISECT_MAX_ITER = 200
_BUDGET_TOL = 1e-9


@dataclass(frozen=True)
class OcpSolution:
    """Optimal placement with its KKT certificate.

    active_set classifies each file as "capped" (at its secrecy cap),
    "interior" (marginal value equals the dual), or "zero".
    """

    policy: PlacementPolicy
    dual: float
    active_set: tuple
    objective: float
    caps: np.ndarray


def placement_caps(catalog, params):
    """Per-file caching caps implied by the secrecy levels."""
    return np.array(
        [placement_cap(e, params) for e in catalog.secrecy_levels]
    )


def _unconstrained_levels(q, tau1, tau2, nu):
    """Stationary points p_i = (sqrt(tau2/nu) sqrt(q_i) - tau2) / tau1."""
    return (np.sqrt(tau2 / nu) * np.sqrt(q) - tau2) / tau1


def _clipped_total(q, tau1, tau2, caps, nu):
    return float(np.clip(_unconstrained_levels(q, tau1, tau2, nu), 0.0, caps).sum())


def dual_bisection(catalog, params, caps):
    """Dual variable nu* at which the clipped water-filling sum equals C.

    Requires sum(caps) > C. The bracket starts at nu_hi = max_i q_i / tau2
    (the marginal value of an empty cache slot, where the sum is zero) and a
    lower end small enough that the sum meets the budget. After bisection the
    interior set is used to solve for nu in closed form, which pins the
    budget residual to machine precision.
    """
    caps = np.asarray(caps, float)
    q = catalog.popularity
    budget = float(catalog.cache_size)
    if caps.sum() <= budget:
        raise ValueError("dual_bisection requires sum(caps) > C")
    c = derive_constants(params, params.gamma_u)
    tau1, tau2 = c.tau1, c.tau2

    nu_hi = float(np.max(q)) / tau2
    nu_lo = nu_hi
    while _clipped_total(q, tau1, tau2, caps, nu_lo) < budget:
        nu_lo *= 0.5
        if nu_lo < 1e-300:
            raise RuntimeError("failed to bracket the dual variable")

    for _ in range(_BISECT_MAX_ITER):
        nu_mid = 0.5 * (nu_lo + nu_hi)
        total = _clipped_total(q, tau1, tau2, caps, nu_mid)
        if total >= budget:
            nu_lo = nu_mid
        else:
            nu_hi = nu_mid
        if nu_hi - nu_lo < 1e-12 * nu_hi:
            break
        if abs(total - budget) < _BUDGET_TOL:
            nu_lo = nu_hi = nu_mid
            break

    nu = 0.5 * (nu_lo + nu_hi)
    # Closed-form refinement: with the interior set fixed, the budget
    # equation solves exactly for nu, pinning the residual to round-off.
    for _ in range(len(q) + 2):
        levels = _unconstrained_levels(q, tau1, tau2, nu)
        interior = (levels > 0.0) & (levels < caps)
        if not interior.any():
            break
        remaining = budget - float(caps[levels >= caps].sum())
        k = int(interior.sum())
        denom = remaining * tau1 + k * tau2
        if denom <= 0:
            break
        root_sum = float(np.sqrt(q[interior]).sum())
        nu_refined = tau2 * (root_sum / denom) ** 2
        if not (
            abs(_clipped_total(q, tau1, tau2, caps, nu_refined) - budget)
            <= abs(_clipped_total(q, tau1, tau2, caps, nu) - budget)
        ):
            break  # active set misidentified; keep the bisection value
        if math.isclose(nu_refined, nu, rel_tol=0.0, abs_tol=1e-18 * nu_hi):
            nu = nu_refined
            break
        nu = nu_refined
    return nu


def solve_ocp(catalog, params, caps=None):
    """Globally optimal placement maximizing hit probability.

    If the caps alone fit the budget the caps are optimal and the dual is
    zero; otherwise the budget is active and the water-filling solution with
    bisection on the dual applies.
    """
    if caps is None:
        caps = placement_caps(catalog, params)
    caps = np.asarray(caps, float)
    q = catalog.popularity
    budget = float(catalog.cache_size)

    if caps.sum() <= budget:
        p = caps.copy()
        nu = 0.0
        active = tuple("zero" if x == 0.0 else "capped" for x in p)
    else:
        nu = dual_bisection(catalog, params, caps)
        c = derive_constants(params, params.gamma_u)
        levels = _unconstrained_levels(q, c.tau1, c.tau2, nu)
        p = np.clip(levels, 0.0, caps)
        active = tuple(
            "capped" if lv >= cap else ("zero" if lv <= 0.0 else "interior")
            for lv, cap in zip(levels, caps)
        )
    policy = PlacementPolicy(p, catalog.cache_size)
    return OcpSolution(
        policy=policy,
        dual=nu,
        active_set=active,
        objective=hit_probability(policy, catalog, params),
        caps=caps,
    )


def _greedy_fill(order, caps, budget):
    p = np.zeros(len(caps))
    remaining = float(budget)
    for idx in order:
        if remaining <= 0:
            break
        take = min(1.0, float(caps[idx]), remaining)
        p[idx] = take
        remaining -= take
    return p


def mpc_placement(catalog, params, caps=None):
    """Most-popular-contents baseline: greedy fill in descending popularity.

    Ties break toward the lower file index. Each file is capped by its
    secrecy cap, so the result is always secrecy-feasible.
    """
    if caps is None:
        caps = placement_caps(catalog, params)
    order = np.lexsort((np.arange(catalog.file_count), -catalog.popularity))
    return PlacementPolicy(
        _greedy_fill(order, caps, catalog.cache_size), catalog.cache_size
    )


def lcc_placement(catalog, params, caps=None):
    """Least-classified-contents baseline: greedy fill in ascending secrecy level.

    Same greedy rule as MPC with the visit order keyed on the secrecy levels,
    ties toward the lower file index.
    """
    if caps is None:
        caps = placement_caps(catalog, params)
    order = np.lexsort((np.arange(catalog.file_count), catalog.secrecy_levels))
    return PlacementPolicy(
        _greedy_fill(order, caps, catalog.cache_size), catalog.cache_size
    )
