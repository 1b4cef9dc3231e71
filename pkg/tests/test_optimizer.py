"""Tests for the water-filling placement solver and the greedy baselines."""

import numpy as np
import pytest

from cacheplace.analytic import (
    NetworkParams,
    db_to_linear,
    derive_constants,
    hit_probability,
    secrecy_probability_lower_bound,
)
from cacheplace.catalog import PlacementPolicy, make_catalog, sample_secrecy_levels
from cacheplace.optimizer import (
    _clipped_total,
    dual_bisection,
    lcc_placement,
    mpc_placement,
    placement_caps,
    solve_ocp,
)

BS_DENSITY = 1.0 / 800.0**2


def default_params(**overrides):
    kwargs = dict(
        bs_density=BS_DENSITY,
        eaves_density=BS_DENSITY / 5.0,
        alpha=3.0,
        guard_radius=200.0,
        gamma_u=db_to_linear(-5.0),
        gamma_e=db_to_linear(-7.0),
    )
    kwargs.update(overrides)
    return NetworkParams(**kwargs)


def grid_search_objective(catalog, params, caps, step=0.005):
    """Brute-force oracle: best hit probability over a grid for F=4.

    The first three coordinates run over a grid inside their caps; the last
    file takes the remaining budget (projected into its own box), which is
    optimal because the objective is increasing in each coordinate.
    """
    assert catalog.file_count == 4
    budget = catalog.cache_size
    axes = [np.arange(0.0, caps[i] + 1e-12, step) for i in range(3)]
    g0, g1, g2 = np.meshgrid(*axes, indexing="ij")
    p3 = np.clip(budget - g0 - g1 - g2, 0.0, caps[3])
    feasible = g0 + g1 + g2 + p3 <= budget + 1e-9
    c = derive_constants(params, params.gamma_u)
    q = catalog.popularity

    def cond_hit(p):
        return np.where(p > 0, p / (c.tau1 * p + c.tau2), 0.0)

    objective = (
        q[0] * cond_hit(g0)
        + q[1] * cond_hit(g1)
        + q[2] * cond_hit(g2)
        + q[3] * cond_hit(p3)
    )
    objective = np.where(feasible, objective, -np.inf)
    best = np.unravel_index(np.argmax(objective), objective.shape)
    p_best = np.array([g0[best], g1[best], g2[best], p3[best]])
    return float(objective[best]), p_best


class TestSolveOcp:
    def test_symmetric_instance_splits_evenly(self):
        # Equal popularity and equal caps of 1: the optimum spreads the
        # budget uniformly, p_i = C / F.
        params = default_params()
        cat = make_catalog(5, 0.0, [0.0] * 5, 2)
        sol = solve_ocp(cat, params)
        assert np.allclose(sol.policy.p, 0.4, atol=1e-8)
        assert sol.dual > 0
        assert sol.active_set == ("interior",) * 5

    def test_slack_budget_returns_caps(self):
        # Tight secrecy levels make every cap small; when the caps sum to
        # less than C they are themselves optimal and the dual is zero.
        params = default_params()
        eps = [0.95, 0.9, 0.92, 0.97, 0.9]
        cat = make_catalog(5, 0.7, eps, 4)
        caps = placement_caps(cat, params)
        assert caps.sum() < cat.cache_size
        sol = solve_ocp(cat, params)
        assert np.allclose(sol.policy.p, caps)
        assert sol.dual == 0.0
        assert all(s in ("capped", "zero") for s in sol.active_set)

    def test_matches_grid_search_oracle(self):
        params = default_params()
        cat = make_catalog(4, 0.7, [0.1, 0.6, 0.3, 0.8], 2)
        caps = placement_caps(cat, params)
        sol = solve_ocp(cat, params)
        best_obj, best_p = grid_search_objective(cat, params, caps)
        # The solver must do at least as well as the grid, and agree with
        # the grid point to within the grid resolution.
        assert sol.objective >= best_obj - 1e-12
        assert np.max(np.abs(sol.policy.p - best_p)) <= 0.005 + 1e-9

    def test_budget_met_exactly(self):
        params = default_params()
        for seed in range(5):
            eps = sample_secrecy_levels(10, 0.6, seed=seed)
            cat = make_catalog(10, 0.7, eps, 5)
            sol = solve_ocp(cat, params)
            caps = placement_caps(cat, params)
            expected = min(float(cat.cache_size), float(caps.sum()))
            assert sol.policy.p.sum() == pytest.approx(expected, abs=1e-8)

    def test_kkt_residuals(self):
        # Interior files share a common marginal value nu; capped files have
        # marginal value >= nu and zero files <= nu.
        params = default_params()
        eps = sample_secrecy_levels(10, 0.6, seed=3)
        cat = make_catalog(10, 0.7, eps, 5)
        sol = solve_ocp(cat, params)
        c = derive_constants(params, params.gamma_u)
        marginal = (
            cat.popularity * c.tau2 / (c.tau1 * sol.policy.p + c.tau2) ** 2
        )
        for i, state in enumerate(sol.active_set):
            if state == "interior":
                assert marginal[i] == pytest.approx(sol.dual, rel=1e-6)
            elif state == "capped":
                assert marginal[i] >= sol.dual - 1e-6 * sol.dual
            else:
                assert marginal[i] <= sol.dual + 1e-6 * sol.dual

    def test_secrecy_feasible(self):
        params = default_params()
        eps = sample_secrecy_levels(10, 0.6, seed=9)
        cat = make_catalog(10, 0.7, eps, 5)
        sol = solve_ocp(cat, params)
        for p_i, eps_i in zip(sol.policy.p, cat.secrecy_levels):
            assert secrecy_probability_lower_bound(float(p_i), params) >= (
                eps_i - 1e-9
            )

    def test_permutation_equivariance(self):
        params = default_params()
        eps = [0.1, 0.6, 0.3, 0.8, 0.2]
        cat = make_catalog(5, 0.7, eps, 2)
        sol = solve_ocp(cat, params)
        perm = np.array([3, 0, 4, 1, 2])
        from cacheplace.catalog import FileCatalog

        cat_perm = FileCatalog(
            file_count=5,
            beta=cat.beta,
            popularity=cat.popularity[perm],
            secrecy_levels=cat.secrecy_levels[perm],
            cache_size=2,
        )
        sol_perm = solve_ocp(cat_perm, params)
        assert np.allclose(sol_perm.policy.p, sol.policy.p[perm], atol=1e-8)

    def test_dominates_baselines_on_random_instances(self):
        params = default_params()
        rng = np.random.default_rng(2024)
        for _ in range(100):
            file_count = int(rng.integers(3, 12))
            cache = int(rng.integers(1, file_count))
            beta = float(rng.uniform(0.0, 1.5))
            eps = rng.uniform(0.01, 0.9, size=file_count)
            cat = make_catalog(file_count, beta, eps, cache)
            sol = solve_ocp(cat, params)
            for baseline in (mpc_placement, lcc_placement):
                value = hit_probability(baseline(cat, params), cat, params)
                assert sol.objective >= value - 1e-10


class TestDualBisection:
    def test_requires_tight_budget(self):
        params = default_params()
        cat = make_catalog(5, 0.7, [0.95] * 5, 4)
        caps = placement_caps(cat, params)
        with pytest.raises(ValueError):
            dual_bisection(cat, params, caps)

    def test_clipped_total_decreasing_in_dual(self):
        params = default_params()
        cat = make_catalog(8, 0.7, [0.2] * 8, 4)
        caps = placement_caps(cat, params)
        c = derive_constants(params, params.gamma_u)
        nu_star = dual_bisection(cat, params, caps)
        totals = [
            _clipped_total(cat.popularity, c.tau1, c.tau2, caps, nu_star * s)
            for s in [0.25, 0.5, 1.0, 2.0, 4.0]
        ]
        assert all(t1 >= t2 for t1, t2 in zip(totals, totals[1:]))
        assert totals[2] == pytest.approx(cat.cache_size, abs=1e-8)


class TestBaselines:
    def test_mpc_hand_trace(self):
        # Popularity descending by construction; caps (0.3, 1, 0.7, 1, 1),
        # budget 2 -> fill 0.3, 1.0, 0.7 and stop.
        params = default_params()
        cat = make_catalog(5, 0.7, [0.0] * 5, 2)
        caps = np.array([0.3, 1.0, 0.7, 1.0, 1.0])
        policy = mpc_placement(cat, params, caps=caps)
        assert np.allclose(policy.p, [0.3, 1.0, 0.7, 0.0, 0.0])

    def test_lcc_hand_trace(self):
        # Visit order by ascending secrecy level: files 2 (eps .1), 0 (.2),
        # 3 (.5), 1 (.9). Caps 1 except file 1 capped at 0.4; budget 2 fills
        # file 2 and file 0 fully.
        params = default_params()
        cat = make_catalog(4, 0.7, [0.2, 0.9, 0.1, 0.5], 2)
        caps = np.array([1.0, 0.4, 1.0, 1.0])
        policy = lcc_placement(cat, params, caps=caps)
        assert np.allclose(policy.p, [1.0, 0.0, 1.0, 0.0])

    def test_baselines_respect_caps_and_budget(self):
        params = default_params()
        for seed in range(5):
            eps = sample_secrecy_levels(10, 0.6, seed=seed)
            cat = make_catalog(10, 0.7, eps, 5)
            caps = placement_caps(cat, params)
            for baseline in (mpc_placement, lcc_placement):
                policy = baseline(cat, params)
                assert np.all(policy.p <= caps + 1e-12)
                assert policy.p.sum() <= cat.cache_size + 1e-9

    def test_baselines_agree_when_order_coincides(self):
        # With secrecy levels sorted the same way as popularity the two
        # greedy baselines visit files in the same order.
        params = default_params()
        cat = make_catalog(6, 0.7, [0.1, 0.2, 0.3, 0.4, 0.5, 0.6], 3)
        p_mpc = mpc_placement(cat, params).p
        p_lcc = lcc_placement(cat, params).p
        assert np.allclose(p_mpc, p_lcc)


def test_caps_shrink_with_level():
    params = default_params()
    cat = make_catalog(4, 0.7, [0.1, 0.3, 0.6, 0.9], 2)
    caps = placement_caps(cat, params)
    assert np.all(np.diff(caps) <= 0)
    assert caps[-1] < caps[0]
