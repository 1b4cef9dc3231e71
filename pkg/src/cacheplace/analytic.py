"""Closed-form hit and secrecy probabilities for the cache-enabled network.

All formulas work in the interference-limited regime with Rayleigh fading,
a homogeneous PPP of base stations of density lambda, an independent PPP of
eavesdroppers of density lambda_e, and a secrecy guard zone of radius D
around every base station. SIR thresholds are linear here; the CLI converts
from dB exactly once at the boundary.
"""

import math
from dataclasses import dataclass

from scipy import integrate

from .special import QuadratureConfig, beta, hyp2f1_1b

__all__ = [
    "NetworkParams",
    "DerivedConstants",
    "db_to_linear",
    "derive_constants",
    "active_density",
    "conditional_hit_probability",
    "hit_probability",
    "secrecy_probability_exact",
    "secrecy_probability_lower_bound",
    "placement_cap",
    "rate_redundancy",
]


def db_to_linear(value_db):
    """Convert a dB quantity to linear scale."""
    return 10.0 ** (value_db / 10.0)


@dataclass(frozen=True)
class NetworkParams:
    """Physical and stochastic network parameters.

    bs_density and eaves_density are per square meter, guard_radius is in
    meters, gamma_u / gamma_e are linear SIR thresholds, tx_power is in watts.
    Every output of this module is invariant under scaling tx_power: it
    cancels in all SIRs and is kept only for completeness.
    """

    bs_density: float
    eaves_density: float
    alpha: float
    guard_radius: float
    gamma_u: float
    gamma_e: float
    tx_power: float = 1.0

    def __post_init__(self):
        if not self.alpha > 2:
            raise ValueError(f"alpha must exceed 2, got {self.alpha}")
        if not self.bs_density > 0:
            raise ValueError(f"bs_density must be positive, got {self.bs_density}")
        if self.eaves_density < 0:
            raise ValueError(
                f"eaves_density must be >= 0, got {self.eaves_density}"
            )
        if self.guard_radius < 0:
            raise ValueError(f"guard_radius must be >= 0, got {self.guard_radius}")
        if not self.gamma_u > 0 or not self.gamma_e > 0:
            raise ValueError("SIR thresholds must be positive")
        if not self.tx_power > 0:
            raise ValueError(f"tx_power must be positive, got {self.tx_power}")

    @property
    def delta(self):
        return 2.0 / self.alpha

    @classmethod
    def with_db_thresholds(
        cls, bs_density, eaves_density, alpha, guard_radius,
        gamma_u_db, gamma_e_db, tx_power=1.0,
    ):
        """Construct from SIR thresholds quoted in dB."""
        return cls(
            bs_density=bs_density,
            eaves_density=eaves_density,
            alpha=alpha,
            guard_radius=guard_radius,
            gamma_u=db_to_linear(gamma_u_db),
            gamma_e=db_to_linear(gamma_e_db),
            tx_power=tx_power,
        )


@dataclass(frozen=True)
class DerivedConstants:
    """Threshold-dependent constants entering every closed form.

    delta = 2/alpha; kappa1 and kappa2 are the interference exponents from
    the whole-plane and outside-disk Laplace transforms; tau1 = 1 + kappa2 -
    kappa1 and tau2 = kappa1 * exp(pi * lambda_e * D^2) combine them with the
    guard-zone thinning. gamma records the linear threshold they were
    evaluated at.
    """

    delta: float
    kappa1: float
    kappa2: float
    tau1: float
    tau2: float
    gamma: float

    def __post_init__(self):
        if not 0 < self.delta < 1:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        if not self.kappa1 > 0 or not self.kappa2 > 0:
            raise ValueError("kappa1 and kappa2 must be positive")
        if self.tau2 < self.kappa1 * (1 - 1e-12):
            raise ValueError("tau2 must be >= kappa1")
        if self.tau1 + self.tau2 < 1 - 1e-12:
            raise ValueError("tau1 + tau2 must be >= 1")


def derive_constants(params, gamma):
    """Evaluate delta, kappa1, kappa2, tau1, tau2 at the linear threshold gamma."""
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    delta = params.delta
    kappa1 = delta * gamma**delta * beta(1.0 - delta, delta)
    kappa2 = (delta * gamma / (1.0 - delta)) * hyp2f1_1b(1.0 - delta, -gamma)
    tau1 = 1.0 + kappa2 - kappa1
    tau2 = kappa1 * math.exp(
        math.pi * params.eaves_density * params.guard_radius**2
    )
    return DerivedConstants(
        delta=delta, kappa1=kappa1, kappa2=kappa2, tau1=tau1, tau2=tau2, gamma=gamma
    )


def active_density(p_i, params):
    """Density of actual transmitters of a file cached with probability p_i.

    Guard-zone muting thins the caching BSs by the void probability that no
    eavesdropper lies within the guard radius. Computed inline everywhere so
    a stale density can never be carried around.
    """
    return (
        p_i
        * params.bs_density
        * math.exp(-params.eaves_density * math.pi * params.guard_radius**2)
    )


def conditional_hit_probability(p_i, params, gamma_u=None):
    """Hit probability for one file cached with probability p_i.

    Equals p / (tau1 * p + tau2) with the constants evaluated at the user
    threshold; zero at p = 0 and concave increasing in p.
    """
    if not 0 <= p_i <= 1:
        raise ValueError(f"p_i must lie in [0, 1], got {p_i}")
    if gamma_u is None:
        gamma_u = params.gamma_u
    if p_i == 0:
        return 0.0
    c = derive_constants(params, gamma_u)
    return p_i / (c.tau1 * p_i + c.tau2)


def hit_probability(policy, catalog, params):
    """Average hit probability of a placement: sum_i q_i * p_i/(tau1 p_i + tau2)."""
    if len(policy.p) != catalog.file_count:
        raise ValueError(
            f"policy length {len(policy.p)} does not match catalog size "
            f"{catalog.file_count}"
        )
    c = derive_constants(params, params.gamma_u)
    total = 0.0
    for q_i, p_i in zip(catalog.popularity, policy.p):
        if p_i > 0:
            total += q_i * p_i / (c.tau1 * p_i + c.tau2)
    return total


def secrecy_probability_lower_bound(p_i, params):
    """Closed-form lower bound on the file secrecy probability.

    1 - exp(-pi D^2 kappa1(gamma_e) lambda) / (tau1(gamma_e) + tau2(gamma_e)/p).
    Strictly decreasing in p; defined as 1 at p = 0 by continuity (a file
    that is never cached cannot leak).
    """
    if not 0 <= p_i <= 1:
        raise ValueError(f"p_i must lie in [0, 1], got {p_i}")
    if p_i == 0:
        return 1.0
    c = derive_constants(params, params.gamma_e)
    numerator = math.exp(
        -math.pi * params.guard_radius**2 * c.kappa1 * params.bs_density
    )
    return 1.0 - numerator / (c.tau1 + c.tau2 / p_i)


def secrecy_probability_exact(p_i, params, cfg=None):
    """Exact file secrecy probability via numerical integration.

    One minus the integral over the wiretapped-transmitter distance r > D of
    the eavesdropper's SIR-coverage kernel against the nearest-transmitter
    distance density 2 pi lam_a r exp(-pi lam_a (r^2 - D^2)). The integration
    is truncated at the radius beyond which that density carries less than
    1e-12 tail mass (closed form), which the Gaussian-type decay makes exact
    to well below the quadrature tolerance.
    """
    if not 0 <= p_i <= 1:
        raise ValueError(f"p_i must lie in [0, 1], got {p_i}")
    if p_i == 0:
        return 1.0
    if cfg is None:
        cfg = QuadratureConfig(rel_tol=1e-10, abs_tol=1e-12, max_subdivisions=200)
    c = derive_constants(params, params.gamma_e)
    lam = params.bs_density
    lam_a = active_density(p_i, params)
    lam_rest = lam - lam_a  # non-caching BSs plus muted caching BSs
    d = params.guard_radius
    alpha = params.alpha
    gamma_e = params.gamma_e
    rate = math.pi * (lam_rest * c.kappa1 + lam_a * c.kappa2)

    def integrand(r):
        theta = (
            -math.pi
            * lam_a
            * d**2
            * hyp2f1_1b(c.delta, -((d / r) ** alpha) / gamma_e)
            if d > 0
            else 0.0
        )
        density = (
            2.0 * math.pi * lam_a * r * math.exp(-math.pi * lam_a * (r**2 - d**2))
        )
        return math.exp(-rate * r**2 + theta) * density

    upper = math.sqrt(d**2 + math.log(1e12) / (math.pi * lam_a))
    value, abserr = integrate.quad(
        integrand,
        d,
        upper,
        epsabs=cfg.abs_tol,
        epsrel=cfg.rel_tol,
        limit=cfg.max_subdivisions,
    )
    return min(1.0, max(0.0, 1.0 - value))


def placement_cap(eps_i, params):
    """Largest caching probability compatible with a secrecy level eps_i.

    Inverts the secrecy lower bound: the cap is min(1, tau2 (1 - eps) /
    [exp(-pi D^2 kappa1 lambda) - tau1 (1 - eps)]^+), where a clamped-to-zero
    denominator means the constraint never binds and the cap is 1.
    """
    if not 0 <= eps_i <= 1:
        raise ValueError(f"eps_i must lie in [0, 1], got {eps_i}")
    c = derive_constants(params, params.gamma_e)
    numerator = c.tau2 * (1.0 - eps_i)
    if numerator == 0.0:
        return 0.0
    denominator = (
        math.exp(-math.pi * params.guard_radius**2 * c.kappa1 * params.bs_density)
        - c.tau1 * (1.0 - eps_i)
    )
    if denominator <= 0.0:
        return 1.0
    return min(1.0, numerator / denominator)


def rate_redundancy(gamma_e, base=math.e):
    """Wiretap-code rate redundancy log_base(1 + gamma_e).

    Helper only; no formula in this package consumes it. The logarithm base
    is explicit because conventions differ (nats vs bits).
    """
    return math.log1p(gamma_e) / math.log(base)
