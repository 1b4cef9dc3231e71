"""Special functions and quadrature underlying the closed-form network formulas.

Everything here is a pure function: the beta function, the one-parameter
family of Gauss hypergeometric functions 2F1(1, b; b+1; z) that the coverage
and secrecy expressions need, and adaptive quadrature on semi-infinite
intervals.
"""

import math
from dataclasses import dataclass

from scipy import integrate

__all__ = [
    "QuadratureConfig",
    "ConvergenceError",
    "beta",
    "hyp2f1_1b",
    "integrate_semi_infinite",
]

# Series truncation: stop once a term is below this fraction of the partial sum.
_SERIES_EPS = 1e-16
_SERIES_MAX_TERMS = 500_000


class ConvergenceError(RuntimeError):
    """Quadrature did not converge within budget.

    Carries the best available estimate and its error bound so callers can
    still inspect the partial result.
    """

    def __init__(self, message, estimate, error_bound):
        super().__init__(message)
        self.estimate = estimate
        self.error_bound = error_bound


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerances and subdivision budget for adaptive quadrature."""

    rel_tol: float = 1e-10
    abs_tol: float = 1e-14
    max_subdivisions: int = 200

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError(f"rel_tol must be positive, got {self.rel_tol}")
        if not self.abs_tol > 0:
            raise ValueError(f"abs_tol must be positive, got {self.abs_tol}")
        if self.max_subdivisions < 1:
            raise ValueError(
                f"max_subdivisions must be >= 1, got {self.max_subdivisions}"
            )


def beta(a, b):
    """Euler beta function B(a, b) for a, b > 0.

    Evaluated through log-gamma so fractional and moderately large arguments
    do not overflow. Symmetric in its arguments.
    """
    if not a > 0 or not b > 0:
        raise ValueError(f"beta requires positive arguments, got a={a}, b={b}")
    return math.exp(math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b))


def hyp2f1_1b(b, z):
    """Gauss hypergeometric function 2F1(1, b; b+1; z) for 0 < b <= 1, z <= 0.

    This is the only hypergeometric family the closed forms require. For
    |z| < 0.5 the defining power series b * sum_n z^n / (b + n) is summed
    directly; otherwise the Pfaff transformation

        2F1(1, b; b+1; z) = (1 - z)^{-1} * 2F1(1, 1; b+1; z / (z - 1))

    maps z <= 0 onto w = z/(z-1) in [0, 1), where the transformed series is
    absolutely convergent. The result always lies in (0, 1] and increases
    monotonically in z toward 1 at z = 0.
    """
    if not 0 < b <= 1:
        raise ValueError(f"hyp2f1_1b requires 0 < b <= 1, got b={b}")
    if z > 0:
        raise ValueError(f"hyp2f1_1b supports only z <= 0, got z={z}")
    if z == 0:
        return 1.0
    if z > -0.5:
        return _hyp2f1_series_direct(b, z)
    return _hyp2f1_series_pfaff(b, z)


def _hyp2f1_series_direct(b, z):
    # Defining series: sum_n (1)_n (b)_n / ((b+1)_n n!) z^n = sum_n b/(b+n) z^n.
    total = 1.0
    term = 1.0
    zn = 1.0
    n = 0
    while abs(term) > _SERIES_EPS * abs(total):
        n += 1
        if n > _SERIES_MAX_TERMS:
            raise ConvergenceError(
                f"hyp2f1_1b direct series did not converge at b={b}, z={z}",
                total,
                abs(term),
            )
        zn *= z
        term = (b / (b + n)) * zn
        total += term
    return total


def _hyp2f1_series_pfaff(b, z):
    # Pfaff-transformed series: (1-z)^{-1} sum_n n! w^n / (b+1)_n with
    # w = z/(z-1) in [0, 1) for z <= 0.
    w = z / (z - 1.0)
    total = 1.0
    term = 1.0
    n = 0
    while abs(term) > _SERIES_EPS * abs(total):
        n += 1
        if n > _SERIES_MAX_TERMS:
            raise ConvergenceError(
                f"hyp2f1_1b Pfaff series did not converge at b={b}, z={z}",
                total / (1.0 - z),
                abs(term),
            )
        term *= n * w / (b + n)
        total += term
    return total / (1.0 - z)


def integrate_semi_infinite(f, lower, cfg=None):
    """Integrate f over [lower, inf) with adaptive Gauss-Kronrod quadrature.

    The integrand must be integrable and eventually decay monotonically.
    Deterministic for fixed inputs. Raises ConvergenceError (carrying the
    best estimate and its error bound) if the subdivision budget is exhausted
    before the requested tolerances are met.
    """
    if cfg is None:
        cfg = QuadratureConfig()
    out = integrate.quad(
        f,
        lower,
        math.inf,
        epsabs=cfg.abs_tol,
        epsrel=cfg.rel_tol,
        limit=cfg.max_subdivisions,
        full_output=1,
    )
    value, abserr = out[0], out[1]
    if len(out) > 3:  # a QUADPACK warning message is present
        if abserr > cfg.abs_tol + cfg.rel_tol * abs(value):
            raise ConvergenceError(
                f"semi-infinite quadrature failed to converge: {out[3]}",
                value,
                abserr,
            )
    return value
