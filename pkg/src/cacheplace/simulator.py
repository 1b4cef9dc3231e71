"""Monte Carlo ground truth for hit and secrecy probabilities.

Each trial samples one realization of the base-station and eavesdropper
point processes in a finite window, applies the exact guard-zone rule (a BS
switches to artificial noise whenever any eavesdropper lies within the guard
radius of it, unlike the independent-thinning approximation the closed forms
use), draws unit-mean exponential fades, and tests the SIR event at the
origin. Trials use counter-based substreams keyed on (seed, trial index), so
results are reproducible and independent of execution order.

Because every BS transmits at full power (a file, another file, or
artificial noise), the total received power at the origin is the same sum
over all BSs regardless of the guard-zone marks; the marks only decide which
BSs are eligible serving or wiretapped transmitters. The transmit power
cancels from every SIR and never enters the computation.
"""

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SimConfig",
    "SimEstimate",
    "HitSimResult",
    "sample_ppp",
    "simulate_hit",
    "simulate_secrecy",
]


class SimulationConfigError(ValueError):
    """Simulation window or trial configuration is unusable."""


@dataclass(frozen=True)
class SimConfig:
    """Trial count, seed, and observation-window sizing.

    window_radius=None picks a radius automatically so the expected number
    of base stations in the window is at least min_expected_bs and the
    radius covers at least ten mean nearest-neighbor distances.
    """

    trials: int = 10_000
    seed: int = 0
    window_radius: float | None = None
    min_expected_bs: int = 1000

    def __post_init__(self):
        if self.trials < 1:
            raise SimulationConfigError(f"trials must be >= 1, got {self.trials}")
        if not 0 <= self.seed < 2**64:
            raise SimulationConfigError("seed must fit in an unsigned 64-bit integer")
        if self.min_expected_bs < 1:
            raise SimulationConfigError("min_expected_bs must be >= 1")


@dataclass(frozen=True)
class SimEstimate:
    """Monte Carlo probability estimate with a 95% binomial half-width."""

    estimate: float
    trials: int
    ci95_halfwidth: float

    @classmethod
    def from_mean(cls, mean, trials):
        mean = float(mean)
        half = 1.96 * math.sqrt(mean * (1.0 - mean) / trials)
        return cls(estimate=mean, trials=trials, ci95_halfwidth=half)


@dataclass(frozen=True)
class HitSimResult:
    """Per-file hit estimates plus the popularity-weighted aggregate."""

    per_file: tuple
    aggregate: SimEstimate


def _trial_rng(seed, trial):
    # Philox is counter-based: (seed, trial) keys independent substreams.
    key = np.array([seed, trial], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _window_radius(params, cfg):
    if cfg.window_radius is not None:
        if cfg.window_radius <= params.guard_radius:
            raise SimulationConfigError(
                f"window_radius {cfg.window_radius} must exceed the guard radius "
                f"{params.guard_radius}"
            )
        return float(cfg.window_radius)
    by_count = math.sqrt(cfg.min_expected_bs / (math.pi * params.bs_density))
    by_spacing = 10.0 / (2.0 * math.sqrt(params.bs_density))
    radius = max(by_count, by_spacing)
    if radius <= params.guard_radius:
        radius = 2.0 * params.guard_radius
    return radius


def sample_ppp(density, radius, rng):
    """One realization of a homogeneous PPP in a disk around the origin.

    Returns an (n, 2) array; n is Poisson with mean density * pi * radius^2
    and the points are uniform in the disk.
    """
    if density < 0:
        raise ValueError(f"density must be >= 0, got {density}")
    if not radius > 0:
        raise ValueError(f"radius must be positive, got {radius}")
    n = rng.poisson(density * math.pi * radius**2)
    r = radius * np.sqrt(rng.random(n))
    theta = 2.0 * math.pi * rng.random(n)
    return np.column_stack((r * np.cos(theta), r * np.sin(theta)))


class _TrialScene:
    """One sampled network realization, shared across files within a trial."""

    def __init__(self, rng, params, window_radius):
        self.bs = sample_ppp(params.bs_density, window_radius, rng)
        self.eav = sample_ppp(params.eaves_density, window_radius, rng)
        n = len(self.bs)
        self.fade = rng.exponential(size=n)
        # One caching uniform per BS, shared across files (common random
        # numbers): BS b caches file i iff cache_u[b] < p_i.
        self.cache_u = rng.random(n)
        self.dist2 = self.bs[:, 0] ** 2 + self.bs[:, 1] ** 2 if n else np.empty(0)
        self.power = (
            self.fade * self.dist2 ** (-params.alpha / 2.0) if n else np.empty(0)
        )
        # Beyond-window interferers are replaced by their exact mean,
        # 2 pi lambda R^(2-alpha) / (alpha - 2): with alpha close to 2 the
        # truncated far field is not negligible at any affordable radius and
        # would bias every SIR upward by more than the Monte Carlo error.
        tail_mean = (
            2.0
            * math.pi
            * params.bs_density
            * window_radius ** (2.0 - params.alpha)
            / (params.alpha - 2.0)
        )
        self.total_power = float(self.power.sum()) + tail_mean
        self.order = np.argsort(self.dist2)
        self.guard2 = params.guard_radius**2
        # Guard-zone marks are computed lazily: only candidate serving BSs
        # near the origin ever need one. -1 unknown, 0 muted, 1 transmitting.
        self._mark = np.full(n, -1, dtype=np.int8)

    def transmits(self, b):
        """True if BS b has no eavesdropper inside its guard zone."""
        m = self._mark[b]
        if m < 0:
            if self.guard2 == 0.0 or len(self.eav) == 0:
                m = 1
            else:
                gap2 = ((self.eav - self.bs[b]) ** 2).sum(axis=1).min()
                m = 1 if gap2 >= self.guard2 else 0
            self._mark[b] = m
        return m == 1

    def sir_exceeds(self, b, threshold):
        signal = self.power[b]
        return signal > threshold * (self.total_power - signal)


def simulate_hit(policy, catalog, params, cfg):
    """Empirical per-file and aggregate hit probabilities.

    Per trial and file, the typical user at the origin associates with the
    nearest BS that caches the file and is not muted by its guard zone; the
    request hits iff the SIR from that BS exceeds the user threshold. A trial
    with no eligible transmitter in the window counts as a miss.
    """
    p = np.asarray(policy.p, float)
    if len(p) != catalog.file_count:
        raise ValueError(
            f"policy length {len(p)} does not match catalog size {catalog.file_count}"
        )
    radius = _window_radius(params, cfg)
    gamma_u = params.gamma_u
    file_count = catalog.file_count
    hits = np.zeros(file_count)

    for trial in range(cfg.trials):
        scene = _TrialScene(_trial_rng(cfg.seed, trial), params, radius)
        if len(scene.bs) == 0:
            continue
        ordered_u = scene.cache_u[scene.order]
        for i in range(file_count):
            if p[i] <= 0.0:
                continue
            for b in scene.order[ordered_u < p[i]]:
                if scene.transmits(b):
                    if scene.sir_exceeds(b, gamma_u):
                        hits[i] += 1.0
                    break

    per_file = tuple(
        SimEstimate.from_mean(hits[i] / cfg.trials, cfg.trials)
        for i in range(file_count)
    )
    aggregate_mean = float(np.dot(catalog.popularity, hits) / cfg.trials)
    return HitSimResult(
        per_file=per_file,
        aggregate=SimEstimate.from_mean(aggregate_mean, cfg.trials),
    )


def simulate_secrecy(p_i, params, cfg):
    """Empirical secrecy probability of a file cached with probability p_i.

    The typical eavesdropper sits at the origin, which places every BS
    within the guard radius of the origin into artificial-noise mode. The
    wiretapped BS is the nearest transmitter of the file outside that disk;
    the file stays secret iff the eavesdropper's SIR falls below gamma_e, or
    trivially if no eligible transmitter exists in the window.
    """
    if not 0 <= p_i <= 1:
        raise ValueError(f"p_i must lie in [0, 1], got {p_i}")
    if p_i == 0.0:
        return SimEstimate.from_mean(1.0, cfg.trials)
    radius = _window_radius(params, cfg)
    gamma_e = params.gamma_e
    guard2 = params.guard_radius**2
    secure = 0

    for trial in range(cfg.trials):
        scene = _TrialScene(_trial_rng(cfg.seed, trial), params, radius)
        target = -1
        ordered_u = scene.cache_u[scene.order]
        for b in scene.order[ordered_u < p_i]:
            # The origin eavesdropper itself triggers guard zones around it.
            if scene.dist2[b] <= guard2:
                continue
            if scene.transmits(b):
                target = b
                break
        if target < 0 or not scene.sir_exceeds(target, gamma_e):
            secure += 1

    return SimEstimate.from_mean(secure / cfg.trials, cfg.trials)
