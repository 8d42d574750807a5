"""Monte-Carlo engine for average rates of CSI-free and full-CSI schemes.

Every realization draws a Poisson deployment with two UEs in the same
cell plus one set of Rayleigh gains. The same realization is reused for
all path-loss exponents and SIC factors of a sweep (common random
numbers); different BS densities use independent streams.

Realization ``k`` at density index ``d`` always uses the generator
``substream(seed, d, k)``. Per-run results are merged in run order and
reduced with ``math.fsum``, so the output does not depend on the number
of worker processes (``NOMARATE_WORKERS``).
"""

from __future__ import annotations

import csv
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .channel import PowerProfile, sample_fading
from .geometry import CoCellSamplingError, DeploymentConfig, sample_ppp, substream
from .pair_allocation import (
    EQUAL_RATE,
    MAX_SUM_RATE,
    OBJECTIVES,
    allocate,
    equal_rate_gamma,
    maximize_gamma_tilde,
    sum_rate_beta_star,
    sum_rate_gamma_tilde,
)

log = logging.getLogger(__name__)

SCHEMES = ("noma-csifree", "oma-csifree", "noma-benchmark", "oma-benchmark")
CSIFREE = SCHEMES[:2]
BENCHMARK = SCHEMES[2:]
WORKERS_ENV = "NOMARATE_WORKERS"
SKIP_WARN_FRACTION = 0.01
Z95 = 1.96


def mean_with_ci(samples) -> tuple[float, float]:
    """Sample mean and 95% normal-approximation half-width."""
    x = [float(v) for v in samples]
    n = len(x)
    if n < 2:
        raise ValueError("at least two samples are needed for a confidence interval")
    mean = math.fsum(x) / n
    var = math.fsum((v - mean) ** 2 for v in x) / (n - 1)
    return mean, Z95 * math.sqrt(var / n)


@dataclass(frozen=True)
class ExperimentConfig:
    runs: int = 5000
    deployment: DeploymentConfig = field(default_factory=DeploymentConfig)
    epsilon: tuple[float, float] = (1e-2, 1e-2)
    mu_grid: tuple[float, ...] = (0.1,)
    alpha_grid: tuple[float, ...] = (4.0,)
    density_grid: tuple[float, ...] = (1e-4,)
    objectives: tuple[str, ...] = OBJECTIVES
    schemes: tuple[str, ...] = SCHEMES
    seed: int = 0
    max_batches: int = 20

    def __post_init__(self):
        if self.runs < 1:
            raise ValueError("runs must be at least 1")
        for name in ("mu_grid", "alpha_grid", "density_grid", "objectives", "schemes"):
            if not getattr(self, name):
                raise ValueError(f"{name} must not be empty")
        if any(not 0.0 <= m <= 1.0 for m in self.mu_grid):
            raise ValueError("SIC factors must lie in [0, 1]")
        if any(a <= 2 for a in self.alpha_grid):
            raise ValueError("path-loss exponents must exceed 2")
        if any(d <= 0 for d in self.density_grid):
            raise ValueError("densities must be positive")
        if len(self.epsilon) != 2 or any(not 0 < e < 1 for e in self.epsilon):
            raise ValueError("epsilon must hold two values in (0, 1)")
        if set(self.objectives) - set(OBJECTIVES):
            raise ValueError(f"unknown objective in {self.objectives}")
        if set(self.schemes) - set(SCHEMES):
            raise ValueError(f"unknown scheme in {self.schemes}")


@dataclass(frozen=True)
class SweepPoint:
    scheme: str
    objective: str
    density: float
    alpha: float
    mu: float
    epsilon1: float
    epsilon2: float
    mean: float
    half_width: float
    runs: int
    skipped: int


@dataclass
class SweepResult:
    points: list[SweepPoint]
    runs_requested: int

    COLUMNS = (
        "scheme", "objective", "density", "alpha", "mu", "epsilon1", "epsilon2",
        "mean", "half_width", "runs", "skipped",
    )

    @property
    def flagged(self) -> bool:
        return any(p.skipped > SKIP_WARN_FRACTION * self.runs_requested for p in self.points)

    def select(self, scheme=None, objective=None, density=None, alpha=None, mu=None) -> list[SweepPoint]:
        def keep(p):
            return all(
                want is None or got == want
                for want, got in (
                    (scheme, p.scheme),
                    (objective, p.objective),
                    (density, p.density),
                    (alpha, p.alpha),
                    (mu, p.mu),
                )
            )

        return [p for p in self.points if keep(p)]

    def get(self, scheme, objective, density=None, alpha=None, mu=None) -> SweepPoint:
        found = self.select(scheme, objective, density, alpha, mu)
        if len(found) != 1:
            raise KeyError(f"{len(found)} points match {scheme}/{objective} {density} {alpha} {mu}")
        return found[0]

    def write_csv(self, stream, comment: str | None = None) -> None:
        if comment:
            stream.write(f"# {comment}\n")
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(self.COLUMNS)
        for p in self.points:
            w.writerow([_fmt(getattr(p, c)) for c in self.COLUMNS])


def _fmt(v):
    return repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)


def draw_pair(config: ExperimentConfig, density_index: int, run: int):
    """Deployment with two co-cell UEs plus Rayleigh gains for realization ``run``."""
    rng = substream(config.seed, density_index, run)
    deployment = config.deployment.with_density(config.density_grid[density_index])
    net = sample_ppp(deployment, rng, n_ues=2, co_cell=True, max_batches=config.max_batches)
    fading = sample_fading(rng, [d.size for d in net.interferer_distances])
    return net, fading


def _realization_rates(config: ExperimentConfig, density_index: int, run: int):
    """Rates of one realization, shape ``(schemes, objectives, alphas, mus)``."""
    try:
        net, fading = draw_pair(config, density_index, run)
    except CoCellSamplingError:
        return None
    mu = np.asarray(config.mu_grid, dtype=float)
    eps = np.asarray(config.epsilon, dtype=float)
    out = np.full((len(SCHEMES), len(OBJECTIVES), len(config.alpha_grid), mu.size), np.nan)
    families = [
        (s, kind)
        for s, kind in ((0, "csifree"), (2, "benchmark"))
        if set(SCHEMES[s : s + 2]) & set(config.schemes)
    ]
    equal = EQUAL_RATE in config.objectives
    sum_rate = MAX_SUM_RATE in config.objectives
    for a, alpha in enumerate(config.alpha_grid):
        gains = [(r / d) ** alpha for r, d in zip(net.serving_distance, net.interferer_distances)]
        for s, kind in families:
            if kind == "csifree":
                pair = np.sort(eps / np.array([math.fsum(g) for g in gains]))
            else:
                pair = np.sort(fading.h / np.array([np.dot(g, w) for g, w in zip(gains, fading.g)]))
            p1, p2 = pair
            if equal:
                out[s, 0, a] = np.log2(1.0 + equal_rate_gamma(p1, p2, mu))
                out[s + 1, 0, a] = 0.5 * math.log2(1.0 + p1)
            if sum_rate:
                out[s + 1, 1, a] = 0.5 * math.log2((1.0 + p1) * (1.0 + p2))
                if kind == "csifree":
                    beta = sum_rate_beta_star(p1, p2, mu)
                    out[s, 1, a] = np.log2(sum_rate_gamma_tilde(p1, p2, mu, beta))
                else:
                    out[s, 1, a] = np.log2(maximize_gamma_tilde(p1, p2, mu)[1])
    return out


def _run_chunk(config: ExperimentConfig, density_index: int, start: int, stop: int):
    shape = (len(SCHEMES), len(OBJECTIVES), len(config.alpha_grid), len(config.mu_grid))
    block = np.full((stop - start,) + shape, np.nan)
    for i, k in enumerate(range(start, stop)):
        rates = _realization_rates(config, density_index, k)
        if rates is not None:
            block[i] = rates
    return block


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def collect_samples(config: ExperimentConfig, density_index: int = 0, workers: int | None = None) -> np.ndarray:
    """Per-run rates ``(runs, schemes, objectives, alphas, mus)``; skipped runs are NaN."""
    workers = workers or worker_count()
    if workers == 1:
        return _run_chunk(config, density_index, 0, config.runs)
    edges = np.linspace(0, config.runs, workers + 1).astype(int)
    with ProcessPoolExecutor(workers) as pool:
        futures = [
            pool.submit(_run_chunk, config, density_index, int(a), int(b))
            for a, b in zip(edges[:-1], edges[1:])
            if b > a
        ]
        return np.concatenate([f.result() for f in futures])


def run_sweep(config: ExperimentConfig, workers: int | None = None) -> SweepResult:
    """Average rates for every requested scheme, objective and grid point."""
    points = []
    for d, density in enumerate(config.density_grid):
        samples = collect_samples(config, d, workers)
        valid = ~np.isnan(samples).all(axis=(1, 2, 3, 4))
        skipped = int(config.runs - valid.sum())
        if skipped > SKIP_WARN_FRACTION * config.runs:
            log.warning("density %g: %d of %d realizations skipped", density, skipped, config.runs)
        kept = samples[valid]
        for scheme in config.schemes:
            s = SCHEMES.index(scheme)
            for objective in config.objectives:
                o = OBJECTIVES.index(objective)
                for a, alpha in enumerate(config.alpha_grid):
                    for m, mu in enumerate(config.mu_grid):
                        mean, hw = mean_with_ci(kept[:, s, o, a, m])
                        points.append(
                            SweepPoint(
                                scheme, objective, density, alpha, mu,
                                config.epsilon[0], config.epsilon[1],
                                mean, hw, len(kept), skipped,
                            )
                        )
    return SweepResult(points, config.runs)


def run_csifree(config: ExperimentConfig, workers: int | None = None) -> SweepResult:
    return run_sweep(replace(config, schemes=CSIFREE), workers)


def run_benchmark(config: ExperimentConfig, workers: int | None = None) -> SweepResult:
    return run_sweep(replace(config, schemes=BENCHMARK), workers)


def csifree_equal_rate_via_allocate(config: ExperimentConfig, density_index: int = 0) -> np.ndarray:
    """Equal-rate NOMA rates recomputed through the full per-pair allocation path.

    Slow reference path for checking the vectorised estimator; shape
    ``(runs, alphas, mus)`` with NaN for skipped runs.
    """
    out = np.full((config.runs, len(config.alpha_grid), len(config.mu_grid)), np.nan)
    for k in range(config.runs):
        try:
            net, _ = draw_pair(config, density_index, k)
        except CoCellSamplingError:
            continue
        for a, alpha in enumerate(config.alpha_grid):
            links = [net.link(i, config.epsilon[i], alpha) for i in range(2)]
            for m, mu in enumerate(config.mu_grid):
                out[k, a, m] = allocate(links[0], links[1], mu, objective=EQUAL_RATE).rate1
    return out


@dataclass(frozen=True)
class AuditRecord:
    realization: int
    epsilon: float
    rank: int
    gamma: float
    outage: float
    sigma: float
    draws: int

    @property
    def deviation(self) -> float:
        """Outage error in units of the binomial standard deviation."""
        return (self.outage - self.epsilon) / self.sigma

    @property
    def passed(self) -> bool:
        return abs(self.deviation) <= 3.0


def _outage_samples(rng, r, distances, alpha, draws, chunk=10_000):
    """Rayleigh draws of ``h r^-alpha`` and of the interference, ``P_T = 1``."""
    weights = distances ** (-alpha)
    h = rng.standard_exponential(draws)
    interference = np.empty(draws)
    for start in range(0, draws, chunk):
        stop = min(start + chunk, draws)
        interference[start:stop] = rng.standard_exponential((stop - start, weights.size)) @ weights
    return h * r ** (-alpha), interference


def reliability_audit(
    epsilons=(1e-1, 1e-2),
    realizations: int = 20,
    draws: int = 100_000,
    deployment: DeploymentConfig | None = None,
    alpha: float = 4.0,
    mu: float = 0.1,
    objective: str = EQUAL_RATE,
    phi_method: str = "exact",
    seed: int = 0,
) -> list[AuditRecord]:
    """Empirical outage of allocated thresholds over fading, per fixed geometry.

    For each realization two co-cell UEs are allocated at every target
    ``epsilon``; the SIR after SIC of both users is then sampled over
    ``draws`` Rayleigh draws of the serving and interfering channels.
    """
    deployment = deployment or DeploymentConfig()
    records = []
    for k in range(realizations):
        rng = substream(seed, 10_000 + k)
        net = sample_ppp(deployment, rng, n_ues=2, co_cell=True)
        samples = [
            _outage_samples(rng, net.serving_distance[u], net.interferer_distances[u], alpha, draws)
            for u in range(2)
        ]
        for eps in epsilons:
            links = [net.link(u, eps, alpha) for u in range(2)]
            res = allocate(links[0], links[1], mu, objective=objective, phi_method=phi_method)
            profile = PowerProfile.two_user(res.beta, 1.0, mu)
            first = 0 if res.order[0] == "A" else 1
            for rank, u, gamma in ((1, first, res.gamma1), (2, 1 - first, res.gamma2)):
                signal, interference = samples[u]
                sir = signal * profile.power(rank) / (signal * profile.residual(rank) + interference)
                outage = float(np.mean(sir <= gamma))
                sigma = math.sqrt(eps * (1.0 - eps) / draws)
                records.append(AuditRecord(k, eps, rank, gamma, outage, sigma, draws))
    return records
