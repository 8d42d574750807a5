"""Distribution of the allocated SIR threshold over Poisson deployments.

With the linear threshold estimate, ``phi = eps / Psi`` where
``Psi = sum_j (r_i / r_j)^alpha`` is the normalised mean interference seen
by a typical UE. ``Psi`` has Laplace transform ``1 / 1F1(-d; 1-d; -s)``
with ``d = 2 / alpha``, independent of the BS density, so the threshold
CDF follows by numerical inversion. For ``Psi <= 1`` the CDF of ``Psi`` is
the closed form ``sinc(d) x^d``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .channel import PowerProfile
from .geometry import DeploymentConfig, sample_ppp, substream
from .laplace import INVERTERS
from .rate_control import gamma_from_phi
from .special import kummer_1f1

METHODS = ("inversion", "closed-form", "monte-carlo")


@dataclass(frozen=True)
class ThresholdQuery:
    theta: float
    epsilon: float
    alpha: float = 4.0
    profile: PowerProfile = field(default_factory=PowerProfile.single)
    rank: int = 1

    def __post_init__(self):
        if not self.theta > 0:
            raise ValueError(f"theta must be positive, got {self.theta}")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if not self.alpha > 2:
            raise ValueError(f"path-loss exponent must exceed 2, got {self.alpha}")
        self.profile.power(self.rank)

    @property
    def delta(self) -> float:
        return 2.0 / self.alpha


def sinc(delta: float) -> float:
    """Normalised sinc ``sin(pi d) / (pi d)``."""
    return float(np.sinc(delta))


def z_of_theta(query: ThresholdQuery) -> float:
    """Argument at which the interference CDF is read for threshold ``theta``.

    Non-positive values mean ``theta`` exceeds what the power share can
    ever deliver against the residual intra-cell power.
    """
    p = query.profile
    return (p.power(query.rank) / query.theta - p.residual(query.rank)) * query.epsilon / p.total


def psi_transform(s, delta: float):
    """Laplace transform of the CDF of ``Psi``: ``1 / (s 1F1(-d; 1-d; -s))``."""
    return 1.0 / (s * kummer_1f1(delta, s))


def f_psi_cdf(x: float, delta: float, inverter: str = "euler", terms: int | None = None) -> float:
    """CDF of the normalised interference ``Psi`` by numerical Laplace inversion."""
    if not x > 0:
        raise ValueError("x must be positive")
    invert = INVERTERS[inverter]
    kw = {} if terms is None else ({"m": terms} if inverter == "euler" else {"terms": terms})
    value = invert(lambda s: psi_transform(s, delta), x, **kw)
    return min(max(value, 0.0), 1.0)


def f_psi_closed_form(x, delta: float):
    """``sinc(d) x^d``; exact for ``x <= 1`` and an upper bound beyond."""
    return sinc(delta) * np.asarray(x, dtype=float) ** delta


def threshold_cdf(query: ThresholdQuery, method: str = "inversion", inverter: str = "euler") -> float:
    """``P(gamma_i <= theta)`` over the Poisson deployment.

    ``method="closed-form"`` returns ``1 - sinc(d) z^d`` (floored at 0):
    exact for ``z <= 1`` and a lower bound otherwise.
    """
    z = z_of_theta(query)
    if z <= 0:
        return 1.0
    if method == "inversion":
        return 1.0 - f_psi_cdf(z, query.delta, inverter)
    if method == "closed-form":
        return max(0.0, 1.0 - sinc(query.delta) * z**query.delta)
    raise ValueError(f"unknown method {method!r}")


def closed_form_is_exact(query: ThresholdQuery) -> bool:
    return 0.0 < z_of_theta(query) <= 1.0


@dataclass(frozen=True, eq=False)
class CdfCurve:
    theta: np.ndarray
    F: np.ndarray
    method: str
    error: np.ndarray

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if np.any(np.diff(self.theta) <= 0):
            raise ValueError("theta grid must be strictly ascending")

    @property
    def theta_db(self) -> np.ndarray:
        return 10.0 * np.log10(self.theta)

    def write_csv(self, stream, comment: str | None = None) -> None:
        if comment:
            stream.write(f"# {comment}\n")
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(["theta", "F", "method", "error"])
        for t, f, e in zip(self.theta, self.F, self.error):
            w.writerow([repr(float(t)), repr(float(f)), self.method, repr(float(e))])


def _grid(thetas) -> np.ndarray:
    thetas = np.asarray(thetas, dtype=float)
    if thetas.ndim != 1 or thetas.size == 0 or np.any(thetas <= 0):
        raise ValueError("theta grid must be a non-empty 1-D array of positive values")
    return thetas


def cdf_curve(
    thetas,
    epsilon: float,
    alpha: float = 4.0,
    profile: PowerProfile | None = None,
    rank: int = 1,
    method: str = "inversion",
    inverter: str = "euler",
) -> CdfCurve:
    """Analytical threshold CDF on a grid.

    For inversion the per-point error estimate is the gap to a second,
    finer inversion (Euler with five more terms, or Euler itself when the
    primary inverter is Gaver-Stehfest). Closed-form points carry zero
    error where exact and NaN where only a bound.
    """
    thetas = _grid(thetas)
    profile = profile or PowerProfile.single()
    queries = [ThresholdQuery(t, epsilon, alpha, profile, rank) for t in thetas]
    if method == "closed-form":
        F = np.array([threshold_cdf(q, "closed-form") for q in queries])
        err = np.array([0.0 if closed_form_is_exact(q) else math.nan for q in queries])
    elif method == "inversion":
        F = np.array([threshold_cdf(q, "inversion", inverter) for q in queries])
        ref = []
        for q in queries:
            z = z_of_theta(q)
            if z <= 0:
                ref.append(1.0)
            elif inverter == "euler":
                ref.append(1.0 - f_psi_cdf(z, q.delta, "euler", terms=20))
            else:
                ref.append(1.0 - f_psi_cdf(z, q.delta, "euler"))
        err = np.abs(F - np.array(ref))
        F = np.maximum.accumulate(np.clip(F, 0.0, 1.0))
    else:
        raise ValueError(f"unknown analytical method {method!r}")
    return CdfCurve(thetas, F, method, err)


def montecarlo_thresholds(
    epsilon: float,
    alpha: float = 4.0,
    profile: PowerProfile | None = None,
    rank: int = 1,
    deployment: DeploymentConfig | None = None,
    runs: int = 10_000,
    seed: int = 0,
) -> np.ndarray:
    """Allocated thresholds of a typical UE over independent deployments."""
    if runs < 1:
        raise ValueError("runs must be at least 1")
    profile = profile or PowerProfile.single()
    deployment = deployment or DeploymentConfig()
    ratios = np.empty(runs)
    for k in range(runs):
        net = sample_ppp(deployment, substream(seed, k))
        ratios[k] = net.link(0, epsilon, alpha).power_ratio
    return gamma_from_phi(epsilon * ratios, rank, profile)


def threshold_cdf_montecarlo(
    thetas,
    epsilon: float,
    alpha: float = 4.0,
    profile: PowerProfile | None = None,
    rank: int = 1,
    deployment: DeploymentConfig | None = None,
    runs: int = 10_000,
    seed: int = 0,
) -> CdfCurve:
    """Empirical threshold CDF with 95% binomial half-widths."""
    thetas = _grid(thetas)
    gammas = np.sort(montecarlo_thresholds(epsilon, alpha, profile, rank, deployment, runs, seed))
    F = np.searchsorted(gammas, thetas, side="right") / runs
    half_width = 1.96 * np.sqrt(F * (1.0 - F) / runs)
    return CdfCurve(thetas, F, "monte-carlo", half_width)
