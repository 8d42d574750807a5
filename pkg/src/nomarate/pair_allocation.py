"""Two-user NOMA decisions: decoding order, power split, gates against OMA.

Inputs ``phi1``/``phi2`` are the single-user thresholds of the users decoded
first and second. The first user receives the power share ``beta`` in
``[1/2, 1]``. Total power is normalised to one wherever it cancels.
Most helpers accept scalars or numpy arrays and return the same shape.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import PowerProfile
from .rate_control import LinkSpec, gamma_from_phi, phi_approx, phi_exact, rate_from_gamma

EQUAL_RATE = "equal-rate"
MAX_SUM_RATE = "max-sum-rate"
OBJECTIVES = (EQUAL_RATE, MAX_SUM_RATE)


class InfeasibleAllocationError(ValueError):
    """Equal rates would need the first user to get less than half the power."""


def _out(x):
    x = np.asarray(x)
    return x.item() if x.ndim == 0 else x


def _arrays(*xs):
    return [np.asarray(x, dtype=float) for x in xs]


@dataclass(frozen=True)
class OrderedPair:
    phi1: float
    phi2: float
    labels: tuple[str, str] = ("A", "B")
    tie: bool = False


def order_pair(phi_a: float, phi_b: float, labels=("A", "B")) -> OrderedPair:
    """Decode the user with the smaller ``phi`` first; ties keep label order."""
    if not (phi_a > 0 and phi_b > 0):
        raise ValueError("thresholds must be positive")
    if phi_b < phi_a:
        return OrderedPair(phi_b, phi_a, (labels[1], labels[0]))
    return OrderedPair(phi_a, phi_b, tuple(labels), tie=phi_a == phi_b)


def pair_gammas(phi1, phi2, mu, beta):
    """Post-SIC thresholds ``(gamma1, gamma2)`` for power share ``beta``."""
    phi1, phi2, mu, beta = _arrays(phi1, phi2, mu, beta)
    g1 = phi1 * beta / (1.0 + phi1 * (1.0 - beta))
    g2 = phi2 * (1.0 - beta) / (1.0 + phi2 * mu * beta)
    return _out(g1), _out(g2)


def equal_rate_beta(phi1, phi2, mu):
    """Power share that equalises both users' thresholds.

    Smaller root of ``a b^2 - b_ b + c = 0`` written as ``2c/(b_ + sqrt(D))``,
    which stays finite and exact at ``mu = 1`` where ``a`` vanishes.
    """
    phi1, phi2, mu = _arrays(phi1, phi2, mu)
    b = phi1 + phi2 + 2.0 * phi1 * phi2
    c = phi2 * (1.0 + phi1)
    disc = (phi1 + phi2) ** 2 + 4.0 * phi1 * phi2 * (phi1 + mu * phi2 + mu * phi1 * phi2)
    beta = 2.0 * c / (b + np.sqrt(disc))
    if np.any(beta < 0.5 * (1.0 - 1e-12)):
        raise InfeasibleAllocationError("equal rates need beta < 1/2; swap the decoding order")
    return _out(np.minimum(np.maximum(beta, 0.5), 1.0))


def equal_rate_gamma(phi1, phi2, mu):
    """Common threshold reached by both users under equal-rate allocation."""
    phi1, phi2, mu = _arrays(phi1, phi2, mu)
    s = phi1 + phi2
    p = phi1 * phi2
    k = phi1 + mu * phi2 * (1.0 + phi1)
    return _out(2.0 * p / (s + np.sqrt(s * s + 4.0 * p * k)))


def feasibility_equal_rate(phi1, phi2, mu):
    """Whether ``2 phi1 / (2 + phi1 (1 - mu)) <= phi2`` (so that ``beta >= 1/2``)."""
    phi1, phi2, mu = _arrays(phi1, phi2, mu)
    return _out(2.0 * phi1 / (2.0 + phi1 * (1.0 - mu)) <= phi2)


def equal_rate_mu_threshold(phi1, phi2):
    """Largest SIC imperfection at which equal-rate NOMA still beats OMA."""
    phi1, phi2 = _arrays(phi1, phi2)
    root = np.sqrt(1.0 + phi1)
    return _out((phi2 - phi1) * (1.0 + root) / (phi1 * phi2 * root))


def noma_beats_oma_equal_rate(phi1, phi2, mu):
    phi1, phi2, mu = _arrays(phi1, phi2, mu)
    return _out(mu < equal_rate_mu_threshold(phi1, phi2))


def sum_rate_gamma_tilde(phi1, phi2, mu, beta):
    """``(1 + gamma1)(1 + gamma2)``, whose log2 is the NOMA sum rate."""
    g1, g2 = pair_gammas(phi1, phi2, mu, beta)
    return _out((1.0 + np.asarray(g1)) * (1.0 + np.asarray(g2)))


def gamma_tilde_rational(phi1, phi2, mu, beta):
    """The same product written as a single rational function of ``beta``."""
    phi1, phi2, mu, beta = _arrays(phi1, phi2, mu, beta)
    num = (1.0 + phi1) * (1.0 + phi2 - beta * phi2 * (1.0 - mu))
    den = (1.0 + (1.0 - beta) * phi1) * (1.0 + beta * mu * phi2)
    return _out(num / den)


def sum_rate_mu_threshold(phi1, phi2):
    """SIC imperfection below which ``beta = 1/2`` maximises ``gamma1 + gamma2``."""
    phi1, phi2 = _arrays(phi1, phi2)
    return _out((2.0 * (phi2 - phi1) + phi1 * (phi2 - 2.0)) / (phi1 * phi2 * (1.0 + phi1)))


def sum_rate_beta_star(phi1, phi2, mu):
    """Maximum sum-rate power share, either 1/2 or 1.

    With perfect SIC the sum-rate product is monotone in ``beta`` and the
    choice is exact (1/2 whenever ``phi2 >= phi1``). Otherwise the extreme
    maximising ``gamma1 + gamma2`` is used.
    """
    phi1, phi2, mu = _arrays(phi1, phi2, mu)
    approx = np.where(mu < sum_rate_mu_threshold(phi1, phi2), 0.5, 1.0)
    exact_mu0 = np.where(phi2 >= phi1, 0.5, 1.0)
    return _out(np.where(mu == 0.0, exact_mu0, approx))


def sum_rate_gamma_bar(phi1, phi2, mu, beta):
    """``gamma1 + gamma2`` at the two candidate extremes ``beta in {1/2, 1}``."""
    phi1, phi2, mu, beta = _arrays(phi1, phi2, mu, beta)
    if not np.all((beta == 0.5) | (beta == 1.0)):
        raise ValueError("gamma bar is only defined at beta = 1/2 or beta = 1")
    half = phi1 / (2.0 + phi1) + phi2 / (2.0 + mu * phi2)
    return _out(np.where(beta == 0.5, half, phi1))


def gamma_tilde_approx(gamma1, gamma2):
    """Arithmetic-mean upper bound ``(1 + (gamma1 + gamma2)/2)^2``."""
    gamma1, gamma2 = _arrays(gamma1, gamma2)
    if np.any(gamma1 < 0) or np.any(gamma2 < 0):
        raise ValueError("thresholds must be non-negative")
    return _out((1.0 + 0.5 * (gamma1 + gamma2)) ** 2)


def xi_relative_error(gamma1, gamma2):
    """Relative error (percent) of :func:`gamma_tilde_approx`."""
    gamma1, gamma2 = _arrays(gamma1, gamma2)
    if np.any(gamma1 < 0) or np.any(gamma2 < 0):
        raise ValueError("thresholds must be non-negative")
    q = (1.0 + gamma1) / (1.0 + gamma2)
    return _out(25.0 * (q + 1.0 / q) - 50.0)


def sum_rate_oma_mu_threshold(phi1, phi2):
    """SIC imperfection below which max-sum-rate NOMA beats OMA (approximately)."""
    phi1, phi2 = _arrays(phi1, phi2)
    den = phi1**2 * (2.0 * phi1 + 3.0) + 2.0 * phi2 * (phi1 + 2.0) ** 2
    first = math.sqrt(2.0) * (phi1 + 2.0) ** 2 * np.sqrt(2.0 + phi1 + phi2) / den
    second = (
        4.0 * phi1**3 + 6.0 * phi1**2 + phi1**2 * phi2 + 6.0 * phi1 * phi2 + 8.0 * phi2
    ) / (phi2 * den)
    return _out(first - second)


def noma_beats_oma_sum_rate(phi1, phi2, mu):
    """Always true at ``mu = 0``; for ``mu > 0`` it holds almost surely only."""
    phi1, phi2, mu = _arrays(phi1, phi2, mu)
    return _out((mu == 0.0) | (mu < sum_rate_oma_mu_threshold(phi1, phi2)))


def fairness_kappa(phi1, phi2, mu, scheme: str, require_optimal: bool = True):
    """Threshold ratio of the first user to the second.

    The NOMA value is taken at ``beta = 1/2``; with ``require_optimal`` it is
    refused where the max-sum-rate rule picks ``beta = 1`` instead.
    """
    phi1, phi2, mu = _arrays(phi1, phi2, mu)
    kappa_oma = phi1 / phi2
    if scheme == "oma":
        return _out(kappa_oma)
    if scheme != "noma":
        raise ValueError(f"unknown scheme {scheme!r}")
    if require_optimal and np.any(np.asarray(sum_rate_beta_star(phi1, phi2, mu)) != 0.5):
        raise ValueError("NOMA fairness is defined at the beta = 1/2 operating point only")
    return _out(kappa_oma * (2.0 + mu * phi2) / (2.0 + phi1))


def oma_rates(phi1, phi2, objective: str):
    """Per-user OMA rates on equal halves of the resource."""
    phi1, phi2 = _arrays(phi1, phi2)
    if objective == EQUAL_RATE:
        r = 0.5 * np.log2(1.0 + np.minimum(phi1, phi2))
        return _out(r), _out(r)
    if objective == MAX_SUM_RATE:
        return _out(0.5 * np.log2(1.0 + phi1)), _out(0.5 * np.log2(1.0 + phi2))
    raise ValueError(f"unknown objective {objective!r}")


@dataclass(frozen=True)
class AllocationResult:
    order: tuple[str, str]
    phi1: float
    phi2: float
    beta: float
    p1: float
    p2: float
    gamma1: float
    gamma2: float
    rate1: float
    rate2: float
    objective: str
    mu: float
    tie: bool = False
    scheme: str = "noma"
    oma_rate1: float = 0.0
    oma_rate2: float = 0.0
    gate_noma_better: bool = False
    direct_noma_better: bool = False

    @property
    def sum_rate(self) -> float:
        return self.rate1 + self.rate2

    @property
    def oma_sum_rate(self) -> float:
        return self.oma_rate1 + self.oma_rate2


def allocate_phi(
    phi_a: float,
    phi_b: float,
    mu: float = 0.1,
    p_total: float = 1.0,
    objective: str = EQUAL_RATE,
    labels=("A", "B"),
) -> AllocationResult:
    """Order, split power and assign rates for two users with known ``phi``."""
    pair = order_pair(phi_a, phi_b, labels)
    phi1, phi2 = pair.phi1, pair.phi2
    if objective == EQUAL_RATE:
        beta = equal_rate_beta(phi1, phi2, mu)
        gate = noma_beats_oma_equal_rate(phi1, phi2, mu)
    elif objective == MAX_SUM_RATE:
        beta = sum_rate_beta_star(phi1, phi2, mu)
        gate = noma_beats_oma_sum_rate(phi1, phi2, mu)
    else:
        raise ValueError(f"unknown objective {objective!r}")

    profile = PowerProfile.two_user(beta, p_total, mu)
    gamma1 = gamma_from_phi(phi1, 1, profile)
    gamma2 = gamma_from_phi(phi2, 2, profile)
    rate1, rate2 = rate_from_gamma(gamma1), rate_from_gamma(gamma2)
    oma1, oma2 = oma_rates(phi1, phi2, objective)
    if objective == EQUAL_RATE:
        direct = rate1 > oma1
    else:
        direct = rate1 + rate2 > oma1 + oma2
    return AllocationResult(
        order=pair.labels,
        phi1=phi1,
        phi2=phi2,
        beta=beta,
        p1=profile.powers[0],
        p2=profile.powers[1],
        gamma1=gamma1,
        gamma2=gamma2,
        rate1=rate1,
        rate2=rate2,
        objective=objective,
        mu=mu,
        tie=pair.tie,
        oma_rate1=oma1,
        oma_rate2=oma2,
        gate_noma_better=bool(gate),
        direct_noma_better=bool(direct),
    )


def allocate(
    link_a: LinkSpec,
    link_b: LinkSpec,
    mu: float = 0.1,
    p_total: float = 1.0,
    objective: str = EQUAL_RATE,
    phi_method: str = "approximate",
) -> AllocationResult:
    """CSI-free rate and power allocation for two UEs served by the same BS."""
    solver = {"approximate": phi_approx, "exact": phi_exact}[phi_method]
    return allocate_phi(solver(link_a).value, solver(link_b).value, mu, p_total, objective)


def maximize_gamma_tilde(phi1, phi2, mu, tol: float = 1e-6, grid: int = 51):
    """Numerically maximise ``(1 + gamma1)(1 + gamma2)`` over ``beta in [1/2, 1]``.

    A coarse grid (endpoints included) locates the best cell, golden-section
    search refines inside the neighbouring cells. The product has at most
    one interior maximum, so this cannot be trapped. Returns
    ``(beta, gamma_tilde)`` broadcast over the inputs.
    """
    phi1, phi2, mu = np.broadcast_arrays(*_arrays(phi1, phi2, mu))
    betas = np.linspace(0.5, 1.0, grid)
    vals = np.stack([gamma_tilde_rational(phi1, phi2, mu, b) for b in betas])
    best = np.argmax(vals, axis=0)
    step = betas[1] - betas[0]
    lo = np.clip(betas[best] - step, 0.5, 1.0)
    hi = np.clip(betas[best] + step, 0.5, 1.0)

    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = hi - inv_phi * (hi - lo)
    x2 = lo + inv_phi * (hi - lo)
    f1 = gamma_tilde_rational(phi1, phi2, mu, x1)
    f2 = gamma_tilde_rational(phi1, phi2, mu, x2)
    while np.max(hi - lo) > tol:
        left = f1 >= f2
        hi = np.where(left, x2, hi)
        lo = np.where(left, lo, x1)
        x2_new = np.where(left, x1, lo + inv_phi * (hi - lo))
        x1_new = np.where(left, hi - inv_phi * (hi - lo), x2)
        f1, f2 = (
            np.where(left, gamma_tilde_rational(phi1, phi2, mu, x1_new), f2),
            np.where(left, f1, gamma_tilde_rational(phi1, phi2, mu, x2_new)),
        )
        x1, x2 = x1_new, x2_new

    beta = 0.5 * (lo + hi)
    value = gamma_tilde_rational(phi1, phi2, mu, beta)
    grid_best = np.max(vals, axis=0)
    use_grid = grid_best > value
    beta = np.where(use_grid, betas[best], beta)
    value = np.where(use_grid, grid_best, value)
    return _out(beta), _out(value)
