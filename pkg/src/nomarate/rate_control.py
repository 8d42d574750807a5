"""CSI-free SIR threshold allocation for a single link.

The BS only knows the mean received powers (serving and interfering) and
the UE's target error probability. ``phi`` is the SIR threshold the UE
could sustain if it were alone on the resource; ``gamma_from_phi`` maps it
to the threshold after superposition with the other NOMA users.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .channel import PowerProfile

log = logging.getLogger(__name__)

#: accuracy of the linear-in-epsilon estimate is only claimed up to here
APPROX_EPSILON_LIMIT = 0.1


class RootFindingError(ArithmeticError):
    """The exact threshold equation could not be solved to tolerance."""

    def __init__(self, message, bracket):
        super().__init__(f"{message} (bracket={bracket})")
        self.bracket = bracket


@dataclass(frozen=True, eq=False)
class LinkSpec:
    """Topology summary of one downlink: serving and interferer distances."""

    r_serving: float
    interferers: np.ndarray
    epsilon: float
    alpha: float = 4.0
    gains: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        d = np.asarray(self.interferers, dtype=float).ravel()
        object.__setattr__(self, "interferers", d)
        if not self.r_serving > 0:
            raise ValueError(f"serving distance must be positive, got {self.r_serving}")
        if d.size == 0:
            raise ValueError("a link needs at least one interfering BS")
        if np.any(d <= 0) or np.any(np.diff(d) < 0):
            raise ValueError("interferer distances must be positive and ascending")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if not self.alpha > 2:
            raise ValueError(f"path-loss exponent must exceed 2, got {self.alpha}")
        # (r_i / r_j)^alpha, i.e. interferer mean power relative to the serving one
        gains = (self.r_serving / d) ** self.alpha
        object.__setattr__(self, "gains", gains)
        if not np.isfinite(gains.sum()) or gains.sum() <= 0:
            raise ValueError("mean signal-to-interference ratio is not finite")

    @property
    def n_interferers(self) -> int:
        return self.interferers.size

    @property
    def power_ratio(self) -> float:
        """Mean serving power over mean aggregate interference power."""
        return 1.0 / math.fsum(self.gains)

    def with_epsilon(self, epsilon: float) -> LinkSpec:
        return LinkSpec(self.r_serving, self.interferers, epsilon, self.alpha)


@dataclass(frozen=True)
class PhiValue:
    value: float
    method: str  # "exact" or "approximate"
    outside_accuracy_range: bool = False

    def __float__(self):
        return self.value


def _log_residual(gains: np.ndarray, phi: float, target: float) -> float:
    # log of the product minus log(1/(1-eps)); monotone increasing in phi
    return math.fsum(np.log1p(phi * gains)) - target


def phi_exact(link: LinkSpec, max_iter: int = 200) -> PhiValue:
    """Solve ``prod_j (1 + phi (r_i/r_j)^alpha) = 1/(1-eps)`` for ``phi > 0``.

    The left side is increasing in ``phi``, so the positive root is unique.
    The root is bracketed by doubling upward from the linear estimate and
    refined with Newton steps that fall back to bisection whenever they
    leave the bracket.
    """
    gains = link.gains
    target = -math.log1p(-link.epsilon)
    lo, hi = 0.0, link.epsilon * link.power_ratio
    for _ in range(max_iter):
        if _log_residual(gains, hi, target) >= 0:
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise RootFindingError("could not bracket the threshold root", (lo, hi))

    x = hi
    for _ in range(max_iter):
        g = _log_residual(gains, x, target)
        # |prod/(1/(1-eps)) - 1| = |expm1(g)|
        if abs(math.expm1(g)) <= 1e-13 or hi - lo <= 4 * np.finfo(float).eps * hi:
            return PhiValue(x, "exact", link.epsilon > APPROX_EPSILON_LIMIT)
        if g > 0:
            hi = x
        else:
            lo = x
        slope = float(np.sum(gains / (1.0 + x * gains)))
        step = x - g / slope
        x = step if lo < step < hi else 0.5 * (lo + hi)
    raise RootFindingError("threshold root did not converge", (lo, hi))


def phi_approx(link: LinkSpec) -> PhiValue:
    """Closed-form estimate ``phi ~ eps * r_i^-alpha / sum_j r_j^-alpha``."""
    flagged = link.epsilon > APPROX_EPSILON_LIMIT
    if flagged:
        log.warning(
            "epsilon=%g exceeds %g; linear threshold estimate loses accuracy",
            link.epsilon,
            APPROX_EPSILON_LIMIT,
        )
    return PhiValue(link.epsilon * link.power_ratio, "approximate", flagged)


def f_of_n(n, epsilon: float) -> float:
    """``n((1-eps)^(-1/n) - 1)``, decreasing in ``n``; ``n=inf`` gives ``-ln(1-eps)``."""
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    if math.isinf(n):
        return -math.log1p(-epsilon)
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    return n * math.expm1(-math.log1p(-epsilon) / n)


def phi_surrogate(link: LinkSpec) -> float:
    """Root of the arithmetic-mean relaxation of the product equation.

    The relaxed product dominates the true one at every ``phi`` (AM-GM),
    so it reaches ``1/(1-eps)`` first: the surrogate root lower-bounds
    :func:`phi_exact`, and in turn is bounded below by the linear estimate.
    """
    return f_of_n(link.n_interferers, link.epsilon) * link.power_ratio


def gamma_from_phi(phi, rank: int, profile: PowerProfile):
    """Post-SIC SIR threshold of user ``rank`` that keeps its outage at ``eps``.

    Never exceeds ``phi`` and grows with it.
    """
    phi = np.asarray(phi, dtype=float)
    if np.any(phi <= 0):
        raise ValueError("phi must be positive")
    gamma = phi * profile.power(rank) / (profile.total + phi * profile.residual(rank))
    return float(gamma) if gamma.ndim == 0 else gamma


def rate_from_gamma(gamma):
    """Shannon rate ``log2(1 + gamma)`` in bps/Hz."""
    gamma = np.asarray(gamma, dtype=float)
    if np.any(gamma < 0):
        raise ValueError("SIR threshold must be non-negative")
    rate = np.log2(1.0 + gamma)
    return float(rate) if rate.ndim == 0 else rate
