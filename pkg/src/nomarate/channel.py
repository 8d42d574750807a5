"""Rayleigh fading, inter-cell interference and post-SIC SIR.

Powers are dimensionless (``P_T = 1`` by default). The network is
interference limited, so there is no noise term anywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PowerProfile:
    """Superposition power split of one NOMA group.

    ``powers[0]`` belongs to the user decoded first. Users are ranked
    1..M in decoding order throughout the package.
    """

    total: float
    powers: tuple[float, ...]
    mu: float = 0.0

    def __post_init__(self):
        if not self.total > 0:
            raise ValueError(f"total power must be positive, got {self.total}")
        if not self.powers:
            raise ValueError("at least one user power is required")
        if not self.powers[0] > 0 or any(p < 0 for p in self.powers):
            raise ValueError(f"user powers must be non-negative, got {self.powers}")
        if not 0.0 <= self.mu <= 1.0:
            raise ValueError(f"mu must lie in [0, 1], got {self.mu}")
        if not math.isclose(math.fsum(self.powers), self.total, rel_tol=1e-12):
            raise ValueError("user powers must add up to the total power")
        if any(a < b for a, b in zip(self.powers, self.powers[1:])):
            raise ValueError("powers must be non-increasing in decoding order")

    @classmethod
    def single(cls, total: float = 1.0) -> PowerProfile:
        return cls(total, (total,), 0.0)

    @classmethod
    def two_user(cls, beta: float, total: float = 1.0, mu: float = 0.0) -> PowerProfile:
        if not 0.5 <= beta <= 1.0:
            raise ValueError(f"beta must lie in [1/2, 1], got {beta}")
        return cls(total, (beta * total, (1.0 - beta) * total), mu)

    @property
    def size(self) -> int:
        return len(self.powers)

    def power(self, rank: int) -> float:
        self._check_rank(rank)
        return self.powers[rank - 1]

    def residual(self, rank: int) -> float:
        """Intra-cell power left over at user ``rank`` after SIC.

        Earlier users contribute a fraction ``mu``, later users in full.
        """
        self._check_rank(rank)
        earlier = math.fsum(self.powers[: rank - 1])
        later = math.fsum(self.powers[rank:])
        return self.mu * earlier + later

    def _check_rank(self, rank: int) -> None:
        if not 1 <= rank <= self.size:
            raise IndexError(f"rank must be in 1..{self.size}, got {rank}")


@dataclass(frozen=True)
class FadingDraw:
    """Unit-mean exponential power gains for a set of UEs."""

    h: np.ndarray
    g: tuple[np.ndarray, ...]


def sample_fading(rng: np.random.Generator, interferer_counts) -> FadingDraw:
    """Draw serving gains ``h`` and per-interferer gains ``g`` for each UE."""
    counts = [int(n) for n in interferer_counts]
    h = rng.standard_exponential(len(counts))
    g = tuple(rng.standard_exponential(n) for n in counts)
    return FadingDraw(h, g)


def interference(distances, fading, p_total: float = 1.0, alpha: float = 4.0) -> float:
    """Aggregate inter-cell interference ``sum_j g_j r_j^-alpha P_T``."""
    distances = np.asarray(distances, dtype=float)
    fading = np.asarray(fading, dtype=float)
    if distances.size == 0:
        raise ValueError("interference needs at least one interfering BS")
    if distances.shape != fading.shape:
        raise ValueError("one fading gain per interferer is required")
    if alpha <= 2:
        raise ValueError(f"path-loss exponent must exceed 2, got {alpha}")
    return float(p_total * np.sum(fading * distances ** (-alpha)))


def sir_after_sic(
    rank: int,
    h: float,
    r: float,
    profile: PowerProfile,
    interference_power: float,
    alpha: float = 4.0,
) -> float:
    """SIR of user ``rank`` once earlier signals are (imperfectly) cancelled."""
    if not interference_power > 0:
        raise ValueError("interference power must be positive")
    signal = h * r ** (-alpha)
    return signal * profile.power(rank) / (
        signal * profile.residual(rank) + interference_power
    )


def instantaneous_ratio(h, r, p_total, interference_power, alpha: float = 4.0):
    """Single-user SIR ``h r^-alpha P_T / I`` used by the full-CSI benchmark."""
    interference_power = np.asarray(interference_power, dtype=float)
    if np.any(interference_power <= 0):
        raise ValueError("interference power must be positive")
    rho = h * np.asarray(r, dtype=float) ** (-alpha) * p_total / interference_power
    return float(rho) if np.ndim(rho) == 0 else rho
