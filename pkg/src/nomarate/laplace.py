"""Numerical inverse Laplace transforms.

Two independent algorithms so that their disagreement exposes method
error: Gaver-Stehfest (real axis only) and the Euler-summation Fourier
method of Abate and Whitt (complex Bromwich line).
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

import numpy as np


class InversionError(ArithmeticError):
    pass


@lru_cache(maxsize=None)
def stehfest_weights(terms: int = 14) -> tuple[float, ...]:
    """Stehfest weights ``V_k``, computed exactly in rational arithmetic."""
    if terms < 2 or terms % 2:
        raise ValueError(f"Stehfest needs an even number of terms >= 2, got {terms}")
    half = terms // 2
    fact = math.factorial
    weights = []
    for k in range(1, terms + 1):
        acc = Fraction(0)
        for j in range((k + 1) // 2, min(k, half) + 1):
            acc += Fraction(
                j**half * fact(2 * j),
                fact(half - j) * fact(j) * fact(j - 1) * fact(k - j) * fact(2 * j - k),
            )
        weights.append(float((-1) ** (k + half) * acc))
    return tuple(weights)


def invert_stehfest(transform, t: float, terms: int = 14) -> float:
    """Gaver-Stehfest inversion of ``transform`` at ``t > 0``.

    The weighted sum is accumulated with ``math.fsum`` to keep the
    alternating large weights from eating precision.
    """
    if not t > 0:
        raise ValueError("inversion point must be positive")
    a = math.log(2.0) / t
    products = [v * transform(k * a) for k, v in enumerate(stehfest_weights(terms), start=1)]
    total = math.fsum(products)
    scale = math.fsum(abs(p) for p in products)
    if not math.isfinite(total):
        raise InversionError(f"non-finite transform values at t={t}")
    if scale > 1e13 * max(abs(total), 1e-300):
        raise InversionError(f"Stehfest cancellation exhausted precision at t={t}")
    return a * total


@lru_cache(maxsize=None)
def euler_nodes(m: int = 15):
    """Bromwich nodes and binomially smoothed weights of the Euler method."""
    if m < 1:
        raise ValueError("Euler method needs m >= 1")
    xi = np.zeros(2 * m + 1)
    xi[0] = 0.5
    xi[1 : m + 1] = 1.0
    xi[2 * m] = 2.0**-m
    for k in range(1, m):
        xi[2 * m - k] = xi[2 * m - k + 1] + 2.0**-m * math.comb(m, k)
    k = np.arange(2 * m + 1)
    eta = (-1.0) ** k * xi
    beta = m * math.log(10.0) / 3.0 + 1j * math.pi * k
    return beta, eta


def invert_euler(transform, t: float, m: int = 15) -> float:
    """Abate-Whitt Euler inversion of ``transform`` at ``t > 0``."""
    if not t > 0:
        raise ValueError("inversion point must be positive")
    beta, eta = euler_nodes(m)
    values = [transform(complex(b) / t).real for b in beta]
    total = math.fsum(e * v for e, v in zip(eta, values))
    if not math.isfinite(total):
        raise InversionError(f"non-finite transform values at t={t}")
    return 10.0 ** (m / 3.0) / t * total


INVERTERS = {"euler": invert_euler, "stehfest": invert_stehfest}
