"""Confluent hypergeometric function of the interference Laplace transform.

Only the family ``1F1(-d; 1-d; -s)`` with ``0 < d < 1`` is needed. It is
the reciprocal Laplace transform of the normalised interference of a
Poisson network.
"""

from __future__ import annotations

import cmath
import math

#: below this |s| power series are used, above it a continued fraction
SERIES_RADIUS = 8.0
MAX_TERMS = 2000
_TINY = 1e-300
_EPS = 1e-17


class SeriesDivergenceError(ArithmeticError):
    pass


def _check_delta(delta: float) -> None:
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")


def _maclaurin(delta: float, s: complex) -> complex:
    # 1F1(-d; 1-d; z) = 1 - d * sum_{k>=1} z^k / (k! (k - d)),  z = -s
    z = -s
    term = 1.0 + 0j
    total = 0j
    for k in range(1, MAX_TERMS):
        term *= z / k
        inc = term / (k - delta)
        total += inc
        if k > abs(z) and abs(inc) <= _EPS * abs(total):
            return 1.0 - delta * total
    raise SeriesDivergenceError(f"Maclaurin series did not converge at s={s}")


def _kummer_series(delta: float, s: complex) -> complex:
    # Kummer transformation: 1F1(a; b; z) = e^z 1F1(b - a; b; -z) with b - a = 1
    b = 1.0 - delta
    term = 1.0 + 0j
    total = 1.0 + 0j
    for k in range(MAX_TERMS):
        term *= s / (b + k)
        total += term
        if k > abs(s) and abs(term) <= _EPS * abs(total):
            return cmath.exp(-s) * total
    raise SeriesDivergenceError(f"Kummer-transformed series did not converge at s={s}")


def _upper_gamma_cf(a: float, s: complex) -> complex:
    """``e^s s^-a Gamma(a, s)`` by modified Lentz on Legendre's fraction."""
    b = s + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, MAX_TERMS):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) <= _EPS:
            return h
    raise SeriesDivergenceError(f"continued fraction did not converge at s={s}")


def kummer_1f1(delta: float, s):
    """Evaluate ``1F1(-delta; 1-delta; -s)`` for real or complex ``s``.

    Small ``|s|`` uses the Kummer-transformed series (positive terms on the
    positive real axis) or the plain Maclaurin series when ``Re s < 0``.
    Large ``|s|`` with ``Re s >= 0`` goes through the identity
    ``1F1 = Gamma(1-d) s^d + e^-s (1 - s^d e^s Gamma(1-d, s))`` whose
    incomplete-gamma factor is a continued fraction that converges fast
    there.
    """
    _check_delta(delta)
    is_real = not isinstance(s, complex)
    z = complex(s)
    if z == 0:
        return 1.0
    if abs(z) < SERIES_RADIUS:
        value = _kummer_series(delta, z) if z.real >= 0 else _maclaurin(delta, z)
    elif z.real >= 0:
        a = 1.0 - delta
        value = math.gamma(a) * z**delta + cmath.exp(-z) * (1.0 - z * _upper_gamma_cf(a, z))
    else:
        value = _maclaurin(delta, z)
    return value.real if is_real else value

