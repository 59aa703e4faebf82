"""Two-sided Chernoff estimators between observed and expected counts.

Each bound solves a transcendental equation for the deviation parameter
delta at a stated failure probability xi.  All equations are solved in the
log domain (the raw form underflows for xi ~ 1e-10), via bracketed Brent
root finding:

    expectation_lower: X * g+(d) / (1 + d) = ln(xi),  bound X / (1 + d)
    expectation_upper: X * g-(d) / (1 - d) = ln(xi),  bound X / (1 - d)
    observed_upper:    Y * g+(d)           = ln(xi),  bound (1 + d) * Y
    observed_lower:    Y * g-(d)           = ln(xi),  bound (1 - d) * Y

with g+(d) = d - (1+d)ln(1+d) and g-(d) = -d - (1-d)ln(1-d).

Because the resolved security budget can be far below the smallest positive
double, every function also accepts the failure probability as ``log_xi``
(natural log).
"""
from __future__ import annotations

import math

from scipy.optimize import brentq

_BRENTQ_RTOL = 8.9e-16  # ~4 ulp, the smallest rtol brentq accepts
_MAX_DELTA = 1e300


class ChernoffDomainError(ValueError):
    """Raised for arguments outside a bound's domain."""


def _resolve_log_xi(xi: float | None, log_xi: float | None) -> float:
    if (xi is None) == (log_xi is None):
        raise ChernoffDomainError("provide exactly one of xi and log_xi")
    if xi is not None:
        if not (0.0 < xi < 1.0):
            raise ChernoffDomainError(f"xi must lie in (0, 1), got {xi!r}")
        return math.log(xi)
    if not (log_xi < 0.0):
        raise ChernoffDomainError(f"log_xi must be negative, got {log_xi!r}")
    return log_xi


def _g_plus(delta: float) -> float:
    return delta - (1.0 + delta) * math.log1p(delta)


def _g_minus(delta: float) -> float:
    if delta >= 1.0:
        return -1.0  # continuous limit: (1-d)ln(1-d) -> 0
    return -delta - (1.0 - delta) * math.log1p(-delta)


def _solve_decreasing(f, hi0: float = 1.0) -> float:
    """Root of a function that is positive at 0 and strictly decreasing."""
    hi = hi0
    while f(hi) > 0.0:
        hi *= 2.0
        if hi > _MAX_DELTA:
            raise ChernoffDomainError("no root found while expanding bracket")
    return brentq(f, 0.0, hi, xtol=1e-15, rtol=_BRENTQ_RTOL)


def expectation_lower(X: float, xi: float | None = None, *,
                      log_xi: float | None = None) -> float:
    """Lower bound on the expected value given an observed count X."""
    lx = _resolve_log_xi(xi, log_xi)
    if X < 0.0:
        raise ChernoffDomainError(f"X must be nonnegative, got {X!r}")
    if X == 0.0:
        return 0.0
    delta = _solve_decreasing(lambda d: X * _g_plus(d) / (1.0 + d) - lx)
    return X / (1.0 + delta)


def expectation_upper(X: float, xi: float | None = None, *,
                      log_xi: float | None = None) -> float:
    """Upper bound on the expected value given an observed count X.

    X = 0 is handled by the limiting form ln(1/xi).
    """
    lx = _resolve_log_xi(xi, log_xi)
    if X < 0.0:
        raise ChernoffDomainError(f"X must be nonnegative, got {X!r}")
    if X == 0.0:
        return -lx
    delta = brentq(lambda d: X * _g_minus(d) / (1.0 - d) - lx,
                   0.0, 1.0 - 1e-16, xtol=1e-15, rtol=_BRENTQ_RTOL)
    return X / (1.0 - delta)


def observed_upper(Y: float, xi: float | None = None, *,
                   log_xi: float | None = None) -> float:
    """Upper bound on the observed count given its expected value Y.

    Y must be strictly positive: the bound is applied only to positive
    means, and no finite deviation parameter exists at Y = 0.
    """
    lx = _resolve_log_xi(xi, log_xi)
    if Y <= 0.0:
        raise ChernoffDomainError(f"observed_upper needs a positive mean, got {Y!r}")
    delta = _solve_decreasing(lambda d: Y * _g_plus(d) - lx)
    return (1.0 + delta) * Y


def observed_lower(Y: float, xi: float | None = None, *,
                   log_xi: float | None = None) -> float:
    """Lower bound on the observed count given its expected value Y.

    Returns 0 when no deviation parameter below 1 solves the equation
    (small means admit a zero observation with probability above xi).
    """
    lx = _resolve_log_xi(xi, log_xi)
    if Y < 0.0:
        raise ChernoffDomainError(f"Y must be nonnegative, got {Y!r}")
    if Y == 0.0:
        return 0.0
    f = lambda d: Y * _g_minus(d) - lx
    if f(1.0) >= 0.0:
        return 0.0
    delta = brentq(f, 0.0, 1.0, xtol=1e-15, rtol=_BRENTQ_RTOL)
    return (1.0 - delta) * Y
