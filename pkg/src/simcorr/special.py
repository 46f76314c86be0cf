"""Digamma and trigamma functions, and the dimension bias term built on them.

Both functions use the classical recipe: shift the argument above a fixed
threshold with the recurrence relations, then evaluate the Bernoulli-number
asymptotic expansion. Accuracy is around 1e-13 relative over x > 0, which
is ample for the moment formulas that consume them; the test suite checks
the implementation against an independent library evaluation.
"""

from __future__ import annotations

import math

from .errors import DomainError

# Bernoulli numbers B_2, B_4, ..., B_16
_BERNOULLI = (
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
)

_SHIFT_THRESHOLD = 6.0


def digamma(x: float) -> float:
    """d/dx log Gamma(x) for x > 0."""
    if not (x > 0.0) or not math.isfinite(x):
        raise DomainError(f"digamma requires x > 0, got {x!r}")
    acc = 0.0
    while x < _SHIFT_THRESHOLD:
        acc -= 1.0 / x
        x += 1.0
    inv2 = 1.0 / (x * x)
    series = 0.0
    power = inv2
    for k, b in enumerate(_BERNOULLI, start=1):
        series += b / (2 * k) * power
        power *= inv2
    return acc + math.log(x) - 0.5 / x - series


def trigamma(x: float) -> float:
    """d^2/dx^2 log Gamma(x) for x > 0."""
    if not (x > 0.0) or not math.isfinite(x):
        raise DomainError(f"trigamma requires x > 0, got {x!r}")
    acc = 0.0
    while x < _SHIFT_THRESHOLD:
        acc += 1.0 / (x * x)
        x += 1.0
    inv = 1.0 / x
    inv2 = inv * inv
    series = 0.0
    power = inv * inv2
    for b in _BERNOULLI:
        series += b * power
        power *= inv2
    return acc + inv + 0.5 * inv2 + series


def omega_n(n: int) -> float:
    """Bias of the joint similarity measure in dimension n.

    omega_n = (psi((n-1)/2) - psi(1/2)) / n, which is zero at n = 2,
    non-negative everywhere, and decays like log(n)/n.
    """
    if n < 2 or int(n) != n:
        raise DomainError(f"dimension must be an integer >= 2, got {n!r}")
    n = int(n)
    return (digamma((n - 1) / 2.0) - digamma(0.5)) / n
