"""Digamma, trigamma and shifted harmonic sums.

Both polygamma functions shift the argument upward with the one-step
recurrence until it reaches ``SHIFT`` and then switch to the asymptotic
expansion in inverse powers of x.
"""

import math

import numpy as np

SHIFT = 8.0
DIRECT_SUM_LIMIT = 10**7

# Bernoulli-number coefficients B_2k / (2k): digamma tail terms of x^-2, ..., x^-14.
_DIGAMMA_TAIL = (1 / 12, -1 / 120, 1 / 252, -1 / 240, 1 / 132, -691 / 32760, 1 / 12)
# B_2k: trigamma tail terms of x^-3, ..., x^-15.
_TRIGAMMA_TAIL = (1 / 6, -1 / 30, 1 / 42, -1 / 30, 5 / 66, -691 / 2730, 7 / 6)


def _check(x):
    x = float(x)
    if not x > 0 or math.isinf(x):
        raise ValueError(f"argument must be a positive finite real, got {x}")
    return x


def digamma(x: float) -> float:
    """Logarithmic derivative of the Gamma function for ``x > 0``."""
    x = _check(x)
    shifts = []
    while x < SHIFT:
        shifts.append(x)
        x += 1.0
    inv2 = 1.0 / (x * x)
    poly = 0.0
    for c in reversed(_DIGAMMA_TAIL):
        poly = poly * inv2 + c
    value = math.log(x) - 0.5 / x - poly * inv2
    # smallest corrections first
    for s in reversed(shifts):
        value -= 1.0 / s
    return value


def trigamma(x: float) -> float:
    """Second logarithmic derivative of the Gamma function for ``x > 0``."""
    x = _check(x)
    shifts = []
    while x < SHIFT:
        shifts.append(x)
        x += 1.0
    inv = 1.0 / x
    inv2 = inv * inv
    poly = 0.0
    for c in reversed(_TRIGAMMA_TAIL):
        poly = poly * inv2 + c
    value = inv + 0.5 * inv2 + poly * inv2 * inv
    for s in reversed(shifts):
        value += 1.0 / (s * s)
    return value


def shifted_harmonic(theta: float, m: int, power: int = 1) -> float:
    """Sum of ``(theta + i) ** -power`` over ``i = 1..m``.

    Summed directly up to ``DIRECT_SUM_LIMIT`` terms; longer sums use the
    polygamma difference.
    """
    if power not in (1, 2):
        raise ValueError("power must be 1 or 2")
    if m < 0:
        raise ValueError(f"m must be nonnegative, got {m}")
    if m == 0:
        return 0.0
    if m > DIRECT_SUM_LIMIT:
        if power == 1:
            return digamma(theta + m + 1) - digamma(theta + 1)
        return trigamma(theta + 1) - trigamma(theta + m + 1)
    terms = theta + np.arange(1, m + 1, dtype=np.float64)
    if power == 1:
        return float(np.sum(1.0 / terms))
    return float(np.sum(1.0 / (terms * terms)))
