"""Bessel function of the first kind, order one.

Self-contained double-precision implementation: a power series for small
arguments, Miller's downward recurrence in the middle range, and the Hankel
asymptotic expansion for large arguments.  Absolute accuracy is a little
better than 1e-13 on |x| <= 50.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import InvalidInputError

_SERIES_CUTOFF = 9.0
_ASYMPTOTIC_CUTOFF = 60.0


def _j1_series(x: float) -> float:
    # J1(x) = (x/2) sum_k (-1)^k (x^2/4)^k / (k! (k+1)!)
    q = 0.25 * x * x
    term = 0.5 * x
    total = term
    k = 0
    while True:
        k += 1
        term *= -q / (k * (k + 1))
        total += term
        if abs(term) <= 1e-18 * abs(total) + 1e-300:
            return total


def _j1_miller(x: float) -> float:
    # downward three-term recurrence, normalized by J0 + 2*(J2 + J4 + ...) = 1
    m = int(x + 20 + 8.0 * math.sqrt(x))
    if m % 2:
        m += 1
    jp, jc = 0.0, 1e-30
    norm = 0.0
    j1 = 0.0
    for k in range(m, 0, -1):
        jm = (2.0 * k / x) * jc - jp
        jp, jc = jc, jm
        if k - 1 == 1:
            j1 = jc
        if (k - 1) % 2 == 0:
            norm += 2.0 * jc
        if abs(jc) > 1e280:
            jc *= 1e-280
            jp *= 1e-280
            norm *= 1e-280
            j1 *= 1e-280
    norm -= jc  # k-1 == 0 term enters the sum once, not twice
    return j1 / norm


def _j1_hankel(x: float) -> float:
    # J1(x) ~ sqrt(2/(pi x)) [P(x) cos(chi) - Q(x) sin(chi)], chi = x - 3 pi/4
    mu = 4.0
    p, q = 1.0, 0.0
    ak = 1.0
    eight_x = 8.0 * x
    prev = math.inf
    for k in range(1, 40):
        ak *= (mu - (2 * k - 1) ** 2) / (k * eight_x)
        if abs(ak) >= prev:
            break  # asymptotic series started diverging
        signed = -ak if (k // 2) % 2 else ak
        if k % 2:
            q += signed
        else:
            p += signed
        prev = abs(ak)
    chi = x - 0.75 * math.pi
    return math.sqrt(2.0 / (math.pi * x)) * (p * math.cos(chi) - q * math.sin(chi))


def _j1_scalar(x: float) -> float:
    if math.isnan(x):
        raise InvalidInputError("bessel_j1: NaN input")
    if x < 0:
        return -_j1_scalar(-x)
    if x == 0.0:
        return 0.0
    if x <= _SERIES_CUTOFF:
        return _j1_series(x)
    if x <= _ASYMPTOTIC_CUTOFF:
        return _j1_miller(x)
    return _j1_hankel(x)


def bessel_j1(x):
    """J1(x) for scalar or array input."""
    if np.isscalar(x):
        return _j1_scalar(float(x))
    arr = np.asarray(x, dtype=float)
    if np.isnan(arr).any():
        raise InvalidInputError("bessel_j1: NaN input")
    out = np.empty_like(arr)
    flat = arr.ravel()
    res = out.ravel()
    for i, v in enumerate(flat):
        res[i] = _j1_scalar(float(v))
    return out
