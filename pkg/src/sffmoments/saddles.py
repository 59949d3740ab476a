"""Saddle-point layer of the second form-factor moment.

The generating function of the second moment is a sum over six signed
permutations of the replica phases (the traceless sign configurations).
This module evaluates one permutation's term (``z_saddle``), its fourfold
source derivative in closed form (``f_closed``) and by Richardson-refined
central differences (``f_numeric``), and the closed time-domain results the
saddle sum Fourier-transforms into (``sff2_timedomain``).

The closed single-transposition form was re-derived symbolically: the
leading term is D^2 / (4 Delta_rs^2) for the transposition exchanging
replicas r and s.  The remaining terms agree with the literature
expression.  All six forms are gated by the numerical derivative oracle.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameterError, SingularityError, StepSizeError

POLE_GUARD = 1e-6
STEP_SCALE = 1e-2


@dataclass(frozen=True)
class SaddleConfig:
    """One signed permutation of the four replica phases."""

    name: str
    sigma: tuple          # images of (1, 2, 3, 4), one-based
    kind: str             # identity | single-transposition | double-transposition


SADDLES = (
    SaddleConfig("I", (1, 2, 3, 4), "identity"),
    SaddleConfig("T13", (3, 2, 1, 4), "single-transposition"),
    SaddleConfig("T14", (4, 2, 3, 1), "single-transposition"),
    SaddleConfig("T23", (1, 3, 2, 4), "single-transposition"),
    SaddleConfig("T24", (1, 4, 3, 2), "single-transposition"),
    SaddleConfig("T14T23", (4, 3, 2, 1), "double-transposition"),
)

# (r, s, b, q): transposed retarded/advanced pair, bystander retarded, bystander advanced
_SINGLE_INDEX = {
    "T13": (1, 3, 2, 4),
    "T14": (1, 4, 2, 3),
    "T23": (2, 3, 1, 4),
    "T24": (2, 4, 1, 3),
}


def saddle_by_name(name: str) -> SaddleConfig:
    for cfg in SADDLES:
        if cfg.name == name:
            return cfg
    raise InvalidParameterError(f"unknown saddle {name!r}")


@dataclass(frozen=True)
class PhasePoint:
    """Replica phases, sources and regulators for one saddle evaluation.

    The regulators delta order the equal-causality poles during the Fourier
    transform; they are bookkeeping for the contour prescription and do not
    enter the source-derivative checks, which work at real phases.
    """

    phi: tuple
    alpha: tuple = (0.0, 0.0, 0.0, 0.0)
    dim: int = 2
    deltas: tuple = (1e-8, 2e-8, 1e-8, 2e-8)
    pole_guard: float = POLE_GUARD

    def __post_init__(self):
        if len(self.phi) != 4 or len(self.alpha) != 4 or len(self.deltas) != 4:
            raise InvalidParameterError("phi, alpha and deltas must have length 4")
        d1, d2, d3, d4 = self.deltas
        if not (0 < d1 < d2 and 0 < d3 < d4):
            raise InvalidParameterError("regulators must satisfy 0 < d1 < d2 and 0 < d3 < d4")


def _min_gap(phi) -> float:
    phi = np.asarray(phi, dtype=float)
    gaps = [abs(phi[i] - phi[j]) for i, j in itertools.combinations(range(4), 2)]
    return min(gaps)


def z_saddle(cfg: SaddleConfig, point: PhasePoint) -> complex:
    """One permutation's term of the second-moment generating function.

    prod_{i=1,2} prod_{k=3,4}
        (phi_i - phi_s(k) - alpha_s(k)) (phi_k - phi_s(i) - alpha_s(i))
        / [(phi_i - phi_k)(phi_s(i) - phi_s(k) + alpha_s(i) - alpha_s(k))]
    * exp((i D / 2)(sum_{i=1,2} - sum_{i=3,4})(phi_i - phi_s(i) - alpha_s(i)))
    """
    phi = np.asarray(point.phi, dtype=float)
    alpha = np.asarray(point.alpha, dtype=float)
    s = cfg.sigma
    guard = point.pole_guard

    def p(i):
        return phi[i - 1]

    def a(i):
        return alpha[i - 1]

    prod = 1.0 + 0.0j
    for i in (1, 2):
        for k in (3, 4):
            d1 = p(i) - p(k)
            d2 = p(s[i - 1]) - p(s[k - 1]) + a(s[i - 1]) - a(s[k - 1])
            if abs(d1) < guard or abs(d2) < guard:
                raise SingularityError(f"phase denominator within {guard} of a pole")
            prod *= (p(i) - p(s[k - 1]) - a(s[k - 1])) * (p(k) - p(s[i - 1]) - a(s[i - 1])) / (d1 * d2)
    expo = 0.0
    for i in (1, 2):
        expo += p(i) - p(s[i - 1]) - a(s[i - 1])
    for i in (3, 4):
        expo -= p(i) - p(s[i - 1]) - a(s[i - 1])
    return prod * np.exp(0.5j * point.dim * expo)


def f_closed(cfg: SaddleConfig, phi, dim: int) -> complex:
    """Fourfold alpha-derivative of one saddle term, in closed form."""
    phi = np.asarray(phi, dtype=float)
    if _min_gap(phi) < POLE_GUARD:
        raise SingularityError("phase separations below the pole guard")

    def d(i, k):
        return phi[i - 1] - phi[k - 1]

    if cfg.kind == "identity":
        half = dim / 2.0
        return complex(
            half**4
            - half**2 * (d(1, 3) ** -2 + d(2, 3) ** -2 + d(1, 4) ** -2 + d(2, 4) ** -2)
            + 1.0 / (d(2, 3) ** 2 * d(1, 4) ** 2)
            + 1.0 / (d(1, 3) ** 2 * d(2, 4) ** 2)
        )
    if cfg.kind == "double-transposition":
        pref = d(1, 2) ** 2 * d(3, 4) ** 2 / (
            d(1, 3) ** 2 * d(3, 2) ** 2 * d(2, 4) ** 2 * d(4, 1) ** 2
        )
        return pref * np.exp(1j * dim * (d(1, 3) + d(2, 4)))
    r, s, b, q = _SINGLE_INDEX[cfg.name]
    drs = d(r, s)
    return (
        dim**2 / (4.0 * drs**2)
        + 0.5j * dim / drs**2 * (1.0 / d(r, b) + 1.0 / d(b, s) + 1.0 / d(q, s) + 1.0 / d(r, q))
        - 1.0 / (drs**2 * d(b, q) ** 2)
        - 1.0 / (d(r, b) * d(b, s) * d(s, q) * d(q, r))
    ) * np.exp(1j * dim * drs)


_SIGNS = [s for s in itertools.product((1, -1), repeat=4)]

# digits for the extended-precision difference quotient; the 16-point stencil
# cancels ~ |Z| h^-4 of significance, far beyond double near F's zero crossings
_NUMERIC_DPS = 30


def z_saddle_highprec(cfg: SaddleConfig, phi, alpha, dim: int, dps: int = _NUMERIC_DPS):
    """Eq.-level re-evaluation of one saddle term in dps-digit arithmetic."""
    import mpmath as mp

    with mp.workdps(dps):
        p = [mp.mpf(float(x)) for x in phi]
        a = [mp.mpf(float(x)) for x in alpha]
        s = cfg.sigma
        prod = mp.mpf(1)
        for i in (1, 2):
            for k in (3, 4):
                si, sk = s[i - 1], s[k - 1]
                num = (p[i - 1] - p[sk - 1] - a[sk - 1]) * (p[k - 1] - p[si - 1] - a[si - 1])
                den = (p[i - 1] - p[k - 1]) * (p[si - 1] - p[sk - 1] + a[si - 1] - a[sk - 1])
                prod *= num / den
        expo = sum(p[i - 1] - p[s[i - 1] - 1] - a[s[i - 1] - 1] for i in (1, 2)) \
            - sum(p[i - 1] - p[s[i - 1] - 1] - a[s[i - 1] - 1] for i in (3, 4))
        return prod * mp.e ** (mp.mpc(0, mp.mpf(dim) / 2) * expo)


def _central_difference(cfg, phi, dim, h):
    import mpmath as mp

    with mp.workdps(_NUMERIC_DPS):
        hh = mp.mpf(h)
        total = mp.mpc(0)
        for signs in _SIGNS:
            alpha = [hh * sgn for sgn in signs]
            parity = signs[0] * signs[1] * signs[2] * signs[3]
            total += parity * z_saddle_highprec(cfg, phi, alpha, dim)
        return total / (2 * hh) ** 4


def f_numeric(cfg: SaddleConfig, phi, dim: int, step: float = None) -> complex:
    """Fourfold source derivative by 16-point central differences.

    Uses steps h and h/2 and one Richardson refinement of the O(h^2)
    error.  The default h is STEP_SCALE times the smallest phase gap.  The
    stencil is evaluated in extended precision: the 16-point sum cancels
    about h^-4 significance, which double precision cannot absorb near the
    zero crossings of the derivative.  Raises StepSizeError when the
    step pair has visibly not converged.
    """
    phi = np.asarray(phi, dtype=float)
    h = step if step is not None else STEP_SCALE * _min_gap(phi)
    if h <= 0:
        raise InvalidParameterError("step must be positive")
    coarse = _central_difference(cfg, phi, dim, h)
    fine = _central_difference(cfg, phi, dim, h / 2.0)
    refined = complex((4 * fine - coarse) / 3)
    if abs(complex(fine - coarse)) > 0.5 * max(abs(refined), 1e-300):
        raise StepSizeError("central-difference pair did not converge; adjust step")
    return refined


def sff2_timedomain(tau: float, dim: int):
    """Disconnected and connected parts of the second moment in time domain.

    disconnected = 2 D^2 (tau^2 below tau = 1, then 1)
    connected    = -D  (0 below 1/2, 2 tau - 1 up to 1, then 1)

    Exact for the CUE at integer t = tau * D; the sum reproduces the
    piecewise second-moment law with kinks at tau = 1/2 and 1.
    """
    if tau < 0:
        raise InvalidParameterError("tau must be non-negative")
    disconnected = 2.0 * dim**2 * (tau * tau if tau < 1.0 else 1.0)
    if tau < 0.5:
        conn = 0.0
    elif tau < 1.0:
        conn = 2.0 * tau - 1.0
    else:
        conn = 1.0
    return disconnected, -dim * conn
