"""Closed-form predictions for the spectral form factor and its moments.

Conventions: tau = t / t_H with t_H = D (CUE) and t_H = pi*D/2 (GUE, unless
the 2D convention is requested).  z(t) is the mean connected form factor
divided by D; Conn2(t) = z(2t) - 2 z(t) is the leading non-Gaussian
correction to the second moment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ensembles import CUE, GUE, heisenberg_time
from .errors import (
    ConvergenceError,
    InvalidParameterError,
    OutsideSupportError,
    SingularityError,
)
from .special import bessel_j1

_MAX_MOMENT_ORDER = 20


def z_cue(tau):
    """Ramp-plateau mean connected form factor of the CUE: tau below 1, then 1."""
    tau = np.asarray(tau, dtype=float)
    if np.any(tau < 0):
        raise InvalidParameterError("tau must be non-negative")
    out = np.minimum(tau, 1.0)
    return float(out) if out.ndim == 0 else out


def z_gue(t, dim: int, convention: str = "default"):
    """Finite-D mean connected form factor of the GUE.

    For t below (4/pi) t_H:
        z = (t/2 t_H) sqrt(1 - (pi t / 4 t_H)^2) + (2/pi) arcsin(pi t / 4 t_H),
    and 1 afterwards; the two branches join continuously.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise InvalidParameterError("t must be non-negative")
    th = heisenberg_time(GUE, dim, convention)
    u = np.minimum(math.pi * t / (4.0 * th), 1.0)
    out = (2.0 / math.pi) * (u * np.sqrt(1.0 - u * u) + np.arcsin(u))
    return float(out) if out.ndim == 0 else out


def z_of(kind: str, t, dim: int, convention: str = "default"):
    if kind == CUE:
        return z_cue(np.asarray(t, dtype=float) / dim)
    return z_gue(t, dim, convention)


def ubar(kind: str, t, dim: int):
    """Ensemble-averaged trace of U_t.

    CUE: D at t = 0 and 0 at any other integer time.  GUE: D J1(2t)/t with
    the limit value D at t = 0.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise InvalidParameterError("t must be non-negative")
    if kind == CUE:
        out = np.where(t == 0, float(dim), 0.0)
    else:
        with np.errstate(invalid="ignore", divide="ignore"):
            out = np.where(t == 0, float(dim), dim * bessel_j1(2.0 * t) / np.where(t == 0, 1.0, t))
    return float(out) if out.ndim == 0 else out


def gaussian_moment(n: int, dim: int, z):
    """n-th moment of an approximately Gaussian form factor: n! (D z)^n."""
    if n < 1:
        raise InvalidParameterError("moment order must be >= 1")
    if n > _MAX_MOMENT_ORDER:
        raise InvalidParameterError(f"moment order {n} exceeds overflow guard {_MAX_MOMENT_ORDER}")
    z = np.asarray(z, dtype=float)
    out = math.factorial(n) * (dim * z) ** n
    return float(out) if out.ndim == 0 else out


def conn2(kind: str, t, dim: int, convention: str = "default"):
    """Subleading non-Gaussian correction to the second moment: z(2t) - 2 z(t).

    For the CUE this is the piecewise 0 / 1 - 2 tau / -1 profile with kinks
    at tau = 1/2 and tau = 1.
    """
    t = np.asarray(t, dtype=float)
    out = z_of(kind, 2.0 * t, dim, convention) - 2.0 * z_of(kind, t, dim, convention)
    return float(out) if np.ndim(out) == 0 else out


def sff2_exact(kind: str, t, dim: int, include_ubar: bool = True, convention: str = "default"):
    """Second moment of the form factor.

    With include_ubar the full expression

        |ubar_t|^4 + [|ubar_2t|^2 - 4 |ubar_t|^2]
        + 2 [Re(ubar_2t ubar_-t^2) + 2 |ubar_t|^2 D z(t)]
        + 2 D^2 z(t)^2 + D [z(2t) - 2 z(t)]

    is evaluated; without it, only the universal part
    2 D^2 z^2 + D Conn2.  For the CUE at integer times the ubar cross terms
    vanish identically and both variants agree (the connected convention is
    kept at t = 0 as well, where the closed forms take their tau -> 0
    limits).
    """
    t = np.asarray(t, dtype=float)
    z1 = z_of(kind, t, dim, convention)
    base = 2.0 * dim**2 * z1**2 + dim * conn2(kind, t, dim, convention)
    if include_ubar and kind == GUE:
        u1 = ubar(kind, t, dim)
        u2 = ubar(kind, 2.0 * t, dim)
        # ubar is real and even in t for the symmetric spectral densities here
        base = base + u1**4 + (u2**2 - 4.0 * u1**2) + 2.0 * (u2 * u1**2 + 2.0 * u1**2 * dim * z1)
    return float(base) if np.ndim(base) == 0 else base


def sampling_envelope(n: int, dim: int, z, n_sim: int):
    """Expected magnitude of finite-sampling fluctuations of the n-th moment.

    sqrt(Var(SFF^n)) / sqrt(N_sim) with Var(SFF^n) = ((2n)! - (n!)^2) (D z)^(2n).
    """
    if n < 1 or dim < 1 or n_sim < 1:
        raise InvalidParameterError("n, dim and n_sim must be positive")
    if n > _MAX_MOMENT_ORDER:
        raise InvalidParameterError(f"moment order {n} exceeds overflow guard {_MAX_MOMENT_ORDER}")
    z = np.asarray(z, dtype=float)
    amp = math.sqrt(math.factorial(2 * n) - math.factorial(n) ** 2)
    out = amp * (dim * z) ** n / math.sqrt(n_sim)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class ScbaSolution:
    """Solution of the self-consistent Born (Pastur) fixed point at one energy."""

    lam: float
    sigma: float
    gbar_plus: complex
    density: float
    iterations: int


def scba_closed_form(lam: float) -> complex:
    """Retarded branch of the quadratic solved by the SCBA: lam/2 - i Sigma."""
    return lam / 2.0 - 1j * math.sqrt(max(1.0 - (lam / 2.0) ** 2, 0.0))


def scba_solve(lam: float, dim: int = 1, tol: float = 1e-12, max_iter: int = 100_000,
               mixing: float = 0.5) -> ScbaSolution:
    """Solve Gbar = 1/(lam - Gbar) by damped fixed-point iteration.

    Starts at -i so the iteration lands on the retarded branch
    (Im Gbar < 0).  At the band edges |lam| = 2 the fixed point is
    parabolic and the iteration stalls, so the exact double root lam/2 is
    returned directly there.
    """
    if abs(lam) > 2.0:
        raise OutsideSupportError(f"|lam| = {abs(lam)} lies outside the support [-2, 2]")
    if abs(lam) == 2.0:
        g = complex(lam / 2.0, 0.0)
        return ScbaSolution(lam, 0.0, g, 0.0, 0)
    g = complex(0.0, -1.0)
    for it in range(1, max_iter + 1):
        g_new = (1.0 - mixing) * g + mixing / (lam - g)
        if abs(g_new - g) < tol:
            g = g_new
            sigma = -g.imag
            return ScbaSolution(lam, sigma, g, dim * sigma / math.pi, it)
        g = g_new
    raise ConvergenceError(f"SCBA iteration did not converge at lam = {lam}")


def perturbative_rho_c(lam1: float, lam2: float) -> float:
    """Leading perturbative connected density correlation, -1/(2 pi^2 (l1-l2)^2)."""
    d = lam1 - lam2
    if d == 0.0:
        raise SingularityError("coincident energies")
    return -1.0 / (2.0 * math.pi**2 * d * d)


@dataclass(frozen=True)
class PredictionCurve:
    """Analytic reference curves evaluated on a time grid."""

    kind: str
    dim: int
    times: np.ndarray
    taus: np.ndarray
    z: np.ndarray
    conn2: np.ndarray
    ubar: np.ndarray
    moments: np.ndarray      # shape (n_max, n_times): n! (D z)^n
    envelopes: np.ndarray    # shape (n_max, n_times): per-moment sampling envelope
    sff2: np.ndarray         # full second-moment law (ubar terms included)
    sff2_universal: np.ndarray


def prediction_curve(kind: str, times, dim: int, n_sim: int, n_max: int = 4,
                     convention: str = "default") -> PredictionCurve:
    times = np.asarray(times, dtype=float)
    th = heisenberg_time(kind, dim, convention)
    zv = np.asarray(z_of(kind, times, dim, convention))
    moments = np.stack([np.asarray(gaussian_moment(n, dim, zv)) for n in range(1, n_max + 1)])
    envelopes = np.stack([np.asarray(sampling_envelope(n, dim, zv, n_sim))
                          for n in range(1, n_max + 1)])
    return PredictionCurve(
        kind=kind,
        dim=dim,
        times=times,
        taus=times / th,
        z=zv,
        conn2=np.asarray(conn2(kind, times, dim, convention)),
        ubar=np.asarray(ubar(kind, times, dim)),
        moments=moments,
        envelopes=envelopes,
        sff2=np.asarray(sff2_exact(kind, times, dim, True, convention)),
        sff2_universal=np.asarray(sff2_exact(kind, times, dim, False, convention)),
    )
