"""CUE and GUE samplers with the normalization conventions used throughout.

CUE: Haar-distributed unitaries, sampled as the QR factor of a complex
Ginibre matrix with the R-diagonal phase correction (Mezzadri's recipe), so
the distribution is exactly Haar rather than biased by the QR sign
convention.

GUE: Hermitian H with density P(H) ~ exp(-(D/2) tr H^2), i.e. off-diagonal
entries with E|H_ij|^2 = 1/D and real diagonal entries of variance 1/D.
The eigenvalue density converges to the semicircle on [-2, 2].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, InvalidParameterError
from .linalg import hermitian_eigenvalues, householder_qr, unitary_eigenphases
from .rng import RngStream, complex_gaussian

CUE = "cue"
GUE = "gue"
_KINDS = (CUE, GUE)


@dataclass(frozen=True)
class EnsembleSpec:
    """Which ensemble to draw from, at which dimension, from which seed."""

    kind: str
    dim: int
    master_seed: int = 0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise InvalidParameterError(f"kind must be one of {_KINDS}, got {self.kind!r}")
        if self.dim < 1:
            raise InvalidParameterError(f"dim must be >= 1, got {self.dim}")


@dataclass(frozen=True)
class Spectrum:
    """One sample's eigenphases (CUE) or eigenvalues (GUE), ascending."""

    kind: str
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if values.ndim != 1 or values.size == 0:
            raise InvalidInputError("spectrum must be a non-empty 1-d array")
        if np.any(np.diff(values) < 0):
            raise InvalidInputError("spectrum values must be ascending")
        if self.kind == CUE and (values.min() <= -np.pi or values.max() > np.pi):
            raise InvalidInputError("CUE phases must lie in (-pi, pi]")

    def __len__(self):
        return self.values.size


def heisenberg_time(kind: str, dim: int, convention: str = "default") -> float:
    """Heisenberg time: D for the CUE, pi*D/2 for the GUE.

    The GUE value follows the mean-density estimate rho_bar = D/4 over the
    band of width 4; the band-center alternative rho_bar(0) = D/pi gives
    t_H = 2D and is available as convention="2d".
    """
    if kind == CUE:
        return float(dim)
    if kind == GUE:
        if convention == "2d":
            return 2.0 * dim
        return math.pi * dim / 2.0
    raise InvalidParameterError(f"unknown ensemble kind {kind!r}")


def haar_phase_fix(q, r):
    """Right-multiply Q by the phases of diag(R) to remove the QR convention bias."""
    d = np.diagonal(r, axis1=-2, axis2=-1)
    ph = d / np.abs(d)
    return q * ph[..., None, :]


def sample_cue(spec: EnsembleSpec, stream: RngStream):
    """One Haar-random unitary of dimension spec.dim."""
    if spec.kind != CUE:
        raise InvalidInputError("sample_cue requires a CUE spec")
    g = complex_gaussian(stream, 1.0, (spec.dim, spec.dim))
    q, r = householder_qr(g)
    return haar_phase_fix(q, r)


def gue_from_ginibre(a):
    """Hermitize a Ginibre block drawn with entry variance 2/D."""
    return 0.5 * (a + np.swapaxes(a.conj(), -2, -1))


def sample_gue(spec: EnsembleSpec, stream: RngStream):
    """One GUE matrix with P(H) ~ exp(-(D/2) tr H^2)."""
    if spec.kind != GUE:
        raise InvalidInputError("sample_gue requires a GUE spec")
    a = complex_gaussian(stream, 2.0 / spec.dim, (spec.dim, spec.dim))
    return gue_from_ginibre(a)


def sample_matrix(spec: EnsembleSpec, stream: RngStream):
    return sample_cue(spec, stream) if spec.kind == CUE else sample_gue(spec, stream)


def spectrum_of(spec: EnsembleSpec, m) -> Spectrum:
    """Eigenphases (CUE) or eigenvalues (GUE) of a sampled matrix, ascending."""
    m = np.asarray(m)
    if m.shape != (spec.dim, spec.dim):
        raise InvalidInputError(f"matrix shape {m.shape} does not match dim {spec.dim}")
    if spec.kind == CUE:
        return Spectrum(CUE, unitary_eigenphases(m))
    return Spectrum(GUE, hermitian_eigenvalues(m))


def ginibre_batch(spec: EnsembleSpec, indices, variance: float):
    """Stack of per-sample Ginibre draws, one RngStream per sample index.

    The draw order inside each sample is fixed, so the resulting stack is
    the same no matter how indices are partitioned across calls.
    """
    d = spec.dim
    out = np.empty((len(indices), d, d), dtype=np.complex128)
    for row, idx in enumerate(indices):
        stream = RngStream(spec.master_seed, int(idx))
        out[row] = complex_gaussian(stream, variance, (d, d))
    return out


def spectra_batch(spec: EnsembleSpec, indices):
    """Spectra for a batch of sample indices, shape (len(indices), dim).

    Uses stacked LAPACK calls; each row equals the single-sample path
    sample_*/spectrum_of for the same index.
    """
    if len(indices) == 0:
        return np.empty((0, spec.dim))
    if spec.kind == CUE:
        g = ginibre_batch(spec, indices, 1.0)
        q, r = np.linalg.qr(g)
        u = haar_phase_fix(q, r)
        lam = np.linalg.eigvals(u)
        theta = np.angle(lam)
        theta = np.where(theta <= -np.pi, np.pi, theta)
        theta.sort(axis=-1)
        return theta
    a = ginibre_batch(spec, indices, 2.0 / spec.dim)
    return np.linalg.eigvalsh(gue_from_ginibre(a))
