"""Determinantal sine-kernel machinery for the second form-factor moment.

Two layers:

* the universal kernel and its n-point determinants (``kernel_value``,
  ``r_n_det``), valid on separations of a few mean spacings;

* exact Fourier integrals of cyclic kernel chains against plane waves.  In
  k-space each kernel factor is a box of width one bandwidth, so a cyclic
  chain integrates to the overlap length of shifted boxes (``box_convolution``).
  For the CUE at integer times the overlap is a lattice count and the box
  formula is exact, which makes the classic 3-type and 4-type integral
  identities verifiable in closed form and lets the full second moment be
  assembled permutation by permutation (``assemble_sff2``).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .analytics import z_cue
from .errors import InvalidInputError, InvalidParameterError, UnsupportedOrderError

ONSHELL_TOL = 1e-12
_MAX_DET_ORDER = 6


@dataclass(frozen=True)
class KernelSpec:
    """Mean level density and matrix dimension for kernel evaluations."""

    rho_bar: float
    dim: int

    def __post_init__(self):
        if not self.rho_bar > 0:
            raise InvalidParameterError("rho_bar must be positive")
        if self.dim < 1:
            raise InvalidParameterError("dim must be >= 1")


def cue_kernel_spec(dim: int) -> KernelSpec:
    """CUE convention: rho_bar = D / 2 pi."""
    return KernelSpec(rho_bar=dim / (2 * np.pi), dim=dim)


def kernel_value(spec: KernelSpec, x):
    """Universal sine kernel rho * sin(pi rho x) / (pi rho x); rho at x = 0."""
    x = np.asarray(x, dtype=float)
    out = spec.rho_bar * np.sinc(spec.rho_bar * x)
    return float(out) if out.ndim == 0 else out


def r_n_det(spec: KernelSpec, points) -> float:
    """n-level correlation R_n as the determinant of the kernel matrix."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 1 or pts.size == 0:
        raise InvalidInputError("points must be a non-empty 1-d sequence")
    if pts.size > _MAX_DET_ORDER:
        raise UnsupportedOrderError(f"correlation order {pts.size} > {_MAX_DET_ORDER}")
    k = kernel_value(spec, pts[:, None] - pts[None, :])
    return float(np.linalg.det(np.atleast_2d(k)))


@dataclass(frozen=True)
class BoxProduct:
    """Plane-wave weights k_1..k_m for a cyclic kernel chain.

    ``bandwidth`` is the k-space support width of one kernel factor,
    2 pi rho_bar.  The default 2*dim matches the band-center density
    rho_bar = D/pi; CUE checks use bandwidth = D.
    """

    weights: tuple
    dim: int
    bandwidth: float = field(default=None)

    def __post_init__(self):
        if len(self.weights) == 0:
            raise InvalidInputError("weights must be non-empty")
        if self.dim < 1:
            raise InvalidParameterError("dim must be >= 1")
        if self.bandwidth is None:
            object.__setattr__(self, "bandwidth", 2.0 * self.dim)

    @property
    def on_shell(self) -> bool:
        """True when the weights sum to zero, i.e. the delta prefactor fires."""
        return abs(sum(self.weights)) <= ONSHELL_TOL


def box_convolution(bp: BoxProduct) -> float:
    """Overlap length of the unit boxes shifted by the partial weight sums.

    Evaluates the k-space side of the cyclic convolution formula: the
    intersection of {|k| < 1/2} with {|k + s_i / bandwidth| < 1/2} for the
    partial sums s_i = k_1 + ... + k_i, i < m.  Off shell the delta
    prefactor kills the integral and 0 is returned.
    """
    if not bp.on_shell:
        return 0.0
    partial = np.cumsum(np.asarray(bp.weights, dtype=float))[:-1] / bp.bandwidth
    centers = np.concatenate([[0.0], partial])
    upper = 0.5 - centers.max()
    lower = -0.5 - centers.min()
    return max(0.0, upper - lower)


def cue_cycle_integral(coeffs, t: float, dim: int) -> float:
    """Exact CUE integral of one cyclic kernel chain against exp(i t sum c_j lam_j).

    ``coeffs`` are the integer multiples of t carried by the cycle's
    variables, in cycle order.  The time variable is treated as generic:
    the chain is on shell only when the coefficients sum to zero
    identically, and then equals bandwidth * box overlap = max(0, D - spread * t)
    with spread the range of the coefficient partial sums.
    """
    coeffs = tuple(int(c) for c in coeffs)
    if len(coeffs) == 0:
        raise InvalidInputError("empty cycle")
    if sum(coeffs) != 0:
        return 0.0
    bp = BoxProduct(tuple(float(c) * t for c in coeffs), dim, bandwidth=float(dim))
    return dim * box_convolution(bp)


def cue_rn_fourier(coeffs, t: float, dim: int) -> float:
    """Exact CUE integral of R_n against exp(i t sum c_j lam_j).

    Expands the n x n kernel determinant over permutations; each
    permutation factorizes into cycles whose chain integrals multiply.
    """
    n = len(coeffs)
    if n > _MAX_DET_ORDER:
        raise UnsupportedOrderError(f"correlation order {n} > {_MAX_DET_ORDER}")
    total = 0.0
    for perm in itertools.permutations(range(n)):
        seen = [False] * n
        value = 1.0
        n_cycles = 0
        for start in range(n):
            if seen[start]:
                continue
            cycle = []
            j = start
            while not seen[j]:
                seen[j] = True
                cycle.append(coeffs[j])
                j = perm[j]
            n_cycles += 1
            value *= cue_cycle_integral(cycle, t, dim)
            if value == 0.0:
                break
        sign = -1.0 if (n - n_cycles) % 2 else 1.0
        total += sign * value
    return total


def three_type_identity(t: float, dim: int):
    """Both sides of the 3-cycle identity.

    lhs: twice the real part of the triple-kernel chain with weights
    (2t, -t, -t), from the box overlap with the CUE bandwidth D.
    rhs: 2 D (1 - z(2t)).
    """
    if t < 0:
        raise InvalidParameterError("t must be non-negative")
    lhs = 2.0 * cue_cycle_integral((2, -1, -1), t, dim)
    rhs = 2.0 * dim * (1.0 - z_cue(2.0 * t / dim))
    return lhs, rhs


def four_type_identities(t: float, dim: int):
    """The three 4-cycle chain integrals with weights (t, t, -t, -t).

    In cycle order the three pairings carry coefficient sequences
    (1,-1,1,-1), (1,1,-1,-1) and (1,1,-1,-1); their closed forms are
    D(1 - z(t)), D(1 - z(2t)), D(1 - z(2t)).
    """
    if t < 0:
        raise InvalidParameterError("t must be non-negative")
    alternating = cue_cycle_integral((1, -1, 1, -1), t, dim)
    adjacent_a = cue_cycle_integral((1, 1, -1, -1), t, dim)
    adjacent_b = cue_cycle_integral((1, 1, -1, -1), t, dim)
    return alternating, adjacent_a, adjacent_b


def assemble_sff2(t: float, dim: int) -> float:
    """Second moment of the CUE form factor assembled from kernel integrals.

    Sums the five contribution classes of the pair-index decomposition:
    the R4 and R3 Fourier integrals, the R2 integrals at 2t and t (the
    latter carrying its 4(D-1) multiplicity), and the 2 D^2 - D constant
    from fully paired index configurations.
    """
    if t < 0:
        raise InvalidParameterError("t must be non-negative")
    r4 = cue_rn_fourier((1, 1, -1, -1), t, dim)
    r3 = cue_rn_fourier((2, -1, -1), t, dim)
    r2_double = cue_rn_fourier((2, -2), t, dim)
    r2_single = cue_rn_fourier((1, -1), t, dim)
    return r4 + 2.0 * r3 + r2_double + 4.0 * (dim - 1) * r2_single + 2.0 * dim**2 - dim
