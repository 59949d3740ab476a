"""Deterministic cross-checks of the closed-form layers.

Each suite runs without Monte Carlo and reports measured error against its
tolerance.  The saddle suite gates every closed form with the numerical
derivative; the kernel suite pins the box-overlap scaling with a quadrature
oracle on the exact finite-D kernel; the identity suite ties the three
independent second-moment routes together; the SCBA suite compares the
fixed point with the explicit branch.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import analytics, saddles, sine_kernel
from .ensembles import CUE


@dataclass(frozen=True)
class CheckResult:
    suite: str
    name: str
    measured: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.measured <= self.tolerance

    def line(self) -> str:
        status = "pass" if self.passed else "FAIL"
        return (f"[{status}] {self.suite}/{self.name}: "
                f"measured {self.measured:.3e} vs tolerance {self.tolerance:.1e}")


def _draw_phases(rng, n_points, min_gap=0.05):
    out = []
    while len(out) < n_points:
        phi = np.sort(rng.uniform(-1.5, 1.5, 4))[::-1]
        gaps = phi[:-1] - phi[1:]
        if gaps.min() >= min_gap and (phi[0] - phi[3]) <= 2.5:
            out.append(tuple(phi))
    return out


def verify_saddles(n_points: int = 20, dims=(4, 10), seed: int = 20240101):
    """Closed per-saddle forms against the Richardson derivative oracle."""
    rng = np.random.default_rng(seed)
    results = []
    points = _draw_phases(rng, n_points)
    for cfg in saddles.SADDLES:
        worst = 0.0
        for phi in points:
            for dim in dims:
                fc = saddles.f_closed(cfg, phi, dim)
                fn = saddles.f_numeric(cfg, phi, dim)
                worst = max(worst, abs(fn - fc) / abs(fc))
        results.append(CheckResult("saddles", f"derivative-oracle-{cfg.name}", worst, 1e-5))

    # replica symmetry: T24 equals T13 under the (1<->2, 3<->4) phase swap
    sym_pairs = [("T13", "T24"), ("T14", "T23")]
    for a, b in sym_pairs:
        worst = 0.0
        for phi in _draw_phases(rng, 100):
            swapped = (phi[1], phi[0], phi[3], phi[2])
            fa = saddles.f_closed(saddles.saddle_by_name(a), phi, 10)
            fb = saddles.f_closed(saddles.saddle_by_name(b), swapped, 10)
            worst = max(worst, abs(fa - fb) / abs(fa))
        results.append(CheckResult("saddles", f"replica-symmetry-{a}-{b}", worst, 1e-12))

    # high-precision re-evaluation of the generating-function term itself
    worst = 0.0
    for phi in points[:10]:
        alpha = tuple(rng.uniform(-0.02, 0.02, 4))
        for cfg in saddles.SADDLES:
            zd = saddles.z_saddle(cfg, saddles.PhasePoint(phi, alpha, 10))
            zm = complex(saddles.z_saddle_highprec(cfg, phi, alpha, 10))
            worst = max(worst, abs(zd - zm) / abs(zm))
    results.append(CheckResult("saddles", "term-highprec-reevaluation", worst, 1e-12))
    return results


def cue_finite_kernel_quadrature(coeffs, t: float, dim: int, n_grid: int = 64) -> complex:
    """Quadrature oracle: cyclic chain of the exact finite-D CUE kernel.

    Integrates K(x_1)...K(x_{m-1}) K(x_1 + ... + x_{m-1}) against the plane
    wave with the cycle's partial sums over the (m-1)-torus; the periodic
    trapezoid rule is exact for trigonometric polynomials once the grid
    resolves the bandwidth.
    """
    m = len(coeffs)
    x = 2.0 * np.pi * np.arange(n_grid) / n_grid

    def kernel_safe(theta):
        # sin(D theta/2) / (2 pi sin(theta/2)); the removable points at theta = 2 pi k
        # carry the sign (-1)^(k (D-1)), which the derivative ratio reproduces
        s = np.sin(theta / 2)
        near = np.abs(s) < 1e-9
        main = np.sin(dim * theta / 2) / (2 * np.pi * np.where(near, 1.0, s))
        limit = dim * np.cos(dim * theta / 2) / (2 * np.pi * np.cos(theta / 2))
        return np.where(near, limit, main)

    grids = np.meshgrid(*([x] * (m - 1)), indexing="ij")
    chain = np.ones_like(grids[0])
    ssum = np.zeros_like(grids[0])
    for g in grids:
        chain = chain * kernel_safe(g)
        ssum = ssum + g
    chain = chain * kernel_safe(ssum)
    partial = np.cumsum(coeffs)[:-1]
    phase = np.zeros_like(grids[0], dtype=complex)
    for s_l, g in zip(partial, grids):
        phase = phase + 1j * s_l * t * g
    integrand = chain * np.exp(phase)
    cell = (2 * np.pi / n_grid) ** (m - 1)
    return 2 * np.pi * integrand.sum() * cell


def verify_kernel(dim: int = 8, seed: int = 7):
    """Box-overlap closed forms against the finite-D quadrature oracle."""
    results = []
    # the 3-type chain at the documented oracle point
    t = 2
    oracle = cue_finite_kernel_quadrature((2, -1, -1), t, dim)
    closed = sine_kernel.cue_cycle_integral((2, -1, -1), t, dim)
    rel = abs(oracle.real - closed) / max(abs(closed), 1e-12)
    results.append(CheckResult("kernel", f"box-vs-quadrature-3type-D{dim}-t{t}", rel, 0.02))
    results.append(CheckResult("kernel", "quadrature-imaginary-part", abs(oracle.imag), 1e-8))

    # 4-type chains
    for name, coeffs in (("alternating", (1, -1, 1, -1)), ("adjacent", (1, 1, -1, -1))):
        oracle = cue_finite_kernel_quadrature(coeffs, 3, dim, n_grid=48)
        closed = sine_kernel.cue_cycle_integral(coeffs, 3, dim)
        rel = abs(oracle.real - closed) / max(abs(closed), 1e-12)
        results.append(CheckResult("kernel", f"box-vs-quadrature-4type-{name}", rel, 0.02))

    # closed-form identity lines over a time sweep
    worst3 = worst4 = 0.0
    for t in range(0, dim + 1):
        lhs, rhs = sine_kernel.three_type_identity(t, dim)
        worst3 = max(worst3, abs(lhs - rhs))
        alt, adj_a, adj_b = sine_kernel.four_type_identities(t, dim)
        z1 = analytics.z_cue(t / dim)
        z2 = analytics.z_cue(2 * t / dim)
        worst4 = max(worst4, abs(alt - dim * (1 - z1)),
                     abs(adj_a - dim * (1 - z2)), abs(adj_b - dim * (1 - z2)))
    results.append(CheckResult("kernel", "three-type-identity-sweep", worst3, 1e-10))
    results.append(CheckResult("kernel", "four-type-identity-sweep", worst4, 1e-10))

    # determinant layer sanity: permutation symmetry and positivity
    rng = np.random.default_rng(seed)
    spec = sine_kernel.KernelSpec(1.0, dim)
    worst_sym, worst_pos = 0.0, 0.0
    for _ in range(25):
        pts = np.sort(rng.uniform(0, 4, rng.integers(2, 7)))
        base = sine_kernel.r_n_det(spec, pts)
        perm = rng.permutation(pts)
        worst_sym = max(worst_sym, abs(sine_kernel.r_n_det(spec, perm) - base))
        worst_pos = max(worst_pos, -base)
    results.append(CheckResult("kernel", "rn-det-permutation-symmetry", worst_sym, 1e-9))
    results.append(CheckResult("kernel", "rn-det-nonnegative", worst_pos, 1e-12))
    return results


def verify_scba(n_points: int = 100):
    """Damped fixed point against the explicit retarded branch."""
    lams = np.linspace(-1.99, 1.99, n_points)
    worst = 0.0
    for lam in lams:
        sol = analytics.scba_solve(float(lam))
        worst = max(worst, abs(sol.gbar_plus - analytics.scba_closed_form(float(lam))))
    results = [CheckResult("scba", f"fixed-point-vs-closed-form-{n_points}pts", worst, 1e-10)]
    worst_c = 0.0
    for lam in lams:
        sol = analytics.scba_solve(float(lam), dim=100)
        sigma = np.sqrt(1 - (lam / 2) ** 2)
        worst_c = max(worst_c, abs(sol.sigma**2 + (lam / 2) ** 2 - 1.0),
                      abs(sol.density - 100 * sigma / np.pi))
    results.append(CheckResult("scba", "semicircle-density", worst_c, 1e-10))
    results.append(CheckResult("scba", "band-edge-exact",
                               abs(analytics.scba_solve(2.0).sigma), 1e-15))
    return results


def verify_identities(dims=(2, 3, 4, 5, 10)):
    """assemble_sff2 == sff2_exact == sum of the time-domain saddle results."""
    worst = 0.0
    for dim in dims:
        for t in range(0, 3 * dim + 1):
            a = sine_kernel.assemble_sff2(t, dim)
            b = analytics.sff2_exact(CUE, float(t), dim, include_ubar=True)
            dis, conn = saddles.sff2_timedomain(t / dim, dim)
            c = dis + conn
            scale = max(abs(b), 1.0)
            worst = max(worst, abs(a - b) / scale, abs(c - b) / scale)
    return [CheckResult("identities", "sff2-three-route-equality", worst, 1e-12)]


SUITES = {
    "saddles": verify_saddles,
    "kernel": verify_kernel,
    "scba": verify_scba,
    "identities": verify_identities,
}


def run_verify(suite: str):
    """Run one named suite (or 'all'); returns the list of CheckResults."""
    if suite == "all":
        out = []
        for fn in SUITES.values():
            out.extend(fn())
        return out
    if suite not in SUITES:
        raise KeyError(f"unknown suite {suite!r}; choose from {sorted(SUITES)} or 'all'")
    return SUITES[suite]()
