"""Dense complex linear algebra used by the ensemble samplers.

Thin validating wrappers around LAPACK (through numpy): Householder QR,
Hermitian eigenvalues (tridiagonalization + implicit shifts) and general
complex eigenphases (Hessenberg + shifted QR).  The wrappers enforce the
package's structural contracts (finiteness, hermiticity, unitarity) and
normalize output conventions (ascending order, principal phase branch).
"""

from __future__ import annotations

import numpy as np

from .errors import ConvergenceError, InvalidInputError

HERMITICITY_RTOL = 1e-12
UNITARITY_ATOL = 1e-10


def _as_square_matrix(a, name="matrix"):
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidInputError(f"{name} must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidInputError(f"{name} contains non-finite entries")
    return a.astype(np.complex128, copy=False)


def is_hermitian(h, rtol=HERMITICITY_RTOL) -> bool:
    h = np.asarray(h)
    scale = max(np.abs(h).max(), 1.0)
    return np.abs(h - h.conj().T).max() <= rtol * scale


def is_unitary(u, atol=UNITARITY_ATOL) -> bool:
    u = np.asarray(u)
    d = u.shape[0]
    return np.abs(u @ u.conj().T - np.eye(d)).max() <= atol


def householder_qr(a):
    """QR factorization of a square complex matrix.

    Returns (Q, R) with Q unitary and R upper triangular such that
    ``Q @ R`` reconstructs the input to roundoff.  Uses LAPACK's
    Householder-reflector factorization.
    """
    a = _as_square_matrix(a, "a")
    q, r = np.linalg.qr(a)
    return q, r


def hermitian_eigenvalues(h):
    """Ascending real eigenvalues of a Hermitian matrix.

    The input must satisfy the hermiticity contract
    ``max|H - H^dag| <= 1e-12 * max|H|``.
    """
    h = _as_square_matrix(h, "h")
    if not is_hermitian(h):
        raise InvalidInputError("matrix is not hermitian within tolerance")
    try:
        w = np.linalg.eigvalsh(h)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise ConvergenceError(f"hermitian eigensolver did not converge: {exc}") from exc
    return w


def unitary_eigenphases(u):
    """Ascending eigenphases of a unitary matrix, on the branch (-pi, pi].

    The reconstructed eigenvalues exp(i*theta) are unit modulus by
    construction; the phase sum equals arg det U modulo 2*pi.
    """
    u = _as_square_matrix(u, "u")
    if not is_unitary(u):
        raise InvalidInputError("matrix is not unitary within tolerance")
    try:
        lam = np.linalg.eigvals(u)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise ConvergenceError(f"schur iteration did not converge: {exc}") from exc
    theta = np.angle(lam)
    # np.angle returns [-pi, pi]; fold the open end so -pi maps to +pi
    theta = np.where(theta <= -np.pi, np.pi, theta)
    theta.sort()
    return theta


def eigenvalue_determinant_phase(phases) -> float:
    """arg det of the unitary reconstructed from its eigenphases, in (-pi, pi]."""
    s = np.mod(np.sum(phases), 2 * np.pi)
    if s > np.pi:
        s -= 2 * np.pi
    return float(s)
