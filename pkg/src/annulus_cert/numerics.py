"""Dense complex-matrix kernels shared by every other module.

All operations are pure functions of immutable inputs.  Matrices are square
``numpy.ndarray`` blocks of ``complex128``; ``as_matrix`` is the single entry
point that normalizes and validates operands.  Eigen/SVD work is delegated to
``numpy.linalg``; the contracts here fix tolerances and failure modes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    ContractViolationError,
    DomainError,
    NumericalFailureError,
    SingularityError,
)

# Desk-scale guard for matrices entering through files or generators.
# Assembled 2x2 block operators may reach twice this.
MAX_DIM = 64


@dataclass(frozen=True)
class Tolerances:
    """Relative slacks used across the library.

    psd_tol bounds how negative an eigenvalue may be before a matrix stops
    counting as positive; eq_tol bounds residuals of identities; rank_tol is
    the relative singular-value cutoff for inversion and pseudo-inversion.
    """

    psd_tol: float = 1e-8
    eq_tol: float = 1e-8
    rank_tol: float = 1e-10

    def __post_init__(self):
        for name in ("psd_tol", "eq_tol", "rank_tol"):
            v = getattr(self, name)
            if not (0.0 < v < 1.0):
                raise DomainError(f"{name} must lie in (0, 1), got {v}")


DEFAULT_TOL = Tolerances()


def as_matrix(a, cap: int | None = None) -> np.ndarray:
    """Validate and return a square finite complex matrix (copy not forced)."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise ContractViolationError(f"expected a nonempty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m.real)) or not np.all(np.isfinite(m.imag)):
        raise ContractViolationError("matrix has non-finite entries")
    if cap is not None and m.shape[0] > cap:
        raise ContractViolationError(f"dimension {m.shape[0]} exceeds cap {cap}")
    return m


def identity_like(a: np.ndarray) -> np.ndarray:
    return np.eye(a.shape[0], dtype=complex)


def operator_norm(a) -> float:
    """Largest singular value."""
    m = as_matrix(a)
    return float(np.linalg.svd(m, compute_uv=False)[0])


def eigenvalues(a) -> np.ndarray:
    """All eigenvalues with algebraic multiplicity, in solver order."""
    m = as_matrix(a)
    try:
        return np.linalg.eigvals(m)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - QR stall is rare
        raise NumericalFailureError(f"eigenvalue iteration failed: {exc}") from exc


def hermitian_check(h, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    m = as_matrix(h)
    defect = operator_norm(m - m.conj().T)
    if defect > tol.eq_tol * (1.0 + operator_norm(m)):
        raise ContractViolationError(f"matrix is not Hermitian within tolerance (defect {defect:.3e})")
    return 0.5 * (m + m.conj().T)


def hermitian_min_eig(h, tol: Tolerances = DEFAULT_TOL) -> float:
    """Smallest eigenvalue of the Hermitian part (H + H*)/2."""
    m = hermitian_check(h, tol)
    try:
        return float(np.linalg.eigvalsh(m)[0])
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise NumericalFailureError(f"Hermitian eigensolve failed: {exc}") from exc


def sqrt_psd(h, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Positive square root of a PSD matrix; slightly negative eigenvalues are clamped."""
    m = hermitian_check(h, tol)
    lam, v = np.linalg.eigh(m)
    floor = -tol.psd_tol * (1.0 + float(np.max(np.abs(lam)) if lam.size else 0.0))
    if lam[0] < floor:
        raise DomainError(f"matrix is indefinite beyond PSD slack (min eig {lam[0]:.3e})")
    lam = np.clip(lam, 0.0, None)
    root = (v * np.sqrt(lam)) @ v.conj().T
    return 0.5 * (root + root.conj().T)


def inverse(a, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Inverse with an explicit relative singular-value guard."""
    m = as_matrix(a)
    sv = np.linalg.svd(m, compute_uv=False)
    if sv[-1] <= tol.rank_tol * sv[0] or sv[0] == 0.0:
        raise SingularityError(f"matrix numerically singular (sigma_min/sigma_max = {sv[-1]:.3e}/{sv[0]:.3e})")
    return np.linalg.solve(m, identity_like(m))


def int_power(a, k: int, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """A**k for any integer k; negative powers go through ``inverse``."""
    m = as_matrix(a)
    if k >= 0:
        return np.linalg.matrix_power(m, k)
    return np.linalg.matrix_power(inverse(m, tol), -k)


def pinv_apply(s, b, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """S^+ B for Hermitian PSD S, zeroing singular directions below rank_tol."""
    m = hermitian_check(s, tol)
    bm = np.asarray(b, dtype=complex)
    lam, v = np.linalg.eigh(m)
    lmax = float(np.max(np.abs(lam))) if lam.size else 0.0
    keep = lam > tol.rank_tol * max(lmax, 1e-300)
    inv = np.zeros_like(lam)
    inv[keep] = 1.0 / lam[keep]
    return (v * inv) @ (v.conj().T @ bm)


def range_projector(s, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Orthogonal projector onto the numerical range of Hermitian PSD S."""
    m = hermitian_check(s, tol)
    lam, v = np.linalg.eigh(m)
    lmax = float(np.max(np.abs(lam))) if lam.size else 0.0
    keep = lam > tol.rank_tol * max(lmax, 1e-300)
    vr = v[:, keep]
    return vr @ vr.conj().T
