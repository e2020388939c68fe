"""Positive 2x2 block completions and contraction factorizations.

The central primitive extracts the middle factor K from R = S1 K S2 with
S1, S2 positive semidefinite, using rank-truncated pseudo-inverses and
reporting how much of R lives outside the attainable ranges.  The block
[[P, R], [R*, Q]] is positive exactly when that K is a contraction and R is
range-compatible, which the library exploits as a two-sided consistency check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .numerics import (
    Tolerances,
    DEFAULT_TOL,
    as_matrix,
    hermitian_min_eig,
    identity_like,
    operator_norm,
    pinv_apply,
    range_projector,
    sqrt_psd,
)


@dataclass(frozen=True, eq=False)
class FactorResult:
    """Middle factor of R = S1 K S2 with its quality metrics."""

    k: np.ndarray
    k_norm: float
    residual: float
    range_defect: float

    @property
    def verdict(self) -> bool:
        return self.passes(DEFAULT_TOL)

    def passes(self, tol: Tolerances = DEFAULT_TOL) -> bool:
        return (
            self.k_norm <= 1.0 + tol.psd_tol
            and self.residual <= tol.eq_tol
            and self.range_defect <= tol.eq_tol
        )

    def to_dict(self, tol: Tolerances = DEFAULT_TOL) -> dict:
        from .io import matrix_to_dict

        return {
            "k": matrix_to_dict(self.k),
            "k_norm": self.k_norm,
            "residual": self.residual,
            "range_defect": self.range_defect,
            "verdict": self.passes(tol),
        }


@dataclass(frozen=True, eq=False)
class DefectPair:
    """D = (I - K*K)^{1/2} and Dstar = (I - KK*)^{1/2}."""

    d: np.ndarray
    dstar: np.ndarray


def factor_through(s1, s2, r, tol: Tolerances = DEFAULT_TOL) -> FactorResult:
    """K = S1^+ R S2^+ restricted to the ranges, for PSD square-root factors S1, S2."""
    s1m = as_matrix(s1)
    s2m = as_matrix(s2)
    rm = as_matrix(r)
    k = pinv_apply(s1m, pinv_apply(s2m, rm.conj().T, tol).conj().T, tol)
    scale = 1.0 + operator_norm(rm)
    residual = operator_norm(s1m @ k @ s2m - rm) / scale
    p1 = range_projector(s1m, tol)
    p2 = range_projector(s2m, tol)
    eye = identity_like(rm)
    range_defect = (
        operator_norm((eye - p1) @ rm) + operator_norm(rm @ (eye - p2))
    ) / scale
    return FactorResult(k=k, k_norm=operator_norm(k), residual=residual, range_defect=range_defect)


def douglas_factor(p, q, r, tol: Tolerances = DEFAULT_TOL) -> FactorResult:
    """Extract K with R = P^{1/2} K Q^{1/2} for PSD P, Q.

    The block [[P, R], [R*, Q]] is positive iff the result passes: contraction
    norm within psd slack and residual and range defect within equality slack.
    """
    try:
        sp = sqrt_psd(p, tol)
        sq = sqrt_psd(q, tol)
    except DomainError as exc:
        raise DomainError(f"P and Q must be PSD within slack: {exc}") from exc
    return factor_through(sp, sq, r, tol)


def assemble_block(p, q, r) -> np.ndarray:
    pm = as_matrix(p)
    qm = as_matrix(q)
    rm = as_matrix(r)
    n = pm.shape[0]
    out = np.zeros((2 * n, 2 * n), dtype=complex)
    out[:n, :n] = pm
    out[:n, n:] = rm
    out[n:, :n] = rm.conj().T
    out[n:, n:] = qm
    return out


def block_psd_check(p, q, r, tol: Tolerances = DEFAULT_TOL) -> tuple[bool, float]:
    """Verdict and margin: smallest eigenvalue of [[P, R], [R*, Q]]."""
    block = assemble_block(p, q, r)
    margin = hermitian_min_eig(block, tol)
    scale = 1.0 + operator_norm(block)
    return margin >= -tol.psd_tol * scale, margin


def defects(k, tol: Tolerances = DEFAULT_TOL) -> DefectPair:
    """Defect operators of a contraction."""
    km = as_matrix(k)
    nrm = operator_norm(km)
    if nrm > 1.0 + tol.psd_tol:
        raise DomainError(f"not a contraction within slack (norm {nrm:.6g})")
    eye = identity_like(km)
    d = sqrt_psd(eye - km.conj().T @ km, tol)
    dstar = sqrt_psd(eye - km @ km.conj().T, tol)
    return DefectPair(d=d, dstar=dstar)


def halmos_unitary(k, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """The unitary [[K, Dstar], [D, -K*]] on the doubled space."""
    km = as_matrix(k)
    pair = defects(km, tol)
    n = km.shape[0]
    out = np.zeros((2 * n, 2 * n), dtype=complex)
    out[:n, :n] = km
    out[:n, n:] = pair.dstar
    out[n:, :n] = pair.d
    out[n:, n:] = -km.conj().T
    return out


def compress_through(u: np.ndarray, s1: np.ndarray, s2: np.ndarray) -> np.ndarray:
    """[S1 0] U [S2; 0], the top-left compression of U between the factors."""
    n = s1.shape[0]
    return s1 @ u[:n, :n] @ s2


@dataclass(frozen=True, eq=False)
class DiskBlockResult:
    """Outcome of the disk-case block test for [[T1, X], [0, T2]]."""

    verdict: bool
    c: np.ndarray
    c_norm: float
    residual: float
    range_defect: float
    t1_norm: float
    t2_norm: float
    direct_norm: float

    @property
    def direct_verdict(self) -> bool:
        return self.direct_norm <= 1.0 + DEFAULT_TOL.psd_tol


def disk_block_check(t1, t2, x, tol: Tolerances = DEFAULT_TOL) -> DiskBlockResult:
    """Factor X = D_{T1*} C D_{T2}; contraction verdict for the block with that structure.

    Also reports the directly computed norm of [[T1, X], [0, T2]] so callers can
    confirm the equivalence between the factorization verdict and the norm test.
    """
    t1m = as_matrix(t1)
    t2m = as_matrix(t2)
    xm = as_matrix(x)
    n = t1m.shape[0]
    block = np.zeros((2 * n, 2 * n), dtype=complex)
    block[:n, :n] = t1m
    block[:n, n:] = xm
    block[n:, n:] = t2m
    direct = operator_norm(block)
    n1 = operator_norm(t1m)
    n2 = operator_norm(t2m)
    if n1 > 1.0 + tol.psd_tol or n2 > 1.0 + tol.psd_tol:
        zero = np.zeros_like(xm)
        return DiskBlockResult(False, zero, float("inf"), float("inf"), float("inf"),
                               n1, n2, direct)
    eye = identity_like(t1m)
    d1s = sqrt_psd(eye - t1m @ t1m.conj().T, tol)   # defect of T1*
    d2 = sqrt_psd(eye - t2m.conj().T @ t2m, tol)    # defect of T2
    fr = factor_through(d1s, d2, xm, tol)
    verdict = fr.passes(tol)
    return DiskBlockResult(verdict, fr.k, fr.k_norm, fr.residual, fr.range_defect,
                           n1, n2, direct)
