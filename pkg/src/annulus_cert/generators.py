"""Deterministic random instance factories.

All randomness flows through ``numpy.random.Generator`` seeded with PCG64, so
a (function, seed) pair reproduces bit-identical matrices on any platform
running the same numpy build.  Ginibre samples (iid standard complex normals)
are the raw material throughout.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError
from .numerics import MAX_DIM
from .pencil import AnnulusParams


def _rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def _check_dim(n: int) -> None:
    if not (1 <= n <= MAX_DIM):
        raise DomainError(f"dimension must lie in [1, {MAX_DIM}], got {n}")


def ginibre(n: int, rng: np.random.Generator) -> np.ndarray:
    return (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """QR of a Ginibre sample with the phase convention fixed for determinism."""
    q, r = np.linalg.qr(ginibre(n, rng))
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def _annulus_diag(n: int, ap: AnnulusParams, rng: np.random.Generator) -> np.ndarray:
    moduli = ap.r + (1.0 - ap.r) * rng.random(n)
    phases = np.exp(2j * np.pi * rng.random(n))
    return moduli * phases


def random_normal_annulus(n: int, ap: AnnulusParams, seed: int = 0) -> np.ndarray:
    """Normal matrix with eigenvalue moduli uniform in [r, 1], angles uniform.

    Such matrices are guaranteed annulus contractions by spectral mapping,
    which makes them the positive-control population for the certifier.
    """
    _check_dim(n)
    rng = _rng(seed)
    lam = _annulus_diag(n, ap, rng)
    u = haar_unitary(n, rng)
    return (u * lam) @ u.conj().T


def random_contraction(n: int, seed: int = 0) -> np.ndarray:
    """Ginibre sample scaled to operator norm strictly below one."""
    _check_dim(n)
    g = ginibre(n, _rng(seed))
    smax = float(np.linalg.svd(g, compute_uv=False)[0])
    return g / (smax + 1e-3)


def random_psd(n: int, seed: int = 0) -> np.ndarray:
    """Gram matrix of a Ginibre sample, normalized to unit operator norm."""
    _check_dim(n)
    g = ginibre(n, _rng(seed))
    h = g.conj().T @ g
    h = 0.5 * (h + h.conj().T)
    return h / float(np.linalg.svd(h, compute_uv=False)[0])


def random_commuting_pair(n: int, ap: AnnulusParams, seed: int = 0):
    """(T1, T2, X): common unitary conjugation of diagonals.

    T1, T2 have annulus spectra, X an arbitrary complex diagonal in the same
    eigenbasis, so all three commute up to rounding.
    """
    _check_dim(n)
    rng = _rng(seed)
    u = haar_unitary(n, rng)
    d1 = _annulus_diag(n, ap, rng)
    d2 = _annulus_diag(n, ap, rng)
    dx = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    conj = lambda d: (u * d) @ u.conj().T
    return conj(d1), conj(d2), conj(dx)
