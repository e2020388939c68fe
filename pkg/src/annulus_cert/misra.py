"""Kernel threshold for scalar Jordan-type 2x2 blocks, plus its pencil cross-check.

For w inside the open annulus, the block [[w, h], [0, w]] stays an annulus
contraction exactly up to |h| equal to the reciprocal of the boundary Hardy
kernel diagonal

    K(w) = sum_n |w|^{2n} / (1 + r^{2n+1}),

the reproducing kernel of the Hardy space over both boundary circles weighted
by arclength (the inner circle contributes r * r^{2n} to ||z^n||^2).  That
normalization is forced: it is the unique one whose reciprocal matches the
extremal derivative bound sup { |f'(w)| : ||f|| <= 1 } realized by the pencil
certificates in the small-eps limit.

``threshold_via_pencil`` recomputes the same number by bisecting the
certificate flip point, giving the library a two-sided oracle on itself.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .certifier import PencilGrid, certify_ar
from .errors import DiagnosticError, DomainError, TruncationError
from .numerics import Tolerances, DEFAULT_TOL
from .pencil import AnnulusParams, TruncationPlan, DEFAULT_PLAN

# Threshold hunting needs a much deeper eps ladder than plain certification:
# the flip point converges to its limit linearly in the smallest eps.
MISRA_GRID = PencilGrid(
    eps_values=(0.5, 0.25, 0.1, 0.05, 0.02, 0.01, 0.005, 0.002, 0.001, 5e-4, 2.5e-4),
    alpha_count=64,
)

_KERNEL_CAP = 200_000


@dataclass(frozen=True)
class KernelParams:
    """Evaluation point of the kernel diagonal."""

    r: float
    w: complex
    n_trunc: int = 64

    def __post_init__(self):
        if not (0.0 < self.r < 1.0):
            raise DomainError(f"r must lie in (0, 1), got {self.r}")
        if not (self.r < abs(self.w) < 1.0):
            raise DomainError(
                f"|w| = {abs(self.w):.6g} must lie strictly inside ({self.r}, 1)"
            )
        if self.n_trunc < 8:
            raise DomainError(f"n_trunc must be at least 8, got {self.n_trunc}")


def _check_point(w: complex, r: float) -> float:
    if not (0.0 < r < 1.0):
        raise DomainError(f"r must lie in (0, 1), got {r}")
    aw = abs(w)
    if not (r < aw < 1.0):
        raise DomainError(f"|w| = {aw:.6g} outside the open annulus ({r}, 1); the series diverges on the boundary")
    return aw


def _kernel_terms(aw: float, r: float, n: int) -> tuple[float, float]:
    """(positive-index term, negative-index term) at index n >= 1, overflow-free."""
    tp = aw ** (2 * n) / (1.0 + r ** (2 * n + 1))
    tm = (r * r / (aw * aw)) ** n / (r * (1.0 + r ** (2 * n - 1)))
    return tp, tm


def kernel_diag(w: complex, r: float, n_trunc: int = 64) -> float:
    """Bilateral kernel diagonal truncated at |n| <= n_trunc."""
    aw = _check_point(w, r)
    s = 1.0 / (1.0 + r)
    for n in range(1, n_trunc + 1):
        tp, tm = _kernel_terms(aw, r, n)
        s += tp + tm
    return s


def _tail_bound(aw: float, r: float, n: int) -> float:
    """Upper bound on the remainder beyond |index| = n.

    Terms are bounded by pure geometric sequences (the denominators shrink
    toward one on the negative side, so they must be dropped from the bound).
    """
    rho_p = aw * aw
    rho_m = (r * r) / (aw * aw)
    return rho_p ** (n + 1) / (1.0 - rho_p) + rho_m ** (n + 1) / (r * (1.0 - rho_m))


def kernel_diag_info(w: complex, r: float, n_trunc: int = 64) -> tuple[float, float]:
    """Kernel diagonal plus a geometric tail bound beyond the truncation.

    The two tail ratios are |w|^2 (positive indices) and r^2/|w|^2 (negative
    indices); both are strictly below one inside the open annulus.
    """
    aw = _check_point(w, r)
    return kernel_diag(w, r, n_trunc), _tail_bound(aw, r, n_trunc)


def misra_threshold(w: complex, r: float, tail_tol: float = 1e-12) -> float:
    """Reciprocal kernel diagonal with the truncation grown until the relative
    tail estimate is below tail_tol."""
    aw = _check_point(w, r)
    s = 1.0 / (1.0 + r)
    n = 1
    while True:
        tp, tm = _kernel_terms(aw, r, n)
        s += tp + tm
        if n >= 8 and _tail_bound(aw, r, n) < tail_tol * s:
            break
        if n >= _KERNEL_CAP:
            raise TruncationError(f"kernel tail not below {tail_tol:g} after {n} terms")
        n += 1
    return 1.0 / s


def jordan_block(w: complex, h: complex) -> np.ndarray:
    return np.array([[w, h], [0.0, w]], dtype=complex)


def threshold_via_pencil(w: complex, r: float, grid: PencilGrid = MISRA_GRID,
                         plan: TruncationPlan = DEFAULT_PLAN, search_tol: float = 2e-5,
                         tol: Tolerances = DEFAULT_TOL) -> float:
    """Certificate flip point of [[w, h], [0, w]] located by bisection on h >= 0.

    The phase of h is irrelevant (a diagonal unitary similarity moves it onto
    the positive axis), so the search runs over real h in [0, 2]; the kernel
    diagonal never drops below 1/(1+r) > 1/2, keeping every flip point well
    inside the bracket.
    """
    _check_point(w, r)
    ap = AnnulusParams(r)
    if search_tol <= 0.0:
        raise DomainError("search_tol must be positive")

    def certified(h: float) -> bool:
        cert = certify_ar(jordan_block(w, h), ap, grid, plan, tol)
        if cert.verdict == "inconclusive":
            raise DiagnosticError(
                f"certificate inconclusive at h = {h:.6g}: {cert.diagnostics}"
            )
        return cert.certified

    lo, hi = 0.0, 2.0
    if not certified(lo):
        raise DiagnosticError("h = 0 not certified; w may sit too close to the boundary")
    if certified(hi):
        raise DiagnosticError("h = 2 certified; no flip inside the bracket")
    while hi - lo > search_tol:
        mid = 0.5 * (lo + hi)
        if certified(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def sweep_rows(r: float, samples: int, seed: int = 0, grid: PencilGrid = MISRA_GRID,
               plan: TruncationPlan = DEFAULT_PLAN, search_tol: float = 2e-5,
               tol: Tolerances = DEFAULT_TOL) -> list[dict]:
    """Threshold comparison rows at random annulus points (PCG64-seeded).

    Radii stay inside [r + 0.07 (1-r), r + 0.9 (1-r)], away from the boundary
    circles where the finite eps ladder loses accuracy.
    """
    if samples < 1:
        raise DomainError("need at least one sample")
    rng = np.random.default_rng(seed)
    rows = []
    lo = r + 0.07 * (1.0 - r)
    hi = r + 0.9 * (1.0 - r)
    for _ in range(samples):
        aw = lo + (hi - lo) * rng.random()
        w = aw * np.exp(2j * np.pi * rng.random())
        tk = misra_threshold(w, r)
        tp = threshold_via_pencil(w, r, grid, plan, search_tol, tol)
        rows.append({
            "w_re": float(w.real),
            "w_im": float(w.imag),
            "r": r,
            "threshold_kernel": tk,
            "threshold_pencil": tp,
            "rel_gap": abs(tp - tk) / tk,
        })
    return rows
