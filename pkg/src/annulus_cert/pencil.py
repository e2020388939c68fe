"""Evaluation of the annulus operator pencil at scalars and matrices.

The pencil at regularization eps and unimodular alpha is the bilateral series

    Gamma(z) = sum_k  c_k (alpha z)^k,   c_k = 2 (1-eps)^k / (1 + (1-eps)^{2k} r^k),

which converges on the band (1-eps) r <= |z| <= 1/(1-eps).  Naive evaluation
is numerically fatal: c_k underflows while z^k overflows on the negative side,
even though their product decays geometrically.  Everything here therefore
works with the folded terms

    c_k (alpha z)^k = a_k x^k        (k >= 0,  x = (1-eps) alpha z)
    c_{-m} (alpha z)^{-m} = a_m y^m  (m >= 1,  y = (1-eps) r / (alpha z))

where a_j = 2 / (1 + d^j) and d = (1-eps)^2 r, so both sides are power series
with moduli strictly below 1 on the band and O(1) coefficients.  The matrix
case replaces x, y by the scaled operators (1-eps) alpha T and
(1-eps) r (alpha T)^{-1}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, TruncationError
from .numerics import Tolerances, DEFAULT_TOL, as_matrix, eigenvalues, inverse

# Relative slack when testing membership in the convergence band.
BAND_SLACK = 1e-9

# Consecutive sub-threshold terms required before a side of the bilateral
# sum is allowed to stop; guards against transient growth of non-normal powers.
_DECAY_RUN = 3


@dataclass(frozen=True)
class AnnulusParams:
    """The annulus { z : r < |z| < 1 }."""

    r: float

    def __post_init__(self):
        if not (0.0 < self.r < 1.0):
            raise DomainError(f"inner radius must lie in (0, 1), got {self.r}")


@dataclass(frozen=True)
class PencilPoint:
    """A single (eps, alpha) evaluation point, alpha on the unit circle."""

    eps: float
    alpha: complex = 1.0 + 0.0j

    def __post_init__(self):
        if not (0.0 < self.eps < 1.0):
            raise DomainError(f"eps must lie in (0, 1), got {self.eps}")
        if abs(abs(self.alpha) - 1.0) > 1e-12:
            raise DomainError(f"alpha must be unimodular, got |alpha| = {abs(self.alpha)}")


@dataclass(frozen=True)
class TruncationPlan:
    """Bilateral truncation control.

    With ``adaptive`` set, each side of the sum stops once its term norms stay
    below tail_tol * (1 + accumulated term norms) for three consecutive
    indices; ``n_max`` is the hard per-side cap.  With ``adaptive`` unset both
    sides run to exactly ``n_max`` terms.
    """

    n_max: int = 4096
    tail_tol: float = 1e-10
    adaptive: bool = True

    def __post_init__(self):
        if self.n_max < 8:
            raise DomainError(f"n_max must be at least 8, got {self.n_max}")
        if not self.tail_tol > 0.0:
            raise DomainError("tail_tol must be positive")


DEFAULT_PLAN = TruncationPlan()


def gamma_coeff(k: int, eps: float, r: float) -> float:
    """Series coefficient c_k, evaluated in the overflow-free algebraic form."""
    if not (0.0 < eps < 1.0):
        raise DomainError(f"eps must lie in (0, 1), got {eps}")
    if not (0.0 < r < 1.0):
        raise DomainError(f"r must lie in (0, 1), got {r}")
    b = 1.0 - eps
    d = b * b * r
    if k >= 0:
        return 2.0 * b**k / (1.0 + d**k)
    m = -k
    return 2.0 * (b * r) ** m / (1.0 + d**m)


def re_part(a) -> np.ndarray:
    """Hermitian real part (A + A*)/2."""
    m = as_matrix(a)
    return 0.5 * (m + m.conj().T)


def _band(eps: float, r: float) -> tuple[float, float]:
    return (1.0 - eps) * r, 1.0 / (1.0 - eps)


def _check_scalar_band(absz: float, eps: float, r: float) -> None:
    lo, hi = _band(eps, r)
    if absz < lo * (1.0 - BAND_SLACK) or absz > hi * (1.0 + BAND_SLACK):
        raise DomainError(
            f"|z| = {absz:.6g} outside the convergence band [{lo:.6g}, {hi:.6g}] at eps = {eps}"
        )


def _envelope_terms(rho: float, tail_tol: float, n_max: int, adaptive: bool) -> int:
    """Smallest N with geometric tail bound 2 rho^(N+1)/(1-rho) < tail_tol."""
    if not adaptive:
        return n_max
    if rho <= 0.0:
        return 8
    if rho >= 1.0:
        raise TruncationError(f"series ratio {rho:.6g} >= 1; tail cannot be bounded")
    n = int(math.ceil(math.log(tail_tol * (1.0 - rho) / 2.0) / math.log(rho)))
    n = max(n, 8)
    if n > n_max:
        raise TruncationError(f"need {n} terms per side, exceeding the cap {n_max}")
    return n


def _scalar_sum(z, pt: PencilPoint, ap: AnnulusParams, plan: TruncationPlan,
                derivative: bool = False):
    """Shared batched evaluator.  Returns (values, n_pos, n_neg).

    With ``derivative`` it returns sum_k k c_k (alpha z)^k instead of Gamma;
    dividing by z then gives the z-derivative of z -> Gamma(alpha z).
    """
    zs = np.atleast_1d(np.asarray(z, dtype=complex))
    absz = np.abs(zs)
    if np.any(absz == 0.0):
        raise DomainError("z = 0 is outside every convergence band")
    _check_scalar_band(float(absz.min()), pt.eps, ap.r)
    _check_scalar_band(float(absz.max()), pt.eps, ap.r)
    b = 1.0 - pt.eps
    d = b * b * ap.r
    x = b * pt.alpha * zs
    y = b * ap.r / (pt.alpha * zs)
    n_pos = _envelope_terms(float(np.max(np.abs(x))), plan.tail_tol, plan.n_max, plan.adaptive)
    n_neg = _envelope_terms(float(np.max(np.abs(y))), plan.tail_tol, plan.n_max, plan.adaptive)
    ks = np.arange(n_pos + 1, dtype=float)
    a_pos = 2.0 / (1.0 + d**ks)
    ms = np.arange(1, n_neg + 1, dtype=float)
    a_neg = 2.0 / (1.0 + d**ms)
    if derivative:
        a_pos = a_pos * ks
        a_neg = a_neg * ms
    acc = np.zeros_like(zs)
    for k in range(n_pos, 0, -1):
        acc = (acc + a_pos[k]) * x
    acc = acc + a_pos[0]
    acc_n = np.zeros_like(zs)
    for m in range(n_neg, 0, -1):
        acc_n = (acc_n + a_neg[m - 1]) * y
    sign = -1.0 if derivative else 1.0
    return acc + sign * acc_n, n_pos, n_neg


def gamma_scalar(z: complex, pt: PencilPoint, ap: AnnulusParams,
                 plan: TruncationPlan = DEFAULT_PLAN) -> complex:
    """Gamma at a single scalar z; see ``gamma_scalar_info`` for the N used."""
    vals, _, _ = _scalar_sum(z, pt, ap, plan)
    return complex(vals[0])


def gamma_scalar_info(z: complex, pt: PencilPoint, ap: AnnulusParams,
                      plan: TruncationPlan = DEFAULT_PLAN) -> tuple[complex, int, int]:
    """Gamma at z together with the per-side truncation indices used."""
    vals, n_pos, n_neg = _scalar_sum(z, pt, ap, plan)
    return complex(vals[0]), n_pos, n_neg


def gamma_scalar_batch(z, pt: PencilPoint, ap: AnnulusParams,
                       plan: TruncationPlan = DEFAULT_PLAN) -> np.ndarray:
    """Vectorized Gamma over an array of scalars (shared truncation index)."""
    vals, _, _ = _scalar_sum(z, pt, ap, plan)
    return vals


def gamma_scalar_derivative(z: complex, pt: PencilPoint, ap: AnnulusParams,
                            plan: TruncationPlan = DEFAULT_PLAN) -> complex:
    """d/dz of z -> Gamma(alpha z), at a scalar z."""
    vals, _, _ = _scalar_sum(z, pt, ap, plan, derivative=True)
    return complex(vals[0] / z)


class MatrixPencil:
    """Cached pencil evaluation for one matrix T at one eps.

    Stores ladders of the scaled powers ((1-eps) T)^k and ((1-eps) r T^-1)^m
    together with their Frobenius norms, so sweeps over many alphas reuse the
    expensive part.  Alpha enters only through scalar phases.
    """

    def __init__(self, t: np.ndarray, eps: float, ap: AnnulusParams,
                 plan: TruncationPlan = DEFAULT_PLAN, tol: Tolerances = DEFAULT_TOL):
        if not (0.0 < eps < 1.0):
            raise DomainError(f"eps must lie in (0, 1), got {eps}")
        self.t = as_matrix(t)
        self.eps = eps
        self.ap = ap
        self.plan = plan
        self.tol = tol
        b = 1.0 - eps
        lam = eigenvalues(self.t)
        lo, hi = _band(eps, ap.r)
        mods = np.abs(lam)
        if mods.min() < lo * (1.0 - BAND_SLACK) or mods.max() > hi * (1.0 + BAND_SLACK):
            raise DomainError(
                f"spectrum moduli [{mods.min():.6g}, {mods.max():.6g}] leave the band "
                f"[{lo:.6g}, {hi:.6g}] at eps = {eps}"
            )
        self._x = b * self.t
        self._y = b * ap.r * inverse(self.t, tol)
        n = self.t.shape[0]
        self._pos = [np.eye(n, dtype=complex)]
        self._neg = [np.eye(n, dtype=complex)]
        self._pos_norm = [math.sqrt(n)]
        self._neg_norm = [math.sqrt(n)]
        d = b * b * ap.r
        self._coeff = lambda j: 2.0 / (1.0 + d**float(j))
        self._n_gamma: tuple[int, int] | None = None
        self._n_deriv: tuple[int, int] | None = None

    def _extend(self, side: list, norms: list, step: np.ndarray, upto: int) -> None:
        while len(side) <= upto:
            side.append(side[-1] @ step)
            norms.append(float(np.linalg.norm(side[-1])))

    def _term_norm(self, positive: bool, j: int, weighted: bool) -> float:
        if positive:
            self._extend(self._pos, self._pos_norm, self._x, j)
            base = self._coeff(j) * self._pos_norm[j]
        else:
            self._extend(self._neg, self._neg_norm, self._y, j)
            base = self._coeff(j) * self._neg_norm[j]
        return base * j if weighted else base

    def _stop_indices(self, weighted: bool) -> tuple[int, int]:
        """Interleaved bilateral scan with the 3-consecutive-decay stop rule."""
        plan = self.plan
        if not plan.adaptive:
            return plan.n_max, plan.n_max
        acc = 0.0 if weighted else self._term_norm(True, 0, False)
        run_p = run_n = 0
        stop_p = stop_n = None
        j = 1
        while stop_p is None or stop_n is None:
            if j > plan.n_max:
                side = "positive" if stop_p is None else "negative"
                raise TruncationError(
                    f"{side} side of the bilateral sum not decayed after {plan.n_max} "
                    f"terms at eps = {self.eps} (tail_tol = {plan.tail_tol:g})"
                )
            for positive in (True, False):
                if (stop_p if positive else stop_n) is not None:
                    continue
                t = self._term_norm(positive, j, weighted)
                small = t < plan.tail_tol * (1.0 + acc)
                acc += t
                if positive:
                    run_p = run_p + 1 if small else 0
                    if run_p >= _DECAY_RUN:
                        stop_p = j
                else:
                    run_n = run_n + 1 if small else 0
                    if run_n >= _DECAY_RUN:
                        stop_n = j
            j += 1
        return stop_p, stop_n

    def gamma_indices(self) -> tuple[int, int]:
        if self._n_gamma is None:
            self._n_gamma = self._stop_indices(weighted=False)
        return self._n_gamma

    def deriv_indices(self) -> tuple[int, int]:
        if self._n_deriv is None:
            self._n_deriv = self._stop_indices(weighted=True)
        return self._n_deriv

    def _phased_sum(self, alphas: np.ndarray, n_pos: int, n_neg: int,
                    weighted: bool) -> np.ndarray:
        """sum_j w_j alpha^j X^j (+/-) sum_m w_m conj(alpha)^m Y^m, batched over alpha."""
        self._extend(self._pos, self._pos_norm, self._x, n_pos)
        self._extend(self._neg, self._neg_norm, self._y, n_neg)
        n = self.t.shape[0]
        out = np.zeros((alphas.size, n, n), dtype=complex)
        for positive, count in ((True, n_pos), (False, n_neg)):
            js = np.arange(0 if positive else 1, count + 1, dtype=float)
            if js.size == 0:
                continue
            coeffs = np.array([self._coeff(j) for j in js])
            if weighted:
                # index weights j; the negative side enters with sign -m
                coeffs = coeffs * js if positive else -coeffs * js
            base = alphas if positive else np.conj(alphas)
            phases = base[:, None] ** js[None, :] * coeffs[None, :]
            stack = self._pos if positive else self._neg
            lo = 0 if positive else 1
            # chunk the contraction to bound memory at large dimension
            for start in range(0, js.size, 512):
                end = min(start + 512, js.size)
                terms = np.stack(stack[lo + start : lo + end])
                out += np.einsum("ak,kij->aij", phases[:, start:end], terms)
        return out

    def gamma_for_alphas(self, alphas: np.ndarray) -> np.ndarray:
        n_pos, n_neg = self.gamma_indices()
        return self._phased_sum(np.asarray(alphas, dtype=complex), n_pos, n_neg, weighted=False)

    def derivative_for_alphas(self, alphas: np.ndarray) -> np.ndarray:
        """z-derivative of z -> Gamma(alpha z) at T, batched over alpha."""
        n_pos, n_neg = self.deriv_indices()
        core = self._phased_sum(np.asarray(alphas, dtype=complex), n_pos, n_neg, weighted=True)
        tinv = self._y / ((1.0 - self.eps) * self.ap.r)
        return np.einsum("ij,ajk->aik", tinv, core)


def gamma_matrix(t, pt: PencilPoint, ap: AnnulusParams,
                 plan: TruncationPlan = DEFAULT_PLAN, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Gamma(alpha T) for a square matrix T with spectrum in the band."""
    mp = MatrixPencil(t, pt.eps, ap, plan, tol)
    return mp.gamma_for_alphas(np.array([pt.alpha]))[0]


def gamma_matrix_info(t, pt: PencilPoint, ap: AnnulusParams,
                      plan: TruncationPlan = DEFAULT_PLAN,
                      tol: Tolerances = DEFAULT_TOL) -> tuple[np.ndarray, int, int]:
    mp = MatrixPencil(t, pt.eps, ap, plan, tol)
    n_pos, n_neg = mp.gamma_indices()
    return mp.gamma_for_alphas(np.array([pt.alpha]))[0], n_pos, n_neg


def gamma_derivative_matrix(t, pt: PencilPoint, ap: AnnulusParams,
                            plan: TruncationPlan = DEFAULT_PLAN,
                            tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Derivative pencil: sum_k k c_k alpha^k T^(k-1).

    This is the z-derivative of z -> Gamma(alpha z) evaluated at T, the unique
    convention under which Gamma(alpha T_X) has top-right block X times this
    matrix when X commutes with T.
    """
    mp = MatrixPencil(t, pt.eps, ap, plan, tol)
    return mp.derivative_for_alphas(np.array([pt.alpha]))[0]
