"""Upper-triangular 2x2 block operators and their rational functional calculus.

Three block kinds are supported:

    tx      [[T, X], [0, T]]            with TX = XT
    hat     [[T1, X(T1-T2)], [0, T2]]   with X commuting with T1 and T2
    general [[T1, Y], [0, T2]]          no commutation assumed

For the commuting kinds, f(block) reduces to n x n arithmetic in f(T), f'(T)
or f(T1) - f(T2); those reductions are exact identities and the heart of the
block certification pipeline.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolationError, DomainError
from .numerics import (
    MAX_DIM,
    Tolerances,
    DEFAULT_TOL,
    as_matrix,
    eigenvalues,
    operator_norm,
    pinv_apply,
)
from .pencil import AnnulusParams
from .rational import RationalFunction, derivative, eval_matrix, poles_off_annulus

KINDS = ("tx", "hat", "general")


def commutation_defect(a: np.ndarray, b: np.ndarray) -> float:
    return operator_norm(a @ b - b @ a)


def check_commutes(a, b, tol: Tolerances = DEFAULT_TOL, what: str = "X") -> None:
    am = as_matrix(a)
    bm = as_matrix(b)
    bound = tol.eq_tol * (1.0 + operator_norm(am) * operator_norm(bm))
    defect = commutation_defect(am, bm)
    if defect > bound:
        raise ContractViolationError(
            f"{what} does not commute within tolerance (defect {defect:.3e} > {bound:.3e})"
        )


@dataclass(frozen=True, eq=False)
class BlockSpec:
    """Ingredients of one block operator; ``x`` is Y itself for kind 'general'."""

    kind: str
    t1: np.ndarray
    x: np.ndarray
    t2: np.ndarray | None = None

    def __init__(self, kind: str, t1, x, t2=None):
        if kind not in KINDS:
            raise DomainError(f"kind must be one of {KINDS}, got {kind!r}")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "t1", as_matrix(t1, cap=MAX_DIM))
        object.__setattr__(self, "x", as_matrix(x, cap=MAX_DIM))
        t2m = self.t1 if t2 is None else as_matrix(t2, cap=MAX_DIM)
        object.__setattr__(self, "t2", t2m)
        n = self.t1.shape[0]
        if self.x.shape[0] != n or self.t2.shape[0] != n:
            raise ContractViolationError("all blocks must share one dimension")

    def to_dict(self) -> dict:
        from .io import matrix_to_dict

        d = {"kind": self.kind, "t1": matrix_to_dict(self.t1), "x": matrix_to_dict(self.x)}
        if self.t2 is not self.t1:
            d["t2"] = matrix_to_dict(self.t2)
        return d

    @staticmethod
    def from_dict(d: dict) -> "BlockSpec":
        from .io import matrix_from_dict

        t2 = matrix_from_dict(d["t2"]) if "t2" in d and d["t2"] is not None else None
        return BlockSpec(d["kind"], matrix_from_dict(d["t1"]), matrix_from_dict(d["x"]), t2)


def assemble(spec: BlockSpec, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Build the 2n x 2n operator, enforcing the commutation contract of the kind."""
    n = spec.t1.shape[0]
    if spec.kind == "tx":
        check_commutes(spec.t1, spec.x, tol)
        top_right = spec.x
    elif spec.kind == "hat":
        check_commutes(spec.t1, spec.x, tol, what="X (against T1)")
        check_commutes(spec.t2, spec.x, tol, what="X (against T2)")
        top_right = spec.x @ (spec.t1 - spec.t2)
    else:
        top_right = spec.x
    out = np.zeros((2 * n, 2 * n), dtype=complex)
    out[:n, :n] = spec.t1
    out[:n, n:] = top_right
    out[n:, n:] = spec.t2
    return out


def _check_annulus_spectrum(t: np.ndarray, ap: AnnulusParams, tol: Tolerances) -> None:
    mods = np.abs(eigenvalues(t))
    slack = tol.psd_tol
    if mods.min() < ap.r - slack or mods.max() > 1.0 + slack:
        raise DomainError(
            f"spectrum moduli [{mods.min():.6g}, {mods.max():.6g}] leave the closed annulus "
            f"[{ap.r}, 1]"
        )


def fcalc_tx(t, x, f: RationalFunction, ap: AnnulusParams,
             tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """f of the tx block through the reduction [[f(T), X f'(T)], [0, f(T)]]."""
    tm = as_matrix(t)
    xm = as_matrix(x)
    check_commutes(tm, xm, tol)
    if not poles_off_annulus(f, ap):
        raise DomainError("f has poles on the closed annulus")
    _check_annulus_spectrum(tm, ap, tol)
    ft = eval_matrix(f, tm, tol)
    fpt = eval_matrix(derivative(f), tm, tol)
    n = tm.shape[0]
    out = np.zeros((2 * n, 2 * n), dtype=complex)
    out[:n, :n] = ft
    out[:n, n:] = xm @ fpt
    out[n:, n:] = ft
    return out


def fcalc_hat(t1, t2, x, f: RationalFunction, ap: AnnulusParams,
              tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """f of the hat block through [[f(T1), X (f(T1) - f(T2))], [0, f(T2)]]."""
    t1m = as_matrix(t1)
    t2m = as_matrix(t2)
    xm = as_matrix(x)
    check_commutes(t1m, xm, tol, what="X (against T1)")
    check_commutes(t2m, xm, tol, what="X (against T2)")
    if not poles_off_annulus(f, ap):
        raise DomainError("f has poles on the closed annulus")
    _check_annulus_spectrum(t1m, ap, tol)
    _check_annulus_spectrum(t2m, ap, tol)
    f1 = eval_matrix(f, t1m, tol)
    f2 = eval_matrix(f, t2m, tol)
    n = t1m.shape[0]
    out = np.zeros((2 * n, 2 * n), dtype=complex)
    out[:n, :n] = f1
    out[:n, n:] = xm @ (f1 - f2)
    out[n:, n:] = f2
    return out


def solve_commutant_factor(t1, t2, y, tol: Tolerances = DEFAULT_TOL):
    """Least-squares X with X (T1 - T2) = Y, plus the residual of that equation.

    When T1 - T2 is invertible the solution is exact and the general block with
    off-diagonal Y coincides with the hat block built from X.  For singular
    T1 - T2 the returned X only matches Y on the attainable range; the residual
    quantifies what is left over, and no certification claim is attached.
    """
    t1m = as_matrix(t1)
    t2m = as_matrix(t2)
    ym = as_matrix(y)
    diff = t1m - t2m
    # X diff = Y  <=>  diff* X* = Y*; pinv through the Gram form keeps rank_tol semantics
    gram = diff @ diff.conj().T
    xh = pinv_apply(gram, diff @ ym.conj().T, tol)
    x = xh.conj().T
    residual = operator_norm(x @ diff - ym) / (1.0 + operator_norm(ym))
    return x, residual
