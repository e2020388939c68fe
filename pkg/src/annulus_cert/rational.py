"""Rational functions with poles off the closed annulus.

Coefficients are stored ascending.  Evaluation on matrices goes through
p(T) q(T)^{-1}; pole location uses companion-matrix eigenvalues so polynomial
roots inherit the accuracy contract of the shared eigensolver.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SingularityError
from .numerics import Tolerances, DEFAULT_TOL, as_matrix, eigenvalues, identity_like, inverse
from .pencil import AnnulusParams

# Slack around the boundary circles when classifying pole locations.
POLE_SLACK = 1e-9


def _trim(c: np.ndarray) -> np.ndarray:
    c = np.asarray(c, dtype=complex).ravel()
    nz = np.nonzero(np.abs(c) > 0.0)[0]
    if nz.size == 0:
        return np.zeros(1, dtype=complex)
    return c[: nz[-1] + 1]


@dataclass(frozen=True, eq=False)
class RationalFunction:
    """f = p / q with ascending complex coefficient arrays."""

    p: np.ndarray
    q: np.ndarray

    def __init__(self, p, q):
        object.__setattr__(self, "p", _trim(p))
        object.__setattr__(self, "q", _trim(q))
        if self.q.size == 1 and self.q[0] == 0:
            raise DomainError("denominator is identically zero")

    def degree(self) -> tuple[int, int]:
        return self.p.size - 1, self.q.size - 1

    def __call__(self, z):
        zs = np.asarray(z, dtype=complex)
        return polyval(self.p, zs) / polyval(self.q, zs)

    def to_dict(self) -> dict:
        return {
            "p": [[float(c.real), float(c.imag)] for c in self.p],
            "q": [[float(c.real), float(c.imag)] for c in self.q],
        }

    @staticmethod
    def from_dict(d: dict) -> "RationalFunction":
        p = [complex(re, im) for re, im in d["p"]]
        q = [complex(re, im) for re, im in d["q"]]
        return RationalFunction(p, q)


def polyval(c: np.ndarray, z):
    """Horner evaluation of an ascending-coefficient polynomial."""
    zs = np.asarray(z, dtype=complex)
    acc = np.zeros_like(zs)
    for a in c[::-1]:
        acc = acc * zs + a
    return acc


def polyder(c: np.ndarray) -> np.ndarray:
    c = np.asarray(c, dtype=complex)
    if c.size <= 1:
        return np.zeros(1, dtype=complex)
    return c[1:] * np.arange(1, c.size)


def polymul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.convolve(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def poly_roots(c: np.ndarray) -> np.ndarray:
    """Roots via the companion matrix of the monic normalization."""
    c = _trim(c)
    n = c.size - 1
    if n == 0:
        return np.zeros(0, dtype=complex)
    monic = c / c[-1]
    comp = np.zeros((n, n), dtype=complex)
    if n > 1:
        comp[1:, :-1] = np.eye(n - 1)
    comp[:, -1] = -monic[:-1]
    return eigenvalues(comp)


def poles_off_annulus(f: RationalFunction, ap: AnnulusParams) -> bool:
    """True iff every denominator root avoids the closed annulus (with slack)."""
    roots = poly_roots(f.q)
    mods = np.abs(roots)
    return bool(np.all((mods < ap.r - POLE_SLACK) | (mods > 1.0 + POLE_SLACK)))


def polyval_matrix(c: np.ndarray, t: np.ndarray) -> np.ndarray:
    acc = np.zeros_like(t)
    eye = identity_like(t)
    for a in c[::-1]:
        acc = acc @ t + a * eye
    return acc


def eval_matrix(f: RationalFunction, t, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """f(T) = p(T) q(T)^{-1}."""
    tm = as_matrix(t)
    qt = polyval_matrix(f.q, tm)
    try:
        qinv = inverse(qt, tol)
    except SingularityError as exc:
        raise SingularityError(f"q(T) is singular: {exc}") from exc
    return polyval_matrix(f.p, tm) @ qinv


def derivative(f: RationalFunction) -> RationalFunction:
    """(p' q - p q') / q**2."""
    num = polymul(polyder(f.p), f.q)
    sub = polymul(f.p, polyder(f.q))
    n = max(num.size, sub.size)
    num = np.pad(num, (0, n - num.size))
    sub = np.pad(sub, (0, n - sub.size))
    return RationalFunction(num - sub, polymul(f.q, f.q))


def _golden_max(fun, lo: float, hi: float, iters: int = 60) -> float:
    """Golden-section maximization of a smooth scalar function on [lo, hi]."""
    inv_phi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = fun(c), fun(d)
    for _ in range(iters):
        if fc < fd:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = fun(d)
        else:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = fun(c)
    return max(fc, fd)


def sup_on_annulus(f: RationalFunction, ap: AnnulusParams, m: int = 1024) -> float:
    """Sup of |f| over the two boundary circles.

    Samples m equispaced angles per circle, then refines around the best three
    samples of each circle by golden section; the maximum principle makes the
    boundary search exhaustive for pole-free f.
    """
    if m < 8:
        raise DomainError("need at least 8 samples per circle")
    if not poles_off_annulus(f, ap):
        raise DomainError("f has poles on or inside the closed annulus")
    best = 0.0
    step = 2.0 * np.pi / m
    theta = step * np.arange(m)
    for rho in (ap.r, 1.0):
        vals = np.abs(f(rho * np.exp(1j * theta)))
        best = max(best, float(np.max(vals)))
        mod = lambda t: float(np.abs(f(rho * np.exp(1j * t))))
        for idx in np.argsort(vals)[-3:]:
            t0 = theta[idx]
            best = max(best, _golden_max(mod, t0 - step, t0 + step))
    return best
