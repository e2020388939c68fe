"""Annulus-contraction certification and the theorem-level equivalence checks.

A certificate is a sampled object: positivity of the pencil real part is
tested on a finite (eps, alpha) grid, so "certified" means no violation was
found at the recorded grid density, while "refuted" is a hard disproof
(robust to truncation error, which the plan keeps orders of magnitude below
the refutation threshold).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .blocks import BlockSpec, assemble, check_commutes
from .errors import DomainError, TruncationError
from .factorization import (
    FactorResult,
    compress_through,
    factor_through,
    halmos_unitary,
)
from .numerics import (
    Tolerances,
    DEFAULT_TOL,
    as_matrix,
    eigenvalues,
    operator_norm,
    sqrt_psd,
)
from .pencil import (
    AnnulusParams,
    MatrixPencil,
    PencilPoint,
    TruncationPlan,
    DEFAULT_PLAN,
    re_part,
)
from .rational import (
    RationalFunction,
    eval_matrix,
    polymul,
    poly_roots,
    sup_on_annulus,
)

VERDICT_CERTIFIED = "certified"
VERDICT_REFUTED = "refuted"
VERDICT_INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class PencilGrid:
    """Sampled surrogate for the (eps in (0,1), alpha on the circle) continuum."""

    eps_values: tuple = (0.5, 0.25, 0.1, 0.05, 0.02, 0.01)
    alpha_count: int = 64

    def __post_init__(self):
        if len(self.eps_values) == 0:
            raise DomainError("need at least one eps value")
        for e in self.eps_values:
            if not (0.0 < e < 1.0):
                raise DomainError(f"eps values must lie in (0, 1), got {e}")
        if self.alpha_count < 8:
            raise DomainError(f"alpha_count must be at least 8, got {self.alpha_count}")

    def alphas(self) -> np.ndarray:
        j = np.arange(self.alpha_count)
        return np.exp(2j * np.pi * j / self.alpha_count)

    def to_dict(self) -> dict:
        return {"eps_values": list(self.eps_values), "alpha_count": self.alpha_count}


DEFAULT_GRID = PencilGrid()


@dataclass(frozen=True)
class PointRecord:
    eps: float
    alpha: complex
    lambda_min: float
    trunc_n: int
    scale: float

    def to_dict(self) -> dict:
        return {
            "eps": self.eps,
            "alpha": [self.alpha.real, self.alpha.imag],
            "lambda_min": self.lambda_min,
            "trunc_n": self.trunc_n,
        }


@dataclass(frozen=True)
class Certificate:
    verdict: str
    spectrum_ok: bool
    min_margin: float | None
    worst_point: PencilPoint | None
    records: tuple = ()
    grid: PencilGrid = DEFAULT_GRID
    diagnostics: tuple = ()

    @property
    def certified(self) -> bool:
        return self.verdict == VERDICT_CERTIFIED

    def to_dict(self) -> dict:
        worst = None
        if self.worst_point is not None:
            worst = {
                "eps": self.worst_point.eps,
                "alpha": [self.worst_point.alpha.real, self.worst_point.alpha.imag],
            }
        return {
            "verdict": self.verdict,
            "spectrum_ok": self.spectrum_ok,
            "min_margin": self.min_margin,
            "worst": worst,
            "grid": self.grid.to_dict(),
            "records": [rec.to_dict() for rec in self.records],
            "diagnostics": list(self.diagnostics),
        }


def spectrum_in_annulus(t, ap: AnnulusParams, tol: float = DEFAULT_TOL.psd_tol) -> bool:
    """True iff every eigenvalue modulus lies in [r - tol, 1 + tol]."""
    mods = np.abs(eigenvalues(as_matrix(t)))
    return bool(np.all((mods >= ap.r - tol) & (mods <= 1.0 + tol)))


def _eps_records(t, eps, alphas, ap, plan, tol):
    """Margins of Re Gamma(alpha T) for all alphas at one eps."""
    mp = MatrixPencil(t, eps, ap, plan, tol)
    gam = mp.gamma_for_alphas(alphas)
    n_pos, n_neg = mp.gamma_indices()
    herm = 0.5 * (gam + np.conj(np.swapaxes(gam, 1, 2)))
    lam_min = np.linalg.eigvalsh(herm)[:, 0]
    scales = 1.0 + np.linalg.svd(gam, compute_uv=False)[:, 0]
    trunc = max(n_pos, n_neg)
    return [
        PointRecord(eps=eps, alpha=complex(a), lambda_min=float(lm), trunc_n=trunc,
                    scale=float(sc))
        for a, lm, sc in zip(alphas, lam_min, scales)
    ]


def certify_ar(t, ap: AnnulusParams, grid: PencilGrid = DEFAULT_GRID,
               plan: TruncationPlan = DEFAULT_PLAN, tol: Tolerances = DEFAULT_TOL,
               threads: int | None = None) -> Certificate:
    """Decide annulus contractivity on the sampled grid.

    Spectrum containment is checked first; the pencil sweep then records the
    smallest eigenvalue of Re Gamma(alpha T) at every grid point.  Any point
    below -psd_tol * (1 + ||Gamma||) refutes.  Truncation failures downgrade
    the verdict to inconclusive unless a refutation was found anyway.
    """
    tm = as_matrix(t)
    if not spectrum_in_annulus(tm, ap, tol.psd_tol):
        return Certificate(VERDICT_REFUTED, False, None, None, (), grid,
                           ("spectrum outside the closed annulus",))
    alphas = grid.alphas()
    results: dict[int, list[PointRecord]] = {}
    failures: dict[int, str] = {}

    def run(idx_eps):
        idx, eps = idx_eps
        try:
            results[idx] = _eps_records(tm, eps, alphas, ap, plan, tol)
        except TruncationError as exc:
            failures[idx] = f"eps={eps}: {exc}"

    jobs = list(enumerate(grid.eps_values))
    nthreads = 1 if threads is None else max(1, min(int(threads), len(jobs)))
    if nthreads <= 1:
        for job in jobs:
            run(job)
    else:
        with ThreadPoolExecutor(max_workers=nthreads) as pool:
            list(pool.map(run, jobs))

    records: list[PointRecord] = []
    for idx in sorted(results):
        records.extend(results[idx])
    diagnostics = tuple(failures[idx] for idx in sorted(failures))

    if not records:
        return Certificate(VERDICT_INCONCLUSIVE, True, None, None, (), grid, diagnostics)
    slack = np.array([rec.lambda_min + tol.psd_tol * rec.scale for rec in records])
    worst_idx = int(np.argmin(slack))
    worst = records[worst_idx]
    min_margin = float(min(rec.lambda_min for rec in records))
    refuted = slack[worst_idx] < 0.0
    if refuted:
        verdict = VERDICT_REFUTED
    elif diagnostics:
        verdict = VERDICT_INCONCLUSIVE
    else:
        verdict = VERDICT_CERTIFIED
    return Certificate(
        verdict,
        True,
        min_margin,
        PencilPoint(worst.eps, worst.alpha),
        tuple(records),
        grid,
        diagnostics,
    )


# --- von Neumann sampling -------------------------------------------------

@dataclass(frozen=True, eq=False)
class VnReport:
    worst_ratio: float
    witness: RationalFunction | None
    violation: bool
    count: int
    seed: int

    def to_dict(self) -> dict:
        return {
            "worst_ratio": self.worst_ratio,
            "witness": None if self.witness is None else self.witness.to_dict(),
            "violation": self.violation,
            "count": self.count,
            "seed": self.seed,
        }


def _fat_band(ap: AnnulusParams) -> tuple[float, float]:
    pad = 0.1 * (1.0 - ap.r)
    return ap.r - pad, 1.0 + pad


def _poles_off_fat(f: RationalFunction, ap: AnnulusParams) -> bool:
    lo, hi = _fat_band(ap)
    mods = np.abs(poly_roots(f.q))
    return bool(np.all((mods < lo - 1e-12) | (mods > hi + 1e-12)))


def _plain_rational(rng, ap: AnnulusParams) -> RationalFunction:
    """Gaussian numerator; denominator roots at the origin or outside the fat band."""
    lo, hi = _fat_band(ap)
    nd = int(rng.integers(0, 5))
    dd = int(rng.integers(0, 5))
    p = rng.standard_normal(nd + 1) + 1j * rng.standard_normal(nd + 1)
    q = np.array([1.0 + 0j])
    for _ in range(dd):
        kind = rng.random()
        ang = 2.0 * np.pi * rng.random()
        if kind < 0.4:
            root = 0.0 + 0.0j
        elif kind < 0.7:
            root = lo * (0.35 + 0.6 * rng.random()) * np.exp(1j * ang)
        else:
            root = hi * (1.03 + 1.5 * rng.random() ** 2) * np.exp(1j * ang)
        q = polymul(q, np.array([-root, 1.0 + 0j]))
    return RationalFunction(p, q)


def _blaschke_pair(lam: complex, ap: AnnulusParams, phase: float) -> RationalFunction | None:
    """Product of the outer-disk Blaschke factor at lam and an inner-circle
    factor vanishing on |z| = r/|lam|; None when a pole hits the fat band."""
    r = ap.r
    z2 = (r / np.conj(lam)) * np.exp(1j * phase)
    p_out = np.array([-lam, 1.0 + 0j])
    q_out = np.array([1.0 + 0j, -np.conj(lam)])
    scale = r / abs(z2)
    p_in = scale * np.array([-z2, 1.0 + 0j])
    q_in = np.array([-r * r / np.conj(z2), 1.0 + 0j])
    f = RationalFunction(polymul(p_out, p_in), polymul(q_out, q_in))
    return f if _poles_off_fat(f, ap) else None


def _recenter(f: RationalFunction, sup: float, value: complex,
              ap: AnnulusParams) -> RationalFunction | None:
    """Compose with a disk automorphism sending value/sup to 0; degree is preserved."""
    c = value / sup
    if abs(c) > 0.999:
        return None
    n = max(f.p.size, f.q.size)
    p = np.pad(f.p, (0, n - f.p.size))
    q = np.pad(f.q, (0, n - f.q.size))
    for damp in (1.0, 0.9, 0.7):
        cc = damp * c
        cand = RationalFunction(p - (cc * sup) * q, sup * q - np.conj(cc) * p)
        if _poles_off_fat(cand, ap):
            return cand
    return None


def vn_sample(t, ap: AnnulusParams, count: int = 100, seed: int = 0, m: int = 1024,
              tol: Tolerances = DEFAULT_TOL) -> VnReport:
    """Worst ratio ||f(T)|| / sup |f| over sampled rational test functions.

    Functions have numerator and denominator degree at most four with poles
    rejected inside the annulus fattened by ten percent of (1 - r).  Each trial
    draws either a plain random rational or a Blaschke-type product aimed at a
    random eigenvalue of T; a trial whose ratio stays below one retries once
    after recentering the function at an eigenvalue.  A worst ratio above
    1 + psd_tol disproves contractivity; ratios near one prove nothing.
    """
    tm = as_matrix(t)
    if not spectrum_in_annulus(tm, ap, tol.psd_tol):
        raise DomainError("vn_sample requires the spectrum inside the closed annulus")
    eigs = eigenvalues(tm)
    rng = np.random.default_rng(seed)
    worst = 0.0
    witness: RationalFunction | None = None

    def ratio_of(f: RationalFunction) -> float:
        sup = sup_on_annulus(f, ap, m)
        if sup < 1e-14:
            return 0.0
        return operator_norm(eval_matrix(f, tm, tol)) / sup

    for _ in range(count):
        lam = complex(eigs[int(rng.integers(0, eigs.size))])
        f: RationalFunction | None = None
        if rng.random() < 0.5:
            f = _blaschke_pair(lam, ap, 2.0 * np.pi * rng.random())
        if f is None:
            f = _plain_rational(rng, ap)
        ratio = ratio_of(f)
        if ratio <= 1.0:
            sup = sup_on_annulus(f, ap, m)
            if sup > 1e-14:
                cand = _recenter(f, sup, complex(f(lam)), ap)
                if cand is not None:
                    r2 = ratio_of(cand)
                    if r2 > ratio:
                        ratio, f = r2, cand
        if ratio > worst:
            worst, witness = ratio, f
    return VnReport(worst, witness, worst > 1.0 + tol.psd_tol, count, seed)


# --- theorem-level block checks --------------------------------------------

@dataclass(frozen=True, eq=False)
class ThmPointRecord:
    eps: float
    alpha: complex
    factor: FactorResult
    recon_residual: float | None

    def to_dict(self, tol: Tolerances = DEFAULT_TOL) -> dict:
        d = self.factor.to_dict(tol)
        d.update({
            "eps": self.eps,
            "alpha": [self.alpha.real, self.alpha.imag],
            "recon_residual": self.recon_residual,
        })
        return d


@dataclass(frozen=True, eq=False)
class ThmReport:
    points: tuple
    factor_verdict: bool
    certificate: Certificate
    agree: bool
    max_k_norm: float
    max_recon_residual: float | None

    def to_dict(self, tol: Tolerances = DEFAULT_TOL) -> dict:
        return {
            "factor_verdict": self.factor_verdict,
            "certificate": self.certificate.to_dict(),
            "agree": self.agree,
            "max_k_norm": self.max_k_norm,
            "max_recon_residual": self.max_recon_residual,
            "points": [p.to_dict(tol) for p in self.points],
        }


def _factor_points(pq_r_iter, tol: Tolerances):
    """Douglas extraction plus Halmos reconstruction at each grid point."""
    points = []
    max_k = 0.0
    max_recon = None
    all_pass = True
    for eps, alpha, p, q, r in pq_r_iter:
        sp = sqrt_psd(p, tol)
        sq = sqrt_psd(q, tol)
        fr = factor_through(sp, sq, r, tol)
        recon = None
        if fr.passes(tol):
            u = halmos_unitary(fr.k, tol)
            recon = float(
                operator_norm(compress_through(u, sp, sq) - r) / (1.0 + operator_norm(r))
            )
            max_recon = recon if max_recon is None else max(max_recon, recon)
        else:
            all_pass = False
        max_k = max(max_k, fr.k_norm)
        points.append(ThmPointRecord(eps, complex(alpha), fr, recon))
    return points, all_pass, max_k, max_recon


def check_thm_block1(t, x, ap: AnnulusParams, grid: PencilGrid = DEFAULT_GRID,
                     plan: TruncationPlan = DEFAULT_PLAN,
                     tol: Tolerances = DEFAULT_TOL) -> ThmReport:
    """Equivalence data for the same-diagonal block [[T, X], [0, T]].

    At each grid point the factorization P^{1/2} K P^{1/2} = X Gamma'(alpha T)/2
    with P = Re Gamma(alpha T) is attempted; the all-points verdict is compared
    with the direct certificate of the assembled block.
    """
    tm = as_matrix(t)
    xm = as_matrix(x)
    check_commutes(tm, xm, tol)
    block = assemble(BlockSpec("tx", tm, xm), tol)
    cert = certify_ar(block, ap, grid, plan, tol)
    alphas = grid.alphas()

    def iter_points():
        for eps in grid.eps_values:
            mp = MatrixPencil(tm, eps, ap, plan, tol)
            gam = mp.gamma_for_alphas(alphas)
            der = mp.derivative_for_alphas(alphas)
            for i, alpha in enumerate(alphas):
                p = re_part(gam[i])
                yield eps, alpha, p, p, xm @ der[i] / 2.0

    points, all_pass, max_k, max_recon = _factor_points(iter_points(), tol)
    agree = all_pass == cert.certified
    return ThmReport(tuple(points), all_pass, cert, agree, max_k, max_recon)


def check_thm_block2(t1, t2, x, ap: AnnulusParams, grid: PencilGrid = DEFAULT_GRID,
                     plan: TruncationPlan = DEFAULT_PLAN,
                     tol: Tolerances = DEFAULT_TOL) -> ThmReport:
    """Equivalence data for the block [[T1, X(T1 - T2)], [0, T2]].

    Point factorization: Re Gamma(alpha T1)^{1/2} K Re Gamma(alpha T2)^{1/2}
    equals X (Gamma(alpha T1) - Gamma(alpha T2)) / 2.
    """
    t1m = as_matrix(t1)
    t2m = as_matrix(t2)
    xm = as_matrix(x)
    check_commutes(t1m, xm, tol, what="X (against T1)")
    check_commutes(t2m, xm, tol, what="X (against T2)")
    block = assemble(BlockSpec("hat", t1m, xm, t2m), tol)
    cert = certify_ar(block, ap, grid, plan, tol)
    alphas = grid.alphas()

    def iter_points():
        for eps in grid.eps_values:
            mp1 = MatrixPencil(t1m, eps, ap, plan, tol)
            mp2 = MatrixPencil(t2m, eps, ap, plan, tol)
            g1 = mp1.gamma_for_alphas(alphas)
            g2 = mp2.gamma_for_alphas(alphas)
            for i, alpha in enumerate(alphas):
                yield (eps, alpha, re_part(g1[i]), re_part(g2[i]),
                       xm @ (g1[i] - g2[i]) / 2.0)

    points, all_pass, max_k, max_recon = _factor_points(iter_points(), tol)
    agree = all_pass == cert.certified
    return ThmReport(tuple(points), all_pass, cert, agree, max_k, max_recon)
