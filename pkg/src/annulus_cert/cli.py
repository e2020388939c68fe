"""Command-line surface.

Exit codes, used consistently by every subcommand:

    0   certified / verdicts agree / no violation found / plain success
    1   refuted / verdicts disagree / violation or factorization failure
    2   inconclusive (truncation or diagnostic failure)
    64  usage error: bad flags, malformed or out-of-domain inputs
    65  contract violation: structurally valid inputs that break a precondition
        (commutation, dimension mismatch, hermiticity)

All matrices travel as JSON documents (see ``io``); certificates and reports
are JSON on stdout or ``--out``; sweeps are CSV.  Every random path takes an
explicit ``--seed`` (default 0) and is deterministic given the same flags.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .blocks import BlockSpec, assemble
from .certifier import (
    DEFAULT_GRID,
    Certificate,
    PencilGrid,
    certify_ar,
    check_thm_block1,
    check_thm_block2,
    vn_sample,
)
from .errors import (
    AnnulusCertError,
    ContractViolationError,
    DiagnosticError,
    DomainError,
    SingularityError,
    TruncationError,
)
from .factorization import douglas_factor
from .io import load_matrix, save_matrix
from .misra import misra_threshold, sweep_rows
from .numerics import DEFAULT_TOL
from .pencil import AnnulusParams, TruncationPlan, DEFAULT_PLAN

EXIT_OK = 0
EXIT_REFUTED = 1
EXIT_INCONCLUSIVE = 2
EXIT_USAGE = 64
EXIT_CONTRACT = 65

THREADS_ENV = "ANNULUS_CERT_THREADS"


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits 2; the CLI reserves that
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _parse_eps_list(text: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(tok) for tok in text.split(",") if tok.strip())
    except ValueError as exc:
        raise DomainError(f"bad eps list {text!r}: {exc}") from exc
    if not vals:
        raise DomainError("empty eps list")
    return vals


def _parse_complex(text: str) -> complex:
    parts = text.split(",")
    if len(parts) != 2:
        raise DomainError(f"expected RE,IM, got {text!r}")
    try:
        return complex(float(parts[0]), float(parts[1]))
    except ValueError as exc:
        raise DomainError(f"bad complex literal {text!r}: {exc}") from exc


def _annulus(r: float) -> AnnulusParams:
    return AnnulusParams(r)


def _grid_from_args(args, base: PencilGrid) -> PencilGrid:
    eps = _parse_eps_list(args.eps) if args.eps else base.eps_values
    alphas = args.alphas if args.alphas else base.alpha_count
    return PencilGrid(eps_values=tuple(eps), alpha_count=alphas)


def _plan_from_args(args) -> TruncationPlan:
    return TruncationPlan(
        n_max=args.n_max if args.n_max else DEFAULT_PLAN.n_max,
        tail_tol=args.tail_tol if args.tail_tol else DEFAULT_PLAN.tail_tol,
    )


def _resolve_threads(flag_value: int | None, grid_points: int) -> int:
    env = os.environ.get(THREADS_ENV)
    if env is not None:
        try:
            flag_value = int(env)
        except ValueError:
            raise DomainError(f"{THREADS_ENV} must be an integer, got {env!r}")
    if flag_value is None:
        flag_value = os.cpu_count() or 1
    return max(1, min(flag_value, grid_points))


def _load(path):
    """Matrix file loading; malformed documents are usage errors, not contract ones."""
    try:
        return load_matrix(path)
    except ContractViolationError as exc:
        raise DomainError(str(exc)) from exc


def _emit(doc: dict, out: str | None) -> None:
    text = json.dumps(doc, indent=2)
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


def _cert_exit(cert: Certificate) -> int:
    return {"certified": EXIT_OK, "refuted": EXIT_REFUTED, "inconclusive": EXIT_INCONCLUSIVE}[
        cert.verdict
    ]


def _cmd_certify(args) -> int:
    t = _load(args.matrix)
    grid = _grid_from_args(args, DEFAULT_GRID)
    plan = _plan_from_args(args)
    threads = _resolve_threads(args.threads, len(grid.eps_values))
    cert = certify_ar(t, _annulus(args.r), grid, plan, threads=threads)
    _emit(cert.to_dict(), args.out)
    return _cert_exit(cert)


def _cmd_block(args) -> int:
    t1 = _load(args.t1)
    t2 = _load(args.t2) if args.t2 else None
    x = _load(args.x)
    spec = BlockSpec(args.kind, t1, x, t2)
    if args.kind == "general":
        diff = spec.t1 - spec.t2
        sv = np.linalg.svd(diff, compute_uv=False)
        if sv.size and (sv[-1] <= DEFAULT_TOL.rank_tol * max(sv[0], 1e-300)):
            print(
                "warning: T1 - T2 is numerically singular; the general block may "
                "not reduce to a commutant factorization",
                file=sys.stderr,
            )
    save_matrix(assemble(spec), args.out)
    return EXIT_OK


def _cmd_factor(args) -> int:
    p = _load(args.p)
    q = _load(args.q)
    r = _load(args.rmat)
    result = douglas_factor(p, q, r)
    _emit(result.to_dict(), args.out)
    return EXIT_OK if result.passes(DEFAULT_TOL) else EXIT_REFUTED


def _cmd_misra(args) -> int:
    th = misra_threshold(_parse_complex(args.w), args.r)
    print(f"{th:.17g}")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    rows = sweep_rows(args.r, args.samples, seed=args.seed)
    cols = ["w_re", "w_im", "r", "threshold_kernel", "threshold_pencil", "rel_gap"]
    lines = [",".join(cols)]
    for row in rows:
        lines.append(",".join(f"{row[c]:.17g}" for c in cols))
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        print(text, end="")
    return EXIT_OK


def _cmd_vn(args) -> int:
    t = _load(args.matrix)
    report = vn_sample(t, _annulus(args.r), count=args.count, seed=args.seed, m=args.m)
    _emit(report.to_dict(), args.out)
    return EXIT_REFUTED if report.violation else EXIT_OK


def _cmd_thm(args) -> int:
    t1 = _load(args.t1)
    x = _load(args.x)
    grid = _grid_from_args(args, DEFAULT_GRID)
    plan = _plan_from_args(args)
    ap = _annulus(args.r)
    if args.which == "block1":
        report = check_thm_block1(t1, x, ap, grid, plan)
    else:
        if not args.t2:
            raise DomainError("--t2 is required for block2")
        report = check_thm_block2(t1, _load(args.t2), x, ap, grid, plan)
    # certificate records and factor points share the eps-major, alpha-minor order
    margins = [rec.lambda_min for rec in report.certificate.records]
    if len(margins) != len(report.points):
        margins = [None] * len(report.points)
    doc = {
        "which": args.which,
        "factor_verdict": report.factor_verdict,
        "certificate_verdict": report.certificate.verdict,
        "agree": report.agree,
        "max_k_norm": report.max_k_norm,
        "max_recon_residual": report.max_recon_residual,
        "min_margin": report.certificate.min_margin,
        "points": [
            {
                "eps": p.eps,
                "alpha": [p.alpha.real, p.alpha.imag],
                "k_norm": p.factor.k_norm,
                "lambda_min": margin,
                "residual": p.factor.residual,
                "range_defect": p.factor.range_defect,
                "passes": p.factor.passes(DEFAULT_TOL),
                "recon_residual": p.recon_residual,
            }
            for p, margin in zip(report.points, margins)
        ],
    }
    _emit(doc, args.out)
    return EXIT_OK if report.agree else EXIT_REFUTED


def build_parser() -> _Parser:
    parser = _Parser(prog="annulus-cert",
                     description="Certify annulus contractions and their 2x2 block completions.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_grid_flags(p):
        p.add_argument("--eps", help="comma-separated eps ladder (default: certifier grid)")
        p.add_argument("--alphas", type=int, help="number of unimodular alpha samples")
        p.add_argument("--tail-tol", dest="tail_tol", type=float, help="series tail tolerance")
        p.add_argument("--n-max", dest="n_max", type=int, help="per-side truncation cap")

    p = sub.add_parser("certify", help="decide annulus contractivity of a matrix")
    p.add_argument("--matrix", required=True)
    p.add_argument("--r", type=float, required=True)
    add_grid_flags(p)
    p.add_argument("--threads", type=int, help=f"eps-level parallelism (env {THREADS_ENV} overrides)")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_certify)

    p = sub.add_parser("block", help="assemble a 2x2 block operator")
    p.add_argument("--kind", choices=["tx", "hat", "general"], required=True)
    p.add_argument("--t1", required=True)
    p.add_argument("--t2")
    p.add_argument("--x", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_block)

    p = sub.add_parser("factor", help="factor R through PSD square roots of P and Q")
    p.add_argument("--p", required=True)
    p.add_argument("--q", required=True)
    p.add_argument("--rmat", required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_factor)

    p = sub.add_parser("misra", help="kernel threshold for the scalar Jordan block")
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--w", required=True, help="complex point as RE,IM")
    p.set_defaults(func=_cmd_misra)

    p = sub.add_parser("sweep", help="kernel-vs-pencil threshold sweep to CSV")
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("vn", help="sample rational functions against the sup-norm bound")
    p.add_argument("--matrix", required=True)
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--m", type=int, default=1024, help="boundary samples per circle")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_vn)

    p = sub.add_parser("thm", help="factorization-vs-certificate equivalence report")
    p.add_argument("--which", choices=["block1", "block2"], required=True)
    p.add_argument("--t1", required=True)
    p.add_argument("--t2")
    p.add_argument("--x", required=True)
    p.add_argument("--r", type=float, required=True)
    add_grid_flags(p)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_thm)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (DomainError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ContractViolationError as exc:
        print(f"contract violation: {exc}", file=sys.stderr)
        return EXIT_CONTRACT
    except (TruncationError, DiagnosticError, SingularityError) as exc:
        print(f"inconclusive: {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    except AnnulusCertError as exc:  # pragma: no cover - residual mapping
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
