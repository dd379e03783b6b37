"""Command line front end: runs the verification suites and writes CSV/JSON reports."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from dataclasses import dataclass
from datetime import datetime, timezone

import numpy as np

from . import poisson as po
from .clifford import Multivector, change_signature, euclidean, gp_batch, lorentzian
from .quadrature import product_rule
from .special import PoleError, c_simple, gamma_lambda_const, jacobi_phi
from .spin import a_t_coeffs, iwasawa_batch, random_compact, random_lorentz, vector_rep
from .spinor import branching, generator_matrices
from .validation import check_labels_for, check_lambda, check_p, check_t_grid

CSV_COLUMNS = [
    "check", "n", "tau", "sigma", "lambda_re", "lambda_im", "p", "t",
    "computed_re", "computed_im", "reference_re", "reference_im", "rel_err", "pass",
]  # fmt: skip

DEFAULT_LAMBDA = -0.6j


@dataclass
class Record:
    check: str
    provenance: str
    n: int
    tau: str
    sigma: str
    lam: complex
    computed: complex
    reference: complex
    passed: bool
    p: float | None = None
    t: float | None = None
    rel_err: float | None = None
    wall: float = 0.0

    def __post_init__(self):
        self.computed = complex(self.computed)
        self.reference = complex(self.reference)
        self.passed = bool(self.passed)
        if self.rel_err is None:
            self.rel_err = _rel(self.computed, self.reference)

    @property
    def abs_err(self) -> float:
        return abs(self.computed - self.reference)

    def sort_key(self):
        return (self.check, self.n, self.tau, self.sigma, self.lam.real, self.lam.imag, self.p or 0, self.t or 0)

    def row(self) -> dict:
        return {
            "check": self.check,
            "n": self.n,
            "tau": self.tau,
            "sigma": self.sigma,
            "lambda_re": _fmt(self.lam.real),
            "lambda_im": _fmt(self.lam.imag),
            "p": "" if self.p is None else _fmt(self.p),
            "t": "" if self.t is None else _fmt(self.t),
            "computed_re": _fmt(self.computed.real),
            "computed_im": _fmt(self.computed.imag),
            "reference_re": _fmt(self.reference.real),
            "reference_im": _fmt(self.reference.imag),
            "rel_err": _fmt(self.rel_err),
            "pass": int(self.passed),
        }

    def as_json(self) -> dict:
        out = self.row()
        out["pass"] = self.passed
        out["provenance"] = self.provenance
        out["abs_err"] = _fmt(self.abs_err)
        return out


def _fmt(x: float) -> str:
    return repr(float(x)) if math.isfinite(x) else str(x)


def _rel(a: complex, b: complex) -> float:
    return abs(a - b) / abs(b) if b != 0 else abs(a - b)


class Runner:
    """Collects records and their wall times."""

    def __init__(self, cfg):
        self.cfg = cfg
        self.records: list[Record] = []
        self.walls: dict = {}

    def add(self, rec: Record, started: float):
        rec.wall = time.perf_counter() - started
        self.records.append(rec)
        key = rec.check
        self.walls[key] = self.walls.get(key, 0.0) + rec.wall

    def base(self, **kw) -> dict:
        c = self.cfg
        out = dict(n=c.n, tau=c.tau, sigma=c.sigma, lam=c.lam)
        out.update(kw)
        return out

    def tol(self, default: float) -> float:
        return self.cfg.tol if self.cfg.tol is not None else default


# -- commands -------------------------------------------------------------


def cmd_selftest(run: Runner):
    cfg = run.cfg
    n, rng = cfg.n, np.random.default_rng(cfg.seed)
    tol = run.tol(1e-10)
    sig = lorentzian(n)
    b = branching(n, cfg.tau, cfg.sigma)

    def residual(name, value, prov="invariant", limit=tol):
        run.add(Record(name, prov, **run.base(lam=0j), computed=value, reference=0.0, passed=value <= limit), t0)

    t0 = time.perf_counter()
    a, bb, c = (Multivector(sig, rng.normal(size=sig.size) + 1j * rng.normal(size=sig.size)) for _ in range(3))
    residual("algebra.associativity", ((a * bb) * c - a * (bb * c)).norm() / (a.norm() * bb.norm() * c.norm()))

    t0 = time.perf_counter()
    worst = 0.0
    for i in range(sig.dim):
        e = Multivector.blade(sig, i + sig.first_index)
        worst = max(worst, abs((e * e).scalar_part - sig.square(i)), (e * e).norm() - 1)
    residual("algebra.generator_squares", worst)

    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(20):
        k1, k2 = random_compact(n, rng), random_compact(n, rng)
        worst = max(worst, np.abs(vector_rep(k1 * k2) - vector_rep(k1) @ vector_rep(k2)).max())
    residual("spin.covering_homomorphism", worst)

    t0 = time.perf_counter()
    gs = np.array([random_lorentz(n, rng).coeffs for _ in range(200)])
    H, kap, nil = iwasawa_batch(gs, n)
    rec = gp_batch(gp_batch(kap, a_t_coeffs(H.real, n), sig), nil, sig)
    residual("spin.iwasawa_reconstruction", float(np.abs(rec - gs).max() / np.abs(gs).max()))

    t0 = time.perf_counter()
    gens = generator_matrices(n)
    worst = max(
        np.abs(gens[i] @ gens[j] + gens[j] @ gens[i] + 2 * (i == j) * np.eye(len(gens[0]))).max()
        for i in range(n)
        for j in range(n)
    )
    residual("spinor.clifford_relations", worst)

    t0 = time.perf_counter()
    worst_u = worst_i = 0.0
    for _ in range(20):
        k = random_compact(n, rng)
        T = b.tau_of(k)
        worst_u = max(worst_u, np.abs(T.conj().T @ T - np.eye(len(T))).max())
        m = _random_m(n, rng)
        worst_i = max(worst_i, np.abs(b.tau_of(m) @ b.iota - b.iota @ b.sigma_of(m)).max())
    residual("spinor.unitarity", worst_u)
    residual("spinor.intertwining", worst_i)
    residual("spinor.adjointness", float(np.abs(b.proj @ b.iota - np.eye(b.dim_sigma)).max()))

    t0 = time.perf_counter()
    rule = product_rule(n, 8)
    T = b.tau_batch(rule.section(euclidean(n)), euclidean(n))
    avg = np.einsum("i,iab,bc,idc->ad", rule.weights, T, b.iota @ b.proj, T.conj())
    expect = b.dim_sigma / b.dim_tau * np.eye(b.dim_tau)
    residual("schur.average", float(np.abs(avg - expect).max()), "quadrature", max(tol, 1e-6))

    lam = cfg.lam if (1j * cfg.lam).real > 0 else DEFAULT_LAMBDA
    a_re = (1j * lam).real
    for t in (0.7, 3.0):
        t0 = time.perf_counter()
        rule, kind = po._rule_for(n, t, None, "auto")
        e, _ = po.kernel_at_sections(b, -1j * a_re, t, rule, kind)
        val = rule.integrate(e)
        ref = jacobi_phi(po.rho(n) - 0.5, -0.5, -1j * a_re, t)
        run.add(
            Record("kernel.l1_identity", "quadrature", **run.base(lam=lam, t=t), computed=val, reference=ref,
                   passed=_rel(val, ref) <= max(tol, 1e-6)),
            t0,
        )  # fmt: skip


def _random_m(n: int, rng) -> Multivector:
    """Random element of Spin(n-1) inside Cl(n)."""
    if n == 2:
        return Multivector.scalar(euclidean(2), rng.choice([-1.0, 1.0]))
    return change_signature(random_compact(n - 1, rng), euclidean(n))


def cmd_ctable(run: Runner):
    cfg = run.cfg
    lams = [cfg.lam] if cfg.lambda_given else [-0.6j, -1j, 1 - 0.6j, -1.2j]
    tol = run.tol(1e-6)
    n = cfg.n
    for lam in lams:
        t0 = time.perf_counter()
        try:
            check_lambda(lam, convergent=True)
            closed = po.c_closed(n, cfg.tau, cfg.sigma, lam)
        except (PoleError, ValueError) as exc:
            print(f"ctable: lambda={lam} skipped: {exc}", file=sys.stderr)
            run.add(Record("ctable.closed", "closed-form", **run.base(lam=lam), computed=math.nan,
                           reference=math.nan, passed=False), t0)  # fmt: skip
            continue
        ref = n / (2j * lam) * c_simple(n / 2 - 1, n / 2, 2 * lam)
        val = c_simple(n / 2, n / 2 - 1, 2 * lam)
        rec_tol = 1e-12 if cfg.tol is None else cfg.tol
        run.add(Record("ctable.recurrence", "closed-form", **run.base(lam=lam), computed=val, reference=ref,
                       passed=_rel(val, ref) <= rec_tol), t0)  # fmt: skip
        if n >= 3:
            t0 = time.perf_counter()
            nb = po.scalar_components(n, cfg.tau, cfg.sigma, po.cfun_by_nbar(n, cfg.tau, cfg.sigma, lam))[cfg.sigma]
            run.add(Record("ctable.nbar", "quadrature", **run.base(lam=lam), computed=nb, reference=closed,
                           passed=_rel(nb, closed) <= tol), t0)  # fmt: skip
        t0 = time.perf_counter()
        est = po.cfun_by_fatou(n, cfg.tau, cfg.sigma, lam)
        fv = est[cfg.sigma]
        run.add(Record("ctable.fatou", "limit", **run.base(lam=lam, t=float(est.t[-1])), computed=fv, reference=closed,
                       passed=est.converged and _rel(fv, closed) <= max(tol, 1e-3)), t0)  # fmt: skip


def cmd_spherical(run: Runner):
    cfg = run.cfg
    tol = run.tol(1e-6)
    grid = cfg.t_grid if cfg.t_grid is not None else np.array([0.0, 0.3, 0.7, 1.2])
    for t in grid:
        t0 = time.perf_counter()
        M = po.spherical_function(cfg.n, cfg.tau, cfg.sigma, cfg.lam, t, order=cfg.order)
        got = po.scalar_components(cfg.n, cfg.tau, cfg.sigma, M)
        ref = po.spherical_closed_form(cfg.n, cfg.tau, cfg.sigma, cfg.lam, t)
        for block in sorted(ref):
            run.add(Record(f"spherical.{block}", "quadrature", **run.base(t=float(t)), computed=got[block],
                           reference=ref[block], passed=_rel(got[block], ref[block]) <= tol), t0)  # fmt: skip


def cmd_fatou(run: Runner):
    cfg = run.cfg
    check_lambda(cfg.lam, convergent=True)
    tol = run.tol(1e-2)
    n, lam = cfg.n, cfg.lam
    grid = cfg.t_grid if cfg.t_grid is not None else np.array([4.0, 6.0, 8.0, 10.0, 12.0])
    rng = np.random.default_rng(cfg.seed)
    datum = po.BoundaryDatum.random(n, cfg.tau, cfg.sigma, rng)
    b = datum.branch
    c = po.c_closed(n, cfg.tau, cfg.sigma, lam)
    ks = np.array([random_compact(n, rng).coeffs for _ in range(10)])
    target = b.kappa * c * (datum(ks) @ b.iota.T)
    prev = np.inf
    for t in grid:
        t0 = time.perf_counter()
        F = po.transform_from_spherical(datum, po.spherical_function(n, cfg.tau, cfg.sigma, lam, t), ks)
        F = np.exp((po.rho(n) - 1j * lam) * t) * F
        dev = float(np.max(np.linalg.norm(F - target, axis=1) / np.linalg.norm(target, axis=1)))
        eff = np.vdot(target.ravel(), F.ravel()) / np.vdot(target.ravel(), target.ravel()) * c
        run.add(Record("fatou.deviation", "limit", **run.base(t=float(t)), computed=eff, reference=c,
                       rel_err=dev, passed=dev < prev), t0)  # fmt: skip
        prev = dev
    t0 = time.perf_counter()
    run.add(Record("fatou.final", "limit", **run.base(t=float(grid[-1])), computed=eff, reference=c, rel_err=dev,
                   passed=dev <= tol), t0)  # fmt: skip
    if n % 2:
        other = "minus" if cfg.sigma == "plus" else "plus"
        t0 = time.perf_counter()
        M = po.spherical_function(n, cfg.tau, cfg.sigma, lam, grid[-1])
        w = np.exp((po.rho(n) - 1j * lam) * grid[-1]) * po.scalar_components(n, cfg.tau, cfg.sigma, M)[other]
        run.add(Record("fatou.offblock", "limit", **run.base(t=float(grid[-1])), computed=w, reference=0.0,
                       rel_err=abs(w), passed=abs(w) <= tol), t0)  # fmt: skip


def cmd_inversion(run: Runner):
    cfg = run.cfg
    check_lambda(cfg.lam, convergent=True)
    tol = run.tol(1e-2)
    n, lam = cfg.n, cfg.lam
    grid = cfg.t_grid if cfg.t_grid is not None else np.array([6.0, 8.0, 10.0])
    rng = np.random.default_rng(cfg.seed)
    b = branching(n, cfg.tau, cfg.sigma)
    v = rng.normal(size=b.dim_tau) + 1j * rng.normal(size=b.dim_tau)
    datum = po.BoundaryDatum.coherent(n, cfg.tau, cfg.sigma, v, random_compact(n, rng).coeffs)
    rule = product_rule(n, cfg.order or 32, po.INNER_ORDER)
    pts = rule.section(euclidean(n))
    f = datum(pts)
    fnorm = rule.integrate(np.linalg.norm(f, axis=1) ** 2)
    prev = np.inf
    for t in grid:
        t0 = time.perf_counter()
        Phi = po.spherical_function(n, cfg.tau, cfg.sigma, lam, t)
        g = po.inversion(lambda h: po.transform_from_spherical(datum, Phi, h), n, cfg.tau, cfg.sigma, lam, t, pts)
        err = math.sqrt(rule.integrate(np.linalg.norm(g - f, axis=1) ** 2) / fnorm)
        ratio = rule.integrate(np.einsum("ia,ia->i", f.conj(), g)) / fnorm
        run.add(Record("inversion.l2_error", "quadrature", **run.base(t=float(t)), computed=ratio, reference=1.0,
                       rel_err=err, passed=err <= tol and err < prev), t0)  # fmt: skip
        prev = err
    # g_t(k m) = sigma(m)^-1 g_t(k)
    t0 = time.perf_counter()
    k = random_compact(n, rng)
    m = _random_m(n, rng)
    pair = np.array([k.coeffs, (k * m).coeffs])
    g = po.inversion(lambda h: po.transform_from_spherical(datum, Phi, h), n, cfg.tau, cfg.sigma, lam, t, pair)
    S = b.sigma_of(change_signature(m, euclidean(n - 1)))
    err = float(np.linalg.norm(S @ g[1] - g[0]) / np.linalg.norm(g[0]))
    run.add(Record("inversion.covariance", "quadrature", **run.base(t=float(t)), computed=err, reference=0.0,
                   rel_err=err, passed=err <= 1e-8), t0)  # fmt: skip


def cmd_norm_bounds(run: Runner):
    cfg = run.cfg
    check_lambda(cfg.lam, convergent=True)
    slack = run.tol(1e-6)
    n, lam = cfg.n, cfg.lam
    ps = [cfg.p] if cfg.p is not None else [2.0, 3.0, 4.0]
    b = branching(n, cfg.tau, cfg.sigma)
    t0 = time.perf_counter()
    run.add(Record("norm.kappa", "closed-form", **run.base(), computed=b.kappa,
                   reference=math.sqrt(b.dim_tau / b.dim_sigma), passed=b.kappa == (math.sqrt(2) if n % 2 else 1.0)), t0)  # fmt: skip
    c = abs(po.c_closed(n, cfg.tau, cfg.sigma, lam))
    gam = gamma_lambda_const(n, lam)
    grid = cfg.t_grid
    for seed in range(cfg.seed, cfg.seed + cfg.count):
        datum = po.BoundaryDatum.random(n, cfg.tau, cfg.sigma, seed)
        for p in ps:
            t0 = time.perf_counter()
            f = po.lp_norm(datum, p)
            h = po.hardy_norm(datum, lam, p, t_grid=grid)
            lo, hi = b.kappa * c * f, b.kappa * gam * f
            run.add(Record(f"norm.lower.seed{seed}", "quadrature", **run.base(p=p), computed=h, reference=lo,
                           passed=h >= lo - slack), t0)  # fmt: skip
            run.add(Record(f"norm.upper.seed{seed}", "quadrature", **run.base(p=p), computed=h, reference=hi,
                           passed=h <= hi + slack), t0)  # fmt: skip


COMMANDS = {
    "selftest": cmd_selftest,
    "ctable": cmd_ctable,
    "spherical": cmd_spherical,
    "fatou": cmd_fatou,
    "inversion": cmd_inversion,
    "norm-bounds": cmd_norm_bounds,
}


# -- plumbing -------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spinorpoisson", description=__doc__)
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--n", type=int, default=3)
    parser.add_argument("--tau", choices=["full", "plus", "minus"])
    parser.add_argument("--sigma", choices=["full", "plus", "minus"])
    parser.add_argument("--lambda-re", type=float)
    parser.add_argument("--lambda-im", type=float)
    parser.add_argument("--p", type=float)
    parser.add_argument("--t-min", type=float)
    parser.add_argument("--t-max", type=float)
    parser.add_argument("--t-count", type=int)
    parser.add_argument("--t-log", action="store_true")
    parser.add_argument("--order", type=int)
    parser.add_argument("--tol", type=float)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--count", type=int, default=20, help="number of random data for norm-bounds")
    parser.add_argument("--out", help="output path (default: stdout)")
    parser.add_argument("--format", choices=["csv", "json"], default="csv")
    return parser


def make_config(args) -> argparse.Namespace:
    if not 2 <= args.n <= 7:
        raise ValueError("n must lie in 2..7")
    args.tau, args.sigma = check_labels_for(args.n, args.tau, args.sigma)
    args.lambda_given = args.lambda_re is not None or args.lambda_im is not None
    lam = complex(args.lambda_re or 0.0, args.lambda_im or 0.0) if args.lambda_given else DEFAULT_LAMBDA
    args.lam = check_lambda(lam)
    if args.p is not None:
        args.p = check_p(args.p)
    if args.order is not None and args.order < 2:
        raise ValueError("order must be at least 2")
    t_opts = (args.t_min, args.t_max, args.t_count)
    if all(x is None for x in t_opts):
        args.t_grid = None
    else:
        t_max = args.t_max if args.t_max is not None else 12.0
        t_min = args.t_min if args.t_min is not None else (0.0 if not args.t_log else 1e-2)
        args.t_grid = check_t_grid(t_min, t_max, args.t_count or 5, args.t_log)
    return args


def render(records, cfg, fmt: str, started: str, finished: str, walls: dict) -> str:
    records = sorted(records, key=Record.sort_key)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
        w.writeheader()
        for r in records:
            w.writerow(r.row())
        return buf.getvalue()
    config = {
        "command": cfg.command,
        "n": cfg.n,
        "tau": cfg.tau,
        "sigma": cfg.sigma,
        "lambda": [cfg.lam.real, cfg.lam.imag],
        "p": cfg.p,
        "t_grid": None if cfg.t_grid is None else [float(t) for t in cfg.t_grid],
        "order": cfg.order,
        "tol": cfg.tol,
        "seed": cfg.seed,
    }
    doc = {
        "schema": 1,
        "config": config,
        "records": [r.as_json() for r in records],
        "all_pass": all(r.passed for r in records),
        "timing": {"started": started, "finished": finished, "wall_seconds": dict(sorted(walls.items()))},
    }
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = make_config(args)
    except ValueError as exc:
        parser.error(str(exc))
    run = Runner(cfg)
    started = datetime.now(timezone.utc).isoformat()
    try:
        COMMANDS[cfg.command](run)
    except ValueError as exc:
        parser.error(str(exc))
    finished = datetime.now(timezone.utc).isoformat()
    text = render(run.records, cfg, cfg.format, started, finished, run.walls)
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if run.records and all(r.passed for r in run.records) else 1


if __name__ == "__main__":
    sys.exit(main())
