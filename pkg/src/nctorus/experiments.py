"""Experiment drivers behind the command line.

A config is a JSON object::

    {"theta": [[0, 0.25], [-0.25, 0]], "N": 8, "margin": 2,
     "operator": "d1^2 + d2^2 + 1", "seed": 0, "params": {...}}

``operator`` is a DSL string, ``{"dsl": ...}``, ``{"kdk": {"h": 0.2, "shift": 1}}``
for k Delta k with k = exp(h (U2 + U2*)/sqrt 2), or ``{"symbol": <symbol JSON>}``.
Each experiment returns rows (for the CSV), a summary and a pass flag.
"""

import csv
import hashlib
import io
import json
import os
import time

import numpy as np

from . import __version__
from . import symbols as S
from .algebra import LatticeBox, NcElement, ThetaMatrix, adjoint, exp_series
from .calculus import multi_indices, sharp, shift_symbol, star
from .dsl import parse_operator
from .errors import ConfigurationError
from .powers import (abs_value, power_contour, power_spectral, power_symbol,
                     principal_power)
from .quantization import adjoint_op, quantize, schatten_tail
from .resolvent import (default_margin, exact_resolvent, minimal_growth_check, parametrix_residual,
                        resolvent_vs_parametrix, trace_chain)
from .toroidal import ToroidalSymbolTable, build_phi, extend_toroidal

KINDS = ("spectrum", "compose-check", "parametrix-study", "resolvent-sweep", "minimal-growth",
         "schatten", "power", "abs", "trace-chain", "phi-check")


class ExperimentConfig:
    def __init__(self, kind, theta, N, margin=None, operator=None, params=None, seed=0):
        if kind not in KINDS:
            raise ConfigurationError(f"unknown experiment '{kind}' (choose from {', '.join(KINDS)})")
        if isinstance(theta, (int, float)):
            theta = ThetaMatrix.from_angle(float(theta))
        elif not isinstance(theta, ThetaMatrix):
            theta = ThetaMatrix(theta)
        if int(N) < 2:
            raise ConfigurationError("cutoff N must be at least 2")
        self.kind = kind
        self.theta = theta
        self.N = int(N)
        self.margin = margin
        self.operator = operator
        self.params = dict(params or {})
        self.seed = int(seed)

    @classmethod
    def from_dict(cls, kind, d):
        if "theta" not in d:
            raise ConfigurationError("config needs 'theta'")
        op = d.get("operator")
        if isinstance(op, str) and op.endswith(".json") and not os.path.exists(op):
            raise ConfigurationError(f"operator file {op} does not exist")
        return cls(kind, d["theta"], d.get("N", 8), d.get("margin"), op, d.get("params"),
                   d.get("seed", 0))

    def to_dict(self):
        return {"kind": self.kind, "theta": self.theta.to_json(), "N": self.N,
                "margin": self.margin, "operator": self.operator, "params": self.params,
                "seed": self.seed}

    def digest(self):
        text = json.dumps(self.to_dict(), sort_keys=True, default=str)
        return hashlib.sha256(text.encode()).hexdigest()[:16]


# ---------------------------------------------------------------- operators

def kdk_symbol(theta, h_norm=0.2, shift_by=0.0, axis=2, terms=30, clip=12):
    """Symbol of k Delta k (+ shift) with k = exp(h), h = h_norm (U_axis + U_axis^*)/sqrt 2."""
    U = NcElement.generator(theta, axis)
    h = (U + adjoint(U)).scale(h_norm / np.sqrt(2))
    k = exp_series(h, terms, clip)
    ks = S.constant_symbol(k)
    P = sharp(sharp(ks, S.laplacian_symbol(theta)), ks)
    if shift_by:
        P = shift_symbol(P, shift_by)
    return P


def build_operator(spec, theta):
    if spec is None:
        raise ConfigurationError("this experiment needs an 'operator'")
    if isinstance(spec, str):
        if spec.endswith(".json"):
            with open(spec) as fh:
                spec = json.load(fh)
        else:
            return parse_operator(spec, theta).symbol()
    if "dsl" in spec:
        return parse_operator(spec["dsl"], theta).symbol()
    if "kdk" in spec:
        p = spec["kdk"]
        return kdk_symbol(theta, p.get("h", 0.2), p.get("shift", 0.0), p.get("axis", 2))
    if "symbol" in spec:
        return S.ClassicalSymbol.from_json(spec["symbol"])
    raise ConfigurationError("operator must be a DSL string or have 'dsl', 'kdk' or 'symbol'")


def random_element(theta, rng, radius=2, terms=3, scale=1.0):
    keys = rng.integers(-radius, radius + 1, size=(terms, theta.n))
    vals = (rng.normal(size=terms) + 1j * rng.normal(size=terms)) * scale
    return NcElement(theta, keys, vals)


def random_differential_symbol(theta, rng, order=2, radius=2, terms=3):
    """sum_{|alpha| <= order} a_alpha delta^alpha with random coefficients of support radius <= radius."""
    coeffs = {}
    for m in range(order + 1):
        for alpha in multi_indices(theta.n, m):
            coeffs[alpha] = random_element(theta, rng, radius, terms)
    return S.differential_symbol(theta, coeffs)


def _lam_list(values):
    return [complex(v) if not isinstance(v, (list, tuple)) else complex(v[0], v[1]) for v in values]


# ---------------------------------------------------------------- experiments

def exp_spectrum(cfg):
    P = build_operator(cfg.operator, cfg.theta)
    T = quantize(P, cfg.N)
    ev = np.sort_complex(T.eigenvalues())
    rows = [{"index": i, "re": float(z.real), "im": float(z.imag)} for i, z in enumerate(ev)]
    summary = {"count": len(ev), "min_re": float(ev.real.min()), "max_re": float(ev.real.max())}
    if cfg.params.get("laplacian_oracle", False):
        pts = LatticeBox(cfg.theta.n, cfg.N).points
        oracle = np.sort(np.sum(pts.astype(float) ** 2, axis=1))
        err = float(np.max(np.abs(np.sort(ev.real) - oracle)))
        summary["oracle_error"] = err
        return rows, summary, err <= 1e-10
    return rows, summary, True


def interior_error(A, B, N, margin, n):
    mask = LatticeBox(n, N).interior_mask(margin)
    return float(np.max(np.abs((A - B)[np.ix_(mask, mask)])))


def exp_compose_check(cfg):
    rng = np.random.default_rng(cfg.seed)
    margin = cfg.margin if cfg.margin is not None else max(1, cfg.N - 2)
    pairs = cfg.params.get("pairs", 5)
    tol = cfg.params.get("tol", 1e-10)
    rows = []
    for i in range(pairs):
        if cfg.operator is not None and i == 0 and isinstance(cfg.operator, list):
            r1, r2 = (build_operator(o, cfg.theta) for o in cfg.operator)
        else:
            r1 = random_differential_symbol(cfg.theta, rng)
            r2 = random_differential_symbol(cfg.theta, rng)
        A, B = quantize(r1, cfg.N), quantize(r2, cfg.N)
        C = quantize(sharp(r1, r2), cfg.N)
        comp = interior_error(A.matrix @ B.matrix, C.matrix, cfg.N, margin, cfg.theta.n)
        adj = interior_error(adjoint_op(A).matrix, quantize(star(r1), cfg.N).matrix, cfg.N,
                             margin, cfg.theta.n)
        rows.append({"pair": i, "composition_error": comp, "adjoint_error": adj})
    worst = max(max(r["composition_error"], r["adjoint_error"]) for r in rows)
    return rows, {"max_error": worst, "margin": margin}, worst <= tol


def exp_parametrix_study(cfg):
    P = build_operator(cfg.operator, cfg.theta)
    Js = cfg.params.get("J", [0, 1, 2, 3])
    lams = _lam_list(cfg.params.get("lambdas", [-100.0]))
    T = quantize(P, cfg.N)
    # one mask for every depth, so the residuals are comparable
    margin = cfg.margin if cfg.margin is not None else default_margin(P, max(Js), cfg.N)
    rows = []
    for lam in lams:
        row = {"lambda_re": lam.real, "lambda_im": lam.imag}
        for J in Js:
            row[f"residual_J{J}"] = parametrix_residual(P, J, lam, cfg.N, margin=margin, P=T)
        rows.append(row)
    first, last = f"residual_J{Js[0]}", f"residual_J{Js[-1]}"
    ratio = float(np.median([r[first] / r[last] for r in rows]))
    need = cfg.params.get("min_ratio", 5.0)
    return rows, {"median_ratio": ratio, "J": Js, "margin": margin}, ratio >= need


def exp_resolvent_sweep(cfg):
    P = build_operator(cfg.operator, cfg.theta)
    J = cfg.params.get("J", 0)
    lams = _lam_list(cfg.params.get("lambdas", list(-np.geomspace(1, 1e4, 10))))
    rep = resolvent_vs_parametrix(P, J, lams, cfg.N, margin=cfg.margin)
    summary = {"max_difference": max(rep.differences) if rep.differences else None,
               "excluded": [str(l) for l in rep.excluded], "margin": rep.margin,
               "fit_exponent": rep.fit.exponent if rep.fit else None}
    tol = cfg.params.get("tol")
    ok = True if tol is None else (summary["max_difference"] or 0.0) <= tol
    return rep.rows(), summary, ok


def exp_minimal_growth(cfg):
    P = build_operator(cfg.operator, cfg.theta)
    T = quantize(P, cfg.N)
    rays = cfg.params.get("rays", [np.pi, 3 * np.pi / 4, np.pi / 2])
    t_range = tuple(cfg.params.get("t_range", [10.0, 1e4]))
    rows = []
    for ray in rays:
        fit = minimal_growth_check(T, ray, t_range, samples=cfg.params.get("samples", 24))
        rows.append({"ray": ray, **fit.to_row()})
    return rows, {"exponents": [r["exponent"] for r in rows]}, all(r["passed"] for r in rows)


def exp_schatten(cfg):
    P = build_operator(cfg.operator, cfg.theta)
    T = quantize(P, cfg.N)
    lam = complex(cfg.params.get("lambda", -1.0))
    R = exact_resolvent(T, lam)
    q = cfg.params.get("q")
    if q is None:
        q = cfg.theta.n / float(np.real(P.order))
    fit = schatten_tail(R, q)
    mu = np.linalg.svd(R.matrix, compute_uv=False)
    rows = [{"k": i + 1, "singular_value": float(m)} for i, m in enumerate(mu)]
    return rows, {"slope": fit.exponent, "q": q, "expected": -1.0 / q}, bool(fit.passed)


def exp_power(cfg):
    P = build_operator(cfg.operator, cfg.theta)
    T = quantize(P, cfg.N)
    zs = _lam_list(cfg.params.get("z", [-0.5]))
    routes = cfg.params.get("routes", ["spectral", "contour"])
    tol = cfg.params.get("tol", 1e-6)
    rows = []
    ok = True
    for z in zs:
        A = power_spectral(T, z)
        row = {"z_re": z.real, "z_im": z.imag}
        if "contour" in routes:
            B = power_contour(T, z)
            row["contour_vs_spectral"] = float(np.linalg.norm(A.matrix - B.matrix, 2))
            row["contour_error_estimate"] = float(B.error)
            row["shift"] = B.shift
            ok &= row["contour_vs_spectral"] <= tol
        if "symbol" in routes:
            J = cfg.params.get("J", 4)
            Q = quantize(power_symbol(P, z, J), cfg.N)
            margin = cfg.margin if cfg.margin is not None else 0
            row["symbol_vs_spectral_interior"] = interior_error(Q.matrix, A.matrix, cfg.N, margin,
                                                                cfg.theta.n)
        rows.append(row)
    return rows, {"routes": routes, "tol": tol}, bool(ok)


def exp_abs(cfg):
    P = build_operator(cfg.operator, cfg.theta)
    T = quantize(P, cfg.N)
    A, principal = abs_value(T, P)
    sq = float(np.linalg.norm(A.matrix @ A.matrix - T.matrix.conj().T @ T.matrix, 2))
    herm = float(np.max(np.abs(A.matrix - A.matrix.conj().T)))
    rows = []
    for xi_v in S.sphere_samples(cfg.theta.n, cfg.params.get("samples", 8)):
        v = principal(xi_v, theta=cfg.theta)
        ref = principal_power(sharp(star(P.truncate(0)), P.truncate(0), J=0), 0.5, xi_v)
        rows.append({"xi_1": float(xi_v[0]), "xi_2": float(xi_v[-1]),
                     "principal_error": (v - ref).norm0()})
    summary = {"square_defect": sq, "hermitian_defect": herm}
    return rows, summary, sq <= 1e-8 * max(1.0, T.norm() ** 2) and herm <= 1e-10


def exp_trace_chain(cfg):
    P = build_operator(cfg.operator, cfg.theta)
    T = quantize(P, cfg.N)
    ts = np.geomspace(*cfg.params.get("t_range", [10.0, 1e4]), cfg.params.get("samples", 16))
    lams = -ts
    k = cfg.params.get("resolvents", 2)
    w = float(np.real(P.order))
    fit = trace_chain([None] * (k + 1), [0.0] * (k + 1), T, w, lams)
    rows = [{"t": float(t), "trace": float(v)} for t, v in zip(ts, fit.per_ray["traces"])]
    return rows, {"exponent": fit.exponent, "note": fit.note}, bool(fit.passed)


def exp_phi_check(cfg):
    n, N = cfg.theta.n, cfg.N
    phi = build_phi(n, check_radius=2 * N)
    pts = LatticeBox(n, 2 * N).points
    pts = pts[np.abs(pts).max(axis=1) > 0].astype(float)
    rows = [{"check": "phi(0)", "value": phi(np.zeros(n))},
            {"check": "max |phi(k)| for 0 < |k| <= 2N", "value": float(np.max(np.abs(phi(pts))))},
            {"check": "integral", "value": phi.integral()}]
    rng = np.random.default_rng(cfg.seed)
    table = ToroidalSymbolTable.from_function(
        cfg.theta, N, lambda k: random_element(cfg.theta, rng, 1, 2))
    rho = extend_toroidal(table, phi)
    err = 0.0
    for k, v in zip(table.box.points, table.values):
        err = max(err, (rho(k.astype(float)) - v).norm0())
    rows.append({"check": "extend-restrict", "value": err})
    ok = (abs(rows[0]["value"] - 1) <= 1e-10 and rows[1]["value"] <= 1e-10
          and abs(rows[2]["value"] - 1) <= 1e-6 and err <= 1e-12)
    return rows, {r["check"]: r["value"] for r in rows}, ok


RUNNERS = {
    "spectrum": exp_spectrum, "compose-check": exp_compose_check,
    "parametrix-study": exp_parametrix_study, "resolvent-sweep": exp_resolvent_sweep,
    "minimal-growth": exp_minimal_growth, "schatten": exp_schatten, "power": exp_power,
    "abs": exp_abs, "trace-chain": exp_trace_chain, "phi-check": exp_phi_check,
}

TOLERANCES = {"prune": 1e-14, "inverse_residual": 1e-8, "eig_guard": 1e-6,
              "kernel": 1e-10, "normality": 1e-8}


def _csv_text(rows):
    if not rows:
        return ""
    cols = []
    for r in rows:
        for c in r:
            if c not in cols:
                cols.append(c)
    buf = io.StringIO()
    wr = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    wr.writeheader()
    for r in rows:
        wr.writerow({c: (repr(v) if isinstance(v, float) else v) for c, v in r.items()})
    return buf.getvalue()


def run(cfg, out_dir=None):
    """Run one experiment; writes <out>/<kind>/results.csv and report.json when ``out_dir`` is set."""
    rows, summary, ok = RUNNERS[cfg.kind](cfg)
    report = {"experiment": cfg.kind, "config_hash": cfg.digest(), "version": __version__,
              "tolerances": dict(TOLERANCES, **{k: v for k, v in cfg.params.items()
                                                if "tol" in k}),
              "config": cfg.to_dict(), "summary": summary, "passed": bool(ok),
              "created": time.strftime("%Y-%m-%dT%H:%M:%S")}
    if out_dir is not None:
        d = os.path.join(out_dir, cfg.kind)
        os.makedirs(d, exist_ok=True)
        with open(os.path.join(d, "results.csv"), "w") as fh:
            fh.write(_csv_text(rows))
        with open(os.path.join(d, "report.json"), "w") as fh:
            json.dump(report, fh, indent=2, default=str)
    return rows, report
