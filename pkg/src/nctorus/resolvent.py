"""Exact truncated resolvents compared against symbol-level parametrices."""

from dataclasses import dataclass, field

import numpy as np

from .calculus import parametric_parametrix
from .errors import DomainError, NearSpectrumError, ValidationError, NcToriError
from .geometry import loglog_fit
from .quantization import TruncatedOperator, quantize

EIG_GUARD = 1e-6


@dataclass
class Spectrum:
    values: np.ndarray
    clusters: list

    def __len__(self):
        return self.values.size


def spectrum(T, cluster_tol=1e-8):
    """All eigenvalues of the truncation, sorted, with multiplicity clusters."""
    ev = np.asarray(T.eigenvalues())
    order = np.lexsort((ev.imag, ev.real))
    ev = ev[order]
    scale = max(1.0, float(np.max(np.abs(ev)))) if ev.size else 1.0
    clusters = []
    for z in ev:
        if clusters and abs(z - clusters[-1][0]) <= cluster_tol * scale:
            c, m = clusters[-1]
            clusters[-1] = ((c * m + z) / (m + 1), m + 1)
        else:
            clusters.append((z, 1))
    return Spectrum(ev, clusters)


def _op_norm(T):
    if not hasattr(T, "_norm_cache"):
        T._norm_cache = T.norm()
    return T._norm_cache


def distance_to_spectrum(T, lam):
    ev = T.eigenvalues()
    return float(np.min(np.abs(ev - lam))) if ev.size else np.inf


def exact_resolvent(T, lam, guard=EIG_GUARD):
    d = distance_to_spectrum(T, lam)
    if d < guard * max(_op_norm(T), 1.0):
        raise NearSpectrumError(f"lambda = {lam} is within {d:.3g} of the spectrum", d)
    M = T.matrix - lam * np.eye(T.size)
    return TruncatedOperator(T.theta, T.N, np.linalg.inv(M), "inverted")


def resolvent_norm(T, lam):
    s = np.linalg.svd(T.matrix - lam * np.eye(T.size), compute_uv=False)
    return 1.0 / s[-1]


def minimal_growth_check(T, ray, t_range=(10.0, 1e4), samples=24, theta_cone=None,
                         angle_guard=1e-3, tol=0.05):
    """Fit of ||(T - lambda)^{-1}|| along lambda = t e^{i ray}; passes iff the exponent is -1 +- tol."""
    if theta_cone is not None and not theta_cone.direction_inside(ray):
        raise DomainError(f"ray {ray:.4g} is not inside Theta(P)")
    ev = T.eigenvalues()
    for z in ev:
        if abs(z) > 1e-12:
            d = abs((np.angle(z) - ray + np.pi) % (2 * np.pi) - np.pi)
            if d <= angle_guard:
                raise DomainError(f"eigenvalue {z:.6g} lies on the ray arg = {ray:.4g}")
    ts = np.geomspace(t_range[0], t_range[1], samples)
    lams = ts * np.exp(1j * ray)
    vals = [resolvent_norm(T, l) for l in lams]
    fit = loglog_fit(1 + np.abs(lams), vals)
    fit.passed = abs(fit.exponent + 1) <= tol
    fit.per_ray = {float(ray): fit.exponent}
    return fit


def default_margin(P_sym, J, N):
    m = P_sym.support_radius() + J
    return min(max(m, 1), N - 1)


def parametrix_residual(P_sym, J, lam, N, margin=None, domain=None, cutoff=12, P=None,
                        Q_sym=None):
    """Interior norm of (P - lambda) Q_J(lambda) - 1."""
    if domain is not None and not domain.contains(lam):
        raise DomainError(f"lambda = {lam} is outside the parameter domain")
    if margin is None:
        margin = default_margin(P_sym, J, N)
    P = P if P is not None else quantize(P_sym, N)
    Q_sym = Q_sym if Q_sym is not None else parametric_parametrix(P_sym, J)
    Q = quantize(Q_sym, N, lam=lam, cutoff=cutoff)
    R = (P.matrix - lam * np.eye(P.size)) @ Q.matrix - np.eye(P.size)
    mask = P.box.interior_mask(margin)
    return float(np.linalg.norm(R[np.ix_(mask, mask)], 2))


@dataclass
class ResolventReport:
    operator: str
    N: int
    margin: int
    J: int
    lams: list = field(default_factory=list)
    exact_norms: list = field(default_factory=list)
    differences: list = field(default_factory=list)
    residuals: dict = field(default_factory=dict)
    excluded: list = field(default_factory=list)
    fit: object = None
    spectrum_snapshot: list = field(default_factory=list)

    def rows(self):
        out = []
        for i, l in enumerate(self.lams):
            row = {"lambda_re": l.real, "lambda_im": l.imag,
                   "exact_norm": self.exact_norms[i], "difference": self.differences[i]}
            for J, vals in self.residuals.items():
                row[f"residual_J{J}"] = vals[i]
            out.append(row)
        return out


def resolvent_vs_parametrix(P_sym, J, lam_grid, N, margin=None, cutoff=12, name="P"):
    """Per-lambda interior norms of exact_resolvent - quantize(parametrix_J)."""
    if margin is None:
        margin = default_margin(P_sym, J, N)
    P = quantize(P_sym, N)
    Q_sym = parametric_parametrix(P_sym, J)
    mask = P.box.interior_mask(margin)
    rep = ResolventReport(name, N, margin, J)
    ev = P.eigenvalues()
    rep.spectrum_snapshot = [complex(z) for z in np.sort_complex(ev)[:10]]
    failures = []
    for lam in lam_grid:
        lam = complex(lam)
        try:
            Rex = exact_resolvent(P, lam)
        except NearSpectrumError:
            rep.excluded.append(lam)
            continue
        try:
            Q = quantize(Q_sym, N, lam=lam, cutoff=cutoff)
        except NcToriError as exc:
            failures.append((lam, str(exc)))
            continue
        D = (Rex.matrix - Q.matrix)[np.ix_(mask, mask)]
        rep.lams.append(lam)
        rep.exact_norms.append(float(np.linalg.norm(Rex.matrix[np.ix_(mask, mask)], 2)))
        rep.differences.append(float(np.linalg.norm(D, 2)))
    if failures:
        raise ValidationError("; ".join(f"{l}: {m}" for l, m in failures))
    diffs = np.asarray(rep.differences)
    if len(rep.lams) >= 3 and np.all(diffs > 0):
        rep.fit = loglog_fit(1 + np.abs(rep.lams), diffs, residual_threshold=0.5)
    return rep


def trace_chain(A_list, orders, T, w, lam_grid, n=None, count_resolvents=None):
    """Fit of |Tr A_0 (T - lambda)^{-1} A_1 ... (T - lambda)^{-1} A_N| against 1 + |lambda|.

    ``A_list`` holds N + 1 operators (None means identity); ``orders`` their orders.
    """
    n = T.n if n is None else n
    Nres = len(A_list) - 1 if count_resolvents is None else count_resolvents
    if Nres < 1:
        raise ValidationError("at least one resolvent factor is needed")
    a = float(sum(orders))
    if not (-Nres * w + a < -n):
        raise ValidationError(
            f"precondition -N w + a < -n fails: {-Nres * w + a:g} < {-n:g} is false")
    mats = [None if A is None else (A.matrix if hasattr(A, "matrix") else np.asarray(A))
            for A in A_list]
    traces = []
    lams = [complex(l) for l in lam_grid]
    for lam in lams:
        R = exact_resolvent(T, lam).matrix
        M = mats[0] if mats[0] is not None else np.eye(T.size)
        for A in mats[1:]:
            M = M @ R
            if A is not None:
                M = M @ A
        traces.append(abs(np.trace(M)))
    fit = loglog_fit(1 + np.abs(lams), traces)
    bound = -Nres + max(0.0, (a + n) / w) + 0.1
    fit.passed = fit.exponent <= bound
    fit.note = f"bound {bound:.4g} (a = {a:g}, n = {n}, w = {w:g}, resolvents = {Nres})"
    fit.per_ray = {"traces": traces}
    return fit
