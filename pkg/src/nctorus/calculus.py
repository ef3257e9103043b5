"""Symbol-level composition, adjoint, ellipticity data and parametrices."""

import math
from dataclasses import dataclass, field

import numpy as np

from . import symbols as S
from .algebra import left_mult_matrix
from .errors import NotInvertibleError, ValidationError
from .geometry import PseudoCone, TWO_PI


def multi_indices(n, order):
    """All alpha in N^n with |alpha| = order."""
    if n == 1:
        yield (order,)
        return
    for first in range(order, -1, -1):
        for rest in multi_indices(n - 1, order - first):
            yield (first,) + rest


def factorial(alpha):
    return math.prod(math.factorial(a) for a in alpha)


def _component(sym, k):
    return sym.components[k].expr if k < len(sym.components) else S.ZERO


def _exact_depth_sharp(r1, r2):
    q1 = r1.order
    if not (r1.is_differential() and r2.is_differential()):
        return None
    return int(round(q1.real if isinstance(q1, complex) else q1)) + len(r2.components) - 1


def sharp(r1, r2, J=None):
    """Composition symbol: components of degree q1 + q2 - j for j <= J.

    For two differential symbols the series terminates; with ``J=None`` all
    nonzero terms are kept and the result is exact.
    """
    if r1.theta != r2.theta:
        raise ValidationError("symbols live on different tori")
    lam1 = any(c.expr.has_lam for c in r1.components)
    lam2 = any(c.expr.has_lam for c in r2.components)
    if lam1 and lam2 and abs(r1.weight - r2.weight) > 1e-12:
        raise ValidationError("parametric symbols carry different weights")
    weight = r1.weight if lam1 else r2.weight
    n = r1.n
    exact = _exact_depth_sharp(r1, r2)
    if J is None:
        J = exact if exact is not None else 4
    q = r1.order + r2.order
    d = r1.lambda_degree + r2.lambda_degree
    comps = []
    for j in range(J + 1):
        terms = []
        for k in range(min(j, len(r1.components) - 1) + 1):
            a = _component(r1, k)
            if S.is_zero(a):
                continue
            for l in range(min(j - k, len(r2.components) - 1) + 1):
                b = _component(r2, l)
                if S.is_zero(b):
                    continue
                for alpha in multi_indices(n, j - k - l):
                    da = S.diff_multi(a, alpha)
                    if S.is_zero(da):
                        continue
                    db = S.apply_delta(b, alpha)
                    if S.is_zero(db):
                        continue
                    terms.append(S.prod(S.Scalar(1.0 / factorial(alpha)), da, db))
        comps.append(S.HomogeneousSymbol(S.add(*terms), q - j, d, weight))
    out = S.ClassicalSymbol(r1.theta, comps, r1.cutoff or r2.cutoff, weight)
    out.exact = exact is not None and J >= exact
    return out


def star(r, J=None):
    """Formal adjoint symbol."""
    n = r.n
    exact = None
    if r.is_differential():
        exact = int(round(r.order.real if isinstance(r.order, complex) else r.order))
    if J is None:
        J = exact if exact is not None else 4
    stars = [S.star_expr(c.expr) for c in r.components]
    q = r.order
    qbar = q.conjugate() if isinstance(q, complex) else q
    comps = []
    for j in range(J + 1):
        terms = []
        for k in range(min(j, len(stars) - 1) + 1):
            base = stars[k]
            if S.is_zero(base):
                continue
            for alpha in multi_indices(n, j - k):
                t = S.apply_delta(S.diff_multi(base, alpha), alpha)
                if not S.is_zero(t):
                    terms.append(S.prod(S.Scalar(1.0 / factorial(alpha)), t))
        comps.append(S.HomogeneousSymbol(S.add(*terms), qbar - j, r.lambda_degree, r.weight))
    out = S.ClassicalSymbol(r.theta, comps, r.cutoff, r.weight)
    out.exact = exact is not None and J >= exact
    return out


# ---------------------------------------------------------------- ellipticity

@dataclass
class EllipticityData:
    c: float
    c_prime: float
    sphere_samples: np.ndarray
    spectral_cloud: np.ndarray
    sectors: list = field(default_factory=list)
    slack: float = 0.05

    @property
    def theta_cone(self):
        return PseudoCone(self.sectors)

    def positive(self, tol=1e-9):
        cl = self.spectral_cloud
        return bool(np.all(np.abs(cl.imag) <= tol * np.abs(cl)) and np.all(cl.real > 0))

    def omega_contains(self, xi_v, lam, weight):
        """(xi, lambda) in Omega_c(P): lambda in Theta(P) or |lambda| < c |xi|^w."""
        r = float(np.linalg.norm(xi_v))
        return self.theta_cone.contains(lam) or abs(lam) < self.c * r ** weight


def argument_sectors(cloud, slack=0.05, gap_min=0.05, zero_tol=1e-12):
    """Complement of the angular span of a point cloud, as open sectors."""
    cloud = np.asarray(cloud, dtype=complex)
    cloud = cloud[np.abs(cloud) > zero_tol]
    if cloud.size == 0:
        return [(0.0, TWO_PI)]
    # tiny imaginary noise on real eigenvalues should not open fake gaps
    args = np.angle(cloud)
    args = np.where(np.abs(cloud.imag) <= 1e-12 * np.abs(cloud),
                    np.where(cloud.real > 0, 0.0, np.pi), args)
    a = np.unique(np.round(args % TWO_PI, 13))
    m = a.size
    gaps = np.diff(np.concatenate([a, [a[0] + TWO_PI]]))
    big = np.nonzero(gaps > gap_min)[0]
    if big.size == 0:
        return []
    # clusters run from a[big[i] + 1] to a[big[i + 1]] (cyclically)
    clusters = []
    for i in range(big.size):
        start = (big[i] + 1) % m
        end = big[(i + 1) % big.size]
        lo = a[start]
        hi = a[end]
        if hi < lo:
            hi += TWO_PI
        clusters.append((lo, hi))
    sectors = []
    for i in range(len(clusters)):
        lo_c, hi_c = clusters[i]
        nlo, nhi = clusters[(i + 1) % len(clusters)]
        pad_a = slack * (hi_c - lo_c)
        pad_b = slack * (nhi - nlo)
        s_lo = hi_c + pad_a
        s_hi = nlo + pad_b * -1
        while s_hi <= s_lo:
            s_hi += TWO_PI
        if s_hi - s_lo > 1e-12:
            sectors.append((float(s_lo), float(s_hi)))
    return sectors


def ellipticity_data(principal, theta, samples=None, N=8, slack=0.05, count=64):
    """Surrogate constants c, c' and the reported Theta(P) from sphere samples."""
    w = principal.degree
    if not (isinstance(w, (int, float)) and w > 0):
        raise ValidationError("principal degree must be positive")
    if samples is None:
        samples = S.sphere_samples(theta.n, count)
    cs, cps, cloud = [], [], []
    for xi_v in samples:
        v = S.evaluate(principal.expr, xi_v, theta=theta, cutoff=N)
        if v.is_scalar():
            z = v.scalar_value()
            sv = np.array([abs(z)])
            ev = np.array([z])
        else:
            L = left_mult_matrix(v, N)
            sv = np.linalg.svd(L, compute_uv=False)
            ev = np.linalg.eigvals(L)
        if sv.min() <= 1e-12 * max(sv.max(), 1e-300):
            raise NotInvertibleError(f"not elliptic at sample xi = {tuple(xi_v)}")
        cs.append(sv.min())
        cps.append(sv.max())
        cloud.append(ev)
    cloud = np.concatenate(cloud)
    return EllipticityData(float(min(cs)), float(max(cps)), np.asarray(samples), cloud,
                           argument_sectors(cloud, slack), slack)


# ---------------------------------------------------------------- parametrices

def _recursion(r, first, J, degree0, lambda_degree):
    """sigma_{-j} = -sum_{k+l+|alpha|=j, l<j} (1/alpha!) first d^alpha rho_{q-k} delta^alpha sigma_l."""
    n = r.n
    sig = [first]
    for j in range(1, J + 1):
        terms = []
        for l in range(j):
            s_l = sig[l]
            if S.is_zero(s_l):
                continue
            for k in range(j - l + 1):
                rk = _component(r, k)
                if S.is_zero(rk):
                    continue
                for alpha in multi_indices(n, j - k - l):
                    da = S.diff_multi(rk, alpha)
                    if S.is_zero(da):
                        continue
                    ds = S.apply_delta(s_l, alpha)
                    if S.is_zero(ds):
                        continue
                    terms.append(S.prod(S.Scalar(-1.0 / factorial(alpha)), first, da, ds))
        sig.append(S.add(*terms))
    return [S.HomogeneousSymbol(e, degree0 - j, lambda_degree, r.weight)
            for j, e in enumerate(sig)]


def parametrix(r, J=4, cutoff=None):
    """Parametrix symbol without parameter; cut off near xi = 0 by chi."""
    first = S.inverse(r.principal().expr)
    comps = _recursion(r, first, J, -r.order, 0.0)
    return S.ClassicalSymbol(r.theta, comps, cutoff or S.Cutoff(0.0, 1.0), r.weight)


def parametric_parametrix(r, J=4, cutoff=None):
    """Parametrix of rho - lambda; lambda has weight w = order of rho."""
    w = r.order
    first = S.inverse(S.sub(r.principal().expr, S.lam()))
    weighted = S.ClassicalSymbol(r.theta, r.components, r.cutoff, w)
    comps = _recursion(weighted, first, J, -w, -1.0)
    return S.ClassicalSymbol(r.theta, comps, cutoff, w)


def shift_symbol(r, c):
    """rho + c with c added to the degree-0 component (padding with zeros)."""
    comps = list(r.components)
    q = r.order
    j0 = int(round(q.real if isinstance(q, complex) else q))
    while len(comps) <= j0:
        comps.append(S.HomogeneousSymbol(S.ZERO, q - len(comps), r.lambda_degree, r.weight))
    old = comps[j0]
    comps[j0] = S.HomogeneousSymbol(S.add(old.expr, S.const(c)), old.degree, old.lambda_degree,
                                    old.weight)
    return S.ClassicalSymbol(r.theta, comps, r.cutoff, r.weight)
