"""Complex powers P^z by spectral calculus, by contour integrals, and at symbol level.

Branch: lambda^z = exp(z log lambda) with the principal logarithm on C minus
(-inf, 0].  On the kernel of P the power is set to 0.
"""

import math

import numpy as np
import scipy.linalg

from . import symbols as S
from .algebra import LatticeBox, NcElement, left_mult_matrix
from .calculus import ellipticity_data, parametric_parametrix, sharp, star
from .contours import ContourSpec, contour_quadrature, path_rule
from .errors import DomainError, PrecisionError, ValidationError
from .quantization import TruncatedOperator, adjoint_op, compose

NORMAL_TOL = 1e-8
BRANCH_TOL = 1e-10


def branch_power(lam, z, arg=None):
    """lambda^z on the principal branch; ``arg`` overrides the angle (for the slit sides)."""
    lam = np.asarray(lam, dtype=complex)
    a = np.angle(lam) if arg is None else np.asarray(arg, dtype=float)
    out = np.exp(z * (np.log(np.abs(np.where(lam == 0, 1.0, lam))) + 1j * a))
    return np.where(lam == 0, 0j, out)


def _kernel_tol(T, kernel_tol):
    if kernel_tol is not None:
        return kernel_tol
    return 1e-10 * max(T.norm(), 1.0)


def _diagonalize(T, normal_tol=NORMAL_TOL):
    """(eigenvalues, unitary) for Hermitian or normal truncations; refuses the rest."""
    M = T.matrix
    if T.is_hermitian():
        ev, V = np.linalg.eigh(M)
        return ev.astype(complex), V
    R, Z = scipy.linalg.schur(M, output="complex")
    off = np.linalg.norm(R - np.diag(np.diag(R)))
    scale = max(np.linalg.norm(M), 1.0)
    if off > normal_tol * scale:
        raise ValidationError(f"spectral route needs a normal truncation (defect {off / scale:.3g})")
    return np.diag(R).copy(), Z


def power_spectral(T, z, kernel_tol=None, normal_tol=NORMAL_TOL):
    """T^z by eigenvector calculus; kernel eigenvalues are sent to 0."""
    z = complex(z)
    ev, V = _diagonalize(T, normal_tol)
    ktol = _kernel_tol(T, kernel_tol)
    kern = np.abs(ev) <= ktol
    neg = (~kern) & (ev.real < 0) & (np.abs(ev.imag) <= BRANCH_TOL * np.abs(ev))
    if np.any(neg):
        raise DomainError(f"eigenvalue {ev[neg][0].real:.6g} lies on the branch cut (-inf, 0]")
    f = np.where(kern, 0j, branch_power(np.where(kern, 1.0, ev), z))
    M = (V * f[None, :]) @ V.conj().T
    out = TruncatedOperator(T.theta, T.N, M, "spectral")
    out.kernel_dim = int(kern.sum())
    return out


def shift_plan(z):
    """Integer m with Re(z - m) < 0: none for Re z < 0, else ceil(Re z) + 1."""
    z = complex(z)
    return 0 if z.real < 0 else int(math.ceil(z.real)) + 1


def default_contour(T, r0=None, c=None, t_max=None):
    """Keyhole around (-inf, 0] with r = 0.5 min(r0, c), orientated so the integral gives +P^z."""
    ev = T.eigenvalues()
    if r0 is None:
        r0 = float(np.min(np.abs(ev)))
    if r0 <= 0:
        raise DomainError("the spectrum touches 0; no keyhole radius fits")
    rmax = r0 if c is None else min(r0, c)
    r = 0.5 * rmax
    if t_max is None:
        t_max = 1e3 * max(1.0, float(np.max(np.abs(ev))))
    return ContourSpec.keyhole(r, np.pi, -np.pi, t_max=t_max, direction=-1)


def _neumann_tail(M, z, terms=4):
    """Tail beyond T of int lambda^z (M - lambda)^{-1} d lambda along a ray, via the Neumann series."""
    I = np.eye(M.shape[0])
    nrm = float(np.linalg.norm(M, 2))
    powers = [I]
    for _ in range(terms):
        powers.append(powers[-1] @ M)

    def tail(phi, T, sign):
        # (M - lambda)^{-1} = -sum_j M^j lambda^{-j-1};  lambda = t e^{i phi}, d lambda = sign e^{i phi} dt
        val = 0
        for j in range(terms):
            e = z - j
            if e.real >= 0:
                raise ValidationError("tail exponent must be negative")
            coef = -sign * np.exp(1j * phi * (e)) * T ** e / (-e)
            val = val + coef * powers[j]
        e = z - terms
        bound = nrm ** terms * T ** e.real / abs(e.real) * math.exp(abs(e.imag) * math.pi)
        bound /= max(1e-300, 1.0 - nrm / T)
        return val, float(bound)

    return tail


def power_contour(T, z, contour=None, r0=None, c=None, tol=1e-7, max_levels=5):
    """T^z = (1/2 pi i) int_Gamma lambda^z (T - lambda)^{-1} d lambda (Re z >= 0 via T^m T^(z-m))."""
    z = complex(z)
    m = shift_plan(z)
    zz = z - m
    ev = T.eigenvalues()
    if np.any((ev.real <= 0) & (np.abs(ev.imag) <= BRANCH_TOL * np.maximum(np.abs(ev), 1.0))):
        raise DomainError("the spectrum meets (-inf, 0]; the keyhole would cross it")
    spec = contour or default_contour(T, r0, c)
    dist = float(np.min(np.abs(ev)))
    if spec.kind == "keyhole" and spec.r >= dist:
        raise DomainError(f"keyhole radius {spec.r:.4g} reaches the spectrum (distance {dist:.4g})")
    A = T.matrix
    I = np.eye(T.size)

    def integrand(lam, arg):
        return branch_power(lam, zz, arg) * np.linalg.solve(A - lam * I, I)

    tail = _neumann_tail(A, zz) if spec.kind == "keyhole" else None
    res = contour_quadrature(spec, integrand, tol=tol * 2 * np.pi, tail_correction=tail,
                             max_levels=max_levels, with_angle=True)
    M = res.value / (2j * np.pi)
    if m:
        M = np.linalg.matrix_power(A, m) @ M
    out = TruncatedOperator(T.theta, T.N, M, "contour")
    out.error = res.error / (2 * np.pi) * (np.linalg.norm(A, 2) ** m if m else 1.0)
    out.shift = m
    out.nodes = res.nodes
    return out


# ---------------------------------------------------------------- symbol route

def gamma_xi(c, c_prime, xi_norm, w):
    """Clockwise circle around [c, c'] |xi|^w kept at distance >= c |xi|^w / 2 from (-inf, 0]."""
    s = xi_norm ** w
    guard = max(0.1 * (c_prime - c), 0.5 * c)
    radius = min((c_prime - c) / 2 + guard, c_prime / 2)
    return ContourSpec.circle((c + c_prime) / 2 * s, radius * s, orientation=-1)


class _PowerComponent:
    """xi -> (1/2 pi i) int_{gamma_xi} lambda^z sigma(xi; lambda) d lambda."""

    def __init__(self, sigma, theta, z, c, c_prime, w, cutoff, tol):
        self.sigma, self.theta, self.z = sigma, theta, z
        self.c, self.c_prime, self.w = c, c_prime, w
        self.cutoff, self.tol = cutoff, tol

    def __call__(self, xi_v, lam_v=None):
        xi_v = np.asarray(xi_v, dtype=float)
        r = float(np.linalg.norm(xi_v))
        if r == 0:
            raise DomainError("the symbol integral is not defined at xi = 0")
        spec = gamma_xi(self.c, self.c_prime, r, self.w)
        e = self.sigma
        if e.scalar:
            def f(lams):
                return branch_power(lams, self.z) * S.evaluate_batch(e, xi_v, lams)
            res = contour_quadrature(spec, f, tol=self.tol, vectorized=True)
            return complex(res.value / (2j * np.pi))
        # NcElement-valued: accumulate coefficients at two refinement levels
        vals = []
        for level in (1, 2):
            acc = {}
            lam, wts = path_rule(spec, level)
            for l, wt in zip(lam, wts):
                v = S.evaluate(e, xi_v, l, theta=self.theta, cutoff=self.cutoff)
                f = wt * branch_power(l, self.z)
                for k, a in zip(map(tuple, v.keys), v.vals):
                    acc[k] = acc.get(k, 0) + f * a
            vals.append(NcElement.from_dict(self.theta, {k: v / (2j * np.pi) for k, v in acc.items()}))
        err = (vals[1] - vals[0]).norm0()
        if err > self.tol * max(1.0, vals[1].norm0()) * 1e3:
            raise PrecisionError(f"symbol integral did not settle (change {err:.3g})", err)
        return vals[1]


def power_symbol(sym, z, J=4, cutoff=12, tol=1e-9, ell=None):
    """Symbol of P^z: components rho_{wz-j}(z; xi) from contour integrals of the parametrix."""
    z = complex(z)
    w = sym.order
    if isinstance(w, complex) or w <= 0:
        raise ValidationError("power_symbol needs a positive real order")
    ell = ell or ellipticity_data(sym.principal(), sym.theta)
    if not ell.positive():
        raise DomainError("principal symbol is not positive: its spectral cloud meets C minus (0, inf)")
    Q = parametric_parametrix(sym, J)
    comps = []
    for j, comp in enumerate(Q.components):
        fn = _PowerComponent(comp.expr, sym.theta, z, ell.c, ell.c_prime, w, cutoff, tol)
        node = S.Numeric(fn, f"power z={z} j={j}", scalar=comp.expr.scalar)
        comps.append(S.HomogeneousSymbol(node, w * z - j, 0.0, w))
    out = S.ClassicalSymbol(sym.theta, comps, S.Cutoff(0.0, 1.0), w)
    out.ellipticity = ell
    return out


def principal_power(sym, z, xi_v, N=12):
    """rho_w(xi)^z by functional calculus on the truncated left-multiplication matrix."""
    v = S.evaluate(sym.principal().expr, xi_v, theta=sym.theta, cutoff=N)
    if v.is_scalar():
        return NcElement.scalar(sym.theta, complex(branch_power(v.scalar_value(), z)))
    L = left_mult_matrix(v, N)
    if np.allclose(L, L.conj().T, atol=1e-12 * max(1.0, np.abs(L).max())):
        ev, V = np.linalg.eigh(L)
        ev = ev.astype(complex)
    else:
        R, V = scipy.linalg.schur(L, output="complex")
        ev = np.diag(R)
    F = (V * branch_power(ev, z)[None, :]) @ V.conj().T
    box = LatticeBox(sym.n, N)
    return box.element(sym.theta, F[:, box.index(np.zeros((1, sym.n)))[0]])


# ---------------------------------------------------------------- |P| and the group law

def abs_value(T, sym=None, kernel_tol=None):
    """(|T|, principal-symbol evaluator or None) with |T| = (T* T)^{1/2}."""
    PP = compose(adjoint_op(T), T)
    PP = TruncatedOperator(T.theta, T.N, (PP.matrix + PP.matrix.conj().T) / 2, "composed")
    A = power_spectral(PP, 0.5, kernel_tol)
    A = TruncatedOperator(T.theta, T.N, (A.matrix + A.matrix.conj().T) / 2, "spectral")
    if sym is None:
        return A, None
    PsP = sharp(star(sym.truncate(0)), sym.truncate(0), J=0)
    root = power_symbol(PsP, 0.5, J=0)
    return A, root.components[0]


def group_property_check(T, z1, z2, kernel_tol=None):
    """max-norm of T^z1 T^z2 - T^(z1+z2) (on the complement of the kernel when there is one)."""
    A = power_spectral(T, z1, kernel_tol)
    B = power_spectral(T, z2, kernel_tol)
    C = power_spectral(T, complex(z1) + complex(z2), kernel_tol)
    D = A.matrix @ B.matrix - C.matrix
    if A.kernel_dim:
        ev, V = _diagonalize(T)
        keep = np.abs(ev) > _kernel_tol(T, kernel_tol)
        Pm = V[:, keep] @ V[:, keep].conj().T
        D = Pm @ D @ Pm
    return float(np.linalg.norm(D, 2))


def holomorphy_residual(T, z, h=1e-5, entries=None):
    """Finite-difference Cauchy-Riemann residual of z -> T^z (largest over entries)."""
    z = complex(z)
    fx = (power_spectral(T, z + h).matrix - power_spectral(T, z - h).matrix) / (2 * h)
    fy = (power_spectral(T, z + 1j * h).matrix - power_spectral(T, z - 1j * h).matrix) / (2 * h)
    R = fy - 1j * fx
    if entries is not None:
        R = R[entries]
    return float(np.max(np.abs(R)))
