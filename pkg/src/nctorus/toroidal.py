"""Toroidal symbols: lattice tables, and their smooth extension to R^n.

The interpolant phi is a tensor product of one-dimensional profiles

    phi_1(x) = sinc(x) * g_hat(x),

where g is a smooth bump supported in [-a, a] with unit mass and a < 1/2.
phi_1 is the Fourier transform of 1_[-1/2, 1/2] * g, whose periodization is
identically one.  Hence phi_1(k) vanishes at nonzero integers, phi_1(0) = 1,
and the integral of phi_1 equals (1_[-1/2,1/2] * g)(0) = 1.
"""

import numpy as np

from .algebra import LatticeBox, NcElement
from .errors import ValidationError


class ToroidalSymbolTable:
    def __init__(self, theta, N, values):
        self.theta = theta
        self.box = LatticeBox(theta.n, N)
        values = list(values)
        if len(values) != self.box.size:
            raise ValidationError("table must cover every mode of the box")
        self.values = values

    @property
    def N(self):
        return self.box.N

    def __getitem__(self, k):
        i = self.box.index(np.asarray(k).reshape(1, -1))[0]
        if i < 0:
            raise KeyError(k)
        return self.values[i]

    def __call__(self, k):
        return self[k]

    @classmethod
    def from_function(cls, theta, N, fn):
        box = LatticeBox(theta.n, N)
        return cls(theta, N, [fn(k) for k in box.points])


def restrict_to_lattice(sym, N, lam=None, cutoff=12, tol=1e-8):
    """Table of the chi-assembled symbol at the lattice points of the box."""
    box = LatticeBox(sym.n, N)
    vals = []
    for k in box.points:
        try:
            vals.append(sym.assembled(k.astype(float), lam, cutoff=cutoff, tol=tol))
        except Exception as exc:
            raise type(exc)(f"{exc} (at lattice point {tuple(int(x) for x in k)})") from exc
    return ToroidalSymbolTable(sym.theta, N, vals)


def _bump(t, a):
    out = np.zeros_like(t)
    inside = np.abs(t) < a
    u = t[inside] / a
    out[inside] = np.exp(-1.0 / (1.0 - u * u))
    return out


class Interpolant:
    """phi on R^n with phi(0) = 1, phi(k) = 0 for k != 0 and unit integral."""

    def __init__(self, n, half_width=0.45, nodes=600):
        if not 0 < half_width < 0.5:
            raise ValidationError("bump half-width must lie in (0, 1/2)")
        self.n = int(n)
        self.half_width = float(half_width)
        x, w = np.polynomial.legendre.leggauss(nodes)
        self._t = x * half_width
        g = _bump(self._t, half_width)
        self._w = w * half_width * g / np.sum(w * half_width * g)

    def profile(self, x):
        """The one-dimensional factor phi_1."""
        x = np.asarray(x, dtype=float)
        ghat = np.cos(2 * np.pi * np.multiply.outer(x, self._t)) @ self._w
        return np.sinc(x) * ghat

    def __call__(self, xi_v):
        xi_v = np.asarray(xi_v, dtype=float)
        if xi_v.ndim == 1:
            return float(np.prod(self.profile(xi_v)))
        return np.prod(self.profile(xi_v), axis=-1)

    def integral(self, half_length=80.0, panels=320):
        """Quadrature of phi over the box [-L, L]^n (the tensor structure is used)."""
        edges = np.linspace(-half_length, half_length, panels + 1)
        x, w = np.polynomial.legendre.leggauss(16)
        total = 0.0
        for a, b in zip(edges[:-1], edges[1:]):
            m, h = (a + b) / 2, (b - a) / 2
            total += h * np.sum(w * self.profile(m + h * x))
        return total ** self.n


def build_phi(n, half_width=0.45, check_radius=8, tol=1e-10):
    """Construct the interpolant and verify the lattice interpolation property."""
    phi = Interpolant(n, half_width)
    if abs(phi(np.zeros(n)) - 1.0) > tol:
        raise ValidationError(f"phi(0) = {phi(np.zeros(n))} is not 1")
    pts = LatticeBox(n, check_radius).points
    pts = pts[np.abs(pts).max(axis=1) > 0]
    vals = np.abs(phi(pts.astype(float)))
    worst = int(np.argmax(vals))
    if vals[worst] > tol:
        raise ValidationError(
            f"interpolation fails at {tuple(int(v) for v in pts[worst])}: |phi| = {vals[worst]:.3g}")
    return phi


def extend_toroidal(table, phi):
    """Smooth symbol xi -> sum_k phi(xi - k) rho_k built from a lattice table."""
    pts = table.box.points.astype(float)
    theta = table.theta

    def rho(xi_v):
        w = phi(np.asarray(xi_v, dtype=float)[None, :] - pts)
        keys, vals = [], []
        for wk, v in zip(w, table.values):
            if wk != 0 and not v.is_zero():
                keys.append(v.keys)
                vals.append(v.vals * wk)
        if not keys:
            return NcElement(theta)
        return NcElement(theta, np.vstack(keys), np.concatenate(vals))

    return rho
