"""Toroidal quantization to truncated matrices, and matrix-level diagnostics.

A symbol rho acts by  sum_k u_k U^k  ->  sum_k u_k rho(k) U^k.  On the box
|k|_inf <= N the column of U^k holds the coefficients of rho(k) U^k, clipped to
the box.  Rows outside the box are lost, so products of truncations agree
with truncations of products only on interior modes.
"""

import json

import numpy as np

from . import symbols as S
from .algebra import LatticeBox, NcElement, left_mult_matrix
from .errors import ConfigurationError, ValidationError
from .geometry import loglog_fit
from .grid import assembled_grid
from .toroidal import ToroidalSymbolTable


class TruncatedOperator:
    def __init__(self, theta, N, matrix, provenance="quantized-from-symbol"):
        self.theta = theta
        self.box = LatticeBox(theta.n, N)
        M = np.asarray(matrix, dtype=complex)
        if M.shape != (self.box.size, self.box.size):
            raise ValidationError(f"matrix shape {M.shape} does not match the box {self.box.size}")
        M.setflags(write=False)
        self.matrix = M
        self.provenance = provenance
        self._eig = None

    @property
    def N(self):
        return self.box.N

    @property
    def n(self):
        return self.theta.n

    @property
    def size(self):
        return self.box.size

    def _check(self, other):
        if self.theta != other.theta or self.box != other.box:
            raise ConfigurationError("operators have different tori or cutoffs")

    def __matmul__(self, other):
        return compose(self, other)

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return add(self, scale(other, -1))

    def norm(self):
        return float(np.linalg.norm(self.matrix, 2))

    def interior(self, margin):
        mask = self.box.interior_mask(margin)
        return self.matrix[np.ix_(mask, mask)]

    def is_hermitian(self, tol=1e-10):
        M = self.matrix
        return float(np.max(np.abs(M - M.conj().T))) <= tol * max(1.0, float(np.max(np.abs(M))))

    def eigenvalues(self):
        if self._eig is None:
            if self.is_hermitian():
                ev = np.linalg.eigvalsh(self.matrix).astype(complex)
            else:
                ev = np.linalg.eigvals(self.matrix)
            ev.setflags(write=False)
            self._eig = ev
        return self._eig

    def to_json(self):
        return {"header": {"n": self.n, "N": self.N, "order": "lex"},
                "theta": self.theta.to_json(), "provenance": self.provenance,
                "re": self.matrix.real.tolist(), "im": self.matrix.imag.tolist()}

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh)

    @classmethod
    def from_json(cls, d):
        from .algebra import ThetaMatrix
        M = np.asarray(d["re"]) + 1j * np.asarray(d["im"])
        return cls(ThetaMatrix(d["theta"]), d["header"]["N"], M, d.get("provenance", "loaded"))


def identity(theta, N):
    box = LatticeBox(theta.n, N)
    return TruncatedOperator(theta, N, np.eye(box.size), "identity")


def compose(A, B):
    A._check(B)
    return TruncatedOperator(A.theta, A.N, A.matrix @ B.matrix, "composed")


def add(A, B):
    A._check(B)
    return TruncatedOperator(A.theta, A.N, A.matrix + B.matrix, "composed")


def scale(A, c):
    return TruncatedOperator(A.theta, A.N, complex(c) * A.matrix, A.provenance)


def adjoint_op(A):
    return TruncatedOperator(A.theta, A.N, A.matrix.conj().T, "composed")


def shift(A, c):
    """A + c * identity."""
    return TruncatedOperator(A.theta, A.N, A.matrix + complex(c) * np.eye(A.size), A.provenance)


def interior_projector(N, margin, n=2):
    return LatticeBox(n, N).interior_mask(margin)


def _polynomial_terms(expr):
    """[(beta, NcElement-or-scalar)] for a sum of c xi^beta [Const a] terms, else None."""
    if S.is_zero(expr):
        return []
    terms = expr.terms if isinstance(expr, S.Sum) else (expr,)
    out = []
    for t in terms:
        mf = S._monomial_form(t)
        if mf is None or mf[0][1] != 0:
            return None
        beta, val = mf[0][0], mf[1]
        out.append((beta, val))
    return out


def _column_fill(M, box, theta, k_index, k, v):
    if v.is_zero():
        return
    ph = theta.phase_matrix(v.keys, k[None, :])[:, 0]
    rows = box.index(v.keys + k)
    ok = rows >= 0
    np.add.at(M[:, k_index], rows[ok], v.vals[ok] * ph[ok])


def quantize(sym, N, lam=None, cutoff=12, tol=1e-8, theta=None):
    """Truncated matrix of the toroidal quantization of ``sym``.

    ``sym`` may be a ClassicalSymbol (with ``lam`` bound if parametric), a
    ToroidalSymbolTable, or a callable k -> NcElement (then pass ``theta``).
    """
    if isinstance(sym, S.ClassicalSymbol):
        theta = sym.theta
        fast = _quantize_polynomial(sym, N)
        if fast is not None:
            return fast
        return _quantize_grid(sym, N, lam, cutoff, tol)
    elif isinstance(sym, ToroidalSymbolTable):
        theta = sym.theta
        if sym.N < N:
            raise ValidationError("table does not cover the requested box")

        def rho(k):
            return sym[k]
    else:
        if theta is None:
            raise ValidationError("pass theta when quantizing a bare callable")
        rho = sym
    box = LatticeBox(theta.n, N)
    M = np.zeros((box.size, box.size), dtype=complex)
    for i, k in enumerate(box.points):
        try:
            v = rho(k)
        except Exception as exc:
            raise type(exc)(f"{exc} (at lattice point {tuple(int(x) for x in k)})") from exc
        if not isinstance(v, NcElement):
            v = NcElement.scalar(theta, v)
        _column_fill(M, box, theta, i, k, v)
    return TruncatedOperator(theta, N, M)


def _quantize_grid(sym, N, lam, cutoff, tol):
    """All lattice points evaluated together, then scattered into the columns."""
    box = LatticeBox(sym.n, N)
    K = box.points
    wbox, V = assembled_grid(sym, K.astype(float), lam, cutoff=cutoff, tol=tol, points=K)
    W = wbox.points
    rows = box.index((W[None, :, :] + K[:, None, :]).reshape(-1, sym.n)).reshape(len(K), -1)
    ph = sym.theta.phase_matrix(W, K).T                      # (P, m)
    cols = np.broadcast_to(np.arange(box.size)[:, None], rows.shape)
    ok = rows >= 0
    M = np.zeros((box.size, box.size), dtype=complex)
    np.add.at(M, (rows[ok], cols[ok]), (V * ph)[ok])
    return TruncatedOperator(sym.theta, N, M)


def _quantize_polynomial(sym, N):
    """Exact fast path for differential symbols: sum_beta L_{a_beta} diag(k^beta)."""
    if not sym.is_differential():
        return None
    collected = {}
    for comp in sym.components:
        terms = _polynomial_terms(comp.expr)
        if terms is None:
            return None
        for beta, val in terms:
            beta = beta if beta is not None else (0,) * sym.n
            collected[beta] = collected.get(beta, 0) + val if beta in collected else val
    box = LatticeBox(sym.n, N)
    pts = box.points.astype(float)
    M = np.zeros((box.size, box.size), dtype=complex)
    for beta, val in collected.items():
        weights = np.prod(pts ** np.asarray(beta, dtype=float), axis=1)
        if isinstance(val, NcElement):
            M += left_mult_matrix(val, N) * weights[None, :]
        else:
            M += np.diag(complex(val) * weights)
    return TruncatedOperator(sym.theta, N, M)


def sobolev_weights(box, s):
    k2 = np.sum(box.points.astype(float) ** 2, axis=1)
    return (1.0 + k2) ** (s / 2)


def op_norm(T, s=0.0, t=0.0):
    """Spectral norm of D_t M D_s^{-1} with D_s = diag((1 + |k|^2)^(s/2))."""
    Dt = sobolev_weights(T.box, t)
    Ds = sobolev_weights(T.box, s)
    return float(np.linalg.norm(Dt[:, None] * T.matrix / Ds[None, :], 2))


def singular_values(T):
    return np.linalg.svd(T.matrix if isinstance(T, TruncatedOperator) else T, compute_uv=False)


def schatten_tail(T, q=None, top=0.1, bottom=0.2, min_points=10):
    """Slope of log mu_k against log(k + 1) over the middle of the singular values."""
    mu = singular_values(T)
    m = mu.size
    lo, hi = int(np.floor(top * m)), int(np.ceil((1 - bottom) * m))
    if hi - lo < min_points:
        raise ValidationError(f"only {hi - lo} singular values in the fit window; increase N")
    k = np.arange(lo, hi)
    fit = loglog_fit(k + 1.0, mu[lo:hi])
    if q is not None:
        fit.passed = abs(fit.exponent + 1.0 / q) <= 0.1
        fit.note = f"weak Schatten exponent -1/q = {-1.0 / q:.4g}"
    return fit
