"""Finite Fourier series on the noncommutative torus.

An element is a finite sum ``sum_k a_k U^k`` where ``U^k = U_1^{k_1} ... U_n^{k_n}``
is the ordered monomial in the generators.  The generators satisfy

    U_k U_j = exp(2 pi i theta_{jk}) U_j U_k

and everything else (products, adjoints, inverses) is derived from that.
"""

import itertools

import numpy as np

from .errors import ConfigurationError, NotInvertibleError, TruncationError

PRUNE_TOL = 1e-14


class ThetaMatrix:
    """Antisymmetric real matrix of deformation angles (in full turns)."""

    def __init__(self, entries, atol=1e-12):
        a = np.atleast_2d(np.asarray(entries, dtype=float))
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise ConfigurationError("theta must be a square n x n matrix, n >= 1")
        if not np.allclose(a, -a.T, rtol=0, atol=atol):
            raise ConfigurationError("theta must be antisymmetric")
        self.entries = a
        self.entries.setflags(write=False)
        # phase(k, l) = exp(2 pi i k . B . l) with B[j, m] = theta[m, j] for m < j
        self._bilinear = np.tril(a.T, -1)
        self._bilinear.setflags(write=False)

    @property
    def n(self):
        return self.entries.shape[0]

    @classmethod
    def from_angle(cls, theta12, n=2):
        a = np.zeros((n, n))
        a[0, 1], a[1, 0] = theta12, -theta12
        return cls(a)

    @classmethod
    def zero(cls, n):
        return cls(np.zeros((n, n)))

    def __eq__(self, other):
        return isinstance(other, ThetaMatrix) and np.array_equal(self.entries, other.entries)

    def __hash__(self):
        return hash(self.entries.tobytes())

    def __repr__(self):
        return f"ThetaMatrix({self.entries.tolist()})"

    def phase(self, k, l):
        """Scalar c with U^k U^l = c U^{k+l}."""
        k = np.asarray(k, dtype=float)
        l = np.asarray(l, dtype=float)
        return complex(np.exp(2j * np.pi * (k @ self._bilinear @ l)))

    def phase_matrix(self, K, L):
        """Phases for all pairs of rows of K (p, n) and L (q, n); shape (p, q)."""
        K = np.asarray(K, dtype=float)
        L = np.asarray(L, dtype=float)
        return np.exp(2j * np.pi * ((K @ self._bilinear) @ L.T))

    def to_json(self):
        return self.entries.tolist()

    @classmethod
    def from_json(cls, data):
        return cls(data)


def _aggregate(keys, vals, n):
    """Sum values that share a lattice point; returns sorted unique keys."""
    if keys.shape[0] == 0:
        return np.zeros((0, n), dtype=np.int64), np.zeros(0, dtype=complex)
    lo = keys.min(axis=0)
    span = keys.max(axis=0) - lo + 1
    code = np.zeros(keys.shape[0], dtype=np.int64)
    for j in range(n):
        code = code * span[j] + (keys[:, j] - lo[j])
    uniq, inv = np.unique(code, return_inverse=True)
    out = np.zeros(uniq.shape[0], dtype=complex)
    np.add.at(out, inv, vals)
    ukeys = np.empty((uniq.shape[0], n), dtype=np.int64)
    rem = uniq.copy()
    for j in reversed(range(n)):
        ukeys[:, j] = rem % span[j] + lo[j]
        rem //= span[j]
    return ukeys, out


class NcElement:
    """Immutable finite Fourier series with twisted multiplication."""

    __slots__ = ("theta", "keys", "vals", "_hash")

    def __init__(self, theta, keys=None, vals=None, prune=PRUNE_TOL, _clean=False):
        self.theta = theta
        n = theta.n
        if keys is None:
            keys = np.zeros((0, n), dtype=np.int64)
            vals = np.zeros(0, dtype=complex)
        keys = np.asarray(keys, dtype=np.int64).reshape(-1, n)
        vals = np.asarray(vals, dtype=complex).reshape(-1)
        if not _clean:
            keys, vals = _aggregate(keys, vals, n)
        if prune is not None and vals.size:
            keep = np.abs(vals) > prune
            if not keep.all():
                keys, vals = keys[keep], vals[keep]
        keys.setflags(write=False)
        vals.setflags(write=False)
        self.keys = keys
        self.vals = vals
        self._hash = None

    # construction helpers
    @classmethod
    def zero(cls, theta):
        return cls(theta)

    @classmethod
    def scalar(cls, theta, c):
        return cls(theta, np.zeros((1, theta.n), dtype=np.int64), [c])

    @classmethod
    def monomial(cls, theta, k, c=1.0):
        return cls(theta, np.asarray(k, dtype=np.int64).reshape(1, -1), [c])

    @classmethod
    def generator(cls, theta, j, power=1):
        """U_j^power (j is 1-based, matching the usual notation)."""
        k = np.zeros(theta.n, dtype=np.int64)
        k[j - 1] = power
        return cls.monomial(theta, k)

    @classmethod
    def from_dict(cls, theta, coeffs):
        if not coeffs:
            return cls(theta)
        keys = np.array([tuple(k) for k in coeffs], dtype=np.int64)
        vals = np.array(list(coeffs.values()), dtype=complex)
        return cls(theta, keys, vals)

    def to_dict(self):
        return {tuple(int(x) for x in k): complex(v) for k, v in zip(self.keys, self.vals)}

    def coeff(self, k):
        k = np.asarray(k, dtype=np.int64)
        hit = np.nonzero((self.keys == k).all(axis=1))[0]
        return complex(self.vals[hit[0]]) if hit.size else 0j

    @property
    def n(self):
        return self.theta.n

    def is_zero(self):
        return self.vals.size == 0

    def is_scalar(self):
        return self.vals.size == 0 or (self.vals.size == 1 and not self.keys[0].any())

    def scalar_value(self):
        return complex(self.vals[0]) if self.vals.size else 0j

    def support_radius(self):
        return int(np.abs(self.keys).max()) if self.vals.size else 0

    def _check(self, other):
        if self.theta != other.theta:
            raise ConfigurationError("elements live on different noncommutative tori")

    # arithmetic
    def __add__(self, other):
        if not isinstance(other, NcElement):
            other = NcElement.scalar(self.theta, other)
        self._check(other)
        return NcElement(self.theta, np.vstack([self.keys, other.keys]),
                         np.concatenate([self.vals, other.vals]))

    __radd__ = __add__

    def __neg__(self):
        return NcElement(self.theta, self.keys, -self.vals, _clean=True)

    def __sub__(self, other):
        return self + (-other if isinstance(other, NcElement) else -complex(other))

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c):
        return NcElement(self.theta, self.keys, self.vals * complex(c), _clean=True)

    def __mul__(self, other):
        if isinstance(other, NcElement):
            return mul(self, other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def __eq__(self, other):
        return (isinstance(other, NcElement) and self.theta == other.theta
                and np.array_equal(self.keys, other.keys) and np.array_equal(self.vals, other.vals))

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.keys.tobytes(), self.vals.tobytes()))
        return self._hash

    def __repr__(self):
        if self.is_zero():
            return "0"
        terms = []
        for k, v in zip(self.keys, self.vals):
            terms.append(f"({v:.6g})U^{tuple(int(x) for x in k)}")
        return " + ".join(terms)

    def norm0(self):
        return float(np.sqrt(np.sum(np.abs(self.vals) ** 2)))

    def to_json(self):
        return [{"k": [int(x) for x in k], "re": float(v.real), "im": float(v.imag)}
                for k, v in zip(self.keys, self.vals)]

    @classmethod
    def from_json(cls, theta, data):
        if not data:
            return cls(theta)
        keys = [rec["k"] for rec in data]
        if any(len(k) != theta.n for k in keys):
            raise ConfigurationError("lattice point has the wrong dimension")
        vals = [complex(rec.get("re", 0.0), rec.get("im", 0.0)) for rec in data]
        return cls(theta, keys, vals)


def phase(theta, k, l):
    return theta.phase(k, l)


def mul(a, b):
    a._check(b)
    if a.is_zero() or b.is_zero():
        return NcElement(a.theta)
    if a.is_scalar():
        return b.scale(a.scalar_value())
    if b.is_scalar():
        return a.scale(b.scalar_value())
    ph = a.theta.phase_matrix(a.keys, b.keys)
    vals = (a.vals[:, None] * b.vals[None, :]) * ph
    keys = (a.keys[:, None, :] + b.keys[None, :, :]).reshape(-1, a.n)
    return NcElement(a.theta, keys, vals.reshape(-1))


def adjoint(a):
    # (U^k)^* = (U^k)^{-1} = conj(phase(k, -k)) U^{-k}
    if a.is_zero():
        return a
    ph = np.exp(2j * np.pi * np.einsum("ij,jk,ik->i", a.keys.astype(float),
                                       a.theta._bilinear, -a.keys.astype(float)))
    return NcElement(a.theta, -a.keys, np.conj(a.vals) * np.conj(ph))


def trace(a):
    return a.coeff(np.zeros(a.n, dtype=np.int64))


def inner(u, v):
    """<u, v> = tau(u v^*)."""
    u._check(v)
    return trace(mul(u, adjoint(v)))


def delta(alpha, a):
    alpha = np.asarray(alpha, dtype=np.int64)
    if a.is_zero():
        return a
    w = np.prod(a.keys.astype(float) ** alpha[None, :], axis=1)
    return NcElement(a.theta, a.keys, a.vals * w, _clean=True)


def sobolev_norm(a, s):
    if a.is_zero():
        return 0.0
    k2 = np.sum(a.keys.astype(float) ** 2, axis=1)
    return float(np.sqrt(np.sum((1.0 + k2) ** s * np.abs(a.vals) ** 2)))


class LatticeBox:
    """The modes {k : |k|_inf <= N}, enumerated lexicographically."""

    def __init__(self, n, N):
        if N < 0:
            raise ConfigurationError("cutoff must be nonnegative")
        self.n = int(n)
        self.N = int(N)
        self.side = 2 * self.N + 1
        self.size = self.side ** self.n
        pts = np.array(list(itertools.product(range(-self.N, self.N + 1), repeat=self.n)),
                       dtype=np.int64)
        self.points = pts.reshape(-1, self.n)
        self.points.setflags(write=False)

    def __eq__(self, other):
        return isinstance(other, LatticeBox) and (self.n, self.N) == (other.n, other.N)

    def __hash__(self):
        return hash((self.n, self.N))

    def index(self, keys):
        """Row index of each lattice point, or -1 when it falls outside the box."""
        keys = np.asarray(keys, dtype=np.int64).reshape(-1, self.n)
        inside = (np.abs(keys) <= self.N).all(axis=1)
        idx = np.zeros(keys.shape[0], dtype=np.int64)
        for j in range(self.n):
            idx = idx * self.side + (keys[:, j] + self.N)
        idx[~inside] = -1
        return idx

    def interior_mask(self, margin):
        if margin >= self.N and margin > 0:
            raise ConfigurationError("margin must be smaller than the cutoff")
        return (np.abs(self.points) <= self.N - margin).all(axis=1)

    def vector(self, a):
        """Coefficient vector of an element clipped to the box."""
        v = np.zeros(self.size, dtype=complex)
        idx = self.index(a.keys)
        ok = idx >= 0
        v[idx[ok]] = a.vals[ok]
        return v

    def element(self, theta, v, prune=PRUNE_TOL):
        return NcElement(theta, self.points, v, prune=prune, _clean=True)


def left_mult_matrix(a, N):
    """Matrix of u -> a u on the box |k|_inf <= N, columns indexed by U^l."""
    box = LatticeBox(a.n, N)
    M = np.zeros((box.size, box.size), dtype=complex)
    if a.is_zero():
        return M
    # column l holds sum_k a_k phase(k, l) U^{k+l}
    ph = a.theta.phase_matrix(a.keys, box.points)
    for i, k in enumerate(a.keys):
        rows = box.index(box.points + k)
        ok = rows >= 0
        cols = np.nonzero(ok)[0]
        M[rows[ok], cols] += a.vals[i] * ph[i, ok]
    return M


def invert(a, cutoff, tol=1e-8, cond_max=1e12):
    """Inverse of ``a`` obtained from its truncated left-multiplication matrix."""
    if a.is_scalar():
        c = a.scalar_value()
        if c == 0:
            raise NotInvertibleError("zero is not invertible", condition=np.inf)
        return NcElement.scalar(a.theta, 1.0 / c)
    box = LatticeBox(a.n, cutoff)
    L = left_mult_matrix(a, cutoff)
    e0 = np.zeros(box.size, dtype=complex)
    e0[box.index(np.zeros((1, a.n)))[0]] = 1.0
    try:
        sol = np.linalg.solve(L, e0)
    except np.linalg.LinAlgError:
        # shifts have singular truncations but exact least-squares inverses
        sol = np.linalg.lstsq(L, e0, rcond=None)[0]
    if not np.all(np.isfinite(sol)):
        raise NotInvertibleError("not invertible at this truncation", condition=np.inf)
    b = box.element(a.theta, sol)
    resid = (mul(a, b) - 1.0).norm0()
    if resid > tol:
        cond = np.linalg.cond(L)
        if cond > cond_max:
            raise NotInvertibleError(
                f"not invertible at this truncation (condition estimate {cond:.3g})",
                condition=cond)
        raise TruncationError(
            f"inverse residual {resid:.3g} exceeds {tol:.3g}; increase the cutoff", residual=resid)
    return b


def exp_series(a, terms=30, cutoff=None):
    out = NcElement.scalar(a.theta, 1.0)
    power = NcElement.scalar(a.theta, 1.0)
    for m in range(1, terms):
        power = mul(power, a).scale(1.0 / m)
        if cutoff is not None:
            power = _clip(power, cutoff)
        out = out + power
    if cutoff is not None:
        out = _clip(out, cutoff)
    return out


def _clip(a, N):
    keep = (np.abs(a.keys) <= N).all(axis=1)
    return NcElement(a.theta, a.keys[keep], a.vals[keep], _clean=True)


def surrogate_norm(a, N):
    """Operator norm of the truncated left-multiplication matrix (a lower bound for the C*-norm)."""
    if a.is_scalar():
        return abs(a.scalar_value())
    return float(np.linalg.norm(left_mult_matrix(a, N), 2))
