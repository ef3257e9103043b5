"""Evaluate a symbol tree at many lattice points at once.

Values are kept as dense coefficient arrays of shape (P, m) on a working box
W (radius ``cutoff`` along the directions that actually occur in the tree,
radius 0 along the others).  Scalar-valued subtrees stay as arrays of shape
(P,).  Products are truncated to W, inverses are solved on W; this mirrors
the pointwise evaluator with the same cutoff.
"""

import itertools

import numpy as np

from . import symbols as S
from .algebra import NcElement
from .errors import NotInvertibleError, TruncationError, ValidationError


class WorkBox:
    def __init__(self, theta, radii):
        self.theta = theta
        self.radii = np.asarray(radii, dtype=np.int64)
        ranges = [range(-r, r + 1) for r in self.radii]
        self.points = np.array(list(itertools.product(*ranges)), dtype=np.int64).reshape(-1, theta.n)
        self.size = self.points.shape[0]
        self.sides = 2 * self.radii + 1
        self.origin = int(self.index(np.zeros((1, theta.n), dtype=np.int64))[0])
        self._tables = {}

    def index(self, keys):
        keys = np.asarray(keys, dtype=np.int64)
        inside = (np.abs(keys) <= self.radii).all(axis=-1)
        idx = np.zeros(keys.shape[:-1], dtype=np.int64)
        for j in range(self.theta.n):
            idx = idx * self.sides[j] + (keys[..., j] + self.radii[j])
        return np.where(inside, idx, -1)

    def shift_table(self, target):
        """For each k in W: source indices l, target rows of k + l in ``target``, phases."""
        key = id(target)
        if key not in self._tables:
            out = []
            ph = self.theta.phase_matrix(self.points, self.points)
            for i, k in enumerate(self.points):
                rows = target.index(self.points + k)
                ok = np.nonzero(rows >= 0)[0]
                out.append((ok, rows[ok], ph[i, ok]))
            self._tables[key] = out
        return self._tables[key]

    def element(self, v, prune=1e-14):
        return NcElement(self.theta, self.points, v, prune=prune, _clean=True)


def active_radii(e, theta, cutoff):
    """Radius ``cutoff`` (or the widest constant) along every direction a constant touches."""
    act = np.zeros(theta.n, dtype=bool)
    reach = np.zeros(theta.n, dtype=np.int64)
    seen = set()

    def walk(x):
        if id(x) in seen:
            return
        seen.add(id(x))
        if isinstance(x, S.Const) and not x.elem.is_zero():
            act[:] |= (x.elem.keys != 0).any(axis=0)
            reach[:] = np.maximum(reach, np.abs(x.elem.keys).max(axis=0))
        elif isinstance(x, S.Numeric) and not x.scalar:
            act[:] = True
        for c in x.children():
            walk(c)

    walk(e)
    return np.where(act, np.maximum(int(cutoff), reach), 0)


class GridEvaluator:
    """Evaluates trees at the rows of ``xis`` (P, n) with a fixed lambda."""

    def __init__(self, theta, xis, lam=None, cutoff=12, tol=1e-8, radii=None, points=None):
        self.theta = theta
        self.xis = np.asarray(xis, dtype=float)
        self.P = self.xis.shape[0]
        self.lam = lam
        self.cutoff = int(cutoff)
        self.tol = float(tol)
        self.box = WorkBox(theta, radii if radii is not None else np.zeros(theta.n, int))
        self.points = points
        self.memo = {}

    # value helpers: ('s', (P,)) or ('d', (P, m))
    def _dense(self, v):
        if v[0] == "d":
            return v[1]
        out = np.zeros((self.P, self.box.size), dtype=complex)
        out[:, self.box.origin] = v[1]
        return out

    def _from_element(self, a):
        if a.is_scalar():
            return ("s", np.full(self.P, a.scalar_value()))
        idx = self.box.index(a.keys)
        if np.any(idx < 0):
            raise ValidationError("constant reaches beyond the working box")
        row = np.zeros(self.box.size, dtype=complex)
        row[idx] = a.vals
        return ("d", np.broadcast_to(row, (self.P, self.box.size)))

    def _add(self, a, b):
        if a[0] == "s" and b[0] == "s":
            return ("s", a[1] + b[1])
        return ("d", self._dense(a) + self._dense(b))

    def _mul(self, a, b, target=None):
        if a[0] == "s":
            return (b[0], (a[1] if b[0] == "s" else a[1][:, None]) * b[1])
        if b[0] == "s":
            return ("d", a[1] * b[1][:, None])
        target = target or self.box
        A, B = a[1], b[1]
        out = np.zeros((self.P, target.size), dtype=complex)
        live = np.nonzero(np.any(np.abs(A) > 0, axis=0))[0]
        table = self.box.shift_table(target)
        for i in live:
            src, rows, ph = table[i]
            out[:, rows] += A[:, i:i + 1] * (B[:, src] * ph)
        return ("d", out)

    def _left_matrices(self, A):
        m = self.box.size
        L = np.zeros((self.P, m, m), dtype=complex)
        table = self.box.shift_table(self.box)
        for i in np.nonzero(np.any(np.abs(A) > 0, axis=0))[0]:
            src, rows, ph = table[i]
            L[:, rows, src] += A[:, i:i + 1] * ph
        return L

    def _where(self, p):
        if self.points is not None:
            return f" (at lattice point {tuple(int(x) for x in self.points[p])})"
        return f" (at xi = {tuple(float(x) for x in self.xis[p])})"

    def _invert(self, a, node, path):
        if a[0] == "s":
            if np.any(a[1] == 0):
                p = int(np.nonzero(a[1] == 0)[0][0])
                raise NotInvertibleError(f"zero value inverted at subtree {path}" + self._where(p),
                                         path=path)
            return ("s", 1.0 / a[1])
        A = a[1]
        L = self._left_matrices(A)
        m = self.box.size
        e0 = np.zeros((self.P, m), dtype=complex)
        e0[:, self.box.origin] = 1.0
        try:
            X = np.linalg.solve(L, e0[:, :, None])[:, :, 0]
        except np.linalg.LinAlgError:
            X = np.stack([np.linalg.lstsq(L[p], e0[p], rcond=None)[0] for p in range(self.P)])
        tol = node.tol or self.tol
        big = WorkBox(self.theta, 2 * self.box.radii)
        prod = self._mul(a, ("d", X), target=big)[1]
        prod[:, big.index(np.zeros((1, self.theta.n), dtype=np.int64))[0]] -= 1.0
        resid = np.sqrt(np.sum(np.abs(prod) ** 2, axis=1))
        bad = np.nonzero(~(resid <= tol))[0]
        if bad.size:
            p = int(bad[np.argmax(np.nan_to_num(resid[bad], nan=np.inf))])
            cond = np.linalg.cond(L[p])
            if cond > 1e12 or not np.isfinite(resid[p]):
                raise NotInvertibleError(
                    f"not invertible at this truncation (condition estimate {cond:.3g}) "
                    f"at subtree {path}" + self._where(p), condition=cond, path=path)
            raise TruncationError(f"inverse residual {resid[p]:.3g} exceeds {tol:.3g} at subtree "
                                  f"{path}" + self._where(p) + "; increase the cutoff",
                                  residual=float(resid[p]))
        return ("d", X)

    def ev(self, e, path=()):
        key = id(e)
        if key in self.memo:
            return self.memo[key]
        if isinstance(e, S.Scalar):
            v = ("s", np.full(self.P, e.c))
        elif isinstance(e, S.Const):
            v = self._from_element(e.elem)
        elif isinstance(e, S.Xi):
            v = ("s", np.prod(self.xis ** np.asarray(e.beta, dtype=float), axis=1).astype(complex))
        elif isinstance(e, S.Lam):
            if self.lam is None:
                raise ValidationError("symbol depends on lambda but no lambda was given")
            v = ("s", np.full(self.P, complex(self.lam)))
        elif isinstance(e, S.Bracket):
            v = ("s", ((1.0 + np.sum(self.xis ** 2, axis=1)) ** (e.s / 2)).astype(complex))
        elif isinstance(e, S.Sum):
            v = ("s", np.zeros(self.P, dtype=complex))
            for i, t in enumerate(e.terms):
                v = self._add(v, self.ev(t, path + (i,)))
        elif isinstance(e, S.Prod):
            v = ("s", np.ones(self.P, dtype=complex))
            for i, f in enumerate(e.factors):
                v = self._mul(v, self.ev(f, path + (i,)))
        elif isinstance(e, S.Inv):
            v = self._invert(self.ev(e.child, path + (0,)), e, path)
        elif isinstance(e, S.Pow):
            c = self.ev(e.child, path + (0,))
            if c[0] != "s":
                raise ValidationError("scalar_power child evaluated to a non-scalar")
            v = ("s", np.asarray(S._cpow(c[1], e.z), dtype=complex).reshape(self.P))
        elif isinstance(e, S.Numeric):
            vals = [e.fn(x, self.lam) for x in self.xis]
            if all(not isinstance(x, NcElement) for x in vals):
                v = ("s", np.asarray(vals, dtype=complex))
            else:
                D = np.zeros((self.P, self.box.size), dtype=complex)
                for p, x in enumerate(vals):
                    if isinstance(x, NcElement):
                        idx = self.box.index(x.keys)
                        ok = idx >= 0
                        D[p, idx[ok]] = x.vals[ok]
                    else:
                        D[p, self.box.origin] = x
                v = ("d", D)
        else:
            raise TypeError(type(e))
        self.memo[key] = v
        return v


def assembled_grid(sym, xis, lam=None, cutoff=12, tol=1e-8, points=None):
    """Assembled symbol at every row of ``xis``; returns (WorkBox, values (P, m))."""
    radii = np.zeros(sym.n, dtype=np.int64)
    for c in sym.components:
        radii = np.maximum(radii, active_radii(c.expr, sym.theta, cutoff))
    xis = np.asarray(xis, dtype=float)
    P = xis.shape[0]
    box = WorkBox(sym.theta, radii)
    total = np.zeros((P, box.size), dtype=complex)
    if sym.cutoff is not None:
        w_cut = 1.0 - np.array([sym.cutoff(x) for x in xis])
    else:
        w_cut = np.ones(P)
    full = GridEvaluator(sym.theta, xis, lam, cutoff, tol, radii, points)
    rows = np.nonzero(w_cut != 0)[0]
    part = None
    if rows.size:
        part = GridEvaluator(sym.theta, xis[rows], lam, cutoff, tol, radii,
                             None if points is None else np.asarray(points)[rows])
        part.box = full.box = box
    full.box = box
    for comp in sym.components:
        e = comp.expr
        if S.is_zero(e):
            continue
        if e.polynomial or sym.cutoff is None:
            total += full._dense(full.ev(e))
        elif part is not None:
            total[rows] += w_cut[rows, None] * part._dense(part.ev(e))
    return box, total
