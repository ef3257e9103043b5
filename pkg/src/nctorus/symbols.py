"""Symbols rho(xi; lambda) as expression trees with algebra-valued leaves.

Trees are immutable.  Products keep their factor order, except that factors
which are provably scalar (no non-trivial algebra coefficient underneath) are
gathered at the front, since they commute with everything.  That light
normalization is what keeps the parametrix recursion from blowing up.

Axes ``j`` are 0-based throughout this module.
"""

import math

import numpy as np

from .algebra import NcElement, ThetaMatrix, delta, invert, mul, adjoint
from .errors import NotInvertibleError, ValidationError, NumericalError


class Node:
    __slots__ = ("scalar", "has_lam", "polynomial")

    def children(self):
        return ()


class Scalar(Node):
    __slots__ = ("c",)

    def __init__(self, c):
        self.c = complex(c)
        self.scalar, self.has_lam, self.polynomial = True, False, True


class Const(Node):
    __slots__ = ("elem",)

    def __init__(self, elem):
        self.elem = elem
        self.scalar, self.has_lam, self.polynomial = elem.is_scalar(), False, True


class Xi(Node):
    """The monomial xi^beta."""
    __slots__ = ("beta",)

    def __init__(self, beta):
        self.beta = tuple(int(b) for b in beta)
        self.scalar, self.has_lam, self.polynomial = True, False, True


class Lam(Node):
    __slots__ = ()

    def __init__(self):
        self.scalar, self.has_lam, self.polynomial = True, True, True


class Bracket(Node):
    """<xi>^s = (1 + |xi|^2)^(s/2) in dimension n."""
    __slots__ = ("s", "n")

    def __init__(self, s, n):
        self.s = float(s)
        self.n = int(n)
        self.scalar, self.has_lam, self.polynomial = True, False, False


class Sum(Node):
    __slots__ = ("terms",)

    def __init__(self, terms):
        self.terms = tuple(terms)
        self.scalar = all(t.scalar for t in self.terms)
        self.has_lam = any(t.has_lam for t in self.terms)
        self.polynomial = all(t.polynomial for t in self.terms)

    def children(self):
        return self.terms


class Prod(Node):
    __slots__ = ("factors",)

    def __init__(self, factors):
        self.factors = tuple(factors)
        self.scalar = all(t.scalar for t in self.factors)
        self.has_lam = any(t.has_lam for t in self.factors)
        self.polynomial = all(t.polynomial for t in self.factors)

    def children(self):
        return self.factors


class Inv(Node):
    """Inverse of the child.  ``cutoff``/``tol`` override the evaluation policy."""
    __slots__ = ("child", "cutoff", "tol")

    def __init__(self, child, cutoff=None, tol=None):
        self.child, self.cutoff, self.tol = child, cutoff, tol
        self.scalar, self.has_lam, self.polynomial = child.scalar, child.has_lam, False

    def children(self):
        return (self.child,)


class Pow(Node):
    """Principal-branch power of a scalar-valued subtree."""
    __slots__ = ("child", "z")

    def __init__(self, child, z):
        if not child.scalar:
            raise ValidationError("scalar_power needs a scalar-valued subtree")
        self.child, self.z = child, complex(z)
        self.scalar, self.has_lam, self.polynomial = True, child.has_lam, False

    def children(self):
        return (self.child,)


class Numeric(Node):
    """Opaque leaf evaluated by ``fn(xi, lam)``; may return a complex or an NcElement."""
    __slots__ = ("fn", "label", "alpha")

    def __init__(self, fn, label, scalar=False, has_lam=False, alpha=None):
        self.fn, self.label = fn, label
        self.alpha = alpha
        self.scalar, self.has_lam, self.polynomial = scalar, has_lam, False


ZERO = Sum(())
ONE = Scalar(1.0)


def is_zero(e):
    return (isinstance(e, Sum) and not e.terms) or (isinstance(e, Scalar) and e.c == 0) \
        or (isinstance(e, Const) and e.elem.is_zero())


# ---------------------------------------------------------------- constructors

def const(a):
    if isinstance(a, NcElement):
        if a.is_zero():
            return ZERO
        if a.is_scalar():
            return Scalar(a.scalar_value())
        return Const(a)
    c = complex(a)
    return ZERO if c == 0 else Scalar(c)


def xi(beta):
    if not any(beta):
        return ONE
    return Xi(beta)


def xi_axis(j, n):
    b = [0] * n
    b[j] = 1
    return Xi(b)


def norm_sq(n):
    """|xi|^2 as a sum of monomials."""
    terms = []
    for j in range(n):
        b = [0] * n
        b[j] = 2
        terms.append(Xi(b))
    return add(*terms)


def lam():
    return Lam()


def bracket(s, n):
    return ONE if s == 0 else Bracket(s, n)


def inverse(e, cutoff=None, tol=None):
    if isinstance(e, Scalar):
        if e.c == 0:
            raise NotInvertibleError("inverse of the zero symbol")
        return Scalar(1.0 / e.c)
    if is_zero(e):
        raise NotInvertibleError("inverse of the zero symbol")
    return Inv(e, cutoff, tol)


def scalar_power(e, z):
    z = complex(z)
    if z == 0:
        return ONE
    if z == 1:
        return e
    if isinstance(e, Bracket):
        return bracket(e.s * z.real, e.n) if z.imag == 0 else Pow(e, z)
    return Pow(e, z)


def _split_scalar_monomial(f):
    """(coefficient, beta, lam power) if f is a plain scalar monomial, else None."""
    if isinstance(f, Scalar):
        return f.c, None, 0
    if isinstance(f, Xi):
        return 1.0, f.beta, 0
    if isinstance(f, Lam):
        return 1.0, None, 1
    return None


def prod(*factors):
    flat = []
    for f in factors:
        if isinstance(f, Prod):
            flat.extend(f.factors)
        else:
            flat.append(f)
    # polynomial factors are distributed so sums of monomials stay in normal form
    for i, f in enumerate(flat):
        if isinstance(f, Sum) and f.terms and all(g.polynomial for g in flat):
            return add(*(prod(*flat[:i], t, *flat[i + 1:]) for t in f.terms))
    coef = 1.0 + 0j
    beta = None
    lam_pow = 0
    scalars = []
    others = []
    for f in flat:
        if is_zero(f):
            return ZERO
        sm = _split_scalar_monomial(f)
        if sm is not None:
            c, b, p = sm
            coef *= c
            lam_pow += p
            if b is not None:
                beta = b if beta is None else tuple(x + y for x, y in zip(beta, b))
            continue
        if isinstance(f, Const) and f.elem.is_scalar():
            coef *= f.elem.scalar_value()
            continue
        if f.scalar:
            scalars.append(f)
            continue
        if others and isinstance(f, Const) and isinstance(others[-1], Const):
            merged = mul(others[-1].elem, f.elem)
            if merged.is_zero():
                return ZERO
            if merged.is_scalar():
                coef *= merged.scalar_value()
                others.pop()
            else:
                others[-1] = Const(merged)
            continue
        others.append(f)
    if coef == 0:
        return ZERO
    out = []
    if coef != 1:
        out.append(Scalar(coef))
    if beta is not None and any(beta):
        out.append(Xi(beta))
    out.extend(Lam() for _ in range(lam_pow))
    out.extend(scalars)
    out.extend(others)
    if not out:
        return ONE
    if len(out) == 1:
        return out[0]
    return Prod(out)


def _monomial_form(t):
    """Decompose c * xi^beta * lam^p * [Const a] into (key, value) or None."""
    fs = t.factors if isinstance(t, Prod) else (t,)
    coef, beta, p, elem = 1.0 + 0j, None, 0, None
    for f in fs:
        sm = _split_scalar_monomial(f)
        if sm is not None:
            c, b, q = sm
            coef *= c
            p += q
            if b is not None:
                beta = b if beta is None else tuple(x + y for x, y in zip(beta, b))
        elif isinstance(f, Const) and elem is None:
            elem = f.elem
        else:
            return None
    return (beta, p), (elem.scale(coef) if elem is not None else coef)


def add(*terms):
    flat = []
    for t in terms:
        if isinstance(t, Sum):
            flat.extend(t.terms)
        elif not is_zero(t):
            flat.append(t)
    groups = {}
    order = []
    rest = []
    for t in flat:
        mf = _monomial_form(t)
        if mf is None:
            rest.append(t)
            continue
        key, val = mf
        if key not in groups:
            groups[key] = val
            order.append(key)
        else:
            old = groups[key]
            if isinstance(old, NcElement) or isinstance(val, NcElement):
                if not isinstance(old, NcElement):
                    old, val = val, old
                groups[key] = old + val
            else:
                groups[key] = old + val
    out = []
    for key in order:
        val = groups[key]
        beta, p = key
        if isinstance(val, NcElement):
            if val.is_zero():
                continue
            coeff_node = const(val)
        else:
            if val == 0:
                continue
            coeff_node = Scalar(val)
        parts = [coeff_node]
        if beta is not None:
            parts.append(xi(beta))
        parts.extend(Lam() for _ in range(p))
        out.append(prod(*parts))
    out.extend(rest)
    if not out:
        return ZERO
    if len(out) == 1:
        return out[0]
    return Sum(out)


def neg(e):
    return prod(Scalar(-1.0), e)


def sub(a, b):
    return add(a, neg(b))


def scale(e, c):
    return prod(Scalar(c), e)


# ---------------------------------------------------------------- calculus

def diff_xi(e, j):
    """Partial derivative in xi_j."""
    if isinstance(e, (Scalar, Const, Lam)):
        return ZERO
    if isinstance(e, Xi):
        b = e.beta[j]
        if b == 0:
            return ZERO
        nb = list(e.beta)
        nb[j] -= 1
        return prod(Scalar(b), xi(nb))
    if isinstance(e, Bracket):
        # d/dxi_j <xi>^s = s xi_j <xi>^(s-2)
        return prod(Scalar(e.s), xi_axis(j, e.n), bracket(e.s - 2, e.n))
    if isinstance(e, Sum):
        return add(*(diff_xi(t, j) for t in e.terms))
    if isinstance(e, Prod):
        fs = e.factors
        terms = []
        for i, f in enumerate(fs):
            d = diff_xi(f, j)
            if not is_zero(d):
                terms.append(prod(*fs[:i], d, *fs[i + 1:]))
        return add(*terms)
    if isinstance(e, Inv):
        d = diff_xi(e.child, j)
        if is_zero(d):
            return ZERO
        return neg(prod(e, d, e))
    if isinstance(e, Pow):
        d = diff_xi(e.child, j)
        if is_zero(d):
            return ZERO
        return prod(Scalar(e.z), scalar_power(e.child, e.z - 1), d)
    if isinstance(e, Numeric):
        raise ValidationError(f"numeric leaf '{e.label}' cannot be differentiated in xi")
    raise TypeError(type(e))


def diff_multi(e, alpha):
    for j, a in enumerate(alpha):
        for _ in range(a):
            e = diff_xi(e, j)
            if is_zero(e):
                return ZERO
    return e


def delta_j(e, j, n):
    """The derivation delta_j pushed through the tree."""
    if e.scalar:
        return ZERO
    if isinstance(e, Const):
        a = [0] * n
        a[j] = 1
        return const(delta(a, e.elem))
    if isinstance(e, Sum):
        return add(*(delta_j(t, j, n) for t in e.terms))
    if isinstance(e, Prod):
        fs = e.factors
        terms = []
        for i, f in enumerate(fs):
            d = delta_j(f, j, n)
            if not is_zero(d):
                terms.append(prod(*fs[:i], d, *fs[i + 1:]))
        return add(*terms)
    if isinstance(e, Inv):
        d = delta_j(e.child, j, n)
        if is_zero(d):
            return ZERO
        return neg(prod(e, d, e))
    if isinstance(e, Numeric):
        alpha = [0] * n
        alpha[j] = 1
        return numeric_delta(e, alpha)
    raise TypeError(type(e))


def apply_delta(e, alpha):
    n = len(alpha)
    for j, a in enumerate(alpha):
        for _ in range(a):
            e = delta_j(e, j, n)
            if is_zero(e):
                return ZERO
    return e


def numeric_delta(e, alpha):
    """delta^alpha of a numeric leaf, applied to its values coefficientwise."""
    fn = e.fn
    prev = tuple(e.alpha) if e.alpha is not None else (0,) * len(alpha)
    total = tuple(a + b for a, b in zip(prev, alpha))

    def g(x, l):
        v = fn(x, l)
        if not isinstance(v, NcElement):
            return 0j
        return delta(alpha, v)

    return Numeric(g, f"delta{tuple(alpha)}({e.label})", scalar=False, has_lam=e.has_lam,
                   alpha=total)


def star_expr(e):
    """Pointwise adjoint of a lambda-free tree."""
    if e.has_lam:
        raise ValidationError("adjoint of a lambda-dependent symbol is not supported")
    if isinstance(e, Scalar):
        return Scalar(np.conj(e.c))
    if isinstance(e, Const):
        return const(adjoint(e.elem))
    if isinstance(e, (Xi, Bracket)):
        return e
    if isinstance(e, Sum):
        return add(*(star_expr(t) for t in e.terms))
    if isinstance(e, Prod):
        return prod(*(star_expr(f) for f in reversed(e.factors)))
    if isinstance(e, Inv):
        return inverse(star_expr(e.child), e.cutoff, e.tol)
    if isinstance(e, Pow):
        return scalar_power(star_expr(e.child), np.conj(e.z))
    raise ValidationError(f"cannot take the adjoint of {type(e).__name__}")


def support_radius(e):
    if isinstance(e, Const):
        return e.elem.support_radius()
    return max((support_radius(c) for c in e.children()), default=0)


def polynomial_degree(e):
    """Degree in xi of a polynomial tree (None if not polynomial)."""
    if not e.polynomial:
        return None
    if isinstance(e, Xi):
        return sum(e.beta)
    if isinstance(e, (Scalar, Const, Lam)):
        return 0
    if isinstance(e, Sum):
        return max((polynomial_degree(t) for t in e.terms), default=0)
    if isinstance(e, Prod):
        return sum(polynomial_degree(f) for f in e.factors)
    return None


def count_nodes(e):
    return 1 + sum(count_nodes(c) for c in e.children())


# ---------------------------------------------------------------- evaluation

class EvalPolicy:
    def __init__(self, cutoff=12, tol=1e-8):
        self.cutoff = int(cutoff)
        self.tol = float(tol)


def _vadd(a, b):
    if isinstance(a, NcElement) or isinstance(b, NcElement):
        return a + b
    return a + b


def _vmul(a, b):
    if isinstance(a, NcElement):
        if isinstance(b, NcElement):
            return mul(a, b)
        return a.scale(b)
    if isinstance(b, NcElement):
        return b.scale(a)
    return a * b


def _ev(e, xi_v, lam_v, policy, memo, path):
    key = id(e)
    if key in memo:
        return memo[key]
    if isinstance(e, Scalar):
        v = e.c
    elif isinstance(e, Const):
        v = e.elem
    elif isinstance(e, Xi):
        v = complex(np.prod(xi_v ** np.asarray(e.beta, dtype=float)))
    elif isinstance(e, Lam):
        if lam_v is None:
            raise ValidationError("symbol depends on lambda but no lambda was given")
        v = lam_v
    elif isinstance(e, Bracket):
        v = complex((1.0 + float(xi_v @ xi_v)) ** (e.s / 2))
    elif isinstance(e, Sum):
        v = 0j
        for i, t in enumerate(e.terms):
            v = _vadd(v, _ev(t, xi_v, lam_v, policy, memo, path + (i,)))
    elif isinstance(e, Prod):
        v = 1.0 + 0j
        for i, f in enumerate(e.factors):
            v = _vmul(v, _ev(f, xi_v, lam_v, policy, memo, path + (i,)))
    elif isinstance(e, Inv):
        c = _ev(e.child, xi_v, lam_v, policy, memo, path + (0,))
        if isinstance(c, NcElement) and c.is_scalar():
            c = c.scalar_value()
        if isinstance(c, NcElement):
            try:
                v = invert(c, e.cutoff or policy.cutoff, e.tol or policy.tol)
            except NumericalError as exc:
                raise NotInvertibleError(f"{exc} at subtree {path}",
                                         condition=getattr(exc, "condition", None),
                                         path=path) from exc
        else:
            if np.any(c == 0):
                raise NotInvertibleError(f"zero value inverted at subtree {path}", path=path)
            v = 1.0 / c
    elif isinstance(e, Pow):
        c = _ev(e.child, xi_v, lam_v, policy, memo, path + (0,))
        if isinstance(c, NcElement):
            if not c.is_scalar():
                raise ValidationError("scalar_power child evaluated to a non-scalar")
            c = c.scalar_value()
        v = _cpow(c, e.z)
    elif isinstance(e, Numeric):
        v = e.fn(xi_v, lam_v)
    else:
        raise TypeError(type(e))
    memo[key] = v
    return v


def _cpow(c, z):
    c = np.asarray(c, dtype=complex)
    out = np.where(c == 0, 0j, np.exp(z * np.log(np.where(c == 0, 1.0, c))))
    return complex(out) if out.ndim == 0 else out


def evaluate(e, xi_v, lam_v=None, theta=None, cutoff=12, tol=1e-8, policy=None):
    """Value of the symbol at (xi, lambda) as an NcElement (or complex if theta is None)."""
    policy = policy or EvalPolicy(cutoff, tol)
    xi_v = np.asarray(xi_v, dtype=float)
    v = _ev(e, xi_v, lam_v, policy, {}, ())
    if isinstance(v, NcElement):
        return v
    if theta is None:
        return complex(v)
    return NcElement.scalar(theta, v)


def evaluate_batch(e, xi_v, lams):
    """Evaluate a scalar tree at many lambdas at once; returns a complex array."""
    if not e.scalar:
        raise ValidationError("batched evaluation needs a scalar-valued tree")
    lams = np.asarray(lams, dtype=complex)
    v = _ev(e, np.asarray(xi_v, dtype=float), lams, EvalPolicy(), {}, ())
    if isinstance(v, NcElement):
        v = v.scalar_value()
    return np.broadcast_to(np.asarray(v, dtype=complex), lams.shape).copy()


# ---------------------------------------------------------------- serialization

def to_json(e):
    if isinstance(e, Scalar):
        return {"op": "scalar", "args": [{"re": e.c.real, "im": e.c.imag}]}
    if isinstance(e, Const):
        return {"op": "const", "args": [e.elem.to_json()]}
    if isinstance(e, Xi):
        return {"op": "xi", "args": [list(e.beta)]}
    if isinstance(e, Lam):
        return {"op": "lam", "args": []}
    if isinstance(e, Bracket):
        return {"op": "bracket", "args": [e.s, e.n]}
    if isinstance(e, Sum):
        return {"op": "sum", "args": [to_json(t) for t in e.terms]}
    if isinstance(e, Prod):
        return {"op": "prod", "args": [to_json(t) for t in e.factors]}
    if isinstance(e, Inv):
        return {"op": "inv", "args": [to_json(e.child)]}
    if isinstance(e, Pow):
        return {"op": "pow", "args": [to_json(e.child), {"re": e.z.real, "im": e.z.imag}]}
    if isinstance(e, Numeric):
        return {"op": "numeric-evaluator", "args": [e.label]}
    raise TypeError(type(e))


def from_json(data, theta):
    op, args = data["op"], data.get("args", [])
    if op == "scalar":
        return Scalar(complex(args[0]["re"], args[0]["im"]))
    if op == "const":
        return const(NcElement.from_json(theta, args[0]))
    if op == "xi":
        return xi(args[0])
    if op == "lam":
        return Lam()
    if op == "bracket":
        return bracket(args[0], args[1] if len(args) > 1 else theta.n)
    if op == "sum":
        return add(*(from_json(a, theta) for a in args))
    if op == "prod":
        return prod(*(from_json(a, theta) for a in args))
    if op == "inv":
        return inverse(from_json(args[0], theta))
    if op == "pow":
        return scalar_power(from_json(args[0], theta), complex(args[1]["re"], args[1]["im"]))
    raise ValidationError(f"unknown symbol op '{op}'")


def same_structure(a, b):
    return to_json(a) == to_json(b)


# ---------------------------------------------------------------- symbol classes

class Cutoff:
    """chi(xi) = 1 for |xi| <= radius, 0 for |xi| >= radius + width, smooth between."""

    def __init__(self, radius=1.0, width=1.0):
        self.radius = float(radius)
        self.width = float(width)

    def __call__(self, xi_v):
        r = float(np.linalg.norm(xi_v))
        t = (r - self.radius) / self.width
        return 1.0 - _smooth_step(t)

    def to_json(self):
        return {"radius": self.radius, "width": self.width}


def _smooth_step(t):
    """0 for t <= 0, 1 for t >= 1, built from exp(-1/x)."""
    if t <= 0:
        return 0.0
    if t >= 1:
        return 1.0
    f = math.exp(-1.0 / t)
    g = math.exp(-1.0 / (1.0 - t))
    return f / (f + g)


class HomogeneousSymbol:
    def __init__(self, expr, degree, lambda_degree=0.0, weight=1.0):
        self.expr = expr
        self.degree = complex(degree) if isinstance(degree, complex) else float(degree)
        self.lambda_degree = float(lambda_degree)
        self.weight = float(weight)

    def __call__(self, xi_v, lam_v=None, theta=None, **kw):
        return evaluate(self.expr, xi_v, lam_v, theta=theta, **kw)

    def homogeneity_defect(self, theta, samples, ts=(0.5, 2.0, 5.0), cutoff=12):
        """Largest relative defect of rho(t xi, t^w lam) = t^m rho(xi, lam) over samples."""
        worst = 0.0
        for xi_v, lam_v in samples:
            base = evaluate(self.expr, xi_v, lam_v, theta=theta, cutoff=cutoff)
            bn = base.norm0()
            for t in ts:
                lt = None if lam_v is None else lam_v * t ** self.weight
                v = evaluate(self.expr, np.asarray(xi_v) * t, lt, theta=theta, cutoff=cutoff)
                d = (v - base.scale(t ** self.degree)).norm0()
                scale_ = abs(t ** self.degree) * bn
                worst = max(worst, d / scale_ if scale_ > 0 else d)
        return worst


class ClassicalSymbol:
    """rho ~ sum_j rho_{q-j}; assembled as sum_j (1 - chi) rho_{q-j}.

    Polynomial components are never cut off, so a differential operator's
    symbol is used exactly.  ``cutoff=None`` disables chi altogether.
    """

    def __init__(self, theta, components, cutoff=None, weight=None):
        if not components:
            raise ValidationError("a classical symbol needs at least one component")
        self.theta = theta
        self.components = list(components)
        self.cutoff = cutoff
        self.weight = float(weight if weight is not None else components[0].weight)
        for a, b in zip(self.components, self.components[1:]):
            if abs((a.degree - b.degree) - 1) > 1e-12:
                raise ValidationError("component degrees must drop by exactly one")

    @property
    def order(self):
        return self.components[0].degree

    @property
    def lambda_degree(self):
        return self.components[0].lambda_degree

    @property
    def n(self):
        return self.theta.n

    def principal(self):
        return self.components[0]

    def is_differential(self):
        return all(c.expr.polynomial and not c.expr.has_lam for c in self.components)

    def support_radius(self):
        return max(support_radius(c.expr) for c in self.components)

    def with_cutoff(self, cutoff):
        return ClassicalSymbol(self.theta, self.components, cutoff, self.weight)

    def truncate(self, J):
        return ClassicalSymbol(self.theta, self.components[:J + 1], self.cutoff, self.weight)

    def assembled(self, xi_v, lam_v=None, cutoff=12, tol=1e-8):
        xi_v = np.asarray(xi_v, dtype=float)
        total = NcElement(self.theta)
        chi = self.cutoff(xi_v) if self.cutoff is not None else 0.0
        policy = EvalPolicy(cutoff, tol)
        memo = {}
        for comp in self.components:
            e = comp.expr
            if is_zero(e):
                continue
            w = 1.0 if (e.polynomial or self.cutoff is None) else 1.0 - chi
            if w == 0.0:
                continue
            v = _ev(e, xi_v, lam_v, policy, memo, ())
            if not isinstance(v, NcElement):
                v = NcElement.scalar(self.theta, v)
            total = total + v.scale(w)
        return total

    def to_json(self):
        return {
            "theta": self.theta.to_json(),
            "weight": self.weight,
            "cutoff": None if self.cutoff is None else self.cutoff.to_json(),
            "components": [
                {"degree": _num_json(c.degree), "lambda_degree": c.lambda_degree,
                 "expr": to_json(c.expr)} for c in self.components],
        }

    @classmethod
    def from_json(cls, data):
        theta = ThetaMatrix(data["theta"])
        comps = [HomogeneousSymbol(from_json(c["expr"], theta), _num_from_json(c["degree"]),
                                   c.get("lambda_degree", 0.0), data.get("weight", 1.0))
                 for c in data["components"]]
        cut = data.get("cutoff")
        return cls(theta, comps, None if cut is None else Cutoff(**cut), data.get("weight"))


def _num_json(x):
    if isinstance(x, complex):
        return {"re": x.real, "im": x.imag}
    return x


def _num_from_json(x):
    if isinstance(x, dict):
        return complex(x["re"], x["im"])
    return x


def differential_symbol(theta, coeffs):
    """Symbol of sum_alpha a_alpha delta^alpha from {alpha: NcElement or scalar}."""
    if not coeffs:
        return ClassicalSymbol(theta, [HomogeneousSymbol(ZERO, 0, 0, 1)])
    order = max(sum(a) for a in coeffs)
    comps = []
    for j in range(order + 1):
        deg = order - j
        terms = []
        for alpha, a in coeffs.items():
            if sum(alpha) == deg:
                terms.append(prod(const(a if isinstance(a, NcElement)
                                        else NcElement.scalar(theta, a)), xi(alpha)))
        comps.append(HomogeneousSymbol(add(*terms), deg))
    return ClassicalSymbol(theta, comps)


def constant_symbol(a):
    return ClassicalSymbol(a.theta, [HomogeneousSymbol(const(a), 0)])


def laplacian_symbol(theta, shift=0.0):
    """|xi|^2 + shift, with the shift as the degree-0 component."""
    n = theta.n
    comps = [HomogeneousSymbol(norm_sq(n), 2)]
    if shift != 0:
        comps += [HomogeneousSymbol(ZERO, 1), HomogeneousSymbol(Scalar(shift), 0)]
    return ClassicalSymbol(theta, comps)


def bracket_symbol(theta, s):
    """<xi>^s carried as a single (non-homogeneous) exact component."""
    return ClassicalSymbol(theta, [HomogeneousSymbol(bracket(s, theta.n), s)])


def sphere_samples(n, count=64, seed=0):
    if n == 1:
        return np.array([[1.0], [-1.0]])
    if n == 2:
        ang = 2 * np.pi * np.arange(count) / count
        return np.column_stack([np.cos(ang), np.sin(ang)])
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(count, n))
    return x / np.linalg.norm(x, axis=1, keepdims=True)
