"""A small language for differential operators on the noncommutative torus.

Grammar (precedence ^ > * > + -)::

    expr    = term { ("+" | "-") term } ;
    term    = unary { "*" unary } ;
    unary   = [ "+" | "-" ] unary | power ;
    power   = atom [ "^" exponent ] ;
    exponent = [ "-" ] integer ;
    atom    = number [ "i" ] | "i" | "U" digit+ | "d" digit+ | "(" expr ")" ;

``Uj`` is the j-th generator (left multiplication), ``dj`` the derivation
delta_j.  Products are operator composition, so ``d1*U1`` means "multiply by
U1, then differentiate".  Parsed operators are normalized to
sum_alpha a_alpha delta^alpha by applying the Leibniz rule with the algebra's
own multiplication and derivations.
"""

import re
from math import comb

import numpy as np

from . import symbols as S
from .algebra import NcElement, delta, mul
from .errors import ValidationError


class ParseError(ValidationError):
    def __init__(self, message, position):
        super().__init__(f"{message} at position {position}")
        self.position = position


_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<gen>[Ud]\d+)
  | (?P<imag>i)
  | (?P<op>[-+*^()])
""", re.VERBOSE)


def tokenize(src):
    pos = 0
    out = []
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if m is None:
            raise ParseError(f"unexpected character {src[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            out.append((kind, m.group(), pos))
        pos = m.end()
    out.append(("end", "", pos))
    return out


class _Parser:
    def __init__(self, src, n):
        self.toks = tokenize(src)
        self.i = 0
        self.n = n

    def peek(self):
        return self.toks[self.i]

    def take(self, value=None):
        tok = self.toks[self.i]
        if value is not None and tok[1] != value:
            raise ParseError(f"expected {value!r}, found {tok[1] or 'end of input'!r}", tok[2])
        self.i += 1
        return tok

    def parse(self):
        node = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise ParseError(f"unexpected {tok[1]!r}", tok[2])
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            rhs = self.term()
            node = ("add", node, rhs) if op == "+" else ("add", node, ("neg", rhs))
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] == "*":
            self.take()
            node = ("mul", node, self.unary())
        return node

    def unary(self):
        tok = self.peek()
        if tok[1] == "-":
            self.take()
            return ("neg", self.unary())
        if tok[1] == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        node = self.atom()
        if self.peek()[1] == "^":
            self.take()
            sign = 1
            if self.peek()[1] == "-":
                self.take()
                sign = -1
            tok = self.peek()
            if tok[0] != "num" or not tok[1].isdigit():
                raise ParseError("exponent must be an integer", tok[2])
            self.take()
            p = sign * int(tok[1])
            if node[0] == "U":
                return ("U", node[1], node[2] * p)
            if p < 0:
                what = "a derivation" if node[0] == "d" else "this factor"
                raise ParseError(f"exponent on {what} must be a nonnegative integer", tok[2])
            if node[0] == "d":
                return ("d", node[1], node[2] * p)
            return ("pow", node, p)
        return node

    def atom(self):
        tok = self.take()
        kind, text, pos = tok
        if kind == "num":
            val = float(text)
            if self.peek()[0] == "imag":
                self.take()
                return ("num", complex(0, val))
            return ("num", complex(val))
        if kind == "imag":
            return ("num", 1j)
        if kind == "gen":
            j = int(text[1:])
            if not 1 <= j <= self.n:
                raise ParseError(f"index {j} out of range 1..{self.n}", pos)
            return ("U" if text[0] == "U" else "d", j, 1)
        if text == "(":
            node = self.expr()
            self.take(")")
            return node
        raise ParseError(f"unexpected {text or 'end of input'!r}", pos)


# ---------------------------------------------------------------- normal form

class OperatorAst:
    """Parse tree plus its normal form {alpha: NcElement}."""

    def __init__(self, theta, tree, terms, source=None):
        self.theta = theta
        self.tree = tree
        self.terms = terms
        self.source = source

    @property
    def order(self):
        return max((sum(a) for a in self.terms), default=0)

    def symbol(self):
        return S.differential_symbol(self.theta, dict(self.terms))

    def apply(self, u):
        """Normal form applied to an element."""
        out = NcElement(self.theta)
        for alpha, a in self.terms.items():
            out = out + mul(a, delta(alpha, u))
        return out

    def apply_tree(self, u):
        """The unnormalized parse tree applied to an element."""
        return _apply_tree(self.tree, u, self.theta)

    def same_normal_form(self, other, tol=1e-12):
        keys = set(self.terms) | set(other.terms)
        z = NcElement(self.theta)
        return all((self.terms.get(k, z) - other.terms.get(k, z)).norm0() <= tol for k in keys)

    def __str__(self):
        return format_operator(self)


def _apply_tree(node, u, theta):
    kind = node[0]
    if kind == "num":
        return u.scale(node[1])
    if kind == "U":
        return mul(NcElement.generator(theta, node[1], node[2]), u)
    if kind == "d":
        e = np.zeros(theta.n, dtype=np.int64)
        e[node[1] - 1] = node[2]
        return delta(e, u)
    if kind == "neg":
        return -_apply_tree(node[1], u, theta)
    if kind == "add":
        return _apply_tree(node[1], u, theta) + _apply_tree(node[2], u, theta)
    if kind == "mul":
        return _apply_tree(node[1], _apply_tree(node[2], u, theta), theta)
    if kind == "pow":
        for _ in range(node[2]):
            u = _apply_tree(node[1], u, theta)
        return u
    raise TypeError(kind)


def _binom(a, g):
    out = 1
    for x, y in zip(a, g):
        out *= comb(x, y)
    return out


def _sub_indices(alpha):
    if not alpha:
        yield ()
        return
    for g in range(alpha[0] + 1):
        for rest in _sub_indices(alpha[1:]):
            yield (g,) + rest


def _compose(A, B, theta):
    """(sum a_alpha delta^alpha)(sum b_beta delta^beta) in normal form (Leibniz)."""
    out = {}
    for alpha, a in A.items():
        for beta, b in B.items():
            for g in _sub_indices(alpha):
                c = _binom(alpha, g)
                db = delta(g, b)
                if db.is_zero():
                    continue
                key = tuple(x - y + z for x, y, z in zip(alpha, g, beta))
                term = mul(a, db).scale(c)
                out[key] = out[key] + term if key in out else term
    return {k: v for k, v in out.items() if not v.is_zero()}


def _normalize(node, theta):
    n = theta.n
    zero = (0,) * n
    kind = node[0]
    if kind == "num":
        return {zero: NcElement.scalar(theta, node[1])} if node[1] != 0 else {}
    if kind == "U":
        return {zero: NcElement.generator(theta, node[1], node[2])}
    if kind == "d":
        alpha = [0] * n
        alpha[node[1] - 1] = node[2]
        return {tuple(alpha): NcElement.scalar(theta, 1.0)}
    if kind == "neg":
        return {k: -v for k, v in _normalize(node[1], theta).items()}
    if kind == "add":
        out = dict(_normalize(node[1], theta))
        for k, v in _normalize(node[2], theta).items():
            out[k] = out[k] + v if k in out else v
        return {k: v for k, v in out.items() if not v.is_zero()}
    if kind == "mul":
        return _compose(_normalize(node[1], theta), _normalize(node[2], theta), theta)
    if kind == "pow":
        base = _normalize(node[1], theta)
        out = {zero: NcElement.scalar(theta, 1.0)}
        for _ in range(node[2]):
            out = _compose(out, base, theta)
        return out
    raise TypeError(kind)


def parse_operator(src, theta):
    """Parse ``src`` and normalize it to sum_alpha a_alpha delta^alpha."""
    tree = _Parser(src, theta.n).parse()
    return OperatorAst(theta, tree, _normalize(tree, theta), src)


# ---------------------------------------------------------------- printing

def _fmt_complex(c):
    c = complex(c)
    if c.imag == 0:
        return repr(c.real)
    if c.real == 0:
        return f"{c.imag!r}i"
    sign = "+" if c.imag >= 0 else "-"
    return f"({c.real!r}{sign}{abs(c.imag)!r}i)"


def _fmt_element(a):
    parts = []
    for k, v in zip(a.keys, a.vals):
        gens = [f"U{j + 1}^{int(p)}" for j, p in enumerate(k) if p != 0]
        parts.append("*".join([_fmt_complex(v)] + gens))
    return parts[0] if len(parts) == 1 else "(" + " + ".join(parts) + ")"


def format_operator(op):
    """Text that parses back to the same normal form."""
    if not op.terms:
        return "0"
    out = []
    for alpha in sorted(op.terms, key=lambda a: (-sum(a), tuple(-x for x in a))):
        ds = [f"d{j + 1}^{p}" for j, p in enumerate(alpha) if p]
        out.append("*".join([_fmt_element(op.terms[alpha])] + ds))
    return " + ".join(out)
