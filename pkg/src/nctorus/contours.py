"""Contour quadrature: keyhole paths around a slit and circles.

Keyhole convention: the ray at angle phi1 is traversed inward from T_max down to
r, then the arc |lambda| = r clockwise from phi1 to phi2 (phi1 > phi2 >= phi1 - 2 pi),
then the ray at phi2 outward.  ``direction=-1`` reverses the whole path.
Rays use geometrically graded Gauss-Legendre panels; the part of each ray
beyond T_max is not integrated but bounded (or corrected) analytically.
"""

from dataclasses import dataclass

import numpy as np

from .errors import PrecisionError, ValidationError

TAIL_SAFETY = 1.5


@dataclass
class ContourSpec:
    kind: str
    r: float = 1.0
    phi1: float = np.pi / 2
    phi2: float = -np.pi / 2
    t_max: float = None
    center: complex = 0j
    radius: float = 1.0
    orientation: int = -1
    direction: int = 1
    panels: int = 8
    order: int = 8
    grading: float = 2.0

    def __post_init__(self):
        if self.kind not in ("keyhole", "circle"):
            raise ValidationError(f"unknown contour kind '{self.kind}'")
        if self.kind == "keyhole":
            if self.r <= 0:
                raise ValidationError("keyhole radius must be positive")
            if not (self.phi1 > self.phi2 >= self.phi1 - 2 * np.pi):
                raise ValidationError("keyhole angles need phi1 > phi2 >= phi1 - 2 pi")
            if self.t_max is None:
                self.t_max = 1e6 * self.r
            if self.t_max <= self.r:
                raise ValidationError("ray truncation must exceed the keyhole radius")
        elif self.radius <= 0:
            raise ValidationError("circle radius must be positive")

    @classmethod
    def keyhole(cls, r, phi1=np.pi / 2, phi2=-np.pi / 2, t_max=None, **kw):
        return cls("keyhole", r=r, phi1=phi1, phi2=phi2, t_max=t_max, **kw)

    @classmethod
    def circle(cls, center, radius, orientation=-1, **kw):
        return cls("circle", center=complex(center), radius=radius, orientation=orientation, **kw)

    def to_json(self):
        d = dict(self.__dict__)
        d["center"] = [self.center.real, self.center.imag]
        return d


def _gl(order):
    return np.polynomial.legendre.leggauss(order)


def _panel_rule(edges, order):
    x, w = _gl(order)
    a, b = edges[:-1, None], edges[1:, None]
    t = ((a + b) / 2 + (b - a) / 2 * x).ravel()
    wt = ((b - a) / 2 * w).ravel()
    return t, wt


def _ray_edges(r, T, grading):
    n = max(1, int(np.ceil(np.log(T / r) / np.log(grading))))
    return r * (T / r) ** (np.arange(n + 1) / n)


def path_rule(spec, level=0, angles=False):
    """Nodes lambda_i and weights w_i with sum w_i f(lambda_i) ~ integral of f d lambda.

    With ``angles=True`` the argument of each node along the path is returned
    too, so a branch of log can follow the path across a slit.
    """
    order = spec.order
    if spec.kind == "circle":
        m = spec.panels * 2 ** level
        th, wth = _panel_rule(np.linspace(0, 2 * np.pi, m + 1), order)
        lam = spec.center + spec.radius * np.exp(1j * th)
        w = 1j * spec.radius * np.exp(1j * th) * wth * (1 if spec.orientation > 0 else -1)
        return (lam, w, np.angle(lam)) if angles else (lam, w)
    g = spec.grading ** (1.0 / 2 ** level)
    t, wt = _panel_rule(_ray_edges(spec.r, spec.t_max, g), order)
    e1, e2 = np.exp(1j * spec.phi1), np.exp(1j * spec.phi2)
    # inward along phi1: d lambda = -e1 dt; outward along phi2: +e2 dt
    arc_panels = spec.panels * 2 ** level
    th, wth = _panel_rule(np.linspace(spec.phi1, spec.phi2, arc_panels + 1), order)
    lam_arc = spec.r * np.exp(1j * th)
    w_arc = 1j * lam_arc * wth  # wth negative: clockwise
    lam = np.concatenate([t * e1, lam_arc, t * e2])
    w = np.concatenate([-e1 * wt, w_arc, e2 * wt]) * spec.direction
    if angles:
        arg = np.concatenate([np.full(t.size, spec.phi1), th, np.full(t.size, spec.phi2)])
        return lam, w, arg
    return lam, w


@dataclass
class QuadratureResult:
    value: object
    error: float
    nodes: int
    tail: float = 0.0


def _apply(integrand, lam, vectorized, arg=None):
    args = (lam,) if arg is None else (lam, arg)
    if vectorized:
        return np.asarray(integrand(*args))
    return np.stack([np.asarray(integrand(*a)) for a in zip(*args)])


def _weighted_sum(integrand, lam, w, vectorized, arg=None):
    if vectorized:
        return np.tensordot(w, _apply(integrand, lam, True, arg), axes=(0, 0))
    # accumulate one node at a time so matrix-valued integrands stay cheap in memory
    total = 0
    for i in range(lam.size):
        v = integrand(lam[i]) if arg is None else integrand(lam[i], arg[i])
        total = total + w[i] * np.asarray(v)
    return total


def contour_quadrature(spec, integrand, tail_exponent=None, tol=None, vectorized=False,
                       tail_correction=None, max_levels=4, with_angle=False):
    """Integrate ``integrand`` along the contour (no 1/(2 pi i) factor).

    With ``with_angle=True`` the integrand is called as f(lambda, arg lambda).

    ``tail_correction(phi, T, sign)`` may return (value, bound) for the part of the
    ray at angle phi beyond T, traversed with d lambda = sign * e^{i phi} dt.
    Otherwise the tail is bounded by C T^(e+1)/|e+1| from the declared exponent e.
    """
    tail_val = 0
    tail_err = 0.0
    if spec.kind == "keyhole":
        if tail_correction is None:
            if tail_exponent is None or tail_exponent >= -1:
                raise ValidationError("ray integrals diverge unless the tail exponent is < -1")
        for phi, sign in ((spec.phi1, -1), (spec.phi2, 1)):
            sign = sign * spec.direction
            T = spec.t_max
            if tail_correction is not None:
                v, b = tail_correction(phi, T, sign)
                tail_val = tail_val + v
                tail_err += b
            else:
                fT = _apply(integrand, np.array([T * np.exp(1j * phi)]), vectorized,
                            np.array([phi]) if with_angle else None)[0]
                C = float(np.max(np.abs(fT))) / T ** tail_exponent
                # C is sampled at T only; the factor covers |f| t^-e still creeping upward
                tail_err += TAIL_SAFETY * C * T ** (tail_exponent + 1) / abs(tail_exponent + 1)

    def integrate(level):
        lam, w, arg = path_rule(spec, level, angles=True)
        return _weighted_sum(integrand, lam, w, vectorized, arg if with_angle else None), lam.size

    prev, nodes = integrate(0)
    est = np.inf
    for level in range(1, max_levels + 1):
        cur, n = integrate(level)
        nodes += n
        est = float(np.max(np.abs(cur - prev)))
        prev = cur
        if tol is None or est + tail_err <= tol:
            break
    total = prev + tail_val
    err = est + tail_err
    if tol is not None and err > tol:
        raise PrecisionError(f"quadrature error estimate {err:.3g} exceeds {tol:.3g}", err)
    return QuadratureResult(total, err, nodes, tail_err)
