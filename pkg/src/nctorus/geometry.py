"""Pseudo-cones in the spectral parameter plane and log-log decay fits."""

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, NumericalError, ValidationError

TWO_PI = 2 * np.pi
ANGLE_GUARD = 1e-3


def _norm_sector(lo, hi):
    width = hi - lo
    if width <= 0 or width > TWO_PI + 1e-15:
        raise ValidationError(f"bad sector ({lo}, {hi})")
    return (lo % TWO_PI, min(width, TWO_PI))


def _offset(arg, lo):
    return (arg - lo) % TWO_PI


class PseudoCone:
    """Union of open angular sectors and a disk about the origin.

    Sectors are (lo, hi) argument intervals, any real lo, with 0 < hi - lo <= 2 pi.
    ``excluded_rays`` removes rays (with an angular guard), ``min_radius`` chops a
    disk off the conical part, and ``excluded_disk_points`` marks disk points.
    """

    def __init__(self, sectors=(), disk_radius=0.0, include_origin=True, excluded_rays=(),
                 excluded_disk_points=(), min_radius=0.0, closed=False, guard=ANGLE_GUARD):
        self.sectors = [_norm_sector(lo, hi) for lo, hi in sectors]
        self.disk_radius = float(disk_radius)
        self.include_origin = bool(include_origin)
        self.excluded_rays = [float(a) % TWO_PI for a in excluded_rays]
        self.excluded_disk_points = [complex(p) for p in excluded_disk_points]
        self.min_radius = float(min_radius)
        self.closed = bool(closed)
        self.guard = float(guard)

    def __repr__(self):
        secs = ", ".join(f"({lo:.4g}, {lo + w:.4g})" for lo, w in self.sectors)
        return (f"PseudoCone(sectors=[{secs}], R={self.disk_radius:.4g}, "
                f"origin={self.include_origin}, excluded_rays={len(self.excluded_rays)})")

    @classmethod
    def complement_of_ray(cls, arg=0.0, **kw):
        return cls([(arg, arg + TWO_PI)], **kw)

    @classmethod
    def keyhole_region(cls, r):
        """{Re lambda <= 0 or |lambda| <= r}."""
        return cls([(np.pi / 2, 3 * np.pi / 2)], disk_radius=r, closed=True)

    def sector_list(self):
        return [(lo, lo + w) for lo, w in self.sectors]

    def direction_inside(self, arg):
        arg = float(arg) % TWO_PI
        for lo, w in self.sectors:
            off = _offset(arg, lo)
            if self.closed:
                if off <= w or w >= TWO_PI or off >= TWO_PI - 1e-15:
                    return True
            elif 0 < off < w:
                return True
        return False

    def _near_excluded_ray(self, arg):
        for a in self.excluded_rays:
            d = abs((arg - a + np.pi) % TWO_PI - np.pi)
            if d <= self.guard:
                return True
        return False

    def contains(self, lam):
        lam = complex(lam)
        r = abs(lam)
        if r == 0:
            return self.include_origin and self.disk_radius > 0 and \
                all(abs(p) > 0 for p in self.excluded_disk_points)
        in_disk = r <= self.disk_radius if self.closed else r < self.disk_radius
        if in_disk:
            marked = any(abs(lam - p) <= self.guard * max(1.0, abs(p))
                         for p in self.excluded_disk_points)
            if not marked:
                return True
        if r < self.min_radius:
            return False
        arg = np.angle(lam)
        return self.direction_inside(arg) and not self._near_excluded_ray(arg)

    __contains__ = contains

    def to_json(self):
        return {"sectors": self.sector_list(), "disk_radius": self.disk_radius,
                "include_origin": self.include_origin, "excluded_rays": self.excluded_rays,
                "excluded_disk_points": [[p.real, p.imag] for p in self.excluded_disk_points],
                "min_radius": self.min_radius, "closed": self.closed, "guard": self.guard}

    @classmethod
    def from_json(cls, d):
        return cls(d.get("sectors", ()), d.get("disk_radius", 0.0), d.get("include_origin", True),
                   d.get("excluded_rays", ()),
                   [complex(a, b) for a, b in d.get("excluded_disk_points", ())],
                   d.get("min_radius", 0.0), d.get("closed", False), d.get("guard", ANGLE_GUARD))


def contains(cone, lam):
    return cone.contains(lam)


def _sector_strictly_inside(inner, outer):
    lo_i, w_i = inner
    lo_o, w_o = outer
    if w_o >= TWO_PI:
        # a full turn minus one ray: the closure must avoid that ray
        off = _offset(lo_i, lo_o)
        return off > 0 and off + w_i < TWO_PI
    off = _offset(lo_i, lo_o)
    return 0 < off and off + w_i < w_o


def compactly_inside(inner, outer):
    """Closure of ``inner`` (taken in C minus the origin for conical parts) inside Int(outer)."""
    for s in inner.sectors:
        if not any(_sector_strictly_inside(s, t) for t in outer.sectors):
            # a conical piece may still fit inside outer's disk if it is bounded,
            # but sectors are unbounded, so it cannot
            return False
        lo, w = s
        for a in outer.excluded_rays:
            off = _offset(a, lo)
            if off <= w + outer.guard or off >= TWO_PI - outer.guard:
                return False
    if inner.disk_radius > 0:
        if inner.disk_radius >= outer.disk_radius:
            return False
        if not outer.include_origin or any(abs(p) <= inner.disk_radius
                                           for p in outer.excluded_disk_points):
            return False
    return True


def lambda_P(spectrum, theta_P, max_radius=1e6, zero_tol=1e-10):
    """The pseudo-cone obtained from Theta(P) by deleting spectral rays and adding a disk."""
    if not theta_P.sectors:
        raise ValidationError("not elliptic with parameter: Theta(P) is empty")
    spec = np.asarray(list(spectrum), dtype=complex)
    if spec.size == 0:
        return PseudoCone(theta_P.sector_list(), disk_radius=max_radius)
    nonzero = spec[np.abs(spec) > zero_tol]
    has_zero = bool(np.any(np.abs(spec) <= zero_tol))
    R0 = float(np.min(np.abs(nonzero))) if nonzero.size else max_radius
    rays = sorted({round(float(np.angle(z)) % TWO_PI, 12) for z in nonzero
                   if theta_P.direction_inside(np.angle(z))})
    return PseudoCone(theta_P.sector_list(), disk_radius=R0, include_origin=not has_zero,
                      excluded_rays=rays, guard=theta_P.guard)


@dataclass
class DecayFit:
    exponent: float
    intercept: float
    residual: float
    t_min: float
    t_max: float
    n_samples: int
    per_ray: dict = field(default_factory=dict)
    flagged: bool = False
    passed: object = None
    note: str = ""

    def to_row(self):
        return {"exponent": self.exponent, "intercept": self.intercept,
                "residual": self.residual, "t_min": self.t_min, "t_max": self.t_max,
                "n": self.n_samples, "flagged": self.flagged, "passed": self.passed}


def loglog_fit(x, y, residual_threshold=0.05):
    """Least-squares slope of log y against log x."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(y <= 0) or np.any(x <= 0):
        raise NumericalError("log-log fit needs positive data")
    lx, ly = np.log(x), np.log(y)
    A = np.column_stack([lx, np.ones_like(lx)])
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    res = float(np.sqrt(np.mean((A @ coef - ly) ** 2)))
    return DecayFit(float(coef[0]), float(coef[1]), res, float(x.min()), float(x.max()),
                    int(x.size), flagged=res > residual_threshold)


def _as_norm(v):
    if hasattr(v, "norm0"):
        return v.norm0()
    v = np.asarray(v)
    if v.ndim == 2:
        return float(np.linalg.norm(v, 2))
    return float(np.linalg.norm(v))


def ray_samples(ray, t_range, samples):
    ts = np.geomspace(t_range[0], t_range[1], samples)
    return ts * np.exp(1j * ray)


def hol_d_fit(family, cone, rays, t_range, samples=25, domain=None, residual_threshold=0.05):
    """Fit d in |family(lambda)| ~ (1 + |lambda|)^d, pooled over rays inside ``cone``."""
    if domain is not None and not compactly_inside(cone, domain):
        raise DomainError("the sampling cone is not compactly inside the domain")
    xs, ys, failures = [], [], []
    per_ray = {}
    for ray in rays:
        rx, ry = [], []
        for lam in ray_samples(ray, t_range, samples):
            if not cone.contains(lam):
                raise DomainError(f"sample {lam:.4g} lies outside the sampling cone")
            try:
                val = _as_norm(family(lam))
            except Exception as exc:  # collected and reported together
                failures.append((lam, str(exc)))
                continue
            rx.append(1 + abs(lam))
            ry.append(val)
        if len(rx) >= 2:
            per_ray[float(ray)] = loglog_fit(rx, ry).exponent
        xs += rx
        ys += ry
    if failures:
        msg = "; ".join(f"{l:.4g}: {m}" for l, m in failures[:5])
        raise NumericalError(f"partial fit, {len(failures)} evaluation failures ({msg})")
    fit = loglog_fit(xs, ys, residual_threshold)
    fit.per_ray = per_ray
    if per_ray:
        spread = max(per_ray.values()) - min(per_ray.values())
        if spread > 2 * max(fit.residual, 0.01):
            fit.flagged = True
            fit.note = f"exponent spread across rays {spread:.3g}"
    return fit
