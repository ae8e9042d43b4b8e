"""Oriented piecewise-linear/circular contours and adaptive Gauss-Legendre
quadrature along them.

A contour is an ordered tuple of segments.  Each segment maps ``u in [0, 1]``
to the complex plane; orientation follows the parametrization.  Unbounded rays
are truncated at a finite radius chosen from the cubic decay of the integrand.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "Label", "Line", "Arc", "Contour", "QuadratureResult", "QuadratureError",
    "ContourIntersectionError", "make_airy_contour", "make_dual_contour",
    "ray_contour", "retruncate", "default_radius", "integrate", "integrate_double",
    "gauss_legendre_nodes",
]

OMEGA_ANGLE = 2.0 * np.pi / 3.0
TOL_FLOOR = 1e-15
EPS = np.finfo(float).eps


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach the tolerance; ``best`` holds the
    last estimate."""

    def __init__(self, msg, best=None):
        super().__init__(msg)
        self.best = best


class ContourIntersectionError(ValueError):
    pass


class Label(str, enum.Enum):
    C1 = "C1"
    C2 = "C2"
    C3 = "C3"
    C4 = "C4"
    C5 = "C5"
    C6 = "C6"
    CHAT1 = "Chat1"
    CHAT2 = "Chat2"
    CHAT3 = "Chat3"
    CMAIN = "Cmain"
    CTILDE = "Ctilde"
    CUSTOM = "custom"


@dataclass(frozen=True)
class Line:
    a: complex
    b: complex

    def point(self, u):
        return self.a + (self.b - self.a) * u

    def deriv(self, u):
        return np.full(np.shape(u), self.b - self.a, dtype=complex)

    @property
    def length(self):
        return abs(self.b - self.a)

    def reversed(self):
        return Line(self.b, self.a)


@dataclass(frozen=True)
class Arc:
    center: complex
    radius: float
    theta0: float
    theta1: float

    def point(self, u):
        th = self.theta0 + (self.theta1 - self.theta0) * u
        return self.center + self.radius * np.exp(1j * th)

    def deriv(self, u):
        th = self.theta0 + (self.theta1 - self.theta0) * u
        return 1j * (self.theta1 - self.theta0) * self.radius * np.exp(1j * th)

    @property
    def length(self):
        return abs(self.theta1 - self.theta0) * self.radius

    @property
    def a(self):
        return complex(self.point(0.0))

    @property
    def b(self):
        return complex(self.point(1.0))

    def reversed(self):
        return Arc(self.center, self.radius, self.theta1, self.theta0)


@dataclass(frozen=True)
class Contour:
    segments: tuple
    label: Label = Label.CUSTOM
    closed: bool = False
    # asymptotic directions (angles) of the truncated ends, for certificates
    ends: tuple = field(default_factory=tuple)

    def __post_init__(self):
        segs = self.segments
        for s0, s1 in zip(segs[:-1], segs[1:]):
            scale = 1.0 + abs(s0.b)
            if abs(s0.b - s1.a) > 1e-12 * scale:
                raise ValueError("contour segments do not join")

    @property
    def start(self):
        return self.segments[0].a

    @property
    def end(self):
        return self.segments[-1].b

    @property
    def length(self):
        return sum(s.length for s in self.segments)

    def reversed(self):
        return Contour(tuple(s.reversed() for s in self.segments[::-1]),
                       self.label, self.closed, self.ends[::-1])

    def sample(self, m=200):
        """Points along the contour (used for geometric checks)."""
        u = np.linspace(0.0, 1.0, m)
        return np.concatenate([s.point(u) for s in self.segments])

    def decay_certificate(self, sign=-1):
        """True when every truncated end points into a sector where
        exp(sign*t^3/3) decays, i.e. sign*cos(3 theta) < 0."""
        return all(sign * np.cos(3.0 * th) < 0 for th in self.ends)


@dataclass(frozen=True)
class QuadratureResult:
    value: complex
    error_estimate: float
    panels_used: int


_GL_CACHE: dict = {}


def gauss_legendre_nodes(n):
    """Nodes and weights on [0, 1]."""
    if n not in _GL_CACHE:
        x, w = np.polynomial.legendre.leggauss(n)
        _GL_CACHE[n] = (0.5 * (x + 1.0), 0.5 * w)
    return _GL_CACHE[n]


def default_radius(scale=0.0, power=0, digits=18.0):
    """Ray length rho beyond which rho^3/3 - scale*rho - power*log(rho)
    exceeds ``digits*log(10)``; scale bounds the linear part of the exponent."""
    target = digits * np.log(10.0)
    rho = 1.0
    while rho ** 3 / 3.0 - scale * rho - power * np.log1p(rho) < target:
        rho *= 1.05
    return rho


def _ray(apex, angle, radius, outward=True):
    far = apex + radius * np.exp(1j * angle)
    return Line(apex, far) if outward else Line(far, apex)


def ray_contour(apex, angle_in, angle_out, radius, label=Label.CUSTOM):
    """Two rays through ``apex``: in from infinity along ``angle_in``, out
    along ``angle_out``."""
    segs = (_ray(apex, angle_in, radius, outward=False),
            _ray(apex, angle_out, radius))
    return Contour(segs, label, ends=(angle_in, angle_out))


def make_airy_contour(m, tau, truncation_radius=None, apex=None):
    """Contour C_m of the generalized Airy functions, rays meeting at -tau.

    ``apex`` moves the corner of the two-ended contours C1, C2, C6 (their
    value does not depend on it); the one-ended rays C3, C4, C5 always start
    at -tau.
    """
    if m not in (1, 2, 3, 4, 5, 6):
        raise ValueError(f"contour id must be in 1..6, got {m!r}")
    if not np.isfinite(tau):
        raise ValueError("tau must be finite")
    R = default_radius(abs(tau) ** 2 + 1.0) if truncation_radius is None \
        else float(truncation_radius)
    if R <= 0:
        raise ValueError("truncation radius must be positive")
    c = complex(-tau)
    if apex is not None:
        if m in (3, 4, 5) and abs(apex - c) > 0:
            raise ValueError("C3, C4, C5 start at -tau")
        c = complex(apex)
    w = OMEGA_ANGLE
    lab = Label(f"C{m}")
    if m == 1:
        return ray_contour(c, -w, w, R, lab)
    if m == 2:
        return ray_contour(c, 0.0, w, R, lab)
    if m == 6:
        return ray_contour(c, 0.0, -w, R, lab)
    ang = {3: w, 4: 0.0, 5: -w}[m]
    return Contour((_ray(c, ang, R),), lab, ends=(ang,))


def make_dual_contour(i, tau, truncation_radius=None, radius=0.5, offset=1.0):
    """Dual contour Chat_i for integrands (s+tau)^(-r) exp(s^3/3 - zeta s).

    Chat1 runs from infinity at angle -pi/3 to -infinity, below and left of
    -tau.  Chat2 runs from infinity at angle pi/3 down to infinity at angle
    -pi/3, passing right of -tau.  Chat3 is a counterclockwise circle of
    ``radius`` around -tau.  ``offset`` is the distance of the corners of
    Chat1, Chat2 from -tau.
    """
    if i not in (1, 2, 3):
        raise ValueError(f"dual contour id must be in 1..3, got {i!r}")
    c = complex(-tau)
    R = default_radius(abs(tau) ** 2 + 1.0) if truncation_radius is None \
        else float(truncation_radius)
    if R <= 0:
        raise ValueError("truncation radius must be positive")
    if i == 3:
        if radius <= 0:
            raise ValueError("circle radius must be positive")
        return Contour((Arc(c, radius, -np.pi, np.pi),), Label.CHAT3,
                       closed=True)
    if i == 1:
        # enter from angle -pi/3 through a point just below -tau (keeping
        # exp(s^3/3) moderate there), then run left along the real axis
        q = c - 1.0j
        a1 = c - offset
        far_in = q + R * np.exp(-1j * np.pi / 3)
        segs = (Line(far_in, q), Line(q, a1), Line(a1, a1 - R))
        return Contour(segs, Label.CHAT1, ends=(-np.pi / 3, np.pi))
    return ray_contour(c + offset, np.pi / 3, -np.pi / 3, R, Label.CHAT2)


def retruncate(c: Contour, expo: Callable, cut: float = 42.0,
               rho_max: float = 40.0) -> Contour:
    """Re-length the infinite ends of ``c`` so that ``Re expo`` has dropped
    by ``cut`` below its largest value on the part of the ray inspected."""
    if c.closed or not c.ends:
        return c
    segs = list(c.segments)
    rho = np.linspace(0.0, rho_max, 801)

    def length(apex, ang):
        vals = np.real(expo(apex + rho * np.exp(1j * ang)))
        bad = np.where(vals > vals.max() - cut)[0]
        return float(rho[min(bad[-1] + 1, len(rho) - 1)]) + 0.5

    if len(c.ends) == 2:
        first = segs[0]
        ang = c.ends[0]
        segs[0] = Line(first.b + length(first.b, ang) * np.exp(1j * ang), first.b)
    last = segs[-1]
    ang = c.ends[-1]
    segs[-1] = Line(last.a, last.a + length(last.a, ang) * np.exp(1j * ang))
    return Contour(tuple(segs), c.label, c.closed, c.ends)


def _initial_panels(contour, h0):
    panels = []
    for k, seg in enumerate(contour.segments):
        m = max(2, int(np.ceil(seg.length / h0)))
        edges = np.linspace(0.0, 1.0, m + 1)
        panels.extend((k, edges[j], edges[j + 1]) for j in range(m))
    return panels


def _panel_rule(contour, panels, order):
    """Nodes and weights (dz included) for a list of panels."""
    x, w = gauss_legendre_nodes(order)
    pts, wts = [], []
    for k, u0, u1 in panels:
        seg = contour.segments[k]
        u = u0 + (u1 - u0) * x
        pts.append(seg.point(u))
        wts.append(seg.deriv(u) * (u1 - u0) * w)
    return np.concatenate(pts), np.concatenate(wts)


def integrate(f: Callable, c: Contour, tol: float = 1e-12, rtol: float = 0.0,
              order: int = 16, max_panels: int = 20000,
              h0: float = 1.0) -> QuadratureResult:
    """Adaptive composite Gauss-Legendre integral of ``f`` along ``c``.

    ``f`` maps an array of points of shape (N,) to values of shape (N,) or
    (N, ...); vector-valued integrands share one panel refinement.  Each
    panel is compared against the sum over its two halves; the halves are
    kept, and panels whose discrepancy exceeds their share of the tolerance
    are bisected again.
    """
    if tol <= 0 and rtol <= 0:
        raise ValueError("tolerance must be positive")
    panels = _initial_panels(c, h0)
    x, w = gauss_legendre_nodes(order)

    def evaluate(pan):
        halves = []
        for k, u0, u1 in pan:
            um = 0.5 * (u0 + u1)
            halves.append((k, u0, um))
            halves.append((k, um, u1))
        pts, wts = _panel_rule(c, pan, order)
        hp, hw = _panel_rule(c, halves, order)
        fv = np.asarray(f(pts))
        hv = np.asarray(f(hp))
        shp = (len(pan), order) + fv.shape[1:]
        whole = np.einsum("pn,pn...->p...", wts.reshape(len(pan), order),
                          fv.reshape(shp))
        hshp = (len(pan), 2 * order) + hv.shape[1:]
        split = np.einsum("pn,pn...->p...", hw.reshape(len(pan), 2 * order),
                          hv.reshape(hshp))
        err = np.abs(whole - split)
        l1 = np.einsum("pn,pn...->p...", np.abs(hw.reshape(len(pan), 2 * order)),
                       np.abs(hv.reshape(hshp)))
        if err.ndim > 1:
            err = err.reshape(len(pan), -1).max(axis=1)
            l1 = l1.reshape(len(pan), -1).max(axis=1)
        # rounding noise cannot be refined away
        err = np.maximum(err - 64.0 * EPS * l1, 0.0)
        return split, err

    done_val = 0.0
    done_err = 0.0
    active = panels
    vals, errs = evaluate(active)
    used = len(active)
    while True:
        total = done_val + vals.sum(axis=0)
        err_total = done_err + errs.sum()
        target = max(tol, rtol * float(np.max(np.abs(total))))
        if err_total <= target:
            return QuadratureResult(total, float(err_total), used)
        share = target / max(used, 1)
        bad = errs > 0.5 * share
        if not bad.any():
            bad = errs >= errs.max()
        done_val = done_val + vals[~bad].sum(axis=0)
        done_err = done_err + errs[~bad].sum()
        refine = []
        for (k, u0, u1), b in zip(active, bad):
            if b:
                um = 0.5 * (u0 + u1)
                refine.extend([(k, u0, um), (k, um, u1)])
        used += len(refine) // 2
        if used > max_panels:
            raise QuadratureError(
                f"no convergence after {used} panels (error {err_total:.3g})",
                best=QuadratureResult(total, float(err_total), used))
        active = refine
        vals, errs = evaluate(active)


def _min_distance(c1, c2, m=400):
    p = c1.sample(m)
    q = c2.sample(m)
    best = np.inf
    for chunk in np.array_split(p, max(1, len(p) // 500)):
        best = min(best, np.abs(chunk[:, None] - q[None, :]).min())
    return best


def integrate_double(f: Callable, cs: Contour, ct: Contour, tol: float = 1e-12,
                     singular: bool = False, min_gap: float = 1e-3,
                     rtol: float = 1e-13,
                     order: int = 16, max_panels: int = 20000):
    """Iterated integral of ``f(s, t)`` over ``cs`` (outer) and ``ct`` (inner).

    ``f`` must broadcast: it is called with ``s`` of shape (1, S) and ``t``
    of shape (T, 1).  With ``singular=True`` (a 1/(t-s) factor present) the
    contours must stay at least ``min_gap`` apart.  ``rtol`` is a relative
    floor (against the largest inner value) that keeps rounding noise of
    large intermediate integrands from stalling the refinement.
    """
    if singular and _min_distance(cs, ct) < min_gap:
        raise ContourIntersectionError("contours intersect or nearly touch "
                                       "for an integrand singular on t = s")
    inner_tol = 0.5 * tol / max(1.0, cs.length)
    inner_err = [0.0]

    def g(s):
        res = integrate(lambda t: f(s[None, :], t[:, None]), ct, inner_tol,
                        rtol=rtol, order=order, max_panels=max_panels)
        inner_err[0] = max(inner_err[0], res.error_estimate)
        return res.value

    out = integrate(g, cs, 0.5 * tol, rtol=rtol, order=order,
                    max_panels=max_panels)
    err = out.error_estimate + cs.length * inner_err[0]
    return QuadratureResult(out.value, float(err), out.panels_used)


def fixed_rule(c: Contour, panels_per_unit: float = 2.0, order: int = 16):
    """Static composite Gauss-Legendre nodes/weights (dz included)."""
    return _panel_rule(c, _initial_panels(c, 1.0 / panels_per_unit), order)


def apply_rule(f: Callable, rule: Sequence[np.ndarray]):
    pts, wts = rule
    return np.tensordot(wts, f(pts), axes=(0, 0))
