"""The r-Airy kernel as a double contour integral, its classical r = 0
reduction, the Brownian-motion form, and the bilinear concomitant
and transfer-matrix identities behind it.

    K(x, y) = 1/(2 pi i)^2 int_{Ctilde} ds int_{C} dt
              ((t+tau)/(s+tau))^r exp((s^3 - t^3)/3 + x t - y s) / (t - s)

C runs upward with asymptotes at angles -+2pi/3; Ctilde runs downward from
angle pi/3 to -pi/3 to the right of C, with -tau on its right.  Moving
Ctilde across -tau adds (1/2 pi i) int_C P(t) exp(x t - t^3/3) dt, P the
Taylor polynomial of degree r-1 of exp(s^3/3 - y s) at s = -tau.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special

from .contours import (Contour, Label, Line, integrate, integrate_double,
                       make_airy_contour, make_dual_contour, ray_contour, retruncate,
                       gauss_legendre_nodes, OMEGA_ANGLE)
from .genairy import F_matrix, dual_wronskian, wronskian_chi

__all__ = [
    "KernelParams", "KernelValue", "r_airy_kernel", "airy_kernel_classical",
    "adler_kernel", "concomitant", "chi_transfer", "chi_transfer_pre_ibp",
    "chi_transfer_matrix", "kernel_diagonal", "kernel_matrix",
    "kernel_contours", "kernel_624",
]

TWO_PI_I = 2j * np.pi
CUT = 42.0


@dataclass(frozen=True)
class KernelParams:
    r: int = 0
    tau: float = 0.0
    tol: float = 1e-10
    contour_scale: float = 1.0

    def __post_init__(self):
        if self.r < 0:
            raise ValueError("r must be >= 0")
        if not (1e-12 < self.tol < 1e-4):
            raise ValueError("tol must lie in (1e-12, 1e-4)")
        if self.contour_scale <= 0:
            raise ValueError("contour_scale must be positive")
        if not np.isfinite(self.tau):
            raise ValueError("tau must be finite")


@dataclass(frozen=True)
class KernelValue:
    value: float
    abs_error: float


def _ray_len(apex, angle, expo, cut=CUT, rho_max=40.0):
    """Shortest length after which Re(expo) stays ``cut`` below its value on
    the first part of the ray."""
    rho = np.linspace(0.0, rho_max, 801)
    vals = np.real(expo(apex + rho * np.exp(1j * angle)))
    peak = max(vals.max(), vals[0])
    bad = np.where(vals > peak - cut)[0]
    return float(rho[min(bad[-1] + 1, len(rho) - 1)]) + 0.5


@dataclass(frozen=True)
class KernelContours:
    """C, Ctilde and whether Ctilde was moved to the right of the pole at
    -tau (then the residue term must be added)."""
    C: Contour
    Ct: Contour
    residue: bool


def _t_expo(xs, r, tau):
    lo, hi = np.min(xs), np.max(xs)
    return lambda t: (np.maximum(lo * np.real(t), hi * np.real(t)) - np.real(t ** 3) / 3
                      + r * np.log(np.abs(t + tau) + 1e-300))


def _s_expo(ys, r, tau):
    lo, hi = np.min(ys), np.max(ys)
    return lambda s: (np.maximum(-lo * np.real(s), -hi * np.real(s)) + np.real(s ** 3) / 3
                      - r * np.log(np.abs(s + tau) + 1e-300))


def _vee_peak(apexes, angles, expo, rho_max=8.0):
    rho = np.linspace(0.0, rho_max, 161)
    dirs = np.exp(1j * np.asarray(angles))
    w = apexes[:, None, None] + rho[None, :, None] * dirs[None, None, :]
    return expo(w).max(axis=(1, 2))


def _taylor_g(ys, s0, m):
    """Taylor coefficients G[:, k], k < m, of exp(s^3/3 - y s) at s0."""
    ys = np.atleast_1d(np.asarray(ys, dtype=float))
    H = [s0 ** 3 / 3 - ys * s0, s0 ** 2 - ys, np.full_like(ys, s0), np.full_like(ys, 1 / 3)]
    G = np.zeros((ys.size, max(m, 1)))
    G[:, 0] = np.exp(H[0])
    for k in range(m - 1):
        G[:, k + 1] = sum((j + 1) * H[j + 1] * G[:, k - j]
                          for j in range(min(k, 2) + 1)) / (k + 1)
    return G[:, :m]


def kernel_contours(p: KernelParams, xs=(0.0,), ys=(0.0,)) -> KernelContours:
    """C and Ctilde for arguments in the ranges of ``xs`` and ``ys``.

    The real-axis crossings are chosen to minimize the peak size of the
    integrand.  Ctilde may pass right of -tau; the pole is then accounted
    for by a residue term.  Crossings stay 0.5*contour_scale apart and
    Ctilde stays 0.5*contour_scale from -tau.
    """
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    ys = np.atleast_1d(np.asarray(ys, dtype=float))
    h, r, tau = p.contour_scale, p.r, p.tau
    w = OMEGA_ANGLE
    t_expo, s_expo = _t_expo(xs, r, tau), _s_expo(ys, r, tau)
    grid = np.arange(min(-tau, 0.0) - 5.0, max(-tau, 0.0) + 5.0, 0.05)
    pt = _vee_peak(grid, (-w, w), t_expo)
    ps = _vee_peak(grid, (np.pi / 3, -np.pi / 3), s_expo)
    cost = pt[:, None] + ps[None, :]
    ok = grid[None, :] - grid[:, None] >= 0.5 * h
    moved = np.zeros(grid.size, bool)
    if r:
        ok &= np.abs(grid[None, :] + tau) >= 0.5 * h
        moved = grid > -tau
        g = np.log(np.abs(_taylor_g(ys, -tau, r)).sum(axis=1).max())
        res = _vee_peak(grid, (-w, w), _t_expo(xs, 0, tau)) \
            + (r - 1) * np.log(1.0 + np.abs(grid + tau)) + g
        cost = np.where(moved[None, :], np.logaddexp(cost, res[:, None]), cost)
    cost = np.where(ok, cost, np.inf)
    i, j = np.unravel_index(np.argmin(cost), cost.shape)
    ct, cs = complex(grid[i]), complex(grid[j])
    Lt = max(_ray_len(ct, a, t_expo) for a in (-w, w))
    Ls = max(_ray_len(cs, a, s_expo) for a in (np.pi / 3, -np.pi / 3))
    C = ray_contour(ct, -w, w, Lt, Label.CMAIN)
    Ct = ray_contour(cs, np.pi / 3, -np.pi / 3, Ls, Label.CTILDE)
    return KernelContours(C, Ct, bool(moved[j]))


def _kernel_integrand(x, y, r, tau):
    def f(s, t):
        e = np.exp((s ** 3 - t ** 3) / 3.0 + x * t - y * s)
        if r:
            e = e * ((t + tau) / (s + tau)) ** r
        return e / (t - s)
    return f


def _complex_kernel(zx, zy, p, kc=None):
    if kc is None:
        kc = kernel_contours(p, (zx,), (zy,))
    # rounding floor from the sum of |terms| on a coarse fixed rule
    _, scale = _matrix_once(np.array([zx]), np.array([zy]), p, kc, 2.0)
    tol = max(p.tol, 16 * np.finfo(float).eps * scale)
    res = integrate_double(_kernel_integrand(zx, zy, p.r, p.tau), kc.Ct, kc.C,
                           tol=tol * abs(TWO_PI_I) ** 2, singular=True,
                           min_gap=0.25 * p.contour_scale, max_panels=1000)
    val = res.value / TWO_PI_I ** 2
    err = res.error_estimate / abs(TWO_PI_I) ** 2
    if kc.residue:
        G = _taylor_g([zy], -p.tau, p.r)[0]
        k = np.arange(p.r)
        f = lambda t: np.exp(zx * t - t ** 3 / 3) * \
            ((t[..., None] + p.tau) ** k @ G)
        single = integrate(f, kc.C, 0.5 * tol * abs(TWO_PI_I), max_panels=1000)
        val += single.value / TWO_PI_I
        err += single.error_estimate / abs(TWO_PI_I)
    return val, err


def r_airy_kernel(zx: float, zy: float, p: KernelParams) -> KernelValue:
    """r-Airy kernel K(zx, zy) by adaptive double quadrature."""
    val, err = _complex_kernel(float(zx), float(zy), p)
    return KernelValue(float(val.real), float(err + abs(val.imag)))


def kernel_diagonal(z: float, p: KernelParams) -> KernelValue:
    """K(z, z); the contours are disjoint so the integrand stays regular."""
    return r_airy_kernel(z, z, p)


def airy_kernel_classical(x: float, y: float) -> float:
    """(Ai(x)Ai'(y) - Ai'(x)Ai(y))/(x - y), with Ai'(x)^2 - x Ai(x)^2 on
    the diagonal."""
    ax, apx, _, _ = special.airy(x)
    ay, apy, _, _ = special.airy(y)
    if abs(x - y) < 1e-7 * (1.0 + abs(x)):
        m = 0.5 * (x + y)
        am, apm, _, _ = special.airy(m)
        return float(apm * apm - m * am * am)
    return float((ax * apy - apx * ay) / (x - y))


class _Rule:
    """Fixed composite Gauss-Legendre nodes along a contour."""

    def __init__(self, contour: Contour, panels_per_unit: float, order=16):
        xg, wg = gauss_legendre_nodes(order)
        pts, wts = [], []
        for seg in contour.segments:
            m = max(2, int(np.ceil(seg.length * panels_per_unit)))
            e = np.linspace(0.0, 1.0, m + 1)
            u = (e[:-1, None] + (e[1:] - e[:-1])[:, None] * xg[None, :]).ravel()
            du = np.repeat(e[1:] - e[:-1], order) * np.tile(wg, m)
            pts.append(seg.point(u))
            wts.append(seg.deriv(u) * du)
        self.z = np.concatenate(pts)
        self.w = np.concatenate(wts)


def _matrix_once(xs, ys, p, kc, density):
    """K on the grid and the sum of absolute values of the quadrature terms
    (the scale that sets the rounding floor)."""
    T = _Rule(kc.C, density)
    S = _Rule(kc.Ct, density)
    t, s = T.z, S.z
    E0 = np.exp(np.outer(xs, t) - t ** 3 / 3.0) * T.w
    Ex = E0
    Fy = np.exp(s ** 3 / 3.0 - np.outer(ys, s)) * S.w
    if p.r:
        Ex = Ex * (t + p.tau) ** p.r
        Fy = Fy * (s + p.tau) ** (-p.r)
    M = 1.0 / (t[:, None] - s[None, :])
    K = (Ex @ M @ Fy.T) / TWO_PI_I ** 2
    scale = (np.abs(Ex) @ np.abs(M) @ np.abs(Fy).T).max() / abs(TWO_PI_I) ** 2
    if kc.residue:
        V = (t[:, None] + p.tau) ** np.arange(p.r)
        G = _taylor_g(ys, -p.tau, p.r)
        K = K + (E0 @ V @ G.T) / TWO_PI_I
        scale += (np.abs(E0) @ np.abs(V) @ np.abs(G).T).max() / abs(TWO_PI_I)
    return K, float(scale)


def kernel_matrix(xs, ys, p: KernelParams, max_density=64.0, return_error=False):
    """Matrix K(xs[i], ys[j]) by fixed-node quadrature, refined by doubling
    the panel density until two successive results agree to ``p.tol``, or
    to the rounding floor 16*eps*(sum of |terms|) when that is larger."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.size == 0 or ys.size == 0:
        out = np.zeros((xs.size, ys.size))
        return (out, 0.0) if return_error else out
    kc = kernel_contours(p, xs, ys)
    density = 1.0
    prev, _ = _matrix_once(xs, ys, p, kc, density)
    while True:
        density *= 2.0
        cur, scale = _matrix_once(xs, ys, p, kc, density)
        diff = float(np.abs(cur - prev).max())
        target = max(p.tol, 16 * np.finfo(float).eps * scale)
        if diff < target or density >= max_density:
            break
        prev = cur
    if diff >= target:
        from .contours import QuadratureError
        raise QuadratureError(f"kernel matrix did not converge (diff {diff:.3g})")
    err = diff + float(np.abs(cur.imag).max())
    out = cur.real
    return (out, err) if return_error else out


def _ray_peak(y, zeta, rho_max=8.0):
    """Largest Re(i w^3/3 + i w zeta) on the rays at angles pi/6 and 5pi/6
    leaving i*y, for each height in ``y``."""
    rho = np.linspace(0.0, rho_max, 161)
    dirs = np.exp(1j * np.array([np.pi / 6, 5 * np.pi / 6]))
    w = 1j * np.asarray(y)[:, None, None] + rho[None, :, None] * dirs[None, None, :]
    return np.real(1j * w ** 3 / 3 + 1j * w * zeta).max(axis=(1, 2))


def _adler_heights(zx, zy, tau, r, floor=0.25):
    """(depth, gap) minimizing the peak log-size of the Brownian-motion
    integrand: the exponent peaks along each ray, the pole contributes
    -r*log(depth) and the 1/(a+b) factor -log(gap)."""
    grid = np.linspace(floor, 3.0, 56)
    d, g = np.meshgrid(grid, grid, indexing="ij")
    pa = _ray_peak(-(tau + grid), zx)[:, None]
    yb = tau + d + g
    ys = np.unique(yb)
    pb = np.interp(yb, ys, _ray_peak(ys, zy))
    cost = pa + pb - r * np.log(d) - np.log(g)
    k = np.unravel_index(np.argmin(cost), cost.shape)
    return float(d[k]), float(g[k])


def adler_kernel(zx: float, zy: float, p: KernelParams, gap=None,
                 depth=None) -> KernelValue:
    """Two-variable Brownian-motion form

        1/(2 pi i)^2 int_C da int_C db ((-ib - tau)^r / (ia - tau)^r)
            exp((i a^3 + i b^3)/3 + i a zx + i b zy) / (i a + i b)

    with both contours running from infinity at angle 5pi/6 to infinity at
    angle pi/6.  The a-contour passes ``depth`` below -i tau; the b-contour
    is lifted by ``gap`` above the reflection of the a-contour so that
    a + b != 0.  Unset heights are chosen to keep the integrand small.
    """
    tau, r = p.tau, p.r
    d0, g0 = _adler_heights(zx, zy, tau, r)
    depth = d0 if depth is None else depth
    gap = g0 if gap is None else gap
    # cancellation floor: the integrand reaches about exp(cost)
    cost = _ray_peak([-(tau + depth)], zx)[0] + _ray_peak([tau + depth + gap], zy)[0] \
        - r * np.log(depth) - np.log(gap)
    tol = max(p.tol, 1e-14 * np.exp(cost))
    pa = -1j * (tau + depth)
    pb = 1j * (tau + depth + gap)
    a_len = _ray_len(pa, np.pi / 6,
                     lambda a: np.real(1j * a ** 3 / 3 + 1j * a * zx)) + 1.0
    b_len = _ray_len(pb, np.pi / 6,
                     lambda b: np.real(1j * b ** 3 / 3 + 1j * b * zy)) + 1.0
    a_len = max(a_len, _ray_len(pa, 5 * np.pi / 6,
                                lambda a: np.real(1j * a ** 3 / 3 + 1j * a * zx)) + 1.0)
    b_len = max(b_len, _ray_len(pb, 5 * np.pi / 6,
                                lambda b: np.real(1j * b ** 3 / 3 + 1j * b * zy)) + 1.0)
    Ca = ray_contour(pa, 5 * np.pi / 6, np.pi / 6, a_len)
    Cb = ray_contour(pb, 5 * np.pi / 6, np.pi / 6, b_len)

    def f(a, b):
        e = np.exp(1j * (a ** 3 + b ** 3) / 3.0 + 1j * a * zx + 1j * b * zy)
        if r:
            e = e * ((-1j * b - tau) / (1j * a - tau)) ** r
        return e / (1j * a + 1j * b)

    res = integrate_double(f, Ca, Cb, tol=tol * abs(TWO_PI_I) ** 2,
                           max_panels=2000)
    val = res.value / TWO_PI_I ** 2
    return KernelValue(float(val.real),
                       float(res.error_estimate / abs(TWO_PI_I) ** 2 + abs(val.imag)))


# --------------------------------------------------------------------------
# concomitant and transfer matrices

def _separated_contours(tau, h=1.0, radius=0.5):
    """C1, C2, C3 and Chat1..3 drawn so that C_j and Chat_i are disjoint
    for i != j (needed when the integrand carries 1/(t - s))."""
    C1 = make_airy_contour(1, tau, 12.0, apex=-tau - 2.0 * h)
    C2 = make_airy_contour(2, tau, 12.0, apex=-tau + 1j * 2.0 * radius)
    C3 = make_airy_contour(3, tau, 12.0)
    D1 = make_dual_contour(1, tau, 12.0, offset=2.5 * h)
    D2 = make_dual_contour(2, tau, 12.0, offset=1.0 * h)
    D3 = make_dual_contour(3, tau, radius=radius)
    return (C1, C2, C3), (D1, D2, D3)


def _extend(c: Contour, expo, cut=CUT):
    return retruncate(c, expo, cut)


def concomitant(i: int, j: int, r: int, tau: float, zeta: float,
                tol: float = 1e-12) -> complex:
    """Bilinear concomitant of Ai^{(r-1)}_{C_j} and Aihat^{(r-1)}_{Chat_i}:

        1/(2 pi i) int_{Chat_i} ds int_{C_j} dt ((t+s)(t+tau) + s^2 - zeta)
            (t+tau)^(r-1) (s+tau)^(-r) exp((s^3 - t^3)/3 + zeta (t - s))
    """
    if r < 1:
        raise ValueError("concomitant needs r >= 1")
    if not (1 <= i <= 3 and 1 <= j <= 3):
        raise ValueError("indices must be in 1..3")
    Cs, Ds = _separated_contours(tau)
    ct = _extend(Cs[j - 1], lambda t: np.real(zeta * t - t ** 3 / 3) + r * np.log(abs(t) + 2))
    cs = _extend(Ds[i - 1], lambda s: np.real(s ** 3 / 3 - zeta * s) + 2 * np.log(abs(s) + 2))

    def f(s, t):
        poly = ((t + s) * (t + tau) + s * s - zeta) * (t + tau) ** (r - 1) \
            * (s + tau) ** (-r)
        return poly * np.exp((s ** 3 - t ** 3) / 3 + zeta * (t - s))

    res = integrate_double(f, cs, ct, tol)
    return complex(res.value / TWO_PI_I)


def chi_transfer(i: int, j: int, zx: float, zy: float, r: int, tau: float,
                 tol: float = 1e-12) -> complex:
    """(chi_{r-1}(zy)^{-1} chi_{r-1}(zx))_{ij} for i != j as

        (zx - zy)/(2 pi i) int_{Chat_i} ds int_{C_j} dt
            ((t+tau)/(s+tau))^r exp((s^3 - t^3)/3 + zx t - zy s) / (t - s)
    """
    if i == j:
        raise ValueError("chi_transfer double-integral form needs i != j")
    Cs, Ds = _separated_contours(tau)
    ct = _extend(Cs[j - 1], lambda t: np.real(zx * t - t ** 3 / 3))
    cs = _extend(Ds[i - 1], lambda s: np.real(s ** 3 / 3 - zy * s))

    def f(s, t):
        return ((t + tau) / (s + tau)) ** r \
            * np.exp((s ** 3 - t ** 3) / 3 + zx * t - zy * s) / (t - s)

    res = integrate_double(f, cs, ct, tol, singular=True, min_gap=0.1)
    return complex((zx - zy) * res.value / TWO_PI_I)


def chi_transfer_pre_ibp(i: int, j: int, zx: float, zy: float, r: int,
                         tau: float, tol: float = 1e-12) -> complex:
    """The same entry before integration by parts:

        1/(2 pi i) int int ((t+s)(t+tau) + s^2 - zy) (t+tau)^(r-1) (s+tau)^(-r)
            exp((s^3 - t^3)/3 + zx t - zy s)
    """
    Cs, Ds = _separated_contours(tau)
    ct = _extend(Cs[j - 1], lambda t: np.real(zx * t - t ** 3 / 3))
    cs = _extend(Ds[i - 1], lambda s: np.real(s ** 3 / 3 - zy * s))

    def f(s, t):
        poly = ((t + s) * (t + tau) + s * s - zy) * (t + tau) ** (r - 1) \
            * (s + tau) ** (-r)
        return poly * np.exp((s ** 3 - t ** 3) / 3 + zx * t - zy * s)

    res = integrate_double(f, cs, ct, tol)
    return complex(res.value / TWO_PI_I)


def chi_transfer_matrix(zx, zy, r, tau, tol=1e-12):
    """chi_{r-1}(zy)^{-1} chi_{r-1}(zx) through the dual Wronskian:
    the inverse of chi_{r-1}(z) is -chihat_{r-1}(z) F(z)."""
    inv = -dual_wronskian(r - 1, zy, tau, tol) @ F_matrix(zy, tau)
    return inv @ wronskian_chi(r - 1, zx, tau, tol)


def kernel_624(zx: float, zy: float, p: KernelParams) -> complex:
    """Kernel as the double integral over (Chat2 + Chat3) x C1, the form
    reached from the transfer matrix [0, 1, 1] chi^{-1}(zy) chi(zx) e_1."""
    Cs, Ds = _separated_contours(p.tau)
    ct = _extend(Cs[0], lambda t: np.real(zx * t - t ** 3 / 3))
    f = _kernel_integrand(zx, zy, p.r, p.tau)
    total = 0.0j
    for D in (Ds[1], Ds[2]):
        cs = _extend(D, lambda s: np.real(s ** 3 / 3 - zy * s))
        total += integrate_double(f, cs, ct, p.tol, singular=True,
                                  min_gap=0.1, max_panels=1000).value
    return complex(total / TWO_PI_I ** 2)
