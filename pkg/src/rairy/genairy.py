"""Generalized Airy functions Ai^{(r)}_{C_m}(zeta; tau), the constants
eta_j(tau), the 3x3 parametrix A_r(zeta), its jumps, Wronskians and the
leading large-zeta expansions of its region-I entries.

    Ai^{(r)}_{C_m}(zeta; tau) = 1/(2 pi i) int_{C_m} (t+tau)^r exp(zeta t - t^3/3) dt

The k-th zeta-derivative inserts t^k into the integrand.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from math import comb, lgamma

import numpy as np
from scipy import integrate as sint
from scipy import special

from .contours import (Contour, Label, Line, integrate, make_airy_contour,
                       make_dual_contour, ray_contour, retruncate,
                       OMEGA_ANGLE)

__all__ = [
    "GenAirySpec", "AiryMatrix", "EtaTable", "Region", "gen_airy",
    "gen_airy_terms", "eta", "eta_table", "eta0_rotational", "airy_matrix",
    "region_of", "check_jump", "jump_matrix", "asymptotic_entry",
    "wronskian_chi", "dual_wronskian", "dual_airy_terms", "F_matrix",
]

TWO_PI_I = 2j * np.pi
DIGITS_CUT = 42.0      # ~ e^-42 relative truncation of contour tails


class Region(str, enum.Enum):
    I = "I"
    II = "II"
    III = "III"
    IV = "IV"


@dataclass(frozen=True)
class GenAirySpec:
    m: int
    r: int
    tau: float
    k: int = 0

    def __post_init__(self):
        if self.m not in range(1, 7):
            raise ValueError("contour id m must be in 1..6")
        if self.r < 0:
            raise ValueError("order r must be >= 0")
        if self.k not in (0, 1, 2):
            raise ValueError("derivative k must be 0, 1 or 2")


@dataclass(frozen=True)
class AiryMatrix:
    entries: np.ndarray
    region: Region
    r: int
    tau: float
    zeta: complex


@dataclass(frozen=True)
class EtaTable:
    tau: float
    values: tuple

    @property
    def M(self):
        return len(self.values) - 1


# --------------------------------------------------------------------------
# contour selection and truncation

def _phase(t, zeta, tau, power, k):
    """Real part of the log of |(t+tau)^power t^k exp(zeta t - t^3/3)|."""
    with np.errstate(divide="ignore"):
        out = np.real(zeta * t - t ** 3 / 3.0)
        if power:
            out = out + power * np.log(np.abs(t + tau))
        if k:
            out = out + k * np.log(np.abs(t))
    return out


def _ray_length(apex, angle, zetas, tau, power, k, floor):
    """Length of a ray from ``apex`` after which the integrand stays
    ``DIGITS_CUT`` e-folds below ``floor`` (per zeta)."""
    d = np.exp(1j * angle)
    rho = np.linspace(0.0, 60.0, 601)[1:]
    t = apex + rho[:, None] * d
    ph = _phase(t, zetas[None, :], tau, power, k)
    ok = ph < floor[None, :] - DIGITS_CUT
    # last rho where the bound fails, per zeta
    bad = ~ok
    idx = np.where(bad.any(axis=1))[0]
    if len(idx) == 0:
        return 1.0
    return float(rho[min(idx[-1] + 1, len(rho) - 1)]) + 0.5


def _saddle_ok(zetas):
    z = np.asarray(zetas)
    return bool(np.all(np.abs(z) >= 6.0) and np.all(np.abs(np.angle(z)) < np.pi / 3))


def _contour_for(m, tau, zetas, power, k, saddle="auto"):
    """Contour for C_m with rays long enough for all ``zetas``.

    In saddle mode (large zeta with |arg zeta| < pi/3) the two-ended
    contours are routed through the saddles -+sqrt(zeta) of
    zeta t - t^3/3 to avoid cancellation.
    """
    zetas = np.atleast_1d(np.asarray(zetas, dtype=complex))
    use_saddle = (saddle is True) or (saddle == "auto" and m in (1, 2, 6)
                                      and _saddle_ok(zetas)
                                      and len(zetas) == 1)
    w = OMEGA_ANGLE
    if use_saddle and m in (1, 2, 6):
        sq = np.sqrt(zetas[0])
        left, right = -sq, sq
        if m == 1:
            pieces = [(left, -w, False), (left, w, True)]
            mids = []
        else:
            ang = w if m == 2 else -w
            pieces = [(right, 0.0, False), (left, ang, True)]
            mids = [Line(right, left)]
    else:
        c = complex(-tau)
        if m == 1:
            pieces = [(c, -w, False), (c, w, True)]
        elif m == 2:
            pieces = [(c, 0.0, False), (c, w, True)]
        elif m == 6:
            pieces = [(c, 0.0, False), (c, -w, True)]
        else:
            pieces = [(c, {3: w, 4: 0.0, 5: -w}[m], True)]
        mids = []
    # reference level: the integrand size along the finite part
    pts = [p[0] for p in pieces]
    if mids:
        u = np.linspace(0, 1, 65)
        pts = np.concatenate([pts, mids[0].point(u)])
    pts = np.asarray(pts, dtype=complex)
    floor = _phase(pts[:, None], zetas[None, :], tau, power, k).max(axis=0)
    floor = np.where(np.isfinite(floor), floor, 0.0)
    segs = []
    ends = []
    for n_, (apex, ang, outward) in enumerate(pieces):
        L = _ray_length(apex, ang, zetas, tau, power, k, floor)
        far = apex + L * np.exp(1j * ang)
        seg = Line(apex, far) if outward else Line(far, apex)
        ends.append(ang)
        if not outward:
            segs.append(seg)
            segs.extend(mids)
        else:
            segs.append(seg)
    lab = Label(f"C{m}")
    return Contour(tuple(segs), lab, ends=tuple(ends))


def _log_scale(c, zetas, tau, power, k):
    pts = c.sample(100)
    ph = _phase(pts[:, None], zetas[None, :], tau, power, k)
    ph = np.where(np.isfinite(ph), ph, -np.inf)
    return ph.max(axis=0)


def gen_airy_terms(m, tau, zeta, terms, tol=1e-12, saddle="auto"):
    """Values (1/2 pi i) int_{C_m} (t+tau)^p t^k exp(zeta t - t^3/3) dt.

    ``terms`` is a list of (p, k); ``zeta`` may be a scalar or 1-d array.
    Returns an array of shape (len(terms),) + shape(zeta).  Tolerances are
    relative to the peak of each integrand on the contour.
    """
    zeta_arr = np.atleast_1d(np.asarray(zeta, dtype=complex))
    pmax = max(p for p, _ in terms)
    kmax = max(k for _, k in terms)
    c = _contour_for(m, tau, zeta_arr, pmax, kmax, saddle)
    L = _log_scale(c, zeta_arr, tau, pmax, kmax)
    ps = np.array([p for p, _ in terms])
    ks = np.array([k for _, k in terms])

    def f(t):
        e = np.exp(zeta_arr[None, :] * t[:, None] - (t ** 3 / 3.0)[:, None]
                   - L[None, :])
        poly = (t[:, None] + tau) ** ps[None, :] * t[:, None] ** ks[None, :]
        return poly[:, :, None] * e[:, None, :]

    res = integrate(f, c, tol)
    out = res.value * np.exp(L)[None, :] / TWO_PI_I
    if np.ndim(zeta) == 0:
        return out[:, 0]
    return out


def gen_airy(spec: GenAirySpec, zeta: complex, tol: float = 1e-12,
             saddle="auto") -> complex:
    """Ai^{(r)}_{C_m}(zeta; tau) or its k-th zeta-derivative."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    return complex(gen_airy_terms(spec.m, spec.tau, zeta, [(spec.r, spec.k)],
                                  tol, saddle)[0])


# --------------------------------------------------------------------------
# eta_j(tau)

_ETA_PAIRS = ((6, 5, 1.0), (2, 3, -1.0), (1, 4, 1.0))


def _outer_ray(B, tau, j, length=None):
    ang = {3: OMEGA_ANGLE, 4: 0.0, 5: -OMEGA_ANGLE}[B]
    c = complex(-tau)
    if length is None:
        # the integrand decays like exp(-(2/3)|t|^{3/2} + |tau||t|)
        rho = 1.0
        while (2.0 / 3.0) * rho ** 1.5 - abs(tau) * rho - j * np.log1p(rho) \
                - abs(tau) ** 1.5 < DIGITS_CUT:
            rho += 0.25
        length = rho + abs(tau)
    return Contour((Line(c, c + length * np.exp(1j * ang)),), Label(f"C{B}"),
                   ends=(ang,))


def eta(j: int, tau: float, tol: float = 1e-12) -> complex:
    """eta_j(tau) = sum over (A,B) of int_{C_B} Ai_{C_A}(t) e^{tau t} t^j dt
    with (A,B) = (6,5), (2,3) (entering with a minus sign), (1,4)."""
    if j < 0:
        raise ValueError("j must be >= 0")
    total = 0.0j
    for A, B, sign in _ETA_PAIRS:
        c = _outer_ray(B, tau, j)

        def f(t, A=A):
            inner = gen_airy_terms(A, tau, t, [(0, 0)], tol=tol * 1e-2,
                                   saddle=False)[0]
            return inner * np.exp(tau * t) * t ** j

        total += sign * integrate(f, c, tol, rtol=tol).value
    return total


def eta_table(M: int, tau: float, tol: float = 1e-12) -> EtaTable:
    return EtaTable(tau, tuple(eta(j, tau, tol) for j in range(M + 1)))


def eta0_rotational(tau: float) -> float:
    """eta_0 from the real-axis representation
    int_0^inf Ai(t) (e^{tau t/omega} + e^{omega tau t} + e^{tau t}) dt."""
    w = np.exp(2j * np.pi / 3)

    def f(t):
        # exponentially scaled Ai keeps the product finite for large t
        a = special.airye(t)[0]
        x = -(2.0 / 3.0) * t ** 1.5
        return np.real(a * (np.exp(tau * t / w + x) + np.exp(w * tau * t + x)
                            + np.exp(tau * t + x)))

    val = sum(sint.quad(f, lo, hi, epsabs=1e-14, epsrel=1e-13, limit=200)[0]
              for lo, hi in ((0.0, 4.0), (4.0, 20.0), (20.0, 60.0)))
    return val


# --------------------------------------------------------------------------
# the parametrix A_r

_COLUMNS = {Region.I: (1, 2, 3), Region.II: (1, 2, 4),
            Region.III: (1, 6, 4), Region.IV: (1, 6, 5)}
_STAR = {Region.I: 0.0, Region.II: -1.0, Region.III: 1.0, Region.IV: 0.0}


def region_of(zeta: complex) -> Region:
    """Sector of zeta: I for arg in [0, 2pi/3), II for [2pi/3, pi],
    III for (-pi, -2pi/3], IV for (-2pi/3, 0).  Points on a ray belong to
    the (+)-side of its jump orientation."""
    th = np.angle(zeta)
    if 0.0 <= th < OMEGA_ANGLE:
        return Region.I
    if th >= OMEGA_ANGLE:
        return Region.II
    if th <= -OMEGA_ANGLE:
        return Region.III
    return Region.IV


def airy_matrix(zeta: complex, r: int, tau: float, region=None,
                tol: float = 1e-12) -> AiryMatrix:
    """A_r(zeta) assembled with the column choice of ``region``."""
    if r < 1:
        raise ValueError("airy_matrix needs r >= 1 (third row has order r-1)")
    region = region_of(zeta) if region is None else Region(region)
    cols = []
    for m in _COLUMNS[region]:
        v = gen_airy_terms(m, tau, zeta, [(r, 0), (r, 1), (r - 1, 0)], tol)
        cols.append(v)
    A = np.array(cols).T
    star = np.array([[1, 0, 0], [_STAR[region], 1, 0], [0, 0, 1]], dtype=complex)
    return AiryMatrix(A @ star, region, r, tau, complex(zeta))


_JUMPS = {
    1: np.array([[1, 1, 1], [0, 1, 0], [0, 0, 1]], dtype=complex),
    2: np.array([[1, 0, 0], [-1, 1, -1], [0, 0, 1]], dtype=complex),
    3: np.array([[0, 1, 0], [-1, 0, 0], [0, 0, 1]], dtype=complex),
    4: np.array([[1, 0, 0], [1, 1, -1], [0, 0, 1]], dtype=complex),
}
# (direction of the ray, orientation sign, + region, - region)
_GAMMAS = {
    1: (1.0 + 0j, 1.0, Region.I, Region.IV),
    2: (np.exp(1j * OMEGA_ANGLE), 1.0, Region.II, Region.I),
    3: (-1.0 + 0j, -1.0, Region.II, Region.III),
    4: (np.exp(-1j * OMEGA_ANGLE), -1.0, Region.III, Region.IV),
}


def jump_matrix(gamma: int) -> np.ndarray:
    return _JUMPS[gamma].copy()


def check_jump(gamma: int, point: complex, r: int, tau: float,
               tol: float = 1e-12) -> float:
    """Max-norm residual of A_+ - A_- J_gamma at ``point`` on Gamma_gamma,
    relative to max(1, |A|), using boundary values extrapolated from
    perpendicular offsets eps and eps/2."""
    if gamma not in _GAMMAS:
        raise ValueError("gamma must be in 1..4")
    d, orient, plus, minus = _GAMMAS[gamma]
    point = complex(point)
    if abs(point) < 1e-8 or abs(np.angle(point / d)) > 1e-8:
        raise ValueError(f"point {point} is not on Gamma_{gamma}")
    normal = 1j * d * orient          # left of the orientation = (+)-side
    eps = max(1e-6, np.sqrt(tol)) * (1.0 + abs(point))

    def side(region, sgn):
        a1 = airy_matrix(point + sgn * eps * normal, r, tau, region, tol).entries
        a2 = airy_matrix(point + sgn * 0.5 * eps * normal, r, tau, region,
                         tol).entries
        return 2.0 * a2 - a1

    Ap = side(plus, 1.0)
    Am = side(minus, -1.0)
    res = Ap - Am @ _JUMPS[gamma]
    return float(np.abs(res).max() / max(1.0, np.abs(Ap).max()))


# --------------------------------------------------------------------------
# large-zeta expansions in region I

def _col12_series(i, j, r, tau):
    """Coefficients (exponent of zeta, coefficient) of the bracket series."""
    if j == 1:
        if i == 1:
            return [(0.0, 1.0), (-1.5, -r * r / 4 + r / 2 - 5 / 48),
                    (-2.0, -r * r * tau / 2 + 3 * r * tau / 4),
                    (-3.0, r ** 4 / 32)]
        if i == 2:
            return [(0.0, -1.0), (-1.5, r * r / 4 - 7 / 48),
                    (-2.0, r * r * tau / 2 - r * tau / 4),
                    (-3.0, -r ** 4 / 32)]
        return [(-0.75, 1.0), (-1.25, tau), (-1.75, tau * tau)]
    if i == 1:
        return [(0.0, 1.0), (-1.5, r * r / 4 - r / 2 + 5 / 48),
                (-2.0, -r * r * tau / 2 + 3 * r * tau / 4),
                (-3.0, r ** 4 / 32)]
    if i == 2:
        return [(0.0, 1.0), (-1.5, r * r / 4 - 7 / 48),
                (-2.0, -r * r * tau / 2 + r * tau / 4),
                (-3.0, r ** 4 / 32)]
    return [(-0.75, 1.0), (-1.25, -tau), (-1.75, tau * tau)]


def _third_column(r, tau, zeta, n_terms, etas, derivative):
    """Leading terms of Ai^{(r)}_{C3} (or its zeta-derivative)."""
    pref = (-1) ** (r + 1) * np.exp(lgamma(r + 1)) / TWO_PI_I * np.exp(-tau * zeta)
    total = 0.0j
    for j in range(n_terms):
        b = comb(r + j, j)
        if not derivative:
            total += b * etas[j] * zeta ** (-r - 1 - j)
        else:
            # d/dzeta of e^{-tau zeta} zeta^{-r-1-j}
            total += b * etas[j] * (-tau * zeta ** (-r - 1 - j)
                                    - (r + 1 + j) * zeta ** (-r - 2 - j))
    return pref * total


def asymptotic_entry(i: int, j: int, r: int, tau: float, zeta: complex,
                     n_terms: int, etas=None) -> complex:
    """Truncated large-zeta expansion of the (i, j) entry of A_r(zeta) in
    region I, keeping ``n_terms`` terms of the bracketed series."""
    zeta = complex(zeta)
    if region_of(zeta) != Region.I:
        raise ValueError("expansions are implemented in region I only")
    if not (1 <= i <= 3 and 1 <= j <= 3):
        raise ValueError("entry indices must be in 1..3")
    if n_terms < 1:
        raise ValueError("n_terms must be >= 1")
    sq = np.sqrt(zeta)
    if j == 3:
        rr = r - 1 if i == 3 else r
        if etas is None or len(etas) < n_terms:
            etas = [eta(q, tau) for q in range(n_terms)]
        return complex(_third_column(rr, tau, zeta, n_terms, etas, i == 2))
    series = _col12_series(i, j, r, tau)[:n_terms]
    s = sum(c * zeta ** e for e, c in series)
    xi = (2.0 / 3.0) * zeta ** 1.5
    if j == 1:
        if i == 3:
            pref = (-1) ** (r - 1) / (2 * np.sqrt(np.pi)) * (sq - tau) ** r \
                * np.exp(-xi)
        else:
            lead = -0.25 if i == 1 else 0.25
            pref = (-1) ** r / (2 * np.sqrt(np.pi)) * (sq - tau) ** r \
                * zeta ** lead * np.exp(-xi)
    else:
        base = -1.0 / (2 * np.sqrt(np.pi) * 1j) * (sq + tau) ** r * np.exp(xi)
        pref = base if i == 3 else base * zeta ** (-0.25 if i == 1 else 0.25)
    return complex(pref * s)


# --------------------------------------------------------------------------
# Wronskians

def wronskian_chi(r: int, zeta: complex, tau: float, tol: float = 1e-12,
                  contours=(1, 2, 3)) -> np.ndarray:
    """chi_r(zeta): rows Ai^{(r)}_{C_j}, its first and second derivatives."""
    cols = [gen_airy_terms(m, tau, zeta, [(r, 0), (r, 1), (r, 2)], tol)
            for m in contours]
    return np.array(cols).T


def dual_airy_terms(i, tau, zeta, terms, tol=1e-12, circle_radius=0.5,
                    offset=1.0):
    """int_{Chat_i} (s+tau)^(-q) s^k exp(s^3/3 - zeta s) ds for (q, k) in
    ``terms`` (no 1/(2 pi i) factor)."""
    zeta = complex(zeta)
    qmax = max(q for q, _ in terms)
    kmax = max(k for _, k in terms)
    base = make_dual_contour(i, tau, 1.0, circle_radius, offset)
    base = retruncate(base, lambda s: np.real(s ** 3 / 3 - zeta * s)
                      - qmax * np.log(np.abs(s + tau)) + kmax * np.log(np.abs(s) + 1))
    pts = base.sample(100)
    L = float(np.max(np.real(pts ** 3 / 3 - zeta * pts)))
    qs = np.array([q for q, _ in terms])
    ks = np.array([k for _, k in terms])

    def f(s):
        e = np.exp(s ** 3 / 3 - zeta * s - L)
        return (s[:, None] + tau) ** (-qs[None, :]) * s[:, None] ** ks[None, :] \
            * e[:, None]

    return integrate(f, base, tol).value * np.exp(L)


def dual_wronskian(r: int, zeta: complex, tau: float, tol: float = 1e-12,
                   **kw) -> np.ndarray:
    """chihat_r(zeta) with entries (-1)^(m-1) d^(m-1)/dzeta^(m-1) of
    Aihat^{(r)}_{Chat_i}(zeta) = int_{Chat_i} (s+tau)^(-r-1) e^{s^3/3-zeta s} ds."""
    if r < 0:
        raise ValueError("dual Wronskian needs r >= 0")
    rows = [dual_airy_terms(i, tau, zeta, [(r + 1, 0), (r + 1, 1), (r + 1, 2)],
                            tol, **kw) for i in (1, 2, 3)]
    return np.array(rows)


def F_matrix(zeta: complex, tau: float) -> np.ndarray:
    return np.array([[zeta, -tau, -1], [-tau, -1, 0], [-1, 0, 0]],
                    dtype=complex)
