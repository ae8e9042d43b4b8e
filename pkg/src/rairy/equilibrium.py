"""One-cut equilibrium measures for polynomial potentials, the effective
potentials P1, P2, P3, edge scaling constants and regime classification.

The measure minimizes the logarithmic energy with external field V and total
mass m (m = 1 - kappa/2 for the kappa-perturbed problem).  On a single cut
[alpha, beta] with R(z) = sqrt(z - alpha) sqrt(z - beta),

    1/(2 pi i) oint V'(z)/R(z) dz = 0,   1/(2 pi i) oint z V'(z)/R(z) dz = 2 m,

and the density is rho(x) = Q(x) sqrt((beta - x)(x - alpha)) / (2 pi) with Q
the polynomial part of V'(z)/R(z).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from numpy.polynomial import Polynomial
from scipy import integrate as sint, optimize

from .contours import gauss_legendre_nodes

__all__ = [
    "Potential", "EquilibriumData", "Regime", "RegimeReport",
    "NotOneCutError", "AmbiguousRegimeError", "solve_one_cut",
    "effective_potentials", "critical_a", "scaling_constant_c1",
    "edge_constant_c1", "beta_dot", "zeta_map", "unscale", "classify_regime",
    "drift",
]


class NotOneCutError(RuntimeError):
    pass


class AmbiguousRegimeError(RuntimeError):
    pass


@dataclass(frozen=True)
class Potential:
    """Real polynomial potential, coefficients constant term first."""
    coefficients: tuple

    def __post_init__(self):
        c = np.trim_zeros(np.asarray(self.coefficients, dtype=float), "b")
        if len(c) < 3 or (len(c) - 1) % 2 or c[-1] <= 0:
            raise ValueError("potential must have even degree >= 2 and a "
                             "positive leading coefficient")
        object.__setattr__(self, "coefficients", tuple(float(x) for x in c))

    @property
    def poly(self) -> Polynomial:
        return Polynomial(self.coefficients)

    @classmethod
    def gaussian(cls):
        return cls((0.0, 0.0, 0.5))

    @classmethod
    def parse(cls, text: str):
        return cls(tuple(float(x) for x in text.replace(";", ",").split(",")
                         if x.strip()))


@dataclass(frozen=True)
class EquilibriumData:
    V: Potential
    alpha: float
    beta: float
    Q: Polynomial
    ell1: float
    mass: float = 1.0
    c1: float = field(default=np.nan)
    a_c: float = field(default=np.nan)
    beta_dot: float = field(default=np.nan)

    def density(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x > self.alpha) & (x < self.beta)
        root = np.sqrt(np.clip((self.beta - x) * (x - self.alpha), 0, None))
        return np.where(inside, self.Q(x) * root / (2 * np.pi), 0.0)

    # -- the g-function ----------------------------------------------------
    def _theta_rule(self, n=400):
        u, w = gauss_legendre_nodes(n)
        th = np.pi * u
        c = 0.5 * (self.alpha + self.beta)
        h = 0.5 * (self.beta - self.alpha)
        s = c + h * np.cos(th)
        # rho(s) ds = Q(s) h^2 sin^2(th) dth / (2 pi)
        wt = np.pi * w * self.Q(s) * (h * np.sin(th)) ** 2 / (2 * np.pi)
        return s, wt

    def gfun(self, z, n=400):
        """g(z) = int log(z - s) rho(s) ds (principal log).  Real z on the
        support is split at z and integrated with the sqrt-log weighted
        rule, which resolves both the edge and the log singularity."""
        s, wt = self._theta_rule(n)
        z = np.asarray(z, dtype=complex)
        out = np.log(z[..., None] - s) @ wt
        on_cut = (z.imag == 0) & (z.real > self.alpha) & (z.real < self.beta)
        if np.any(on_cut):
            out = np.array(out, dtype=complex)
            out[on_cut] = [self._g_on_cut(x) for x in z.real[on_cut]]
        return out

    def _g_on_cut(self, x):
        a, b, Q = self.alpha, self.beta, self.Q
        opts = dict(epsabs=1e-13, epsrel=1e-12, limit=200)
        left = sint.quad(lambda t: Q(t) * np.sqrt(b - t), a, x,
                         weight="alg-logb", wvar=(0.5, 0.0), **opts)[0]
        right = sint.quad(lambda t: Q(t) * np.sqrt(t - a), x, b,
                          weight="alg-loga", wvar=(0.0, 0.5), **opts)[0]
        mass_right = sint.quad(lambda t: Q(t) * np.sqrt(t - a), x, b,
                               weight="alg", wvar=(0.0, 0.5), **opts)[0]
        return complex((left + right) / (2 * np.pi), mass_right / 2)

    def gprime(self, z, n=400):
        """g'(z); at z = beta the endpoint weight cancels and the rule stays
        spectral."""
        z = np.asarray(z, dtype=complex)
        u, w = gauss_legendre_nodes(n)
        th = np.pi * u
        c = 0.5 * (self.alpha + self.beta)
        h = 0.5 * (self.beta - self.alpha)
        s = c + h * np.cos(th)
        out = []
        for zz in np.atleast_1d(z).ravel():
            if abs(zz - self.beta) < 1e-14:
                # sin^2/(1 - cos) = 1 + cos
                val = h * np.sum(np.pi * w * self.Q(s) * (1 + np.cos(th))) / (2 * np.pi)
            else:
                val = np.sum(np.pi * w * self.Q(s) * (h * np.sin(th)) ** 2
                             / (zz - s)) / (2 * np.pi)
            out.append(val)
        out = np.array(out).reshape(np.shape(z))
        return out

    # -- P1 on the real line, from P1' = -Q R ---------------------------------
    def phi(self, x, n=80):
        """Signed int_beta^x Q(w) sqrt(|(w - alpha)(w - beta)|) dw for real x
        >= alpha (negative for x < beta).  Uses w = beta + sign*v^2 so the
        square-root endpoint is resolved exactly."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        u, wq = gauss_legendre_nodes(n)
        out = np.empty_like(x)
        for k, xx in enumerate(x):
            d = xx - self.beta
            if d == 0:
                out[k] = 0.0
                continue
            sg = np.sign(d)
            vmax = np.sqrt(abs(d))
            v = vmax * u
            wv = vmax * wq
            wpt = self.beta + sg * v * v
            f = self.Q(wpt) * np.sqrt(np.abs(wpt - self.alpha)) * v * 2 * v
            out[k] = sg * np.sum(wv * f)
        return out

    def P1_real(self, x):
        """P1 = -V + 2 Re g + ell1 for real x > beta (and 0 on the support)."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.zeros_like(x)
        right = x > self.beta
        out[right] = -self.phi(x[right])
        left = x < self.alpha
        if left.any():
            out[left] = (-self.V.poly(x[left]) + 2 * self.gfun(x[left]).real
                         + self.ell1)
        return out


def _moment_conditions(V: Polynomial, a, b, mass, n=256, radius_factor=1.5):
    """Trapezoid rule on a circle around [a, b] for the two moment
    conditions; R(z) = sqrt(z-a) sqrt(z-b) has its cut exactly on [a, b]."""
    c = 0.5 * (a + b)
    rad = radius_factor * 0.5 * (b - a) + 0.5
    th = 2 * np.pi * np.arange(n) / n
    z = c + rad * np.exp(1j * th)
    dz = 1j * rad * np.exp(1j * th) * (2 * np.pi / n)
    R = np.sqrt(z - a) * np.sqrt(z - b)
    dV = V.deriv()(z)
    m0 = np.sum(dV / R * dz) / (2j * np.pi)
    m1 = np.sum(z * dV / R * dz) / (2j * np.pi)
    return np.array([m0.real, m1.real - 2 * mass])


def _Q_poly(V: Polynomial, a, b, n=256):
    """Polynomial part of V'(z)/R(z): q_k = 1/(2 pi i) oint V'/(R z^{k+1})
    on a circle centred at 0 enclosing the cut."""
    deg = V.degree() - 2
    rad = 1.5 * max(abs(a), abs(b)) + 1.0
    th = 2 * np.pi * np.arange(n) / n
    z = rad * np.exp(1j * th)
    R = np.sqrt(z - a) * np.sqrt(z - b)
    f = V.deriv()(z) / R
    coef = [np.mean(f * z ** (-k)).real for k in range(deg + 1)]
    return Polynomial(coef)


def solve_one_cut(V: Potential, mass: float = 1.0, guess=None,
                  with_constants: bool = True) -> EquilibriumData:
    """Equilibrium measure of total ``mass`` on a single interval."""
    P = V.poly
    if guess is None:
        d = P.degree()
        lead = P.coef[-1]
        half = (2 * mass / (d * lead)) ** (1.0 / d) * 2.0
        center = 0.0
        guess = (center - half, center + half)
    x = np.array(guess, dtype=float)
    # damped Newton with a finite-difference Jacobian
    for _ in range(100):
        F = _moment_conditions(P, x[0], x[1], mass)
        if np.max(np.abs(F)) < 1e-14:
            break
        J = np.empty((2, 2))
        h = 1e-7 * max(1.0, np.abs(x).max())
        for k in range(2):
            xp = x.copy()
            xp[k] += h
            xm = x.copy()
            xm[k] -= h
            J[:, k] = (_moment_conditions(P, *xp, mass)
                       - _moment_conditions(P, *xm, mass)) / (2 * h)
        step = np.linalg.solve(J, -F)
        lam = 1.0
        while lam > 1e-4:
            xn = x + lam * step
            if xn[1] > xn[0] and np.max(np.abs(_moment_conditions(P, *xn, mass))) \
                    < np.max(np.abs(F)):
                break
            lam *= 0.5
        x = xn
    else:
        raise NotOneCutError("endpoint equations did not converge")
    a, b = float(x[0]), float(x[1])
    Q = _Q_poly(P, a, b)
    # regularity: Q > 0 on [a, b] (density positive, square-root edges)
    grid = np.linspace(a, b, 2001)
    if np.min(Q(grid)) <= 0:
        raise NotOneCutError("density is not positive on the cut")
    eq = EquilibriumData(V, a, b, Q, 0.0, mass)
    # ell1 from a point away from the cut: P1(z) = 0 inside fixes it
    z0 = b + 1.0
    ell1 = float(P(z0) - 2 * eq.gfun(z0).real - eq.phi(z0)[0])
    eq = EquilibriumData(V, a, b, Q, ell1, mass)
    # variational inequality outside the support
    xs = np.concatenate([np.linspace(a - 3, a - 1e-3, 200),
                         np.linspace(b + 1e-3, b + 3, 200)])
    ineq = P(xs) - 2 * eq.gfun(xs).real - ell1
    if np.min(ineq) < -1e-9:
        raise NotOneCutError("variational inequality fails off the support")
    if not with_constants:
        return eq
    c1 = scaling_constant_c1(eq)
    ac = 0.5 * P.deriv()(b)
    bd = beta_dot(eq)
    return EquilibriumData(V, a, b, Q, ell1, mass, c1, float(ac), bd)


def critical_a(eq: EquilibriumData) -> float:
    """a_c = V'(beta)/2."""
    return float(0.5 * eq.V.poly.deriv()(eq.beta))


def scaling_constant_c1(eq: EquilibriumData, h0: float = 1e-2):
    """c1 = lim (-(3/4) P1(z))^{2/3}/(z - beta), Richardson-extrapolated
    from z = beta + h with h = h0, h0/2, h0/4."""
    hs = np.array([h0, h0 / 2, h0 / 4])
    f = (0.75 * eq.phi(eq.beta + hs)) ** (2.0 / 3.0) / hs
    # f(h) = c1 + a h + b h^2: eliminate the linear and quadratic terms
    r1 = 2 * f[1] - f[0]
    r2 = 2 * f[2] - f[1]
    c1 = (4 * r2 - r1) / 3
    if not c1 > 0:
        raise NotOneCutError("edge constant c1 is not positive")
    return float(c1)


def edge_constant_c1(eq: EquilibriumData) -> float:
    """c1 from the density edge coefficient: rho ~ C sqrt(beta - x) with
    C = Q(beta) sqrt(beta - alpha) / (2 pi); P1 ~ -(4 pi C / 3)(z - beta)^{3/2}."""
    C = eq.Q(eq.beta) * np.sqrt(eq.beta - eq.alpha) / (2 * np.pi)
    return float((0.75 * (4 * np.pi * C / 3)) ** (2.0 / 3.0))


def beta_dot(eq: EquilibriumData, radius: Optional[float] = None, n: int = 512):
    """d beta / d kappa at kappa = 0 for the mass 1 - kappa/2 problem:

        beta_dot = -2 / ((beta - alpha) * 1/(2 pi i) oint V'(z) dz / ((z - beta) R(z)))
    """
    a, b = eq.alpha, eq.beta
    c = 0.5 * (a + b)
    rad = (0.75 * (b - a) + 0.5) if radius is None else radius
    th = 2 * np.pi * np.arange(n) / n
    z = c + rad * np.exp(1j * th)
    dz = 1j * rad * np.exp(1j * th) * (2 * np.pi / n)
    R = np.sqrt(z - a) * np.sqrt(z - b)
    I = np.sum(eq.V.poly.deriv()(z) / ((z - b) * R) * dz) / (2j * np.pi)
    return float(-2.0 / ((b - a) * I.real))


def drift(eq: EquilibriumData, r: int, n: int) -> float:
    """delta = c1 beta_dot kappa n^{2/3} with kappa = r/n."""
    return float(eq.c1 * eq.beta_dot * (r / n) * n ** (2.0 / 3.0))


def effective_potentials(eq: EquilibriumData, a: float):
    """Evaluators (P1, P2, P3) on the real axis right of alpha, with ell3
    fixed by P2(beta) = 0."""
    V = eq.V.poly
    ell1 = eq.ell1
    g_beta = 0.5 * (V(eq.beta) - ell1)
    ell3 = -V(eq.beta) + a * eq.beta + g_beta + ell1

    def g_re(x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        # Re g = (V + P1 - ell1)/2 wherever P1 is known
        out = 0.5 * (V(x) + eq.P1_real(x) - ell1)
        return out

    def P1(x):
        return eq.P1_real(x)

    def P2(x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return -V(x) + a * x + g_re(x) + ell1 - ell3

    def P3(x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return a * x - g_re(x) - ell3

    return P1, P2, P3


def zeta_map(eq: EquilibriumData, z, n: int):
    """zeta = (-(3n/4) P1(z))^{2/3}, continued to real z < beta as a
    negative real number."""
    ph = eq.phi(z)
    val = np.sign(ph) * (0.75 * n * np.abs(ph)) ** (2.0 / 3.0)
    return val if np.ndim(z) else float(val[0])


def unscale(eq: EquilibriumData, zeta, n: int, kappa: float = 0.0):
    """z = beta + (zeta + delta)/(c1 n^{2/3}), delta = c1 beta_dot kappa n^{2/3}."""
    s = eq.c1 * n ** (2.0 / 3.0)
    delta = eq.c1 * eq.beta_dot * kappa * n ** (2.0 / 3.0)
    return eq.beta + (np.asarray(zeta) + delta) / s


class Regime(str, enum.Enum):
    SUBCRITICAL = "subcritical"
    CRITICAL = "critical"
    NEAR_CRITICAL = "near_critical"
    SUPERCRITICAL = "supercritical"
    JUMPING_OUTLIER = "jumping_outlier"


@dataclass(frozen=True)
class RegimeReport:
    regime: Regime
    a_c: float
    tau: Optional[float] = None
    a_star: Optional[float] = None
    b_star: Optional[float] = None


def _scan_max(P, lo, hi, npts=4001):
    xs = np.linspace(lo, hi, npts)
    vals = P(xs)
    k = int(np.argmax(vals))
    if 0 < k < npts - 1:
        res = optimize.minimize_scalar(lambda x: -P(np.array([x]))[0],
                                       bounds=(xs[k - 1], xs[k + 1]),
                                       method="bounded",
                                       options={"xatol": 1e-12})
        return float(res.x), float(-res.fun), xs, vals
    return float(xs[k]), float(vals[k]), xs, vals


def classify_regime(eq: EquilibriumData, a: float, n: Optional[int] = None,
                    band: float = 1e-9, tau_window: float = 10.0) -> RegimeReport:
    """Classify a against the critical value using the sign conditions on
    P2 and P3 to the right of the support."""
    ac = critical_a(eq)
    V = eq.V.poly
    tau = None
    if n is not None:
        tau = float(n ** (1.0 / 3.0) * (a - ac) / eq.c1)
    if a <= 0:
        raise ValueError("source strength a must be positive")
    P1, P2, P3 = effective_potentials(eq, a)
    b = eq.beta
    # b*: stationary point of P3 right of beta when a < a_c (g'(b*) = a)
    if a < ac - band:
        hi = b + 1.0
        while eq.gprime(hi).real > a:
            hi = b + 2 * (hi - b)
        b_star = optimize.brentq(lambda x: eq.gprime(x).real - a, b + 1e-12, hi,
                                 xtol=1e-14)
    else:
        b_star = b
    # scan window: V(x) - a x exceeds its value at beta by 50
    X = max(b_star, b) + 1.0
    while V(X) - a * X < V(b) - a * b + 50:
        X += 1.0
    start = max(b, b_star) + 1e-3 * (b - eq.alpha)
    xmax, pmax, xs, vals = _scan_max(P2, start, X)
    if abs(a - ac) <= band:
        ref = 0.0                         # P2(beta) = 0
        if pmax < ref - band:
            regime = Regime.CRITICAL
        elif abs(pmax - ref) <= band:
            raise AmbiguousRegimeError("P2 maximum within tolerance of P2(beta)")
        else:
            regime = _super_or_jump(xs, vals, pmax, band)
    elif a > ac:
        # P2'(beta) = a - a_c > 0: the maximum sits right of beta
        regime = _super_or_jump(xs, vals, pmax, band)
    else:
        ref = float(P3(np.array([b_star]))[0])
        if pmax < ref - band:
            regime = Regime.SUBCRITICAL
        elif abs(pmax - ref) <= band:
            raise AmbiguousRegimeError("P2 maximum within tolerance of P3(b*)")
        else:
            regime = _super_or_jump(xs, vals, pmax, band)
    if n is not None and abs(tau) <= tau_window and regime in (
            Regime.CRITICAL, Regime.SUBCRITICAL, Regime.SUPERCRITICAL) \
            and abs(a - ac) > band:
        regime = Regime.NEAR_CRITICAL
    a_star = xmax if regime in (Regime.SUPERCRITICAL,) else None
    return RegimeReport(regime, ac, tau, a_star, b_star if a < ac else None)


def _super_or_jump(xs, vals, pmax, band):
    """Supercritical if the global maximum of P2 is attained once."""
    near = vals > pmax - max(band, 1e-9)
    # count separated clusters of near-maximal points
    idx = np.where(near)[0]
    clusters = 1 + int(np.sum(np.diff(idx) > 1)) if len(idx) else 1
    return Regime.SUPERCRITICAL if clusters == 1 else Regime.JUMPING_OUTLIER
