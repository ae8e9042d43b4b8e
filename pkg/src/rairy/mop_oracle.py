"""Exact finite-n kernel of the Gaussian external-source ensemble by
biorthogonalization in extended precision.

With source A = diag(a, ..., a, 0, ..., 0) of rank r, the kernel is

    K_n(x, y) = sum_{i,j<n} x^i C_ij f_j(y),   C = G^{-1},  G_ji = int f_j(t) t^i dt,

where f_j runs over x^k e^{-n x^2/2} (k < n - r) and x^k e^{-n(x^2/2 - a x)}
(k < r).  The Gram entries are exact shifted-Gaussian moments.  The returned
kernel is in the symmetric gauge exp(-n(V(x) - V(y))/2) K_n(x, y), which
carries e^{-n V/2} on both variables once the weight in f_j is included.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import mpmath as mp
import numpy as np

from .equilibrium import EquilibriumData
from .ensemble import gaussian_equilibrium
from .kernel import KernelParams, r_airy_kernel

__all__ = ["PrecisionInsufficientError", "BiorthogonalSystem", "build_system",
           "mop_kernel_finite_n", "hermite_kernel", "ErrorRow",
           "verify_scaling_limit", "fit_slope", "error_table_csv"]

N_MAX = 40


class PrecisionInsufficientError(ArithmeticError):
    def __init__(self, msg, suggested_digits):
        super().__init__(msg)
        self.suggested_digits = suggested_digits


def _gauss_moments(N, n):
    """E[Z^m] for Z ~ N(0, 1/n), m < N."""
    out = [mp.mpf(0)] * N
    out[0] = mp.mpf(1)
    for m in range(2, N, 2):
        out[m] = out[m - 2] * (m - 1) / n
    return out


def _shifted_moments(N, n, a):
    """int t^m exp(-n(t^2/2 - a t)) dt, m < N, via the binomial expansion
    around the mean a."""
    base = _gauss_moments(N, n)
    norm = mp.sqrt(2 * mp.pi / n) * mp.exp(n * a * a / 2)
    out = []
    for m in range(N):
        s = mp.mpf(0)
        for k in range(0, m + 1, 2):
            s += mp.binomial(m, k) * a ** (m - k) * base[k]
        out.append(norm * s)
    return out


@dataclass
class BiorthogonalSystem:
    n: int
    r: int
    a: float
    precision: int = 60
    C: object = field(default=None, repr=False)
    work_dps: int = 0
    condition: float = 0.0

    def __post_init__(self):
        if not 1 <= self.n <= N_MAX:
            raise ValueError(f"n must lie in [1, {N_MAX}]")
        if not 0 <= self.r <= self.n:
            raise ValueError("need 0 <= r <= n")
        if self.r and self.a == 0:
            raise ValueError("a rank-r source needs a != 0 (the two weights "
                             "coincide otherwise)")

    # -- Gram matrix -------------------------------------------------------
    def _gram(self):
        n, r = self.n, self.r
        a = mp.mpf(self.a)
        N = 2 * n
        g0 = [mp.sqrt(2 * mp.pi / n) * m for m in _gauss_moments(N, n)]
        g1 = _shifted_moments(N, n, a) if r else None
        G = mp.matrix(n, n)
        for j in range(n):
            k, mom = (j, g0) if j < n - r else (j - (n - r), g1)
            for i in range(n):
                G[j, i] = mom[k + i]
        return G

    def build(self):
        with mp.workdps(self.precision):
            G = self._gram()
            try:
                cond = mp.norm(G, 1) * mp.norm(mp.inverse(G), 1)
            except ZeroDivisionError:
                # roughly 1.5 digits are lost per degree
                raise PrecisionInsufficientError(
                    "Gram matrix singular at working precision",
                    max(self.precision, int(1.5 * self.n)) + 25) from None
        digits = float(mp.log10(cond)) if cond > 0 else 0.0
        if not math.isfinite(digits) or digits > self.precision - 10:
            raise PrecisionInsufficientError(
                f"Gram condition ~1e{digits:.0f} exceeds working precision",
                int(math.ceil(digits)) + 25)
        self.condition = digits
        self.work_dps = self.precision + int(math.ceil(digits)) + 5
        with mp.workdps(self.work_dps):
            G = self._gram()
            self.C = mp.inverse(G)
            self._G = G
        return self

    def biorthogonality_residual(self) -> float:
        with mp.workdps(self.work_dps):
            R = self.C * self._G - mp.eye(self.n)
            return float(max(abs(v) for v in R))

    # -- evaluation --------------------------------------------------------
    def _f(self, y):
        n, r, a = self.n, self.r, mp.mpf(self.a)
        w0 = mp.exp(-n * y * y / 2)
        w1 = mp.exp(-n * (y * y / 2 - a * y))
        return [y ** j * w0 if j < n - r else y ** (j - (n - r)) * w1
                for j in range(n)]

    def kernel_standard(self, x, y):
        """sum x^i C_ij f_j(y), the weight carried entirely by y."""
        with mp.workdps(self.work_dps):
            x = mp.mpf(x)
            y = mp.mpf(y)
            f = self._f(y)
            px = [x ** i for i in range(self.n)]
            s = mp.mpf(0)
            for i in range(self.n):
                row = mp.mpf(0)
                for j in range(self.n):
                    row += self.C[i, j] * f[j]
                s += px[i] * row
            return s

    def kernel(self, x, y):
        """K_n(x, y) in the symmetric gauge e^{-nV(x)/2} ... e^{+nV(y)/2}."""
        with mp.workdps(self.work_dps):
            x = mp.mpf(x)
            y = mp.mpf(y)
            g = mp.exp(-self.n * (x * x - y * y) / 4)
            return self.kernel_standard(x, y) * g


def build_system(n: int, r: int, a: float, precision: int = 60) -> BiorthogonalSystem:
    return BiorthogonalSystem(n, r, a, precision).build()


def mop_kernel_finite_n(sys: BiorthogonalSystem, x: float, y: float) -> float:
    return float(sys.kernel(x, y))


def hermite_kernel(n: int, x, y, precision: int = 40):
    """GUE kernel with weight e^{-n x^2/2} from the orthonormal Hermite
    three-term recurrence; independent of the Gram construction."""
    with mp.workdps(precision):
        x = mp.mpf(x)
        y = mp.mpf(y)
        # Hermite functions carry e^{-u^2/2}; u = x sqrt(n/2) gives e^{-n x^2/4}
        s = mp.sqrt(mp.mpf(n) / 2)
        u, v = x * s, y * s

        def orthonormal(t):
            h = [mp.pi ** (-mp.mpf(1) / 4) * mp.exp(-t * t / 2)]
            h.append(mp.sqrt(2) * t * h[0])
            for k in range(1, n):
                h.append(mp.sqrt(mp.mpf(2) / (k + 1)) * t * h[k]
                         - mp.sqrt(mp.mpf(k) / (k + 1)) * h[k - 1])
            return h[:n]

        hx, hy = orthonormal(u), orthonormal(v)
        return s * mp.fsum(hx[k] * hy[k] for k in range(n))


@dataclass(frozen=True)
class ErrorRow:
    n: int
    zeta_x: float
    zeta_y: float
    K_finite: float
    K_limit: float
    rel_err: float


def verify_scaling_limit(n_list: Iterable[int], r: int, tau: float,
                         grid: Sequence, precision: int = 60,
                         eq: EquilibriumData | None = None,
                         kernel_tol: float = 1e-11) -> list:
    """Compare K_n/(c1 n^{2/3}) at z = beta + (zeta + delta)/(c1 n^{2/3}) with
    the limiting kernel, a = a_c + tau c1 n^{-1/3}.  The kernel returned by
    r_airy_kernel integrates e^{x t} against the (t + tau)^r factor, which
    pairs with the polynomial variable; K_n(x, y) is therefore compared with
    K(zeta_x, zeta_y) in that order.  The a_c(kappa) refinement is not used,
    so an O(r/n) offset is part of the measured error."""
    eq = gaussian_equilibrium() if eq is None else eq
    p = KernelParams(r=r, tau=tau, tol=kernel_tol)
    limits = {tuple(z): r_airy_kernel(z[0], z[1], p).value for z in grid}
    rows = []
    for n in n_list:
        a = eq.a_c + tau * eq.c1 * n ** (-1.0 / 3.0)
        sys = build_system(n, r, a if r else 0.0, precision)
        scale = eq.c1 * n ** (2.0 / 3.0)
        delta = eq.c1 * eq.beta_dot * (r / n) * n ** (2.0 / 3.0)
        for zx, zy in grid:
            x = eq.beta + (zx + delta) / scale
            y = eq.beta + (zy + delta) / scale
            kf = float(sys.kernel(x, y)) / scale
            kl = limits[(zx, zy)]
            rows.append(ErrorRow(n, zx, zy, kf, kl, abs(kf - kl) / abs(kl)))
    return rows


def fit_slope(rows: Sequence[ErrorRow]):
    """Least-squares slope of log(max rel_err over the grid) against log n."""
    ns = sorted({r.n for r in rows})
    errs = [max(r.rel_err for r in rows if r.n == n) for n in ns]
    slope = float(np.polyfit(np.log(ns), np.log(errs), 1)[0])
    return slope, ns, errs


def error_table_csv(rows: Sequence[ErrorRow]) -> str:
    lines = ["# schema=1", "n,zeta_x,zeta_y,K_finite,K_limit,rel_err"]
    lines += [f"{r.n},{r.zeta_x:.10g},{r.zeta_y:.10g},{r.K_finite:.15g},"
              f"{r.K_limit:.15g},{r.rel_err:.6e}" for r in rows]
    return "\n".join(lines) + "\n"
