"""Identity checks for the generalized Airy machinery and the kernel,
shared by the CLI ``verify`` command and the test-suite."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import genairy as ga
from .kernel import (KernelParams, adler_kernel, airy_kernel_classical,
                     concomitant, r_airy_kernel)

__all__ = ["CheckResult", "jump_points", "check_jumps", "check_concomitant",
           "wronskian_product", "check_wronskian_inverse", "check_eta0",
           "check_r0_reduction", "check_adler", "expansion_slope_table",
           "expected_slope", "check_expansion_slopes", "run_suite",
           "WRONSKIAN_TRIPLES"]


@dataclass(frozen=True)
class CheckResult:
    name: str
    measured: float
    threshold: float
    passed: bool
    note: str = ""

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        s = f"{tag} {self.name}: measured {self.measured:.3e} vs threshold {self.threshold:.1e}"
        return s + (f" ({self.note})" if self.note else "")


def _result(name, measured, threshold, note="", smaller=True):
    ok = bool(measured < threshold) if smaller else bool(measured > threshold)
    return CheckResult(name, float(measured), float(threshold), ok, note)


# -- jumps ------------------------------------------------------------------

def jump_points(radii=(0.6, 2.5)):
    """(gamma, point) pairs: each ray Gamma_1..Gamma_4 at the given radii."""
    out = []
    for g in (1, 2, 3, 4):
        d = ga._GAMMAS[g][0]
        out += [(g, rad * d) for rad in radii]
    return out


def check_jumps(rs=(1, 2, 3, 4), taus=(-1.0, 0.0, 1.0), radii=(0.6, 2.5),
                threshold=1e-7) -> CheckResult:
    worst = 0.0
    for r, tau in itertools.product(rs, taus):
        for g, z in jump_points(radii):
            worst = max(worst, ga.check_jump(g, z, r, tau))
    npts = len(rs) * len(taus) * 4 * len(radii)
    return _result("jump conditions", worst, threshold, f"{npts} points")


# -- concomitant ------------------------------------------------------------

def check_concomitant(r=2, tau=0.3, zetas=(0.5, 2.0), threshold=1e-7,
                      drift_threshold=1e-8):
    B = {z: np.array([[concomitant(i, j, r, tau, z) for j in (1, 2, 3)]
                      for i in (1, 2, 3)]) for z in zetas}
    dev = max(np.abs(B[z] - np.eye(3)).max() for z in zetas)
    drift = max(np.abs(B[zetas[0]] - B[z]).max() for z in zetas[1:])
    return (_result("concomitant = identity", dev, threshold, f"r={r}, tau={tau}"),
            _result("concomitant zeta-independence", drift, drift_threshold,
                    f"zeta in {tuple(zetas)}"))


# -- Wronskian inverse ------------------------------------------------------

WRONSKIAN_TRIPLES = ((1, 0.0, 0.5), (2, 0.3, 1.0), (3, -0.5, 2.0))


def wronskian_product(r, tau, zeta):
    """chihat_{r-1}(zeta) F(zeta) chi_{r-1}(zeta)."""
    chi = ga.wronskian_chi(r - 1, zeta, tau)
    chat = ga.dual_wronskian(r - 1, zeta, tau)
    return chat @ ga.F_matrix(zeta, tau) @ chi


def check_wronskian_inverse(triples=WRONSKIAN_TRIPLES, sign=-1, threshold=1e-7):
    """||chihat F chi - sign*I||_inf over the triples.  With the contour
    orientations used here the product is -I, so sign=-1 is the identity
    that holds; sign=+1 is the literal statement."""
    dev = max(np.abs(wronskian_product(*t) - sign * np.eye(3)).sum(axis=1).max()
              for t in triples)
    return _result(f"chihat F chi = {'+' if sign > 0 else '-'}I", dev, threshold)


# -- eta_0 ------------------------------------------------------------------

def check_eta0(taus=(-1.0, -0.5, 0.0, 0.5, 1.0), threshold=1e-7,
               unit_threshold=1e-8):
    unit = abs(ga.eta(0, 0.0) - 1.0)
    diff = max(abs(ga.eta(0, t) - ga.eta0_rotational(t)) for t in taus)
    return (_result("eta_0(0) = 1", unit, unit_threshold),
            _result("eta_0 two representations", diff, threshold))


# -- kernel identities ------------------------------------------------------

def check_r0_reduction(grid=np.linspace(-4, 4, 9), threshold=1e-7):
    p = KernelParams(r=0, tau=0.0, tol=1e-10)
    dev = max(abs(r_airy_kernel(x, y, p).value - airy_kernel_classical(x, y))
              for x in grid for y in grid)
    return _result("r=0 reduction to the Airy kernel", dev, threshold,
                   f"{len(grid)}x{len(grid)} grid")


def check_adler(rs=(1, 2), taus=(-0.5, 0.5), grid=np.linspace(-2, 2, 5),
                threshold=1e-6, transpose=True):
    """Brownian-motion form against the double-contour kernel.  The change
    of variables maps the Brownian form at (x, y) to K(y, x); with
    transpose=False the arguments are compared in the same order."""
    dev = 0.0
    for r, tau in itertools.product(rs, taus):
        p = KernelParams(r=r, tau=tau, tol=1e-10)
        for x, y in itertools.product(grid, grid):
            k = r_airy_kernel(y, x, p) if transpose else r_airy_kernel(x, y, p)
            dev = max(dev, abs(adler_kernel(x, y, p).value - k.value))
    label = "adler(x,y) = K(y,x)" if transpose else "adler(x,y) = K(x,y)"
    return _result(label, dev, threshold)


# -- large-zeta expansions ---------------------------------------------------

def expected_slope(i, j, n_terms):
    """Order (relative to the leading term) of the first omitted term."""
    if j == 3:
        return -float(n_terms)
    if i == 3:
        return -0.5 * n_terms
    return {1: -1.5, 2: -2.0, 3: -2.5}[n_terms]


def expansion_slope_table(r=2, tau=0.5, zetas=np.geomspace(15, 60, 7),
                          entries=None, max_terms=3):
    """Rows (i, j, n_terms, fitted slope, expected slope) of log relative
    truncation error against log zeta."""
    if entries is None:
        entries = [(i, j) for i in (1, 2, 3) for j in (1, 2, 3)]
    etas = [ga.eta(q, tau) for q in range(max_terms)]
    exact = {z: ga.airy_matrix(z, r, tau).entries for z in zetas}
    rows = []
    for (i, j), m in itertools.product(entries, range(1, max_terms + 1)):
        err = [abs(ga.asymptotic_entry(i, j, r, tau, z, m, etas)
                   - exact[z][i - 1, j - 1]) / abs(exact[z][i - 1, j - 1])
               for z in zetas]
        slope = float(np.polyfit(np.log(zetas), np.log(err), 1)[0])
        rows.append((i, j, m, slope, expected_slope(i, j, m)))
    return rows


def check_expansion_slopes(slack=0.3, **kw):
    rows = expansion_slope_table(**kw)
    excess = max(s - e for *_, s, e in rows)
    return _result("expansion slopes (max excess over omitted order)",
                   excess, slack, f"{len(rows)} entry/truncation pairs"), rows


# -- suites -----------------------------------------------------------------

def run_suite(suite: str = "fast"):
    """List of CheckResult.  'fast' thins the grids, 'full' uses the
    acceptance grids."""
    if suite not in ("fast", "full"):
        raise ValueError("suite must be 'fast' or 'full'")
    full = suite == "full"
    out = [check_jumps(rs=(1, 2, 3, 4) if full else (1, 3),
                       taus=(-1.0, 0.0, 1.0) if full else (-1.0, 1.0))]
    out += list(check_concomitant())
    out.append(check_wronskian_inverse())
    out += list(check_eta0())
    out.append(check_r0_reduction(np.linspace(-4, 4, 9 if full else 5)))
    out.append(check_adler(grid=np.linspace(-2, 2, 5 if full else 3)))
    out.append(check_expansion_slopes(
        zetas=np.geomspace(15, 60, 7 if full else 4))[0])
    return out
