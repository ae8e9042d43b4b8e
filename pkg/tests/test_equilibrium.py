import functools

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import optimize

from rairy.equilibrium import (NotOneCutError, Potential, Regime, beta_dot,
                               classify_regime, critical_a, drift,
                               edge_constant_c1, effective_potentials,
                               scaling_constant_c1, solve_one_cut, unscale,
                               zeta_map)


@functools.lru_cache(None)
def eq_of(coeffs):
    return solve_one_cut(Potential(coeffs))


GAUSS = (0.0, 0.0, 0.5)
QUARTIC = (0.0, 0.0, 0.0, 0.0, 0.25)


def fekete(V, N=120):
    """Minimizer of (1/N) sum V(x_i) - (1/N^2) sum_{i != j} log|x_i - x_j|."""
    x0 = np.linspace(-1.5, 1.5, N)

    def energy(x):
        d = np.abs(x[:, None] - x[None, :]) + np.eye(N)
        return V(x).sum() / N - np.log(d).sum() / N ** 2

    def grad(x):
        diff = x[:, None] - x[None, :] + np.eye(N)
        inv = 1.0 / diff
        np.fill_diagonal(inv, 0.0)
        return V.deriv()(x) / N - 2 * inv.sum(axis=1) / N ** 2

    return np.sort(optimize.minimize(energy, x0, jac=grad, method="L-BFGS-B",
                                     options={"maxiter": 5000, "gtol": 1e-12}).x)


@pytest.mark.parametrize("coeffs", [(1.0,), (0.0, 1.0, 0.0, 1.0), (0.0, 0.0, -1.0)])
def test_potential_validation(coeffs):
    with pytest.raises(ValueError):
        Potential(coeffs)


def test_potential_parse():
    assert Potential.parse("0, 0.1; 0.5").coefficients == (0.0, 0.1, 0.5)


def test_gaussian_support_and_density():
    # with V - 2g - ell1 = 0 on the support and unit mass, x^2/2 gives the
    # semicircle on [-2, 2]
    eq = eq_of(GAUSS)
    assert abs(eq.alpha + 2) < 1e-12 and abs(eq.beta - 2) < 1e-12
    x = np.linspace(-1.9, 1.9, 7)
    assert np.allclose(eq.density(x), np.sqrt(4 - x ** 2) / (2 * np.pi), atol=1e-12)


def test_quartic_closed_form_endpoint():
    # moment condition (1/2 pi i) oint z V'(z)/R(z) dz = 3 b^4 / 8 = 2
    eq = eq_of(QUARTIC)
    assert abs(eq.beta - (16 / 3) ** 0.25) < 1e-12
    assert abs(eq.alpha + eq.beta) < 1e-12


def test_quartic_against_energy_minimization():
    eq = eq_of(QUARTIC)
    x = fekete(Potential(QUARTIC).poly)
    # second moment converges like 1/N, the extreme point like N^(-2/3)
    t = np.linspace(eq.alpha, eq.beta, 4001)
    m2 = np.trapezoid(t ** 2 * eq.density(t), t)
    assert abs(np.mean(x ** 2) - m2) < 1e-2
    assert 0 < eq.beta - x[-1] < 0.15


@pytest.mark.parametrize("coeffs", [GAUSS, QUARTIC, (0.0, 0.1, 0.5), (0.0, 0.0, 0.5, 0.0, 0.1)])
def test_unit_mass_and_positivity(coeffs):
    eq = eq_of(coeffs)
    th = np.linspace(0, np.pi, 4001)
    x = 0.5 * (eq.alpha + eq.beta) + 0.5 * (eq.beta - eq.alpha) * np.cos(th)
    mass = np.trapezoid(eq.density(x) * 0.5 * (eq.beta - eq.alpha) * np.sin(th), th)
    assert abs(mass - 1) < 1e-10
    assert eq.density(np.linspace(eq.alpha, eq.beta, 501)).min() >= 0


def test_linear_term_shifts_interval_left():
    g, s = eq_of(GAUSS), eq_of((0.0, 0.1, 0.5))
    # V = (x + 0.1)^2/2 + const: an exact translation by -0.1
    assert abs(s.alpha - (g.alpha - 0.1)) < 1e-12
    assert abs(s.beta - (g.beta - 0.1)) < 1e-12


def test_not_one_cut():
    with pytest.raises(NotOneCutError):
        solve_one_cut(Potential((0.0, 0.0, -3.0, 0.0, 0.25)))


def test_critical_a():
    assert abs(eq_of(GAUSS).a_c - 1.0) < 1e-12
    eq = eq_of(QUARTIC)
    assert abs(critical_a(eq) - eq.beta ** 3 / 2) < 1e-12
    assert abs(critical_a(eq) - eq.gprime(eq.beta).real) < 1e-8


@pytest.mark.parametrize("coeffs", [GAUSS, QUARTIC])
def test_effective_potential_identities(coeffs):
    eq = eq_of(coeffs)
    b = eq.beta
    P1, P2, P3 = effective_potentials(eq, 0.8 * eq.a_c)
    assert abs(P1(np.array([b]))[0]) < 1e-10
    # P1' = O((z - beta)^(1/2)), so the difference quotient is O(sqrt(h))
    for h in (1e-4, 1e-6):
        assert abs(P1(np.array([b + h]))[0]) / h < 10 * np.sqrt(h)
    assert abs(P2(np.array([b]))[0]) < 1e-10 and abs(P3(np.array([b]))[0]) < 1e-10
    x = np.random.default_rng(3).uniform(eq.alpha + 0.01, b + 4, 20)
    assert np.abs(P3(x) - (-P1(x) + P2(x))).max() < 1e-10


@pytest.mark.parametrize("coeffs", [GAUSS, QUARTIC, (0.0, 0.0, 0.5, 0.0, 0.1)])
def test_variational_conditions(coeffs):
    eq = eq_of(coeffs)
    V = eq.V.poly
    inside = np.linspace(eq.alpha + 1e-3, eq.beta - 1e-3, 50)
    assert np.abs(V(inside) - 2 * eq.gfun(inside).real - eq.ell1).max() < 1e-9
    out = np.concatenate([np.linspace(eq.alpha - 3, eq.alpha - 0.1, 30),
                          np.linspace(eq.beta + 0.1, eq.beta + 3, 30)])
    assert (V(out) - 2 * eq.gfun(out).real - eq.ell1).min() > 1e-6


def test_edge_exponent():
    eq = eq_of(QUARTIC)
    h = np.geomspace(1e-4, 1e-2, 9)
    slope = np.polyfit(np.log(h), np.log(-eq.P1_real(eq.beta + h)), 1)[0]
    assert abs(slope - 1.5) < 0.02


def test_g_is_log_at_infinity():
    eq = eq_of(QUARTIC)
    z = np.concatenate([np.geomspace(50, 200, 5), 80 * np.exp(1j * np.linspace(0.3, 3.0, 5))])
    assert np.max(np.abs(eq.gfun(z) - np.log(z)) * np.abs(z)) < 10


def test_c1_two_routes():
    for coeffs in (GAUSS, QUARTIC, (0.0, 0.0, 0.5, 0.0, 0.1)):
        eq = eq_of(coeffs)
        assert abs(scaling_constant_c1(eq) - edge_constant_c1(eq)) < 1e-6
        assert eq.c1 > 0
    assert abs(eq_of(GAUSS).c1 - 1.0) < 1e-8


def test_c1_raw_ratio_is_first_order():
    eq = eq_of(QUARTIC)
    f = lambda h: (0.75 * eq.phi(eq.beta + h)[0]) ** (2 / 3) / h
    e1, e2 = abs(f(2e-2) - eq.c1), abs(f(1e-2) - eq.c1)
    assert 1.8 < e1 / e2 < 2.2


@pytest.mark.parametrize("coeffs", [GAUSS, QUARTIC])
def test_beta_dot_finite_difference(coeffs):
    eq = eq_of(coeffs)
    k = 1e-3
    bp = solve_one_cut(eq.V, mass=1 - k / 2, with_constants=False).beta
    bm = solve_one_cut(eq.V, mass=1 + k / 2, with_constants=False).beta
    fd = (bp - bm) / (2 * k)
    assert abs(eq.beta_dot - fd) < 1e-6
    assert np.sign(eq.beta_dot) == np.sign(fd)


def test_beta_dot_contour_radius():
    eq = eq_of(QUARTIC)
    r0 = 0.75 * (eq.beta - eq.alpha) + 0.5
    assert abs(beta_dot(eq, r0) - beta_dot(eq, 2 * r0)) < 1e-8


def test_zeta_map():
    eq = eq_of(QUARTIC)
    assert zeta_map(eq, eq.beta, 100) == 0.0
    errs = []
    for n in (100, 1000, 10000):
        z = eq.beta + 1 / (eq.c1 * n ** (2 / 3))
        errs.append(abs(zeta_map(eq, z, n) - 1) * n ** (2 / 3))
    assert max(errs) < 1.0 and errs[-1] < 2 * errs[0]
    assert zeta_map(eq, eq.beta - 0.01, 100) < 0


@given(st.floats(-5, 5), st.sampled_from([100, 400, 2000]))
def test_unscale_inverts_zeta_map(zeta, n):
    eq = eq_of(GAUSS)
    back = zeta_map(eq, unscale(eq, zeta, n), n)
    assert abs(back - zeta) < 5 * (1 + zeta ** 2) * n ** (-2 / 3)


def test_unscale_drift():
    eq = eq_of(GAUSS)
    n, r = 400, 2
    shift = unscale(eq, 0.0, n, r / n) - unscale(eq, 0.0, n)
    assert abs(shift - eq.beta_dot * r / n) < 1e-14
    assert abs(drift(eq, r, n) - eq.c1 * eq.beta_dot * r * n ** (-1 / 3)) < 1e-14


def test_gaussian_regimes():
    eq = eq_of(GAUSS)
    assert classify_regime(eq, eq.a_c).regime is Regime.CRITICAL
    sup = classify_regime(eq, 2 * eq.a_c)
    assert sup.regime is Regime.SUPERCRITICAL and sup.a_star > eq.beta
    assert abs(sup.a_star - 2.5) < 1e-6   # a + 1/a for the Gaussian
    sub = classify_regime(eq, 0.5 * eq.a_c)
    assert sub.regime is Regime.SUBCRITICAL
    assert abs(sub.b_star - 2.5) < 1e-9   # a + 1/a with a = 1/2


def test_regime_monotone_in_a():
    eq = eq_of(GAUSS)
    order = {Regime.SUBCRITICAL: 0, Regime.CRITICAL: 1, Regime.SUPERCRITICAL: 2}
    seq = [order[classify_regime(eq, a).regime]
           for a in np.concatenate([np.linspace(0.3, 1.8, 16), [1.0]])]
    seq = sorted(zip(np.concatenate([np.linspace(0.3, 1.8, 16), [1.0]]), seq))
    assert all(b[1] >= a[1] for a, b in zip(seq, seq[1:]))


def test_near_critical_with_n():
    eq = eq_of(GAUSS)
    rep = classify_regime(eq, eq.a_c + 0.05, n=1000)
    assert rep.regime is Regime.NEAR_CRITICAL
    assert abs(rep.tau - 0.5) < 1e-10


def test_nonpositive_source_rejected():
    with pytest.raises(ValueError):
        classify_regime(eq_of(GAUSS), 0.0)
