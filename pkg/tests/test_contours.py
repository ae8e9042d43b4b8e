import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rairy.contours import (Arc, Contour, ContourIntersectionError, Label, Line,
                            QuadratureError, integrate, integrate_double,
                            make_airy_contour, make_dual_contour)

W = np.exp(2j * np.pi / 3)
# Maclaurin oracle: Ai(0) = 3^{-2/3} / Gamma(2/3)
AI0 = 3 ** (-2 / 3) / math.gamma(2 / 3)


def polyline(c, m=400):
    pts = []
    for seg in c.segments:
        u = np.linspace(0, 1, m if isinstance(seg, Arc) else 2)
        p = seg.point(u)
        pts.extend(p if not pts else p[1:])
    return np.array(pts)


def signed_crossings(a, b):
    """Signed intersection number of two polylines (b crossing a from right
    to left counts +1)."""
    total = 0
    for p0, p1 in zip(a[:-1], a[1:]):
        for q0, q1 in zip(b[:-1], b[1:]):
            d1, d2, e = p1 - p0, q1 - q0, q0 - p0
            den = (d1.conjugate() * d2).imag
            if den == 0:
                continue
            u = (e.conjugate() * d2).imag / den
            v = (e.conjugate() * d1).imag / den
            if 0 <= u < 1 and 0 <= v < 1:
                total += int(np.sign(den))
    return total


def test_c1_endpoints():
    c = make_airy_contour(1, 0.0, 10.0)
    assert abs(c.start - 10 * np.conj(W)) < 1e-12
    assert abs(c.end - 10 * W) < 1e-12
    assert c.label is Label.C1


def test_c4_is_rightward_real_ray_from_minus_tau():
    c = make_airy_contour(4, 2.0, 10.0)
    assert c.start == -2.0
    # the truncation radius is measured from the crossing point -tau
    assert abs(c.end - 8.0) < 1e-12


def test_c3_ray():
    c = make_airy_contour(3, 0.0, 10.0)
    assert c.start == 0
    assert abs(c.end - 10 * W) < 1e-12


@pytest.mark.parametrize("m", [0, 7, -1])
def test_invalid_contour_id(m):
    with pytest.raises(ValueError):
        make_airy_contour(m, 0.0, 5.0)


@pytest.mark.parametrize("bad", [dict(tau=np.inf), dict(truncation_radius=-1.0)])
def test_invalid_contour_parameters(bad):
    kw = dict(tau=0.0, truncation_radius=5.0) | bad
    with pytest.raises(ValueError):
        make_airy_contour(1, **kw)


def test_invalid_dual_id():
    with pytest.raises(ValueError):
        make_dual_contour(4, 0.0)


def test_segments_must_join():
    with pytest.raises(ValueError):
        Contour((Line(0, 1), Line(2, 3)))


def test_chat3_is_ccw_circle_around_minus_tau():
    c = make_dual_contour(3, 1.0, radius=0.5)
    assert c.closed
    r = integrate(lambda t: 1.0 / (t + 1.0), c, 1e-13)
    assert abs(r.value - 2j * np.pi) < 1e-12


def test_chat2_runs_downward_right_of_minus_tau():
    c = make_dual_contour(2, 0.0, 10.0)
    assert c.start.imag > 0 and c.end.imag < 0
    assert np.all(polyline(c).real > 0)
    assert abs(np.angle(c.start - 1.0) - np.pi / 3) < 1e-12


def test_intersection_numbers_are_identity_pattern():
    tau = 0.3
    C = [polyline(make_airy_contour(j, tau, 10.0)) for j in (1, 2, 3)]
    D = [polyline(make_dual_contour(i, tau, 10.0)) for i in (1, 2, 3)]
    M = np.array([[signed_crossings(C[j], D[i]) for j in range(3)]
                  for i in range(3)])
    assert np.array_equal(np.abs(M), np.eye(3, dtype=int))
    assert len(set(np.diag(M))) == 1


def test_decay_certificates():
    for m in range(1, 7):
        assert make_airy_contour(m, 0.4).decay_certificate(-1)
    for i in (1, 2):
        assert make_dual_contour(i, 0.4).decay_certificate(+1)


def test_constant_over_closed_contour_vanishes():
    r = integrate(lambda t: np.ones_like(t), make_dual_contour(3, 0.0), 1e-13)
    assert abs(r.value) < 1e-13


def test_airy_at_zero_against_series_oracle():
    r = integrate(lambda t: np.exp(-t ** 3 / 3), make_airy_contour(1, 0.0), 1e-10)
    assert abs(r.value - 2j * np.pi * AI0) < 1e-10
    assert r.error_estimate <= 1e-10


def test_quadrature_failure_carries_best_estimate():
    c = make_airy_contour(4, 0.0, 30.0)
    with pytest.raises(QuadratureError) as exc:
        integrate(lambda t: np.exp(40j * t * t), c, 1e-14, max_panels=8)
    assert exc.value.best is not None


def test_double_product_of_single_integrals():
    c = make_airy_contour(1, 0.0)
    r = integrate_double(lambda s, t: np.exp(-t ** 3 / 3 - s ** 3 / 3), c, c, 1e-12)
    assert abs(r.value - (2j * np.pi * AI0) ** 2) < 1e-10


def test_double_constant_over_circles():
    c = make_dual_contour(3, 0.0)
    r = integrate_double(lambda s, t: np.ones(np.broadcast(s, t).shape), c, c, 1e-12)
    assert abs(r.value) < 1e-12


def test_double_factorizes_with_truncation_independence():
    # pole factor on the circle, decaying factor on the real ray
    tau = 0.5
    circ = make_dual_contour(3, tau, radius=0.4)
    vals = []
    for R in (8.0, 16.0):
        ray = make_airy_contour(4, tau, R)
        f = lambda s, t: np.exp(-t ** 3 / 3) / (s + tau)
        vals.append(integrate_double(f, circ, ray, 1e-12).value)
    single = integrate(lambda t: np.exp(-t ** 3 / 3), make_airy_contour(4, tau, 8.0),
                       1e-13).value
    assert abs(vals[0] - vals[1]) < 1e-11
    assert abs(vals[0] - 2j * np.pi * single) < 1e-11


def test_singular_integrand_on_crossing_contours_rejected():
    c1 = make_airy_contour(1, 0.0, 5.0)
    c2 = make_airy_contour(4, 0.0, 5.0)
    with pytest.raises(ContourIntersectionError):
        integrate_double(lambda s, t: 1.0 / (t - s), c1, c2, 1e-8, singular=True)


@given(st.floats(-1.5, 1.5), st.floats(-2, 2), st.integers(0, 3))
def test_orientation_antisymmetry(tau, z, k):
    c = make_airy_contour(1, tau)
    f = lambda t: t ** k * np.exp(z * t - t ** 3 / 3)
    a = integrate(f, c, 1e-12).value
    b = integrate(f, c.reversed(), 1e-12).value
    assert abs(a + b) < 1e-11 * max(1.0, abs(a))


@given(st.floats(-1.5, 1.5), st.floats(-2, 2))
def test_deformation_invariance_under_truncation(tau, z):
    f = lambda t: (t + tau) ** 2 * np.exp(z * t - t ** 3 / 3)
    a = integrate(f, make_airy_contour(2, tau, 9.0), 1e-12).value
    b = integrate(f, make_airy_contour(2, tau, 18.0), 1e-12).value
    assert abs(a - b) < 10 * 1e-12 * max(1.0, abs(a))


@given(st.floats(0, 2 * np.pi), st.floats(0.0, 0.9), st.floats(1.2, 3.0))
def test_closed_contour_residue(theta, rin, rout):
    c = make_dual_contour(3, 0.0, radius=1.0)
    inside = rin * np.exp(1j * theta)
    outside = rout * np.exp(1j * theta)
    assert abs(integrate(lambda t: 1 / (t - inside), c, 1e-12).value - 2j * np.pi) < 1e-9
    assert abs(integrate(lambda t: 1 / (t - outside), c, 1e-12).value) < 1e-9
