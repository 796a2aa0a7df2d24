import numpy as np
import pytest
import sympy as sp
from scipy.special import ellipe

from robinspec.errors import (
    DegenerateMaximum,
    MultipleMaxima,
    NonRegularCurve,
    NotClosed,
    TurningNumberError,
)
from robinspec.geometry import (
    ParametricCurve,
    arc_length_reparam,
    check_assumption_A,
    curve_from_spec,
    localize_max,
)


def ellipse_jet_oracle(a, b, order):
    """Arc-length derivatives of curvature at the vertex (a, 0), by series inversion."""
    t, s = sp.symbols("t s")
    speed = sp.sqrt(a**2 * sp.sin(t) ** 2 + b**2 * sp.cos(t) ** 2)
    kappa = a * b / speed**3
    N = order + 2
    s_of_t = sp.series(sp.integrate(sp.series(speed, t, 0, N).removeO(), t), t, 0, N).removeO()
    # invert s(t) = b t + ... as t(s) by fixed-point iteration on the series
    t_of_s = s / b
    for _ in range(N):
        t_of_s = sp.expand(t_of_s - (s_of_t.subs(t, t_of_s) - s) / b)
        t_of_s = sp.series(t_of_s, s, 0, N).removeO()
    k_s = sp.series(sp.series(kappa, t, 0, N).removeO().subs(t, t_of_s), s, 0, N).removeO()
    return [float(sp.diff(k_s, s, m).subs(s, 0)) for m in range(order + 1)]


def test_circle_constant_curvature():
    p = arc_length_reparam(ParametricCurve.circle(2.0), 256)
    assert p.period == pytest.approx(4 * np.pi, rel=1e-13)
    assert np.allclose(p.samples, 0.5, atol=1e-13)
    rep = check_assumption_A(p)
    assert not rep.unique_max and rep.sites == []
    with pytest.raises(DegenerateMaximum):
        localize_max(p)


@pytest.mark.parametrize("a,b", [(2.0, 1.0), (3.0, 2.0)])
def test_ellipse_vertex_data(a, b):
    p = arc_length_reparam(ParametricCurve.ellipse(a, b), 1024)
    assert p.period == pytest.approx(4 * a * ellipe(1 - b**2 / a**2), rel=1e-12)
    assert p.turning() == pytest.approx(2 * np.pi, rel=1e-12)
    lm = localize_max(p, site=0)
    assert lm.kappa_max == pytest.approx(a / b**2, rel=1e-12)
    assert lm.k2 == pytest.approx(3 * a * (a**2 - b**2) / b**6, rel=1e-9)


def test_ellipse_jet_matches_series_inversion(ellipse_site):
    ref = ellipse_jet_oracle(2, 1, 6)
    got = ellipse_site.profile.jet(6)
    assert np.allclose(got[:5], ref[:5], rtol=1e-8, atol=1e-8)
    assert got[6] == pytest.approx(ref[6], rel=1e-6)


def test_ellipse_has_two_sites_and_half_windows(ellipse_site, ellipse_profile):
    rep = check_assumption_A(ellipse_profile)
    assert rep.n_sites == 2 and not rep.unique_max
    with pytest.raises(MultipleMaxima):
        localize_max(ellipse_profile)
    lo, hi = ellipse_site.window
    assert lo == pytest.approx(-ellipse_profile.period / 4, rel=1e-6)
    assert hi == pytest.approx(ellipse_profile.period / 4, rel=1e-6)


def test_egg_single_maximum(egg_site):
    p = egg_site.profile
    assert check_assumption_A(p).unique_max
    jet = p.jet(4)
    assert abs(jet[1]) < 1e-8
    assert jet[2] < 0 and abs(jet[3]) > 0.1  # no reflection symmetry at the maximum
    assert float(p.kappa(0.0)) == pytest.approx(egg_site.kappa_max, rel=1e-12)


def test_rigid_motion_and_orientation_invariance():
    c = ParametricCurve.egg()
    p = arc_length_reparam(c, 512)
    moved = ParametricCurve(c.x_cos + np.r_[3.0, np.zeros(c.degree)], c.x_sin,
                            c.y_cos - np.r_[1.0, np.zeros(c.degree)], c.y_sin)
    q = arc_length_reparam(moved, 512)
    assert np.allclose(p.samples, q.samples, atol=1e-12)
    r = arc_length_reparam(c.reversed(), 512)
    assert r.turning() == pytest.approx(2 * np.pi, rel=1e-10)
    assert np.max(r.samples) == pytest.approx(np.max(p.samples), rel=1e-9)


def test_shifted_profile_moves_origin(ellipse_profile):
    q = ellipse_profile.shifted(1.0)
    assert float(q.kappa(0.0)) == pytest.approx(float(ellipse_profile.kappa(1.0)), abs=1e-13)


def test_bad_curves():
    with pytest.raises(NotClosed):
        ParametricCurve.from_callables(lambda t: t, np.sin)
    with pytest.raises(TurningNumberError):
        arc_length_reparam(ParametricCurve([0.0, 0.0], [0.0, 1.0], [0.0], [0.0, 0.0, 0.5]), 256)
    astroid = ParametricCurve.from_callables(lambda t: np.cos(t) ** 3, lambda t: np.sin(t) ** 3)
    with pytest.raises(NonRegularCurve):
        arc_length_reparam(astroid, 256)


def test_curve_spec_round_trip(tmp_path):
    c = curve_from_spec({"shape": "ellipse", "a": 3, "b": 1})
    assert c.x_cos[1] == 3 and c.y_sin[1] == 1
    with pytest.raises(ValueError):
        curve_from_spec({"shape": "triangle"})
