import numpy as np
import pytest
import scipy.sparse as sp

from robinspec.errors import CollarTooDeep, ResolutionTooLow, TruncationSuspect
from robinspec.geometry import ParametricCurve, arc_length_reparam
from robinspec.solvers import (
    DiscreteOperator,
    assemble_collar,
    boundary_operator_eigs,
    collar_2d_eigs,
    default_collar_depth,
    eigen_solve,
    eigenfunction_decay_report,
    shooting_disc,
)


@pytest.fixture(scope="module")
def unit_circle():
    return arc_length_reparam(ParametricCurve.circle(1.0), 256)


def dirichlet_fd(n, length=np.pi):
    dx = length / (n + 1)
    A = sp.diags([-np.ones(n - 1), 2 * np.ones(n), -np.ones(n - 1)], [-1, 0, 1]) / dx**2
    return DiscreteOperator(A)


def test_dirichlet_laplacian_ground_state():
    res = eigen_solve(dirichlet_fd(2000), 3, 0.0)
    assert np.allclose(res.eigenvalues, [1, 4, 9], rtol=1e-5)
    assert np.all(res.residuals < 1e-8)
    assert res.iterations > 0


def test_permutation_invariance():
    op = dirichlet_fd(400)
    perm = np.random.default_rng(3).permutation(400)
    P = sp.identity(400, format="csr")[perm]
    shuffled = DiscreteOperator(P @ op.A @ P.T)
    a = eigen_solve(op, 4, 0.0).eigenvalues
    b = eigen_solve(shuffled, 4, 0.0).eigenvalues
    assert np.allclose(a, b, rtol=1e-12)


def test_generalized_problem_with_mass():
    op = dirichlet_fd(300)
    B = np.full(300, 2.0)
    res = eigen_solve(DiscreteOperator(op.A, B), 2, 0.0)
    plain = eigen_solve(op, 2, 0.0).eigenvalues
    assert np.allclose(res.eigenvalues, plain / 2, rtol=1e-12)


def test_rejects_nonsymmetric():
    with pytest.raises(ValueError):
        DiscreteOperator(sp.csr_matrix(np.array([[1.0, 2.0], [0.0, 1.0]])))


def test_circle_boundary_operator_is_exact(unit_circle):
    g = -10.0
    res = boundary_operator_eigs(unit_circle, g, k=3, n_modes=32)
    assert res.eigenvalues[0] == pytest.approx(-g**2 + g, abs=1e-10)
    # Fourier modes m = +-1 are degenerate
    assert np.allclose(res.eigenvalues[1:], -g**2 + g + 1, atol=1e-10)


def test_boundary_resolution_guard(ellipse_site):
    with pytest.raises(ResolutionTooLow):
        boundary_operator_eigs(ellipse_site.profile, -400.0, 3, n_modes=8)


def test_windowed_boundary_matches_periodic_ground_state(egg_site):
    P = egg_site.profile.period
    a = boundary_operator_eigs(egg_site.profile, -100.0, 2, 256).eigenvalues
    b = boundary_operator_eigs(egg_site.profile, -100.0, 2, 256, window=(-P / 3, P / 3)
                               ).eigenvalues
    # the periodic second level sits in the secondary well the window excludes
    assert a[0] == pytest.approx(b[0], rel=1e-10)
    assert b[1] > a[1]


def test_disc_oracles_agree():
    a = shooting_disc(1.0, 0.01)
    b = shooting_disc(1.0, 0.01, method="ode")
    assert a == pytest.approx(b, rel=1e-8)
    assert a == pytest.approx(-0.011052808919302373, rel=1e-12)
    # leading terms -h - h^(3/2) / R
    assert shooting_disc(1.0, 1e-6) == pytest.approx(-1e-6 - 1e-9, rel=1e-3)


def test_collar_converges_to_disc(unit_circle):
    ref = shooting_disc(1.0, 0.01)
    errs = []
    for nt in (64, 128, 256):
        r = collar_2d_eigs(unit_circle, 0.01, 1, 16, nt, T=0.8)
        errs.append(abs(r.eigenvalues[0] / ref - 1))
    assert errs[2] < errs[1] < errs[0]
    assert np.log2(errs[1] / errs[2]) == pytest.approx(2.0, abs=0.2)


def test_deeper_dirichlet_collar_lowers_eigenvalue(unit_circle):
    vals = [collar_2d_eigs(unit_circle, 0.04, 1, 16, 128, T=T, check_truncation=False
                           ).eigenvalues[0] for T in (0.3, 0.5, 0.8)]
    assert vals[0] > vals[1] > vals[2]


def test_collar_guards(unit_circle):
    with pytest.raises(CollarTooDeep):
        assemble_collar(unit_circle, 0.01, 16, 32, T=1.2)
    with pytest.raises(TruncationSuspect):
        collar_2d_eigs(unit_circle, 0.04, 1, 16, 64, T=0.25)
    assert default_collar_depth(0.01, 2.0) == pytest.approx(0.45)
    assert default_collar_depth(1e-4, 2.0) == pytest.approx(0.08)


def test_decay_report_on_egg(egg_site):
    h = 1 / 400
    P = egg_site.profile.period
    W = (-P / 4, P / 4)
    op = assemble_collar(egg_site.profile, h, 256, 64, window=W)
    res = collar_2d_eigs(egg_site.profile, h, 1, 256, 64, window=W, check_truncation=False)
    rep = eigenfunction_decay_report(res, op)
    assert rep.alpha_t > 0 and rep.alpha_s > 0
    assert rep.tail_mass_t < 1e-3
    assert rep.r2_quadratic > rep.r2_linear
