"""Numerical eigenvalue solvers used as ground truth.

* boundary_operator_eigs: -d^2/ds^2 - gamma^2 + gamma kappa(s) along the boundary
* collar_2d_eigs: the semiclassical Robin form in boundary coordinates (s, t)
  on a collar 0 < t < T, with Dirichlet data at t = T
* shooting_disc: radial ground state of the disc via modified Bessel functions
* eigen_solve: shift-invert Lanczos (ARPACK) on a symmetric (generalized) problem
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.integrate import solve_ivp
from scipy.optimize import brentq
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh, splu
from scipy.special import ive

from .errors import (
    BracketFailure,
    CollarTooDeep,
    NotConverged,
    ResolutionTooLow,
    TruncationSuspect,
)
from .geometry import CurvatureProfile
from .spectral_basis import hermite_functions


@dataclass
class DiscreteOperator:
    A: sp.csr_matrix
    B: np.ndarray | None = None  # diagonal of the mass matrix
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.A = sp.csr_matrix(self.A)
        asym = abs(self.A - self.A.T)
        if asym.nnz and asym.max() > 1e-12 * abs(self.A).max():
            raise ValueError("operator matrix is not symmetric")
        if self.B is not None and not np.all(np.asarray(self.B) > 0):
            raise ValueError("mass matrix must be positive definite")

    @property
    def dimension(self):
        return self.A.shape[0]


@dataclass
class EigResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None = None
    residuals: np.ndarray | None = None
    iterations: int | None = None
    meta: dict = field(default_factory=dict)


def eigen_solve(op: DiscreteOperator, k: int, target_shift: float, tol: float = 1e-12,
                seed: int = 0, v0=None, maxiter=None) -> EigResult:
    """k eigenpairs nearest target_shift, returned in ascending order."""
    A = op.A
    if op.B is not None:
        s = 1 / np.sqrt(op.B)
        A = sp.diags(s) @ A @ sp.diags(s)
        A = sp.csr_matrix((A + A.T) / 2)
    n = A.shape[0]
    if v0 is None:
        v0 = np.random.default_rng(seed).standard_normal(n)
    elif op.B is not None:
        v0 = np.asarray(v0) * np.sqrt(op.B)
    lu = splu(sp.csc_matrix(A - target_shift * sp.identity(n)))
    count = [0]

    def solve(x):
        count[0] += 1
        return lu.solve(x)

    OPinv = LinearOperator((n, n), matvec=solve, dtype=float)
    try:
        vals, vecs = eigsh(A, k=k, sigma=target_shift, which="LM", OPinv=OPinv, v0=v0,
                           tol=tol, maxiter=maxiter)
    except ArpackNoConvergence as exc:
        partial = EigResult(np.asarray(exc.eigenvalues), exc.eigenvectors, None, count[0])
        raise NotConverged(str(exc), partial) from exc
    order = np.argsort(vals)
    vals, vecs = vals[order], vecs[:, order]
    res = np.linalg.norm(A @ vecs - vecs * vals, axis=0) / np.linalg.norm(vecs, axis=0)
    if op.B is not None:
        vecs = vecs * s[:, None]
    return EigResult(vals, vecs, res, count[0])


# effective boundary operator

def _boundary_matrix(profile, gamma, n_modes, window):
    if window is None:
        P = profile.period
        c, omega = profile._coeffs
        m = np.arange(-n_modes, n_modes + 1)
        # complex Fourier coefficients of kappa relative to the profile origin
        kh = np.zeros(4 * n_modes + 1, dtype=complex)
        K = min(len(c), 2 * n_modes + 1)
        phase = np.exp(-1j * omega[:K] * profile.offset)
        half = c[:K] * phase
        half[1:] /= 2
        kh[2 * n_modes:2 * n_modes + K] = half
        kh[2 * n_modes - np.arange(1, K)] = np.conj(half[1:])
        diff = m[:, None] - m[None, :]
        H = gamma * kh[diff + 2 * n_modes]
        H[np.diag_indices_from(H)] += (2 * np.pi * m / P) ** 2 - gamma**2
        return H
    lo, hi = window
    W = hi - lo
    x, wq = np.polynomial.legendre.leggauss(2 * n_modes + 64)
    s = lo + (x + 1) * W / 2
    wq = wq * W / 2
    m = np.arange(1, n_modes + 1)
    phi = np.sqrt(2 / W) * np.sin(np.outer(m, s - lo) * np.pi / W)
    V = (phi * (wq * profile.kappa(s))) @ phi.T
    H = gamma * V
    H[np.diag_indices_from(H)] += (m * np.pi / W) ** 2 - gamma**2
    return H


def boundary_operator_eigs(profile: CurvatureProfile, gamma: float, k: int = 3,
                           n_modes: int = 256, window=None, check_resolution=True,
                           rtol: float = 1e-6) -> EigResult:
    """Lowest k eigenvalues of -d^2/ds^2 - gamma^2 + gamma kappa(s).

    Periodic Fourier Galerkin on the whole boundary, or a Dirichlet sine basis
    on ``window`` (an interval around the profile origin).
    """
    if not gamma < 0:
        raise ValueError("gamma must be negative")
    vals, vecs = np.linalg.eigh(_boundary_matrix(profile, gamma, n_modes, window))
    out = EigResult(vals[:k], vecs[:, :k], np.zeros(k), None,
                    {"n_modes": n_modes, "window": window, "gamma": gamma})
    if check_resolution:
        coarse = np.linalg.eigvalsh(_boundary_matrix(profile, gamma, n_modes // 2, window))[:k]
        shift = np.max(np.abs(coarse - vals[:k]))
        out.meta["resolution_shift"] = float(shift)
        if shift > rtol * max(1.0, np.max(np.abs(vals[:k]))):
            raise ResolutionTooLow(f"eigenvalues moved by {shift:.3g} between "
                                   f"{n_modes // 2} and {n_modes} modes")
    return out


# 2D collar

def default_collar_depth(h, kappa_max, mult=8.0):
    """mult * sqrt(h), capped at 0.9 / kappa_max so boundary coordinates stay valid."""
    return min(mult * np.sqrt(h), 0.9 / kappa_max)


def assemble_collar(profile: CurvatureProfile, h: float, n_s: int, n_t: int, T=None,
                    window=None) -> DiscreteOperator:
    """Form discretization of h^2 int (a^-1 |u_s|^2 + a |u_t|^2) - h^(3/2) int |u(s,0)|^2
    against int |u|^2 a, a = 1 - t kappa(s)."""
    kmax = float(np.max(profile.samples))
    if T is None:
        T = default_collar_depth(h, kmax)
    if 1 - T * kmax <= 0:
        raise CollarTooDeep(f"1 - T kappa_max = {1 - T * kmax:.3g}")
    periodic = window is None
    if periodic:
        L = profile.period
        ds = L / n_s
        s = ds * np.arange(n_s)
        ns = n_s
    else:
        lo, hi = window
        ds = (hi - lo) / n_s
        s = lo + ds * np.arange(1, n_s)
        ns = n_s - 1
    dt = T / n_t
    t = dt * np.arange(n_t)
    nt = n_t
    idx = np.arange(ns * nt).reshape(ns, nt)

    k_node = profile.kappa(s)
    s_mid = s + ds / 2
    k_mid = profile.kappa(s_mid)
    wt = np.full(nt, dt)
    wt[0] = dt / 2

    rows, cols, vals = [], [], []

    def edge(i1, i2, c):
        rows.extend([i1, i2, i1, i2])
        cols.extend([i1, i2, i2, i1])
        vals.extend([c, c, -c, -c])

    # t-differences, including the edge to the Dirichlet value at t = T
    a_tmid = 1 - np.outer(k_node, t + dt / 2)
    c_t = (h**2 * ds / dt) * a_tmid
    edge(idx[:, :-1].ravel(), idx[:, 1:].ravel(), c_t[:, :-1].ravel())
    rows.append(idx[:, -1])
    cols.append(idx[:, -1])
    vals.append(c_t[:, -1])

    # s-differences
    a_smid = 1 / (1 - np.outer(k_mid, t))
    c_s = (h**2 / ds) * a_smid * wt[None, :]
    if periodic:
        edge(idx.ravel(), np.roll(idx, -1, axis=0).ravel(), c_s.ravel())
    else:
        edge(idx[:-1].ravel(), idx[1:].ravel(), c_s[:-1].ravel())
        c_lo = (h**2 / ds) * wt / (1 - np.outer(profile.kappa(np.array([s[0] - ds / 2])), t))[0]
        rows.append(idx[0])
        cols.append(idx[0])
        vals.append(c_lo)
        rows.append(idx[-1])
        cols.append(idx[-1])
        vals.append(c_s[-1])

    rows.append(idx[:, 0])
    cols.append(idx[:, 0])
    vals.append(np.full(ns, -h**1.5 * ds))

    def flat(x):
        return np.concatenate([np.atleast_1d(np.asarray(v)).ravel() for v in x])

    A = sp.coo_matrix((flat(vals), (flat(rows).astype(int), flat(cols).astype(int))),
                      shape=(ns * nt, ns * nt)).tocsr()
    A = (A + A.T) / 2
    mass = ((1 - np.outer(k_node, t)) * ds * wt[None, :]).ravel()
    meta = {"s_grid": s, "t_grid": t, "T": T, "ds": ds, "dt": dt, "shape": (ns, nt),
            "periodic": periodic, "h": h, "window": window}
    return DiscreteOperator(A, mass, meta)


def _trial_vector(op, profile, h, n=1):
    s, t = op.meta["s_grid"], op.meta["t_grid"]
    sig = s / h**0.125
    k2 = max(-float(profile.kappa(0.0, 2)), 1e-8)
    f = hermite_functions(n - 1, np.sqrt(k2 / 2), sig)[n - 1]
    return np.outer(f, np.exp(-t / np.sqrt(h))).ravel()


def collar_2d_eigs(profile: CurvatureProfile, h: float, k: int = 2, n_s: int = 256,
                   n_t: int = 96, T=None, window=None, target=None, seed: int = 0,
                   tol: float = 1e-12, check_truncation: bool = True,
                   extrapolate: bool = False) -> EigResult:
    """Lowest k eigenvalues of the collar discretization (profile origin at the well).

    With extrapolate=True the grid is also solved at half resolution and the
    eigenvalues are Richardson-extrapolated assuming second-order error.
    """
    op = assemble_collar(profile, h, n_s, n_t, T, window)
    if target is None:
        target = -h - float(profile.kappa(0.0)) * h**1.5
    v0 = _trial_vector(op, profile, h)
    v0 = v0 + 1e-3 * np.random.default_rng(seed).standard_normal(v0.size) * np.max(np.abs(v0))
    res = eigen_solve(op, k, target, tol=tol, seed=seed, v0=v0)
    res.meta.update(op.meta)
    res.meta["target"] = target
    frac = _top_collar_fraction(res, op)
    res.meta["top_collar_mass"] = frac
    if check_truncation and frac > 1e-6:
        raise TruncationSuspect(f"mass fraction {frac:.3g} in the top 10% of the collar")
    if extrapolate:
        coarse = collar_2d_eigs(profile, h, k, n_s // 2, n_t // 2, op.meta["T"], window,
                                target, seed, tol, False, False)
        res.meta["unextrapolated"] = res.eigenvalues.copy()
        res.meta["coarse"] = coarse.eigenvalues
        res.eigenvalues = res.eigenvalues + (res.eigenvalues - coarse.eigenvalues) / 3
    return res


def _mass_density(res, op, which=0):
    ns, nt = op.meta["shape"]
    u = res.eigenvectors[:, which]
    return (u**2 * op.B).reshape(ns, nt)


def _top_collar_fraction(res, op):
    d = _mass_density(res, op)
    t = op.meta["t_grid"]
    return float(d[:, t > 0.9 * op.meta["T"]].sum() / d.sum())


@dataclass
class DecayReport:
    alpha_t: float
    alpha_s: float
    tail_mass_t: float  # fraction at t > 4 sqrt(h)
    top_collar_mass: float
    r2_quadratic: float
    r2_linear: float


def _r2(x, y, deg):
    coef = np.polyfit(x, y, deg)
    resid = y - np.polyval(coef, x)
    return 1 - np.sum(resid**2) / np.sum((y - y.mean()) ** 2)


def eigenfunction_decay_report(result: EigResult, op: DiscreteOperator,
                               which: int = 0, core: float = 1e-3) -> DecayReport:
    """Exponential-decay fits of the t- and s-marginals of an eigenfunction's mass.

    The s-fits use the core where the marginal exceeds ``core`` times its peak;
    further out the decay follows the eikonal phase, which is no longer quadratic.
    """
    meta = op.meta
    h = meta["h"]
    d = _mass_density(result, op, which)
    s, t = meta["s_grid"], meta["t_grid"]
    total = d.sum()
    mt = d.sum(axis=0) / total
    ms = d.sum(axis=1) / total
    tau = t / np.sqrt(h)
    sel = (tau > 1.0) & (tau < 0.6 * meta["T"] / np.sqrt(h)) & (mt > 1e-300)
    slope_t = np.polyfit(tau[sel], np.log(mt[sel]), 1)[0]
    keep = ms > core * ms.max()
    x = s[keep] ** 2 / h**0.25
    slope_s = np.polyfit(x, np.log(ms[keep]), 1)[0]
    r2q = _r2(s[keep], np.log(ms[keep]), 2)
    r2l = _r2(np.abs(s[keep]), np.log(ms[keep]), 1)
    return DecayReport(-slope_t / 2, -slope_s / 2, float(mt[tau > 4].sum()),
                       float(mt[t > 0.9 * meta["T"]].sum()), r2q, r2l)


# disc oracle

def _disc_mismatch(k, R, h):
    x = k * R
    return np.sqrt(h) * k * ive(1, x) / ive(0, x) - 1.0


def shooting_disc(R: float, h: float, method: str = "bessel", tol: float = 1e-10) -> float:
    """Ground state mu_1 of the disc: -h^2 (u'' + u'/r) = mu u, h^(1/2) u'(R) = u(R)."""
    if not (R > 0 and h > 0):
        raise ValueError("R and h must be positive")
    if method == "bessel":
        lo, hi = 1e-12, 2.0 / np.sqrt(h) + 10.0 / R
        if not _disc_mismatch(lo, R, h) < 0 < _disc_mismatch(hi, R, h):
            raise BracketFailure("Robin mismatch does not change sign")
        k = brentq(_disc_mismatch, lo, hi, args=(R, h), xtol=1e-15, rtol=1e-15)
        if abs(_disc_mismatch(k, R, h)) > tol:
            raise BracketFailure("Robin residual above tolerance")
        return -(h * k) ** 2
    if method == "ode":
        return _shoot_ode(R, h, tol)
    raise ValueError(f"unknown method {method!r}")


def _shoot_ode(R, h, tol):
    def mismatch(k):
        # v = u e^{-kr} keeps the growing Bessel solution bounded
        r0 = 1e-6 * R
        v0 = np.exp(-k * r0) * (1 + (k * r0) ** 2 / 4)
        dv0 = -k * v0 + np.exp(-k * r0) * k**2 * r0 / 2
        sol = solve_ivp(lambda r, y: [y[1], -2 * k * y[1] - (y[1] + k * y[0]) / r],
                        (r0, R), [v0, dv0], rtol=1e-12, atol=1e-14, method="DOP853")
        v, dv = sol.y[0, -1], sol.y[1, -1]
        du_over_u = dv / v + k
        return np.sqrt(h) * du_over_u - 1.0

    lo, hi = 1e-6, 2.0 / np.sqrt(h) + 10.0 / R
    if not mismatch(lo) < 0 < mismatch(hi):
        raise BracketFailure("Robin mismatch does not change sign")
    k = brentq(mismatch, lo, hi, xtol=1e-14, rtol=1e-14)
    if abs(mismatch(k)) > max(tol, 1e-9):
        raise BracketFailure("Robin residual above tolerance")
    return -(h * k) ** 2
