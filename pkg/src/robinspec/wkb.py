"""WKB construction of the ground state near the curvature maximum.

With eta = h^(1/4), t = h^(1/2) tau and the ansatz exp(-theta(s)/eta) a(s, tau),
the conjugated operator h^-1 exp(theta/eta) L_h exp(-theta/eta) expands as
sum_l eta^l Q_l with Q_0 = -d_tau^2, Q_1 = 0 and, writing e_j = (j+1)(j+2)/2,

    Q_2m   = tau^(m-1) k^m d_tau - m tau^(m-1) k^(m-1) theta'^2
             - (m-1) tau^(m-2) k^(m-2) d_s^2 - e_(m-3) tau^(m-2) k^(m-3) k' d_s
    Q_2m+1 = m tau^(m-1) k^(m-1) (2 theta' d_s + theta'') + e_(m-2) tau^(m-1) k^(m-2) k' theta'

(k = curvature; terms with negative exponents are absent). The coefficients
are those of (1 - x)^-1, (1 - x)^-2 and (1 - x)^-3 in x = eta^2 tau k.

Functions of s live on a Chebyshev expansion over a window around the
maximum; tau dependence is polynomial times exp(-tau).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from math import comb, factorial

import numpy as np
from numpy.polynomial import Chebyshev
from scipy.optimize import minimize_scalar

from .errors import EikonalNotSolvable, OrderUnavailable
from .geometry import CurvatureProfile
from .spectral_basis import _p0_resolvent_matrix

SQRT2 = np.sqrt(2.0)
MAX_ORDER = 8


class DegenerateWell(UserWarning):
    pass


def inverse_power_coefficients(p, j):
    """Coefficient of x^j in (1 - x)^-p."""
    return comb(p + j - 1, j)


def curvature_drop(profile: CurvatureProfile, s):
    """kappa(0) - kappa(s) without cancellation near s = 0."""
    c, omega = profile._coeffs
    s = np.asarray(s, dtype=float)
    base = c * np.exp(-1j * omega * profile.offset)
    half = np.multiply.outer(s, omega) / 2
    # 1 - e^{i w s} = -2i sin(ws/2) e^{i w s/2}
    term = -2j * np.sin(half) * np.exp(1j * half)
    return (term @ base).real


def _fit(f, w, deg):
    return Chebyshev.interpolate(f, deg, domain=[-w, w])


@dataclass
class WkbSolution:
    theta: Chebyshev
    mu: list
    xi: list
    order: int
    window: tuple
    amplitudes: list = field(default_factory=list, repr=False)  # a_l as {tau power: Chebyshev}
    transport_residuals: list = field(default_factory=list)
    eikonal_residual: float = 0.0

    def theta_prime(self):
        return self.theta.deriv()


def _window(profile, half_width):
    if half_width is None:
        half_width = min(1.0, profile.period / 8)
    s = np.linspace(-half_width, half_width, 401)
    drop = curvature_drop(profile, s)
    scale = np.max(np.abs(drop))
    if np.any((s != 0) & (drop <= 1e-10 * scale)):
        raise EikonalNotSolvable("curvature reaches its value at s = 0 inside the window")
    # polish interior dips: another maximum between grid points
    dips = np.nonzero((drop[1:-1] < drop[:-2]) & (drop[1:-1] < drop[2:]))[0] + 1
    for i in dips:
        if s[i - 1] <= 0 <= s[i + 1]:
            continue
        r = minimize_scalar(lambda x: float(curvature_drop(profile, x)),
                            bounds=(s[i - 1], s[i + 1]), method="bounded",
                            options={"xatol": 1e-12})
        if r.fun <= 1e-10 * scale:
            raise EikonalNotSolvable(f"another curvature maximum near s = {r.x:.4g}")
    return half_width


def solve_eikonal(profile: CurvatureProfile, half_width=None, deg=95):
    """theta with theta(0) = 0 and theta'(s) = sign(s) sqrt(kappa(0) - kappa(s))."""
    if np.ptp(profile.samples) < 1e-12:
        warnings.warn("constant curvature: the well is flat, theta = 0", DegenerateWell,
                      stacklevel=2)
        w = half_width or profile.period / 2
        return Chebyshev([0.0], domain=[-w, w])
    w = _window(profile, half_width)

    def dtheta(s):
        s = np.asarray(s, dtype=float)
        phi = curvature_drop(profile, s) / s**2
        return s * np.sqrt(phi)

    return _fit(dtheta, w, deg).integ(lbnd=0)


def solve_transport_0(profile: CurvatureProfile, theta: Chebyshev, deg=95):
    """xi0(s) = exp(-int_0^s (theta'' - theta''(0)) / (2 theta'))."""
    d1, d2 = theta.deriv(), theta.deriv(2)
    mu3 = float(d2(0.0))
    w = theta.domain[1]
    integrand = _fit(lambda s: (d2(s) - mu3) / (2 * d1(s)), w, deg)
    log_xi = integrand.integ(lbnd=0)
    return _fit(lambda s: np.exp(-log_xi(s)), w, deg)


class _Ops:
    """Assembles Q_l acting on tau-polynomial states with Chebyshev s-coefficients."""

    def __init__(self, profile, theta, deg):
        self.deg = deg
        w = theta.domain[1]
        self.w = w
        self.k = _fit(lambda s: profile.kappa(s), w, deg)
        self.dk = _fit(lambda s: profile.kappa(s, 1), w, deg)
        self.t1 = theta.deriv()
        self.t2 = theta.deriv(2)
        self.t1sq = self.mul(self.t1, self.t1)

    def mul(self, a, b):
        return (a * b).truncate(self.deg + 1)

    def kpow(self, m):
        out = Chebyshev([1.0], domain=self.k.domain)
        for _ in range(m):
            out = self.mul(out, self.k)
        return out

    def terms(self, order):
        """[(coef(s), tau power, d_tau order, d_s order)] for Q_l."""
        if order == 0:
            return [(Chebyshev([-1.0], domain=self.k.domain), 0, 2, 0)]
        if order == 1:
            return []
        out = []
        if order % 2 == 0:
            m = order // 2
            out.append((self.kpow(m), m - 1, 1, 0))
            out.append((self.mul(self.kpow(m - 1), self.t1sq) * (-m), m - 1, 0, 0))
            if m >= 2:
                out.append((self.kpow(m - 2) * (-(m - 1)), m - 2, 0, 2))
            if m >= 3:
                e = inverse_power_coefficients(3, m - 3)
                out.append((self.mul(self.kpow(m - 3), self.dk) * (-e), m - 2, 0, 1))
        else:
            m = (order - 1) // 2
            base = self.kpow(m - 1) * m
            out.append((self.mul(base, self.t1) * 2, m - 1, 0, 1))
            out.append((self.mul(base, self.t2), m - 1, 0, 0))
            if m >= 2:
                e = inverse_power_coefficients(3, m - 2)
                c = self.mul(self.mul(self.kpow(m - 2), self.dk), self.t1) * e
                out.append((c, m - 1, 0, 0))
        return out

    def apply(self, order, state):
        """Q_l applied to {p: A_p(s)} meaning sum_p A_p(s) tau^p exp(-tau)."""
        out = {}
        for coef, tpow, dt, ds in self.terms(order):
            for p, A in state.items():
                B = A.deriv(ds) if ds else A
                # d_tau^dt of tau^p e^{-tau}
                parts = {p: B}
                for _ in range(dt):
                    nxt = {}
                    for q, C in parts.items():
                        nxt[q] = nxt.get(q, 0) - C
                        if q > 0:
                            nxt[q - 1] = nxt.get(q - 1, 0) + C * q
                    parts = nxt
                for q, C in parts.items():
                    key = q + tpow
                    val = self.mul(coef, C)
                    out[key] = out[key] + val if key in out else val
        return out


def _project(state):
    """<a, u0> in tau, as a Chebyshev series in s."""
    out = None
    for p, A in state.items():
        term = A * (SQRT2 * factorial(p) / 2 ** (p + 1))
        out = term if out is None else out + term
    return out


def _axpy(state, other, c=1.0):
    out = dict(state)
    for p, A in other.items():
        out[p] = out[p] + A * c if p in out else A * c
    return out


def wkb_iterate(profile: CurvatureProfile, theta: Chebyshev | None = None, L: int = 4,
                deg=95) -> WkbSolution:
    """Energy coefficients mu_0..mu_L and amplitudes xi_0..xi_(L-3)."""
    if L > MAX_ORDER:
        raise OrderUnavailable(f"orders above {MAX_ORDER} are not assembled")
    if theta is None:
        theta = solve_eikonal(profile, deg=deg)
    w = theta.domain[1]
    kap0 = float(profile.kappa(0.0))
    xi0 = solve_transport_0(profile, theta, deg)
    ops = _Ops(profile, theta, deg)
    mu3 = float(ops.t2(0.0))
    mu = [-1.0, 0.0, -kap0, mu3]
    xi = [xi0]

    grid = np.cos(np.pi * (np.arange(200) + 0.5) / 200) * w * 0.98
    eik = float(np.max(np.abs(ops.t1(grid) ** 2 - curvature_drop(profile, grid))))
    tres = [float(np.max(np.abs(2 * ops.t1(grid) * xi0.deriv()(grid)
                                + (ops.t2(grid) - mu3) * xi0(grid))))]

    zero = Chebyshev([0.0], domain=[-w, w])
    amps = [{0: xi0 * SQRT2}, {0: zero}, {0: zero}, {0: zero}]

    def residual_at(order, skip_mu_l=False):
        total = {}
        for k in range(1, order + 1):
            a = amps[order - k]
            total = _axpy(total, ops.apply(k, a))
            if k < len(mu) and not (skip_mu_l and k == order):
                total = _axpy(total, a, -mu[k])
        return total

    for order in range(4, L + 1):
        F = _project(residual_at(order, skip_mu_l=True))
        m_l = float(F(0.0)) / float(xi0(0.0))
        mu.append(m_l)
        def slope(s, m_l=m_l, F=F):
            return (m_l * xi0(s) - F(s)) / (2 * ops.t1(s) * xi0(s))

        rhs = _fit(slope, w, deg)
        xi_new = ops.mul(xi0, rhs.integ(lbnd=0))
        xi.append(xi_new)
        amps[order - 3] = _axpy(amps[order - 3], {0: xi_new * SQRT2})
        R = residual_at(order)
        proj = _project(R)
        tres.append(float(np.max(np.abs(proj(grid)))))
        # g_l = -(P0 + 1)^-1 (R - Pi R)
        R = _axpy(R, {0: proj * (-SQRT2)})
        P = max(R) + 1
        T = _p0_resolvent_matrix(P)
        g = {}
        for i, A in R.items():
            for q, c in enumerate(T[i]):
                if c != 0:
                    g[q] = g[q] - A * float(c) if q in g else A * (-float(c))
        amps.append(g)
    return WkbSolution(theta, mu, xi, L, (-w, w), amps, tres, eik)
