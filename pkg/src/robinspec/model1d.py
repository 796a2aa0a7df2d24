"""One-dimensional model operators across the boundary layer.

* half-line: -d^2/dtau^2 on (0, inf) with u'(0) = -u(0)
* interval:  the same on (0, L) with u(L) = 0 (L plays the role of h^-rho)
* weighted:  the interval operator with weight 1 - beta h^(1/2) tau, defined by
  the form  int |u'|^2 (1 - beta h^(1/2) tau) - |u(0)|^2  on L^2((1 - beta h^(1/2) tau) dtau)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.optimize import brentq

from .errors import NoRoot, WeightNotPositive


@dataclass(frozen=True)
class Model1DConfig:
    L: float
    h: float | None = None
    rho: float | None = None
    beta: float = 0.0
    grid_n: int = 2000
    strict: bool = False  # enforce |beta| h^(1/2) L < 1/3

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError("L must be positive")
        if self.strict and self.beta != 0.0 and not self.standing_bound_ok():
            raise ValueError(f"|beta| h^(1/2) L = {abs(self.delta) * self.L:.3g} >= 1/3")

    @classmethod
    def from_h(cls, h, rho, beta=0.0, grid_n=2000, strict=False):
        if not 0 < rho < 1:
            raise ValueError("rho must lie in (0, 1)")
        return cls(h ** (-rho), h, rho, beta, grid_n, strict)

    @property
    def delta(self):
        """Weight slope beta h^(1/2)."""
        if self.beta == 0.0:
            return 0.0
        if self.h is None:
            raise ValueError("weighted operator needs h")
        return self.beta * np.sqrt(self.h)

    def standing_bound_ok(self):
        return abs(self.delta) * self.L < 1 / 3


@dataclass(frozen=True)
class ModelEigenpair:
    lam: float
    w: float
    A: float
    L: float
    residual: float = 0.0
    second_nonnegative: bool = True
    d: float = 0.0  # 1 - w, kept separately for full relative accuracy

    def u(self, tau):
        tau = np.asarray(tau, dtype=float)
        return self.A * (np.exp(-self.w * tau) - np.exp(-2 * self.w * self.L + self.w * tau))


def halfline_spectrum():
    u0 = lambda tau: np.sqrt(2.0) * np.exp(-np.asarray(tau, dtype=float))  # noqa: E731
    return {"discrete": [-1.0], "essential_bottom": 0.0, "ground_state": u0}


def _f(v, L):
    return v - 1 + (v + 1) * np.exp(-2 * v * L)


def solve_transcendental(L: float) -> ModelEigenpair:
    """Ground state of the interval operator: lambda = -w^2 with v - 1 + (v+1) e^{-2vL} = 0."""
    if L < 1:
        raise ValueError("L must be >= 1")
    lo, hi = 0.5, 1.0
    if not _f(lo, L) < 0 < _f(hi, L):
        grid = np.linspace(1e-6, 1.0, 2001)
        vals = _f(grid, L)
        idx = np.nonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))[0]
        if not idx.size:
            raise NoRoot(f"no sign change of the eigenvalue equation for L = {L}")
        lo, hi = grid[idx[-1]], grid[idx[-1] + 1]
    w = brentq(_f, lo, hi, args=(L,), xtol=1e-16, rtol=1e-15)
    # Newton in d = 1 - w keeps relative accuracy when w is within 1e-10 of 1
    d = 1.0 - w
    for _ in range(5):
        e = np.exp(-2 * (1 - d) * L)
        g = -d + (2 - d) * e
        dg = -1 - e + (2 - d) * 2 * L * e
        step = g / dg
        d -= step
        if abs(step) <= 1e-17 * max(d, 1e-300):
            break
    w = 1.0 - d
    lam = -(1 - d) ** 2
    e2 = np.exp(-2 * w * L)
    norm2 = (1 - e2**2) / (2 * w) - 2 * L * e2
    return ModelEigenpair(lam, w, 1 / np.sqrt(norm2), L, residual=abs(_f(w, L)),
                          second_nonnegative=True, d=d)


def lambda1_plus_one(L):
    """lambda_1 + 1 computed without cancellation."""
    d = solve_transcendental(L).d
    return d * (2 - d)


def _form_tridiagonal(L, n, delta):
    """Symmetric tridiagonal M^-1/2 K M^-1/2 for the weighted form on n intervals.

    Vertices tau_i = i L / n, i = 0..n-1 (Dirichlet at i = n). Stiffness uses
    midpoint weights; the mass is lumped. With delta = 0 this is the
    ghost-point Robin stencil after a diagonal similarity.
    """
    dx = L / n
    tau = dx * np.arange(n + 1)
    mid = 1 - delta * (tau[:-1] + dx / 2)
    wt = 1 - delta * tau[:-1]
    mass = wt * dx
    # half cell at tau = 0, with the O(dx) correction that makes the Robin
    # closure third order (uses u''' = lambda u(0) from the equation)
    mass[0] *= 0.5 * (1 - dx / 3)
    diag = np.empty(n)
    diag[0] = mid[0] / dx - 1.0
    diag[1:] = (mid[:-1] + mid[1:]) / dx
    off = -mid[:-1] / dx
    s = 1 / np.sqrt(mass)
    return diag * s * s, off * s[:-1] * s[1:]


def fd_eigs_H0h(cfg: Model1DConfig, k: int = 1):
    """Lowest k eigenvalues of the finite-difference interval operator."""
    if cfg.grid_n < 100:
        raise ValueError("grid_n must be >= 100")
    d, e = _form_tridiagonal(cfg.L, cfg.grid_n, 0.0)
    return eigh_tridiagonal(d, e, select="i", select_range=(0, k - 1), eigvals_only=True)


def fd_eigs_Hbetah(cfg: Model1DConfig, k: int = 1):
    """Lowest k eigenvalues of the weighted operator (generalized form problem)."""
    delta = cfg.delta
    if 1 - delta * cfg.L <= 0:
        raise WeightNotPositive(f"1 - beta h^(1/2) L = {1 - delta * cfg.L:.3g}")
    d, e = _form_tridiagonal(cfg.L, cfg.grid_n, delta)
    return eigh_tridiagonal(d, e, select="i", select_range=(0, k - 1), eigvals_only=True)
