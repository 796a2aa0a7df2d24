"""Closed planar curves, arc-length curvature profiles and curvature-maximum search.

Curves are stored as truncated Fourier series in a parameter t of period 2*pi.
A :class:`CurvatureProfile` holds curvature sampled at equispaced arc length and
evaluates it (and its derivatives) through the trigonometric interpolant of
the samples.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import (
    DegenerateMaximum,
    MultipleMaxima,
    NonRegularCurve,
    NotClosed,
    TurningNumberError,
)

TWO_PI = 2.0 * np.pi


def _trim(c, rel=1e-15):
    c = np.asarray(c, dtype=float)
    scale = max(np.max(np.abs(c)), 1.0)
    nz = np.nonzero(np.abs(c) > rel * scale)[0]
    return c[: (nz[-1] + 1 if nz.size else 1)]


@dataclass(frozen=True)
class ParametricCurve:
    """x(t) = sum_k x_cos[k] cos(kt) + x_sin[k] sin(kt), likewise y; t in [0, 2pi)."""

    x_cos: np.ndarray
    x_sin: np.ndarray
    y_cos: np.ndarray
    y_sin: np.ndarray
    name: str = "fourier"

    def __post_init__(self):
        arrs = [np.atleast_1d(np.asarray(a, dtype=float)) for a in
                (self.x_cos, self.x_sin, self.y_cos, self.y_sin)]
        K = max(len(a) for a in arrs)
        padded = []
        for a in arrs:
            b = np.zeros(K)
            b[: len(a)] = a
            padded.append(b)
        padded[1][0] = 0.0
        padded[3][0] = 0.0
        if not all(np.all(np.isfinite(a)) for a in padded):
            raise NotClosed("non-finite Fourier coefficients")
        for name, a in zip(("x_cos", "x_sin", "y_cos", "y_sin"), padded):
            a.flags.writeable = False
            object.__setattr__(self, name, a)

    @property
    def degree(self):
        return len(self.x_cos) - 1

    def evaluate(self, t, deriv=0):
        """Return (x, y) or their `deriv`-th t-derivatives at t."""
        t = np.asarray(t, dtype=float)
        k = np.arange(self.degree + 1, dtype=float)
        ang = np.multiply.outer(t, k) + deriv * np.pi / 2
        amp = k**deriv
        c, s = np.cos(ang) * amp, np.sin(ang) * amp
        x = c @ self.x_cos + s @ self.x_sin
        y = c @ self.y_cos + s @ self.y_sin
        return x, y

    def reversed(self):
        return ParametricCurve(self.x_cos, -self.x_sin, self.y_cos, -self.y_sin, self.name)

    # constructors

    @classmethod
    def circle(cls, R=1.0):
        return cls([0.0, R], [0.0, 0.0], [0.0, 0.0], [0.0, R], name=f"circle({R:g})")

    @classmethod
    def ellipse(cls, a=2.0, b=1.0):
        return cls([0.0, a], [0.0, 0.0], [0.0, 0.0], [0.0, b], name=f"ellipse({a:g},{b:g})")

    @classmethod
    def egg(cls, a=2.0, b=1.0, eps=0.1, phase=0.2):
        """Ellipse with radial factor 1 + eps*cos(t - phase)**3.

        The phase offset breaks both reflection symmetries, so the curvature
        maximum is unique and kappa'''(0) is nonzero.
        """
        t = np.linspace(0.0, TWO_PI, 64, endpoint=False)
        rho = 1.0 + eps * np.cos(t - phase) ** 3
        c = cls.from_samples(a * np.cos(t) * rho, b * np.sin(t) * rho)
        return cls(c.x_cos, c.x_sin, c.y_cos, c.y_sin, name=f"egg({a:g},{b:g},{eps:g})")

    @classmethod
    def fourier(cls, x_cos, x_sin, y_cos, y_sin):
        return cls(x_cos, x_sin, y_cos, y_sin)

    @classmethod
    def from_samples(cls, x, y, name="sampled"):
        """Fourier coefficients from equispaced samples over one period."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        n = len(x)
        kmax = (n - 1) // 2
        X = np.fft.rfft(x) / n
        Y = np.fft.rfft(y) / n
        xc = np.r_[X[0].real, 2 * X[1:kmax + 1].real]
        xs = np.r_[0.0, -2 * X[1:kmax + 1].imag]
        yc = np.r_[Y[0].real, 2 * Y[1:kmax + 1].real]
        ys = np.r_[0.0, -2 * Y[1:kmax + 1].imag]
        K = max(len(_trim(a)) for a in (xc, xs, yc, ys))
        return cls(xc[:K], xs[:K], yc[:K], ys[:K], name=name)

    @classmethod
    def from_callables(cls, fx, fy, period=TWO_PI, n=512, name="callable"):
        """Sample smooth periodic callables; checks closure first."""
        for f in (fx, fy):
            if abs(float(f(0.0)) - float(f(period))) > 1e-12:
                raise NotClosed(f"endpoint mismatch {float(f(0.0))} vs {float(f(period))}")
        t = np.linspace(0.0, period, n, endpoint=False)
        return cls.from_samples(np.array([fx(v) for v in t]), np.array([fy(v) for v in t]), name)


def curve_from_spec(spec):
    """Build a curve from a JSON-style dict, e.g. {"shape": "ellipse", "a": 2, "b": 1}."""
    spec = dict(spec)
    shape = spec.pop("shape")
    if shape in ("circle", "disc"):
        return ParametricCurve.circle(spec.get("R", 1.0))
    if shape == "ellipse":
        return ParametricCurve.ellipse(spec.get("a", 2.0), spec.get("b", 1.0))
    if shape == "egg":
        return ParametricCurve.egg(spec.get("a", 2.0), spec.get("b", 1.0),
                                   spec.get("eps", 0.1), spec.get("phase", 0.2))
    if shape == "fourier":
        return ParametricCurve.fourier(spec["x_cos"], spec.get("x_sin", [0.0]),
                                       spec.get("y_cos", [0.0]), spec["y_sin"])
    raise ValueError(f"unknown shape {shape!r}")


def load_curve(path):
    with open(path) as fh:
        return curve_from_spec(json.load(fh))


@dataclass(frozen=True)
class CurvatureProfile:
    """Curvature at arc length s_j = offset + j*period/N, j = 0..N-1.

    Evaluation uses the trigonometric interpolant; Fourier coefficients
    below a relative noise floor are dropped before differentiation.
    """

    period: float
    samples: np.ndarray
    offset: float = 0.0
    name: str = ""
    noise_floor: float = field(default=1e-14, repr=False)

    def __post_init__(self):
        s = np.array(self.samples, dtype=float)
        s.flags.writeable = False
        object.__setattr__(self, "samples", s)

    @property
    def n(self):
        return len(self.samples)

    @property
    def s_grid(self):
        return self.offset + self.period * np.arange(self.n) / self.n

    @cached_property
    def _coeffs(self):
        N = self.n
        c = np.fft.rfft(self.samples) / N
        w = np.full(len(c), 2.0)
        w[0] = 1.0
        if N % 2 == 0:
            w[-1] = 0.0
        c = c * w
        c[np.abs(c) < self.noise_floor * np.max(np.abs(c))] = 0.0
        keep = np.nonzero(c)[0]
        K = keep[-1] + 1 if keep.size else 1
        omega = TWO_PI * np.arange(K) / self.period
        return c[:K], omega

    def kappa(self, s, deriv=0):
        """Curvature (or its deriv-th arc-length derivative) at s."""
        c, omega = self._coeffs
        s = np.asarray(s, dtype=float)
        ph = np.exp(1j * np.multiply.outer(s - self.offset, omega))
        return (ph @ (c * (1j * omega) ** deriv)).real

    def jet(self, order, at=0.0):
        """[kappa^(m)(at) for m = 0..order]."""
        return np.array([float(self.kappa(at, m)) for m in range(order + 1)])

    def shifted(self, s0):
        """Same curve, with arc length measured from s0."""
        return CurvatureProfile(self.period, self.samples, self.offset - s0, self.name,
                                self.noise_floor)

    def turning(self):
        return float(np.mean(self.samples) * self.period)

    @cached_property
    def _global(self):
        rep = check_assumption_A(self)
        if not rep.sites:
            return 0.0, float(np.max(self.samples)), 0.0
        return rep.sites[0]

    @property
    def s_max(self):
        return self._global[0]

    @property
    def kappa_max(self):
        return self._global[1]

    @property
    def k2(self):
        return self._global[2]


def _speed_series(curve, n):
    t = TWO_PI * np.arange(n) / n
    xd, yd = curve.evaluate(t, 1)
    v = np.hypot(xd, yd)
    V = np.fft.rfft(v) / n
    return t, v, V


def arc_length_reparam(curve: ParametricCurve, n_samples: int = 1024) -> CurvatureProfile:
    """Curvature sampled at n_samples equispaced arc-length points, counterclockwise."""
    if n_samples < 64:
        raise ValueError("n_samples must be >= 64")
    n = max(2048, 2 * n_samples)
    while True:
        t, v, V = _speed_series(curve, n)
        tail = np.max(np.abs(V[-n // 8:]))
        if tail < 1e-15 * abs(V[0]) or n >= 1 << 16:
            break
        n *= 2
    xd, yd = curve.evaluate(t, 1)
    if np.min(xd**2 + yd**2) <= 1e-14 * np.max(xd**2 + yd**2):
        raise NonRegularCurve("speed vanishes on the parameter grid")

    def curvature(tt):
        x1, y1 = curve.evaluate(tt, 1)
        x2, y2 = curve.evaluate(tt, 2)
        return (x1 * y2 - y1 * x2) / (x1**2 + y1**2) ** 1.5

    turning = float(np.sum(curvature(t) * v) * TWO_PI / n)
    if abs(abs(turning) - TWO_PI) > 1e-6:
        raise TurningNumberError(f"total turning {turning:.6g} is not +-2pi")
    if turning < 0:
        return arc_length_reparam(curve.reversed(), n_samples)

    K = np.nonzero(np.abs(V) > 1e-16 * abs(V[0]))[0][-1] + 1
    k = np.arange(1, K)
    a = 2 * V[1:K].real
    b = -2 * V[1:K].imag
    v0 = V[0].real
    period = TWO_PI * v0

    def arc(tt):
        ang = np.multiply.outer(tt, k)
        return v0 * tt + np.sin(ang) @ (a / k) + (1 - np.cos(ang)) @ (b / k)

    def speed(tt):
        ang = np.multiply.outer(tt, k)
        return v0 + np.cos(ang) @ a + np.sin(ang) @ b

    s_target = period * np.arange(n_samples) / n_samples
    tt = TWO_PI * s_target / period
    prev = np.inf
    for _ in range(60):
        step = (arc(tt) - s_target) / speed(tt)
        tt = tt - step
        size = np.max(np.abs(step))
        # stop at rounding level, or once the steps stop shrinking
        if size < 1e-14 or size >= prev:
            break
        prev = size
    return CurvatureProfile(period, curvature(tt), 0.0, curve.name)


@dataclass(frozen=True)
class AssumptionReport:
    unique_max: bool
    k2: float
    sites: list  # (s, kappa, k2) per maximal site, best first

    @property
    def n_sites(self):
        return len(self.sites)


def _polish(profile, s0, ds):
    # quartic fit on nine samples, then Newton on kappa'
    x = ds * np.arange(-4, 5)
    fit = np.polynomial.Polynomial.fit(x, profile.kappa(s0 + x), 4).convert()
    roots = fit.deriv().roots()
    roots = roots[np.abs(roots.imag) < 1e-12].real
    roots = roots[np.abs(roots) < 2 * ds]
    s = s0 + (roots[np.argmin(np.abs(roots))] if roots.size else 0.0)
    for _ in range(50):
        d1 = float(profile.kappa(s, 1))
        d2 = float(profile.kappa(s, 2))
        if d2 >= 0:
            break
        step = d1 / d2
        s -= step
        if abs(s - s0) > 4 * ds:
            s = s0
            break
        if abs(step) < 1e-15 * max(1.0, profile.period):
            break
    return s, float(profile.kappa(s)), -float(profile.kappa(s, 2))


def check_assumption_A(profile: CurvatureProfile, tol: float = 1e-6) -> AssumptionReport:
    """Find every site within tol of the maximal curvature."""
    k = profile.samples
    if np.ptp(k) <= tol:
        return AssumptionReport(False, 0.0, [])
    ds = profile.period / profile.n
    cand = np.nonzero((k >= np.roll(k, 1)) & (k >= np.roll(k, -1)))[0]
    polished = [_polish(profile, profile.s_grid[j], ds) for j in cand]
    top = max(p[1] for p in polished)
    sites = []
    for p in sorted(polished, key=lambda q: -q[1]):
        if p[1] < top - tol:
            continue
        dist = [abs((p[0] - q[0] + profile.period / 2) % profile.period - profile.period / 2)
                for q in sites]
        if all(d > 2 * ds for d in dist):
            sites.append(p)
    best = sites[0]
    return AssumptionReport(len(sites) == 1 and best[2] > tol, best[2], sites)


class MultiSiteWarning(UserWarning):
    """Several maximal sites; tunneling between them is ignored."""


@dataclass(frozen=True)
class LocalMax:
    s_max: float
    kappa_max: float
    k2: float
    profile: CurvatureProfile  # re-originated so the maximum sits at s = 0
    window: tuple | None = None  # (lo, hi) around 0 separating it from other sites

    def __iter__(self):
        return iter((self.s_max, self.kappa_max, self.k2))


def localize_max(profile: CurvatureProfile, site: int | None = None, tol: float = 1e-6) -> LocalMax:
    """Locate the curvature maximum and re-originate the profile there.

    With several maximal sites (the ellipse has two) pass ``site`` to pick one;
    interaction between sites is not modeled.
    """
    rep = check_assumption_A(profile, tol)
    if not rep.sites:
        raise DegenerateMaximum("curvature is constant; no isolated maximum")
    if len(rep.sites) > 1:
        if site is None:
            raise MultipleMaxima(f"{len(rep.sites)} maximal sites; pass site=")
        warnings.warn("several curvature maxima: tunneling between sites is not modeled",
                      MultiSiteWarning, stacklevel=2)
    s, kmax, k2 = rep.sites[site or 0]
    if k2 <= tol:
        raise DegenerateMaximum(f"k2 = {k2:.3g} <= tol")
    window = None
    if len(rep.sites) > 1:
        P = profile.period
        rel = [((q[0] - s) % P) for q in rep.sites if q is not rep.sites[site or 0]]
        window = (-(P - max(rel)) / 2, min(rel) / 2)
    return LocalMax(s, kmax, k2, profile.shifted(s), window)
