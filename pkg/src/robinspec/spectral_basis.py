"""Model eigenfunctions and the product-function algebra built on them.

sigma factors are expanded over Hermite functions of the oscillator
-d^2/dsigma^2 + (k2/2) sigma^2 (frequency omega = sqrt(k2/2)); tau factors are
polynomials times exp(-tau) on the half-line. Level n (1-based) corresponds to
Hermite index j = n - 1 (0-based) throughout.

Two coefficient fields are supported. The float path uses orthonormal Hermite
functions. The exact path uses unnormalized H_m(x) exp(-x^2/2) with
x = sqrt(omega) sigma and stores each coefficient as a 4-vector of Fractions
(a0, a1, a2, a3) meaning a0 + a1 r + a2 r^2 + a3 r^3, r = omega**(1/2),
reduced with r^4 = k2/2. Projections onto a basis element are identical in
both, since they only need the basis to be orthogonal.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial

import numpy as np

from .errors import NotOrthogonal

SQRT2 = np.sqrt(2.0)


def tau_moment(m):
    """Integral of tau^m exp(-2 tau) over (0, inf) = m!/2^(m+1)."""
    return Fraction(factorial(m), 2 ** (m + 1))


@lru_cache(maxsize=None)
def _p0_resolvent_matrix(P):
    # rows: input power i, cols: output power; exact rationals
    T = [[Fraction(0)] * (P + 1) for _ in range(P)]
    for i in range(P):
        q = [Fraction(0)] * (P + 1)
        fall = 1
        for k in range(i + 1):
            if k:
                fall *= i - k + 1
            deg = i - k
            q[deg + 1] += Fraction(fall, 2 ** (k + 1)) / (deg + 1)
        c = -sum(Fraction(factorial(k), 2**k) * q[k] for k in range(P + 1))
        q[0] += c
        T[i] = q
    return T


@lru_cache(maxsize=None)
def _proj_weights(P):
    return [Fraction(factorial(p), 2**p) for p in range(P)]


class Algebra:
    """Coefficient field plus Hermite ladder data for a fixed k2."""

    def __init__(self, k2, exact=False):
        if exact:
            k2 = Fraction(k2)
        if not k2 > 0:
            raise ValueError("k2 must be positive")
        self.exact = exact
        self.k2 = k2
        self.omega = float(np.sqrt(float(k2) / 2))
        self.r = float(np.sqrt(self.omega))
        self.c = k2 / 2 if exact else None
        self._tau_T = {}

    # --- scalars ---
    def number(self, x):
        """Embed a rational or float as a field element."""
        if not self.exact:
            return float(x)
        z = np.array([Fraction(0)] * 4, dtype=object)
        z[0] = Fraction(x)
        return z

    def to_float(self, z):
        if not self.exact:
            return float(z)
        return float(sum(float(z[e]) * self.r**e for e in range(4)))

    def is_zero(self, z):
        if not self.exact:
            return z == 0.0
        return all(v == 0 for v in z)

    # --- arrays ---
    def zeros(self, mh, P):
        if not self.exact:
            return np.zeros((mh, P))
        a = np.empty((mh, P, 4), dtype=object)
        a.fill(Fraction(0))
        return a

    def resize(self, C, mh, P):
        out = self.zeros(mh, P)
        a, b = min(mh, C.shape[0]), min(P, C.shape[1])
        out[:a, :b] = C[:a, :b]
        return out

    def mul_r(self, C, k):
        """Multiply every coefficient by r**k."""
        if k == 0:
            return C
        if not self.exact:
            return C * self.r**k
        q, e = divmod(k, 4)
        out = np.empty_like(C)
        for a in range(4):
            b = a + e
            fac = self.c ** (q + b // 4)
            out[..., b % 4] = C[..., a] * fac
        return out

    def mul_number(self, C, z):
        if not self.exact:
            return C * z
        out = self.zeros(*C.shape[:2])
        for e in range(4):
            if z[e] != 0:
                out = out + self.mul_r(C, e) * z[e]
        return out

    def scale(self, C, x):
        """Multiply by a rational/float scalar (not a field 4-vector)."""
        if not self.exact:
            return C * float(x)
        return C * Fraction(x)

    # --- Hermite ladder (cached per size) ---
    def _ladder(self, mh):
        m = np.arange(mh + 1)
        if self.exact:
            lo = [Fraction(int(v)) for v in m]
            up = [Fraction(1, 2)] * (mh + 1)
            return lo, up, lo, [-u for u in up]
        lo = np.sqrt(m / 2.0)
        up = np.sqrt((m + 1) / 2.0)
        return lo, up, lo, -up

    def _shift(self, C, lo, up):
        mh = C.shape[0]
        out = self.zeros(mh + 1, C.shape[1])
        for m in range(mh):
            if m > 0:
                out[m - 1] = out[m - 1] + C[m] * lo[m]
            out[m + 1] = out[m + 1] + C[m] * up[m]
        return out

    def mul_sigma(self, C):
        lo, up, _, _ = self._ladder(C.shape[0])
        return self.mul_r(self._shift(C, lo, up), -1)

    def d_sigma(self, C):
        _, _, dlo, dup = self._ladder(C.shape[0])
        return self.mul_r(self._shift(C, dlo, dup), 1)

    def mul_tau(self, C):
        out = self.zeros(C.shape[0], C.shape[1] + 1)
        out[:, 1:] = C
        return out

    def d_tau(self, C):
        # (q e^{-tau})' = (q' - q) e^{-tau}
        out = -C
        P = C.shape[1]
        if P > 1:
            if self.exact:
                k = np.array([Fraction(i) for i in range(1, P)], dtype=object)
            else:
                k = np.arange(1, P, dtype=float)
            kk = k[None, :, None] if self.exact else k[None, :]
            out[:, :-1] = out[:, :-1] + C[:, 1:] * kk
        return out

    def project_tau(self, C):
        """Pi_tau: component along exp(-tau) in each Hermite row."""
        w = _proj_weights(C.shape[1])
        out = self.zeros(C.shape[0], 1)
        if self.exact:
            for p, wp in enumerate(w):
                out[:, 0] = out[:, 0] + C[:, p] * wp
        else:
            out[:, 0] = C @ np.array([float(v) for v in w])
        return out

    def coefficient(self, C, j):
        """Coefficient of exp(-tau) psi_j in the orthogonal decomposition."""
        if j >= C.shape[0]:
            return self.number(0)
        return self.project_tau(C)[j, 0]

    def invert_tau(self, C, tol=1e-12):
        """(P0 + 1)^-1 row by row; rows must be orthogonal to exp(-tau)."""
        P = C.shape[1]
        proj = self.project_tau(C)
        if self.exact:
            if any(v != 0 for v in proj.ravel()):
                raise NotOrthogonal("tau factor has a component along u0")
        else:
            scale = max(np.max(np.abs(C)) if C.size else 0.0, 1.0)
            if np.max(np.abs(proj), initial=0.0) > tol * scale:
                raise NotOrthogonal(f"|<w,u0>| = {np.max(np.abs(proj)):.3g}")
        T = _p0_resolvent_matrix(P)
        out = self.zeros(C.shape[0], P + 1)
        if self.exact:
            for i in range(P):
                for k in range(P + 1):
                    if T[i][k] != 0:
                        out[:, k] = out[:, k] + C[:, i] * T[i][k]
        else:
            out = C @ np.array([[float(v) for v in row] for row in T])
        return out

    def invert_sigma(self, C, j, tol=1e-12):
        """(H_harm - lambda_j)^-1 on each tau column; row j must vanish."""
        row = C[j] if j < C.shape[0] else None
        if row is not None:
            if self.exact:
                if any(v != 0 for v in np.ravel(row)):
                    raise NotOrthogonal("sigma factor has a component along f_n")
            else:
                scale = max(np.max(np.abs(C)), 1.0)
                if np.max(np.abs(row), initial=0.0) > tol * scale:
                    raise NotOrthogonal(f"f_n coefficient {np.max(np.abs(row)):.3g}")
        out = self.zeros(*C.shape[:2])
        for m in range(C.shape[0]):
            if m == j:
                continue
            out[m] = C[m] * (Fraction(1, 2 * (m - j)) if self.exact else 1.0 / (2 * (m - j)))
        return self.mul_r(out, -2)

    def parity(self, C):
        """+1 if only even Hermite indices are populated, -1 if only odd, 0 mixed, None if empty."""
        nz = [m for m in range(C.shape[0]) if np.any(C[m] != 0)]
        if not nz:
            return None
        par = {m % 2 for m in nz}
        if len(par) == 2:
            return 0
        return 1 if par == {0} else -1


def hermite_functions(mmax, omega, sigma):
    """Orthonormal oscillator eigenfunctions f_1..f_{mmax+1} at sigma, shape (mmax+1, len)."""
    x = np.sqrt(omega) * np.asarray(sigma, dtype=float)
    out = np.zeros((mmax + 1,) + x.shape)
    out[0] = (omega / np.pi) ** 0.25 * np.exp(-x**2 / 2)
    if mmax >= 1:
        out[1] = SQRT2 * x * out[0]
    for m in range(2, mmax + 1):
        out[m] = np.sqrt(2.0 / m) * x * out[m - 1] - np.sqrt((m - 1) / m) * out[m - 2]
    return out


@dataclass(frozen=True)
class TauProfile:
    """(sum_k coeffs[k] tau^k) exp(-tau) on the half-line."""

    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))

    @classmethod
    def u0(cls):
        return cls((SQRT2,))

    def __call__(self, tau):
        tau = np.asarray(tau, dtype=float)
        return np.polynomial.polynomial.polyval(tau, self.coeffs) * np.exp(-tau)

    def inner(self, other):
        return sum(a * b * float(tau_moment(i + j))
                   for i, a in enumerate(self.coeffs) for j, b in enumerate(other.coeffs))

    def norm(self):
        return np.sqrt(self.inner(self))

    def derivative(self):
        C = np.array(self.coeffs)[None, :]
        return TauProfile(Algebra(2.0).d_tau(C)[0])

    def apply_P0(self):
        """-d^2/dtau^2."""
        return TauProfile(-np.array(self.derivative().derivative().coeffs))

    def robin_defect(self):
        """g'(0) + g(0), zero when the Robin condition holds."""
        return self.derivative().coeffs[0] + self.coeffs[0]

    def __add__(self, other):
        n = max(len(self.coeffs), len(other.coeffs))
        a = np.zeros(n)
        a[: len(self.coeffs)] += self.coeffs
        a[: len(other.coeffs)] += other.coeffs
        return TauProfile(a)

    def __mul__(self, x):
        return TauProfile(np.array(self.coeffs) * x)

    __rmul__ = __mul__


@dataclass(frozen=True)
class HermiteVector:
    """sum_m coeffs[m] f_{m+1}(sigma), orthonormal oscillator eigenfunctions for k2."""

    k2: float
    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))

    @property
    def omega(self):
        return np.sqrt(self.k2 / 2)

    @classmethod
    def basis(cls, k2, n, size=None):
        c = np.zeros(max(size or n, n))
        c[n - 1] = 1.0
        return cls(k2, c)

    def _arr(self):
        return np.array(self.coeffs)[:, None]

    def _wrap(self, C):
        return HermiteVector(self.k2, C[:, 0])

    def mul_sigma(self):
        return self._wrap(Algebra(self.k2).mul_sigma(self._arr()))

    def d_sigma(self):
        return self._wrap(Algebra(self.k2).d_sigma(self._arr()))

    def apply_H(self):
        m = np.arange(len(self.coeffs))
        return HermiteVector(self.k2, (2 * m + 1) * self.omega * np.array(self.coeffs))

    def inner(self, other):
        n = min(len(self.coeffs), len(other.coeffs))
        return float(np.dot(self.coeffs[:n], other.coeffs[:n]))

    def norm(self):
        return float(np.linalg.norm(self.coeffs))

    @property
    def parity(self):
        return Algebra(self.k2).parity(self._arr())

    def __call__(self, sigma):
        F = hermite_functions(len(self.coeffs) - 1, self.omega, sigma)
        return np.tensordot(self.coeffs, F, 1)


class ProductState:
    """sum over (m, p) of coeffs[m, p] f_{m+1}(sigma) tau^p exp(-tau).

    Equivalently a finite sum of (HermiteVector, TauProfile) pairs, one per
    tau power; see :attr:`terms`.
    """

    __slots__ = ("coeffs", "algebra")

    def __init__(self, coeffs, algebra):
        self.coeffs = coeffs
        self.algebra = algebra

    @classmethod
    def ground(cls, algebra, n):
        """exp(-tau) f_n(sigma) (u0 (x) f_n up to the factor sqrt 2)."""
        C = algebra.zeros(n, 1)
        C[n - 1, 0] = algebra.number(1)
        return cls(C, algebra)

    @classmethod
    def zero(cls, algebra):
        return cls(algebra.zeros(1, 1), algebra)

    @property
    def shape(self):
        return self.coeffs.shape[:2]

    @property
    def terms(self):
        A = self.algebra
        if A.exact:
            raise TypeError("terms view is float-only")
        k2 = A.k2
        out = []
        for p in range(self.coeffs.shape[1]):
            e = np.zeros(p + 1)
            e[p] = 1.0
            out.append((HermiteVector(k2, self.coeffs[:, p]), TauProfile(e)))
        return out

    def _binary(self, other, sign):
        A = self.algebra
        mh = max(self.shape[0], other.shape[0])
        P = max(self.shape[1], other.shape[1])
        a = A.resize(self.coeffs, mh, P)
        b = A.resize(other.coeffs, mh, P)
        return ProductState(a + b if sign > 0 else a - b, A)

    def __add__(self, other):
        return self._binary(other, 1)

    def __sub__(self, other):
        return self._binary(other, -1)

    def scaled(self, z):
        """Multiply by a field element (float or exact 4-vector)."""
        return ProductState(self.algebra.mul_number(self.coeffs, z), self.algebra)

    def mul_sigma(self):
        return ProductState(self.algebra.mul_sigma(self.coeffs), self.algebra)

    def d_sigma(self):
        return ProductState(self.algebra.d_sigma(self.coeffs), self.algebra)

    def mul_tau(self):
        return ProductState(self.algebra.mul_tau(self.coeffs), self.algebra)

    def d_tau(self):
        return ProductState(self.algebra.d_tau(self.coeffs), self.algebra)

    def project_tau(self):
        return ProductState(self.algebra.project_tau(self.coeffs), self.algebra)

    def coefficient(self, n):
        return self.algebra.coefficient(self.coeffs, n - 1)

    def parity(self):
        return self.algebra.parity(self.coeffs)

    def is_zero(self):
        return not np.any(self.coeffs != 0)

    def trimmed(self, rel=0.0):
        """Drop trailing all-zero Hermite rows and tau columns."""
        C = self.coeffs
        mask = np.abs(C.astype(float)) > rel if not self.algebra.exact else (C != 0)
        if C.ndim == 3:
            mask = mask.any(axis=2)
        rows = np.nonzero(mask.any(axis=1))[0]
        cols = np.nonzero(mask.any(axis=0))[0]
        mh = rows[-1] + 1 if rows.size else 1
        P = cols[-1] + 1 if cols.size else 1
        return ProductState(C[:mh, :P], self.algebra)

    def to_float(self):
        """Float coefficients over orthonormal f_m (valid on either path)."""
        A = self.algebra
        if not A.exact:
            return np.array(self.coeffs, dtype=float)
        C = self.coeffs
        val = sum(C[..., e].astype(float) * A.r**e for e in range(4))
        # psi_m = H_m(x) e^{-x^2/2} has L2(sigma) norm sqrt(2^m m! sqrt(pi)/r)
        m = np.arange(C.shape[0])
        nrm = np.sqrt([2.0**k * factorial(int(k)) for k in m]) * (np.pi ** 0.25) / np.sqrt(A.r)
        return val * nrm[:, None]

    def inner(self, other):
        a, b = self.to_float(), other.to_float()
        mh = min(a.shape[0], b.shape[0])
        P, Q = a.shape[1], b.shape[1]
        G = np.array([[float(tau_moment(p + q)) for q in range(Q)] for p in range(P)])
        return float(np.sum(a[:mh] * (b[:mh] @ G.T)))

    def norm(self):
        return np.sqrt(max(self.inner(self), 0.0))

    def __call__(self, sigma, tau):
        """Evaluate on the tensor grid sigma x tau."""
        C = self.to_float()
        F = hermite_functions(C.shape[0] - 1, self.algebra.omega, sigma)
        tau = np.asarray(tau, dtype=float)
        T = np.array([tau**p for p in range(C.shape[1])]) * np.exp(-tau)
        return F.T @ C @ T


@dataclass(frozen=True)
class OperatorTerm:
    """poly(sigma, tau) * D with D in {'1', 'dtau', 'dtau2', 'dsigma', 'dsigma2'}.

    poly maps (sigma power, tau power) to a coefficient.
    """

    poly: dict
    deriv: str = "1"

    def parity_flip(self):
        flips = {int(i) % 2 for (i, _), c in self.poly.items() if c != 0}
        d = 1 if self.deriv == "dsigma" else 0
        return {(f + d) % 2 for f in flips}


def apply_poly_diff_op(state: ProductState, op: OperatorTerm) -> ProductState:
    A = state.algebra
    C = state.coeffs
    if op.deriv == "dtau":
        C = A.d_tau(C)
    elif op.deriv == "dtau2":
        C = A.d_tau(A.d_tau(C))
    elif op.deriv == "dsigma":
        C = A.d_sigma(C)
    elif op.deriv == "dsigma2":
        C = A.d_sigma(A.d_sigma(C))
    elif op.deriv != "1":
        raise ValueError(f"unknown derivative {op.deriv!r}")
    out = None
    spow = {0: C}
    for (i, k), coef in sorted(op.poly.items()):
        if coef == 0:
            continue
        while i not in spow:
            top = max(spow)
            spow[top + 1] = A.mul_sigma(spow[top])
        T = spow[i]
        for _ in range(k):
            T = A.mul_tau(T)
        T = A.scale(T, coef)
        out = T if out is None else ProductState(out, A)._binary(ProductState(T, A), 1).coeffs
    if out is None:
        return ProductState(A.zeros(*C.shape[:2]), A)
    return ProductState(out, A)


def invert_P0_plus_1(w: TauProfile) -> TauProfile:
    """Solve (-d^2/dtau^2 + 1) g = w with g'(0) = -g(0) and g orthogonal to u0."""
    A = Algebra(2.0)
    g = A.invert_tau(np.array(w.coeffs, dtype=float)[None, :])[0]
    out = TauProfile(g)
    scale = max(1.0, max(abs(c) for c in out.coeffs))
    assert abs(out.robin_defect()) <= 1e-10 * scale, "Robin condition lost in tau resolvent"
    return out


def invert_Hharm_minus_lambda(v: HermiteVector, n: int) -> HermiteVector:
    """sum over m != n of v_m / ((2m-1) omega - (2n-1) omega) f_m."""
    A = Algebra(v.k2)
    C = np.array(v.coeffs, dtype=float)[:, None]
    if C.shape[0] < n:
        C = A.resize(C, n, 1)
    return HermiteVector(v.k2, A.invert_sigma(C, n - 1)[:, 0])
