"""Formal perturbation series for the rescaled Robin operator near the curvature maximum.

With eps = h^(1/8), sigma = s/eps and tau = t/eps^4, the operator h^-1 L_h in
boundary coordinates, a = 1 - eps^4 tau kappa(eps sigma), reads

    -d_tau^2 + eps^4 kappa a^-1 d_tau - eps^6 a^-2 d_sigma^2
             - eps^11 tau kappa'(eps sigma) a^-3 d_sigma

Expanding kappa in its Taylor jet and a^-k in geometric-type series gives
operators L_k at order eps^k. L_0, L_4 and L_6 are the model operators; the
remainder L_{7+j} = Q_j drives the correction coefficients zeta_j:

    mu/h = -1 - kappa(0) eps^4 + (2n-1) omega eps^6 + sum_j zeta_j eps^(7+j)
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial

import numpy as np

from .errors import InternalSolvabilityFailure, JetTooShort, NotOrthogonal
from .spectral_basis import Algebra, OperatorTerm, ProductState, apply_poly_diff_op

FIRST_Q_ORDER = 7


def jet_length_needed(max_order):
    """Number of Taylor coefficients kappa(0)..kappa^(J)(0) needed for Q_0..Q_max_order."""
    return max_order + 4


class _Poly(dict):
    """Sparse polynomial in (eps, sigma, tau), truncated in eps."""

    def __mul__(self, other):
        out = _Poly()
        for (e1, i1, k1), c1 in self.items():
            for (e2, i2, k2), c2 in other.items():
                e = e1 + e2
                if e > self.cap:
                    continue
                key = (e, i1 + i2, k1 + k2)
                out[key] = out.get(key, 0) + c1 * c2
        out.cap = self.cap
        return out

    def __add__(self, other):
        out = _Poly(self)
        for key, c in other.items():
            out[key] = out.get(key, 0) + c
        out.cap = self.cap
        return out

    def scaled(self, x):
        out = _Poly({k: c * x for k, c in self.items()})
        out.cap = self.cap
        return out

    @classmethod
    def make(cls, items, cap):
        p = cls({k: c for k, c in items.items() if k[0] <= cap})
        p.cap = cap
        return p


def _series(x, coeff, cap):
    """sum_i coeff(i) x^i truncated at eps^cap; x has eps-order >= 4."""
    total = _Poly.make({(0, 0, 0): coeff(0)}, cap)
    power = _Poly.make({(0, 0, 0): 1}, cap)
    i = 0
    while True:
        i += 1
        power = power * x
        if not power:
            break
        total = total + power.scaled(coeff(i))
    return total


@dataclass(frozen=True)
class FormalOperator:
    """Terms of the eps-expansion, keyed by eps power."""

    terms: dict
    jet: tuple
    max_order: int  # Q_0 .. Q_max_order available
    exact: bool

    @property
    def k2(self):
        return -self.jet[2]

    @property
    def top(self):
        return FIRST_Q_ORDER + self.max_order

    def order(self, k):
        return self.terms.get(k, [])

    def Q(self, j):
        return self.order(FIRST_Q_ORDER + j)

    def q_coeffs(self, j):
        """(q1, q2, q3): polynomial coefficients of d_tau, d_sigma^2, d_sigma in Q_j."""
        out = {"dtau": {}, "dsigma2": {}, "dsigma": {}}
        for t in self.Q(j):
            out[t.deriv] = dict(t.poly)
        return out["dtau"], out["dsigma2"], out["dsigma"]


def build_operator_series(kappa_jet, max_order: int = 5, exact: bool = False) -> FormalOperator:
    """Expand the rescaled operator through eps^(7 + max_order).

    kappa_jet[m] is the m-th arc-length derivative of curvature at the
    maximum. kappa'(0) must vanish (to rounding); it is then set to zero.
    """
    need = jet_length_needed(max_order)
    if len(kappa_jet) < need:
        raise JetTooShort(f"order {max_order} needs kappa derivatives 0..{need - 1}, "
                          f"got {len(kappa_jet)}")
    num = Fraction if exact else float
    jet = [num(v) for v in kappa_jet[:need]]
    scale = max(1.0, abs(float(jet[0])), abs(float(jet[2])))
    if abs(float(jet[1])) > 1e-8 * scale:
        raise ValueError(f"kappa'(0) = {float(jet[1]):.3g}: not at a maximum")
    jet[1] = num(0)
    if not float(jet[2]) < 0:
        raise ValueError("kappa''(0) must be negative")
    cap = FIRST_Q_ORDER + max_order

    kap = _Poly.make({(m, m, 0): jet[m] / factorial(m) for m in range(need)}, cap)
    dkap = _Poly.make({(m, m, 0): jet[m + 1] / factorial(m) for m in range(need - 1)}, cap)
    tau = _Poly.make({(4, 0, 1): num(1)}, cap)
    x = tau * kap  # eps^4 tau kappa(eps sigma)

    inv1 = _series(x, lambda i: num(1), cap)
    inv2 = _series(x, lambda i: num(i + 1), cap)
    inv3 = _series(x, lambda i: num((i + 1) * (i + 2) // 2), cap)

    c_dtau = _Poly.make({(4, 0, 0): num(1)}, cap) * kap * inv1
    c_ds2 = (_Poly.make({(6, 0, 0): num(-1)}, cap) * inv2)
    c_ds = _Poly.make({(11, 0, 1): num(-1)}, cap) * dkap * inv3

    terms = defaultdict(list)
    terms[0].append(OperatorTerm({(0, 0): num(-1)}, "dtau2"))
    for poly, deriv in ((c_dtau, "dtau"), (c_ds2, "dsigma2"), (c_ds, "dsigma")):
        by_order = defaultdict(dict)
        for (e, i, k), c in poly.items():
            if c != 0:
                by_order[e][(i, k)] = by_order[e].get((i, k), 0) + c
        for e, p in by_order.items():
            p = {key: c for key, c in p.items() if c != 0}
            if p:
                terms[e].append(OperatorTerm(p, deriv))
    return FormalOperator(dict(terms), tuple(jet), max_order, exact)


@dataclass
class CorrectionState:
    n: int
    M: int
    zeta: list  # field elements (floats, or exact 4-vectors in powers of omega^(1/2))
    v: dict  # eps order -> ProductState with tau factor exp(-tau)
    g: dict  # eps order -> ProductState orthogonal to exp(-tau) in tau
    residues: dict  # eps order -> ProductState, orders > 7 + M
    mu: dict  # eps order -> field element
    ops: FormalOperator = field(repr=False)
    algebra: Algebra = field(repr=False)

    @property
    def exact(self):
        return self.algebra.exact

    @property
    def zeta_float(self):
        return [self.algebra.to_float(z) for z in self.zeta]

    @property
    def beta(self):
        """beta_j = zeta_(2j+1)."""
        return self.zeta_float[1::2]

    def quasimode(self):
        psi = {0: ProductState.ground(self.algebra, self.n)}
        for d in (self.v, self.g):
            for k, st in d.items():
                psi[k] = psi[k] + st if k in psi else st
        return psi

    def mu_scaled(self, h):
        """mu_M(h)/h from the stored coefficients."""
        eps = h ** 0.125
        return sum(self.algebra.to_float(z) * eps**k for k, z in self.mu.items())


def _apply_order(ops, A, k, state):
    out = None
    for term in ops.order(k):
        r = apply_poly_diff_op(state, term)
        out = r if out is None else out + r
    return out


def run_iteration(ops: FormalOperator, n: int = 1, M: int = 5) -> CorrectionState:
    """Solve order by order for zeta_0..zeta_M and the corrector functions."""
    if M > ops.max_order:
        raise JetTooShort(f"operator series only built through Q_{ops.max_order}")
    A = Algebra(-ops.jet[2], exact=ops.exact)
    j = n - 1
    top = ops.top

    def num(x):
        return A.number(x)

    m6 = A.number(0)
    if A.exact:
        m6[2] = Fraction(2 * n - 1)
    else:
        m6 = (2 * n - 1) * A.omega
    mu = {0: num(-1), 4: -A.number(ops.jet[0]) if A.exact else -float(ops.jet[0]), 6: m6}
    psi0 = ProductState.ground(A, n)
    psi = {}
    res = {}

    def add_state(k0, X):
        for k in range(k0, top + 1):
            Y = _apply_order(ops, A, k - k0, X)
            if k - k0 in mu:
                Z = X.scaled(mu[k - k0])
                Y = Z.scaled(num(-1)) if Y is None else Y - Z
            if Y is not None:
                res[k] = res[k] + Y if k in res else Y
        psi[k0] = psi[k0] + X if k0 in psi else X

    def add_mu(k0, z):
        for k, X in psi.items():
            if k + k0 <= top:
                Y = X.scaled(z).scaled(num(-1))
                res[k + k0] = res[k + k0] + Y if k + k0 in res else Y
        mu[k0] = z

    add_state(0, psi0)
    p0 = psi0.parity()
    for k in range(FIRST_Q_ORDER):
        if k in res and not _negligible(res[k], A):
            raise InternalSolvabilityFailure(f"model ground state leaves residual at order {k}")

    zeta, vs, gs = [], {}, {}
    for step in range(M + 1):
        k = FIRST_Q_ORDER + step
        W = res.get(k, ProductState.zero(A)).trimmed()
        par = W.parity()
        if par not in (None, p0 * (-1) ** k):
            raise InternalSolvabilityFailure(f"parity broken at order {k}")
        PW = W.project_tau()
        z = PW.coefficient(n)
        hcoef = A.resize(PW.coeffs, max(PW.shape[0], n), 1)
        hcoef[j, 0] = hcoef[j, 0] - z
        try:
            v = ProductState(A.invert_sigma(-hcoef, j), A).trimmed()
            g = ProductState(A.invert_tau((PW - W).coeffs), A).trimmed()
        except NotOrthogonal as exc:
            raise InternalSolvabilityFailure(str(exc)) from exc
        zeta.append(z)
        add_mu(k, z)
        add_state(k - 6, v)
        add_state(k, g)
        vs[k - 6], gs[k] = v, g
        if not _negligible(res[k], A):
            raise InternalSolvabilityFailure(f"order {k} residual did not cancel")
        res[k] = ProductState.zero(A)
    residues = {k: r.trimmed() for k, r in res.items() if k > FIRST_Q_ORDER + M}
    return CorrectionState(n, M, zeta, vs, gs, residues, mu, ops, A)


def _negligible(X, A, tol=1e-9):
    if A.exact:
        return X.is_zero()
    C = X.coeffs
    return not C.size or float(np.max(np.abs(C))) <= tol


def quasimode_residual(state: CorrectionState, h: float) -> float:
    """||(L - mu_M) Psi_M|| / h^((8+M)/8) with the operator truncated at the built order.

    The norm is the exact L2 norm in the rescaled (sigma, tau) variables.
    """
    eps = h ** 0.125
    total = None
    for k, R in state.residues.items():
        X = R.scaled(state.algebra.number(eps**k) if state.exact else eps**k)
        total = X if total is None else total + X
    if total is None:
        return 0.0
    return total.norm() / eps ** (FIRST_Q_ORDER + 1 + state.M)


def zeta_coefficients(kappa_jet, n=1, M=5, exact=False):
    """Convenience wrapper: zeta_0..zeta_M as floats."""
    ops = build_operator_series(kappa_jet, M, exact=exact)
    return run_iteration(ops, n, M).zeta_float
