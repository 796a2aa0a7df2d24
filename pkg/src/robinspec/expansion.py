"""Closed-form eigenvalue expansions in gamma and in h = gamma^-2."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import MissingCoefficients, NonNegativeGamma


def gamma_to_h(gamma):
    if not gamma < 0:
        raise NonNegativeGamma(f"gamma = {gamma} must be negative")
    return gamma ** -2.0


def h_to_gamma(h):
    if not h > 0:
        raise ValueError("h must be positive")
    return -(h ** -0.5)


@dataclass(frozen=True)
class ExpansionCoefficients:
    kappa_max: float
    k2: float
    n: int = 1
    zeta: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("level index n starts at 1")
        if self.k2 < 0:
            raise ValueError("k2 must be non-negative")
        object.__setattr__(self, "zeta", tuple(float(z) for z in self.zeta))

    @property
    def beta(self):
        # odd-index zetas; the even ones vanish by parity
        return self.zeta[1::2]

    @property
    def third(self):
        return (2 * self.n - 1) * np.sqrt(self.k2 / 2)

    def at_level(self, n, zeta=()):
        return ExpansionCoefficients(self.kappa_max, self.k2, n, zeta)


def _check(coeffs, n):
    if n != coeffs.n:
        raise ValueError(f"coefficients are for level {coeffs.n}, not {n}")


def lambda_terms(gamma, n, coeffs: ExpansionCoefficients, M=-1):
    """Individual terms of the gamma-expansion; M < 0 keeps the three leading terms."""
    if not gamma < 0:
        raise NonNegativeGamma(f"gamma = {gamma} must be negative")
    _check(coeffs, n)
    if M >= len(coeffs.beta):
        raise MissingCoefficients(f"order {M} needs beta_0..beta_{M}, "
                                  f"have {len(coeffs.beta)}")
    g = abs(gamma)
    out = [-gamma**2, gamma * coeffs.kappa_max, coeffs.third * g**0.5]
    out += [b * g ** (-j / 2) for j, b in enumerate(coeffs.beta[:M + 1])]
    return out


def lambda_expansion(gamma, n, coeffs: ExpansionCoefficients, M=-1):
    return float(sum(lambda_terms(gamma, n, coeffs, M)))


def mu_terms(h, n, coeffs: ExpansionCoefficients, M=-1, form="beta"):
    """Terms of the h-expansion.

    form="beta" truncates like the gamma series (beta_0..beta_M, so that
    h^2 * lambda_expansion(gamma) matches term by term); form="zeta" uses
    zeta_0..zeta_M including the even ones.
    """
    if not h > 0:
        raise ValueError("h must be positive")
    _check(coeffs, n)
    out = [-h, -coeffs.kappa_max * h**1.5, coeffs.third * h**1.75]
    if form == "beta":
        if M >= len(coeffs.beta):
            raise MissingCoefficients(f"order {M} needs beta_0..beta_{M}, "
                                      f"have {len(coeffs.beta)}")
        out += [b * h ** (2 + j / 4) for j, b in enumerate(coeffs.beta[:M + 1])]
    elif form == "zeta":
        if M >= len(coeffs.zeta):
            raise MissingCoefficients(f"order {M} needs zeta_0..zeta_{M}, "
                                      f"have {len(coeffs.zeta)}")
        out += [z * h ** ((15 + j) / 8) for j, z in enumerate(coeffs.zeta[:M + 1])]
    else:
        raise ValueError(f"unknown form {form!r}")
    return out


def mu_expansion(h, n, coeffs: ExpansionCoefficients, M=-1, form="beta"):
    return float(sum(mu_terms(h, n, coeffs, M, form)))
