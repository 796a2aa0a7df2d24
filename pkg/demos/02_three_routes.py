"""Ground-state energy of an egg-shaped domain computed three ways.

1. the formal correction series, from the curvature jet at the maximum
2. the WKB recursion, from the curvature profile on a window
3. a direct 2D eigenvalue solve in boundary coordinates

Routes 1 and 2 share no code beyond the curvature profile; their energy
coefficients must agree. Route 3 checks the series itself.
"""

import numpy as np

from robinspec import (
    ParametricCurve,
    arc_length_reparam,
    collar_2d_eigs,
    localize_max,
    wkb_iterate,
    zeta_coefficients,
)

site = localize_max(arc_length_reparam(ParametricCurve.egg(), 1024))
omega = np.sqrt(site.k2 / 2)
print(f"curvature maximum {site.kappa_max:.6f} at s = {site.s_max:.5f}, k2 = {site.k2:.4f}")

zeta = zeta_coefficients(site.profile.jet(12), n=1, M=5)
wkb = wkb_iterate(site.profile, L=6)
print("\nenergy coefficients beyond the oscillator term")
for j, mu in zip((1, 3, 5), wkb.mu[4:]):
    print(f"  correction series {zeta[j]:+.10f}   WKB {mu:+.10f}")
print(f"  even-index series terms: {[zeta[j] for j in (0, 2, 4)]}")

print("\n(mu + h + kappa_max h^(3/2)) / h^(7/4): 2D solve against partial sums")
for h in (1e-3, 1e-4, 1e-5):
    eta = h**0.25
    res = collar_2d_eigs(site.profile, h, 1, 512, 128, window=(-1.2, 1.2),
                         check_truncation=False, extrapolate=True)
    r = (res.eigenvalues[0] + h + site.kappa_max * h**1.5) / h**1.75
    partial = np.cumsum([omega, zeta[1] * eta, zeta[3] * eta**2, zeta[5] * eta**3])
    print(f"  h = {h:.0e}   2D {r:.4f}   series {np.round(partial, 4).tolist()}")
