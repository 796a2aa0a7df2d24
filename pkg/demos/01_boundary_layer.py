"""The one-dimensional layer across the boundary.

On the half-line the Robin problem u'' = -lambda u, u'(0) = -u(0) has the single
bound state sqrt(2) exp(-tau) at lambda = -1. Cutting the line at L moves the
eigenvalue up by about 4 exp(-2L); a linear weight shifts it by -beta h^(1/2).
"""

import numpy as np

from robinspec.model1d import (
    Model1DConfig,
    fd_eigs_H0h,
    fd_eigs_Hbetah,
    lambda1_plus_one,
    solve_transcendental,
)

print("interval (0, L): lambda_1 + 1 against 4 exp(-2L)")
for L in (2.0, 4.0, 6.0, 10.0, 16.0):
    gap = lambda1_plus_one(L)
    print(f"  L = {L:5.1f}   lambda_1 + 1 = {gap:.6e}   ratio {gap / (4 * np.exp(-2 * L)):.6f}")

print("\nfinite differences at L = 5 converge at second order")
exact = solve_transcendental(5.0).lam
prev = None
for n in (250, 500, 1000, 2000, 4000):
    err = abs(fd_eigs_H0h(Model1DConfig(5.0, grid_n=n))[0] - exact)
    rate = "" if prev is None else f"   rate {np.log2(prev / err):.3f}"
    print(f"  n = {n:5d}   error {err:.3e}{rate}")
    prev = err

print("\nweighted layer: (lambda_1 + 1 + beta h^(1/2)) / (beta^2 h)")
for beta in (0.5, 2.0):
    for h in (1e-2, 1e-3, 1e-4):
        delta = beta * np.sqrt(h)
        L = min(12.0, 0.9 / delta)
        lam = fd_eigs_Hbetah(Model1DConfig(L, h, beta=beta, grid_n=4000))[0]
        ratio = (lam + 1 + delta) / (beta**2 * h)
        print(f"  beta = {beta:3.1f}  h = {h:.0e}  L = {L:5.2f}   {ratio:+.4f}")
