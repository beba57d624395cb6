"""Fraction of the bi-annulus (eps/(2 delta))^(1/q) < |z_i - 1| < eps^(1/q) (inside the
bidisc) on which |phi_neg(z) - 1| >= delta, eps = 0.01, q = 2."""
import numpy as np
rng = np.random.default_rng(7)
eps, q = 0.01, 2.0
for delta in (0.6, 0.75, 0.9):
    lo, hi = (eps / (2 * delta)) ** (1 / q), eps ** (1 / q)
    def draw(n):
        out = []
        while sum(len(o) for o in out) < n:
            rr = np.sqrt(rng.uniform(lo ** 2, hi ** 2, 4 * n)); t = 2 * np.pi * rng.random(4 * n)
            z = 1 + rr * np.exp(1j * t)
            out.append(z[np.abs(z) < 1])
        return np.concatenate(out)[:n]
    n = 10 ** 6
    z1, z2 = draw(n), draw(n)
    phi = -(2 * z1 * z2 - z1 - z2) / (2 - z1 - z2)
    bad = np.abs(phi - 1) >= delta
    print(delta, "violations", bad.sum(), "fraction", bad.mean(), "max", np.abs(phi - 1).max())
    # analytic lower bound vs measured volume (normalised dA)
    lb = np.pi ** 2 * (eps ** (2 / q) - (eps / (2 * delta)) ** (2 / q)) ** 2
    print("   annulus bound", lb)
