"""Dense-grid oracle for the infimum of (|p|^2 - |p~|^2) / ((1-|z1|^2)(1-|z2|^2))
for p = 3 - z1 - z2 on the open bidisc. ~10^7 grid points, then local polish."""
import numpy as np
from scipy.optimize import minimize

def ratio(r1, t1, r2, t2):
    z1 = r1 * np.exp(1j * t1)
    z2 = r2 * np.exp(1j * t2)
    p = 3 - z1 - z2
    pt = 3 * z1 * z2 - z1 - z2
    return (abs(p) ** 2 - abs(pt) ** 2) / ((1 - r1 ** 2) * (1 - r2 ** 2))

n_r, n_t = 40, 56  # 40*56*40*56 ~ 5e6 per offset; two offsets -> 1.0e7
best = (np.inf, None)
rs = (np.arange(n_r) + 0.5) / n_r
rs = 1 - (1 - rs) ** 2  # cluster toward the boundary
ts = 2 * np.pi * np.arange(n_t) / n_t
count = 0
for off in (0.0, 0.5):
    t = ts + off * 2 * np.pi / n_t
    R1, T1, R2, T2 = np.meshgrid(rs, t, rs, t, indexing="ij")
    v = ratio(R1, T1, R2, T2)
    count += v.size
    k = np.argmin(v)
    if v.flat[k] < best[0]:
        best = (v.flat[k], (R1.flat[k], T1.flat[k], R2.flat[k], T2.flat[k]))
print("grid points", count)
print("grid min", best)
f = lambda x: ratio(x[0], x[1], x[2], x[3]) if 0 <= x[0] < 1 and 0 <= x[2] < 1 else 1e9
res = minimize(f, np.array(best[1]), method="Nelder-Mead", options=dict(xatol=1e-12, fatol=1e-14, maxiter=20000))
print("polished", res.fun, res.x)
