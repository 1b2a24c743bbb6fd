#!/usr/bin/env python3
"""Independent reference values frozen into the C++ tests.

Uses numpy/scipy only; nothing here links the library.
Run: python3 tools/oracles.py
"""

import itertools
import math

import numpy as np
from scipy import integrate


def truncated_exponential_mean(B=3.0):
    return 1.0 - B * math.exp(-B) / (1.0 - math.exp(-B))


def rbf_mean_mc(sigma=0.5, pairs=10**6, seed=20240601):
    rng = np.random.default_rng(seed)
    x, y = rng.random(pairs), rng.random(pairs)
    v = np.exp(-((x - y) ** 2) / (2 * sigma**2))
    return v.mean(), v.std(ddof=1) / math.sqrt(pairs)


def rbf_mean_quad(sigma=0.5):
    val, _ = integrate.dblquad(lambda y, x: math.exp(-((x - y) ** 2) / (2 * sigma**2)), 0, 1, 0, 1,
                               epsabs=1e-13, epsrel=1e-13)
    return val


def zg_profile(values):
    """Zhu-Ghodsi log-likelihood for every split q = 1..p-1, pooled variance."""
    d = np.abs(np.asarray(values, dtype=float))
    p = len(d)
    out = []
    for q in range(1, p):
        a, b = d[:q], d[q:]
        ss = ((a - a.mean()) ** 2).sum() + ((b - b.mean()) ** 2).sum()
        var = ss / (p - 2)
        if var <= 0:
            out.append(math.inf)
            continue
        ll = -0.5 * p * math.log(2 * math.pi * var) - ss / (2 * var)
        out.append(ll)
    return out


def sociability_truncated(x, y, k):
    u = 2 * x * y
    s = 0.0
    m = 1
    while 2 * m < k:
        s += (-1) ** (m + 1) * u**m / math.factorial(m)
        m += 1
    return s


def coupling_gap_mc(k, r, samples=10**6, B=3.0, seed=7):
    rng = np.random.default_rng(seed + 1000 * k + int(r * 1e4))
    def draw(n):
        out = np.empty(0)
        while out.size < n:
            w = rng.exponential(1.0, size=2 * n)
            out = np.concatenate([out, w[w <= B]])
        return out[:n]
    x, y = r * draw(samples), r * draw(samples)
    f = 1 - np.exp(-2 * x * y)
    u = 2 * x * y
    fk = np.zeros_like(u)
    m = 1
    while 2 * m < k:
        fk += (-1) ** (m + 1) * u**m / math.factorial(m)
        m += 1
    g = np.abs(f - fk)
    return g.mean(), g.std(ddof=1) / math.sqrt(samples)


def two_block():
    B = np.array([[0.2, 0.8], [0.8, 0.2]])
    return np.linalg.eigvalsh(0.5 * B)[::-1]


def main():
    print("truncated exponential mean (B=3):", repr(truncated_exponential_mean()))
    m, se = rbf_mean_mc()
    print("rbf(0.5) E f, Monte Carlo 1e6 pairs:", repr(float(m)), "SE", repr(float(se)))
    print("rbf(0.5) E f, adaptive quadrature:", repr(rbf_mean_quad()))
    scree = [10, 9, 8, 1, 0.9, 0.8, 0.7, 0.6]
    prof = zg_profile(scree)
    best = max(range(len(prof)), key=lambda i: (prof[i], -i))
    print("ZG profile:", [round(float(v), 4) for v in prof], "-> rank", best + 1)
    # brute force over every split, also accounting for tie order
    assert best == int(np.argmax(prof))
    print("sociability f(0.5,0.8):", repr(1 - math.exp(-0.8)), " f(1,1):", repr(1 - math.exp(-2)))
    print("two-block eigenvalues:", two_block())
    print("two-block f across blocks:", 0.8)
    for k, r in itertools.product([3, 5], [0.2, 0.1, 0.05, 0.03, 0.02]):
        g, se = coupling_gap_mc(k, r)
        bound = 200**2 * g
        print(f"coupling k={k} r={r}: E|f-f_k| = {g:.6e} (SE {se:.1e}), n^2 bound = {bound:.4g}")
    # (1 + xy)^2 / 4 has monomials {1, x, x^2}
    xs, ws = np.polynomial.legendre.leggauss(64)
    xs, ws = 0.5 * (xs + 1), 0.5 * ws
    K = ((1 + np.outer(xs, xs)) ** 2) / 4
    M = np.sqrt(ws)[:, None] * K * np.sqrt(ws)[None, :]
    ev = np.sort(np.abs(np.linalg.eigvalsh(M)))[::-1]
    print("(1+xy)^2/4 numerical rank at 1e-8:", int((ev > 1e-8 * ev[0]).sum()))


if __name__ == "__main__":
    main()
