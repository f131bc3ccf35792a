"""Regenerate frozen oracle values with mpmath at high precision.

Independent of the package: moments come from the closed form
``I_k(s) = e^s sum_j (-1)^j k!/(k-j)! s^{-j-1} + (-1)^{k+1} k! s^{-k-1}``
evaluated with enough digits that cancellation is harmless, and Kac-Rice
densities are assembled from explicit Gaussian conditioning.

Run ``python3 tests/oracles/generate.py`` to rewrite ``values.json``.
"""
import json
from pathlib import Path

import mpmath as mp

mp.mp.dps = 40


def I(k, s):
    s = mp.mpf(s)
    if s == 0:
        return mp.mpf(1) / (k + 1)
    if abs(s) < mp.mpf("1e-6"):
        return mp.nsum(lambda m: s ** m / (mp.factorial(m) * (k + m + 1)), [0, 40])
    f = mp.factorial(k)
    tot = mp.e ** s * mp.fsum((-1) ** j * f / mp.factorial(k - j) * s ** (-j - 1) for j in range(k + 1))
    return tot + (-1) ** (k + 1) * f * s ** (-k - 1)


def K(i, j, x, y):
    return I(i + j, mp.mpf(x) + mp.mpf(y))


def rho1(x):
    a, b, c = K(0, 0, x, x), K(0, 1, x, x), K(1, 1, x, x)
    return mp.sqrt(a * c - b * b) / (mp.pi * a)


def rho2(x, y):
    gap = abs(mp.mpf(y) - mp.mpf(x))
    if gap < mp.mpf("1e-12"):
        # the density vanishes linearly on the diagonal
        return mp.mpf(0)
    with mp.workdps(30 + int(8 * max(0, -mp.log10(gap)))):
        return +_rho2(x, y)


def _rho2(x, y):
    # covariance of (g(x), g(y), g'(x), g'(y))
    lab = [(0, x), (0, y), (1, x), (1, y)]
    S = mp.matrix(4, 4)
    for r, (i, u) in enumerate(lab):
        for c, (j, v) in enumerate(lab):
            S[r, c] = K(i, j, u, v)
    A = S[0:2, 0:2]
    B = S[2:4, 0:2]
    C = S[2:4, 2:4]
    cond = C - B * mp.inverse(A) * B.T
    s1, s2 = mp.sqrt(cond[0, 0]), mp.sqrt(cond[1, 1])
    r = cond[0, 1] / (s1 * s2)
    r = max(min(r, mp.mpf(1)), mp.mpf(-1))
    eabs = 2 * s1 * s2 / mp.pi * (mp.sqrt(1 - r * r) + r * mp.asin(r))
    return eabs / (2 * mp.pi * mp.sqrt(mp.det(A)))


def factorial2(a, b):
    # symmetric integrand: twice the upper triangle
    inner = lambda x: mp.quad(lambda y: rho2(x, y), [x, b])
    return 2 * mp.quad(inner, [a, b])


def main():
    out = {
        "exp_moment": {f"{k},{s}": float(I(k, s)) for k in range(7)
                       for s in (-40, -12.5, -3, -0.7, -0.2, 0, 0.1, 0.45, 1, 2, 5.5, 17, 40)},
        "cov_0_1_1_1": float(K(0, 1, 1, 1)),
        "correlation_1_64": float(K(0, 0, 1, 64) / mp.sqrt(K(0, 0, 1, 1) * K(0, 0, 64, 64))),
        "rho1": {str(x): float(rho1(x)) for x in (-8, -2, -0.5, 0, 0.3, 1, 4, 16)},
        "expected_count": {str(m): float(mp.quad(rho1, [-m, 0, m])) for m in (0.1, 1, 4, 64)},
        "rho2": {f"{x},{y}": float(rho2(x, y)) for x, y in
                 ((0, 4), (0.1, -0.1), (0.05, -0.05), (0.025, -0.025), (-1, 1), (2, 3))},
    }
    mp.mp.dps = 25
    out["factorial2"] = {str(d): float(factorial2(-d, d)) for d in (0.4, 1.0)}
    path = Path(__file__).with_name("values.json")
    path.write_text(json.dumps(out, indent=1, sort_keys=True) + "\n")


if __name__ == "__main__":
    main()
