"""Reference values of 2F0(n, q; -x) for the hyp2f0 oracle test.

Each value is x^(-n) U(n, n-q+1, 1/x) from mpmath at 40 digits, cross-checked
against direct quadrature of (1/(n-1)!) int_0^inf (1+xt)^(-q) t^(n-1) e^(-t) dt.
Output is a Rust array literal.
"""
import random

import mpmath as mp

mp.mp.dps = 40
rng = random.Random(20240611)


def by_integral(n, q, x):
    f = lambda t: (1 + x * t) ** (-q) * t ** (n - 1) * mp.e ** (-t)
    pts = [0] + [mp.mpf(2) ** k for k in range(-30, 8)] + [mp.inf]
    return mp.quad(f, pts) / mp.factorial(n - 1)


def by_tricomi(n, q, x):
    return x ** (-n) * mp.hyperu(n, n - q + 1, 1 / x)


points = [(1, 1, 1.0), (2, 1, 1.0), (20, 20, 1000.0), (1, 20, 1e-3), (20, 1, 1000.0)]
while len(points) < 50:
    n = rng.randint(1, 20)
    q = rng.randint(1, 20)
    x = float(mp.mpf(10) ** mp.mpf(rng.uniform(-3, 3)))
    x = float(f"{x:.6g}")
    points.append((n, q, x))

print("const GRID: [(usize, usize, f64, f64); 50] = [")
for n, q, x in points:
    a = by_tricomi(n, q, mp.mpf(x))
    b = by_integral(n, q, mp.mpf(x))
    assert abs(a - b) <= mp.mpf(10) ** -9 * abs(a), (n, q, x, a, b)
    print(f"    ({n}, {q}, {x!r}, {mp.nstr(a, 17, min_fixed=-1, max_fixed=0)}),")
print("];")
