"""E[det(I + xi A (x) XX^H)^-1] for 4x10 X with row covariance constant(4, rho)
and A = constant(4, rho), by direct quadrature of the correlated-Wishart
determinant D(f)/D(1), D(f) = det[int f(x) x^(n-m+i) e^(-x/s_k) dx].

Repeated eigenvalues are split by 1e-40 relative, far below the printed digits
at 160-digit working precision.
"""
import mpmath as mp

mp.mp.dps = 160


def const_eigs(n, rho):
    rho = mp.mpf(rho)
    return [1 + (n - 1) * rho] + [1 - rho] * (n - 1)


def split(v):
    out, seen = [], {}
    for x in v:
        k = seen.get(x, 0)
        seen[x] = k + 1
        out.append(x * (1 + k * mp.mpf(10) ** -40))
    return out


def kron(m, n, sig, alpha, xi):
    sig = split(sig)

    def det(f):
        a = mp.matrix(m, m)
        for k in range(m):
            for i in range(m):
                e = n - m + i
                a[k, i] = mp.quad(lambda x: f(x) * x**e * mp.exp(-x / sig[k]),
                                  [0, sig[k], 10 * sig[k], 100 * sig[k], mp.inf])
        return mp.det(a)

    f = lambda x: mp.fprod([1 / (1 + xi * a * x) for a in alpha])
    return det(f) / det(lambda x: 1)


for rho in ["0.1", "0.5"]:
    for xi in ["0.5", "2", "5", "20", "50", "200"]:
        e = const_eigs(4, rho)
        print(rho, xi, mp.nstr(kron(4, 10, e, e, mp.mpf(xi)), 20), flush=True)
