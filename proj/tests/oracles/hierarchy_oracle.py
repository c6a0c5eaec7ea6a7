"""Symbolic oracle for the slow-manifold hierarchy (test-only, independent of the C++ code).

Solves L0 V_n = sum_{m=1..n} (V_{n-m} A_m - L_m V_{n-m}) with L0 u = mean(u) - u,
L_m u = (-v)^m u, mean(V_n) = 0 for n >= 1. Prints A_n and V_n for a few profiles.
"""
import sympy as sp

y = sp.symbols("y")


def mean(f):
    return sp.Rational(1, 2) * sp.integrate(sp.expand(f), (y, -1, 1))


def hierarchy(v, order):
    V = [sp.Integer(1)]
    A = [None]
    for n in range(1, order + 1):
        lm = sum(((-v) ** m) * V[n - m] for m in range(1, n + 1))
        an = mean(lm - sum(V[n - m] * A[m] for m in range(1, n)))
        A.append(sp.nsimplify(an))
        g = sum(V[n - m] * A[m] for m in range(1, n + 1)) - lm
        w = sp.expand(-g)
        w = sp.expand(w - mean(w))
        V.append(w)
    return A[1:], V


if __name__ == "__main__":
    for name, v in [("parabolic", 1 - y**2), ("constant2", sp.Integer(2)), ("linear", sp.Rational(3, 2) + y / 2)]:
        A, V = hierarchy(v, 4)
        print(name, "A =", A)
        for n, Vn in enumerate(V):
            print("  V%d =" % n, sp.Poly(Vn, y).all_coeffs()[::-1])
