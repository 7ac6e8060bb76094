"""Independent high-precision evaluation of the classical estimators.

Generates the frozen expected values used by tests/estimator_fixtures.rs.
Goodman uses exact rationals; everything else uses mpmath at 60 digits with
root finding done by grid scan + mpmath's own bracketing solver.

    python3 estimators_oracle.py
"""
from fractions import Fraction
from math import factorial

import mpmath as mp

mp.mp.dps = 60

CAP = mp.mpf(10) ** 15
MOM2_CAP_FACTOR = 1000

FIXTURES = {
    "p01_gee_example": ({1: 10, 2: 5}, 2000),
    "p02_no_singletons": ({2: 5}, 1000),
    "p03_mixed_heavy": ({1: 10, 18: 5}, 10000),
    "p04_sichel_solvable": ({1: 50, 2: 10, 3: 10}, 10000),
    "p05_all_distinct": ({1: 100}, 10000),
    "p06_constant": ({100: 1}, 10000),
    "p07_tiny": ({1: 2, 2: 1}, 50),
    "p08_large_population": ({1: 30, 2: 10, 3: 5, 5: 2}, 1000000),
    "p09_near_full": ({1: 5, 2: 3, 4: 2}, 20),
    "p10_wide": ({1: 40, 2: 15, 3: 5, 7: 2}, 5000),
    "p11_skewed": ({1: 60, 2: 12, 4: 1}, 200000),
    "p12_sparse": ({1: 70, 2: 10, 5: 2}, 40000),
    "p13_half": ({1: 30, 2: 10, 3: 4, 6: 1}, 140),
}


def stats(f, N):
    n = sum(j * c for j, c in f.items())
    d = sum(f.values())
    return n, d


def goodman(f, N):
    n, d = stats(f, N)
    if n == N:
        return Fraction(d)
    total = Fraction(d)
    for i, fi in f.items():
        coef = Fraction(factorial(N - n + i - 1) * factorial(n - i), factorial(N - n - 1) * factorial(n))
        total += (-1) ** (i + 1) * coef * fi
    return total


def gee(f, N):
    n, d = stats(f, N)
    f1 = f.get(1, 0)
    return mp.sqrt(mp.mpf(N) / n) * f1 + (d - f1)


def eb(f, N):
    n, d = stats(f, N)
    f1 = f.get(1, 0)
    return mp.sqrt(mp.mpf(N) / n) * max(1, f1) + (d - f1)


def chao(f, N):
    n, d = stats(f, N)
    f1, f2 = f.get(1, 0), f.get(2, 0)
    if f2 == 0:
        return mp.mpf(d)
    return d + mp.mpf(f1) ** 2 / (2 * f2)


def shlosser(f, N):
    n, d = stats(f, N)
    f1 = f.get(1, 0)
    r = mp.mpf(n) / N
    num = f1 * sum((1 - r) ** i * fi for i, fi in f.items())
    den = sum(i * r * (1 - r) ** (i - 1) * fi for i, fi in f.items())
    if num == 0:
        return mp.mpf(d)
    if den == 0:
        return mp.mpf(d)
    return d + num / den


def jackknife(f, N):
    # Direct leave-one-out average rather than the closed form.
    n, d = stats(f, N)
    total = mp.mpf(0)
    for j, c in f.items():
        rows = j * c
        dk = d - 1 if j == 1 else d
        total += rows * dk
    mean = total / n
    return d - (n - 1) * (mean - d)


def sichel(f, N):
    n, d = stats(f, N)
    f1 = f.get(1, 0)
    if f1 == 0 or f1 == n or d == 0:
        return mp.mpf(d), None
    A = mp.mpf(2 * n) / d - mp.log(mp.mpf(n) / f1)
    B = mp.mpf(2 * f1) / d + mp.log(mp.mpf(n) / f1)
    F = lambda g: (1 + g) * mp.log(g) - A * g + B
    lo = mp.mpf(f1) / n
    grid = [lo + (1 - lo) * mp.mpf(k) / 20000 for k in range(1, 20000)]
    roots = []
    prev = grid[0]
    for g in grid[1:]:
        if F(prev) * F(g) < 0:
            roots.append(mp.findroot(F, (prev, g), solver="illinois"))
        prev = g
    if len(roots) != 1:
        return mp.mpf(d), None
    g = roots[0]
    b = g * mp.log(n * g / f1) / (1 - g)
    c = (1 - g * g) / (n * g * g)
    return 2 / (b * c), g


def bootstrap(f, N):
    n, d = stats(f, N)
    return d + sum(fi * (1 - mp.mpf(j) / n) ** n for j, fi in f.items())


def h_n(x, n, N):
    x = mp.mpf(x)
    if x > N - n:
        return mp.mpf(0)
    return mp.exp(mp.loggamma(N - x + 1) + mp.loggamma(N - n + 1) - mp.loggamma(N - n - x + 1) - mp.loggamma(N + 1))


def ht(f, N):
    n, d = stats(f, N)
    if n == N:
        return mp.mpf(d)
    total = mp.mpf(0)
    for j, fj in f.items():
        total += fj / (1 - h_n(mp.mpf(N) * j / n, n, N))
    return total


def solve_increasing(g, lo, hi):
    """Root of increasing g on [lo, hi] by mpmath bisection-like solver."""
    if g(lo) == 0:
        return lo
    return mp.findroot(g, (lo, hi), solver="anderson")


def mom1(f, N):
    n, d = stats(f, N)
    lo = mp.mpf(max(d, 1))
    rhs = lambda D: D * (1 - mp.exp(-mp.mpf(n) / D)) - d
    if d >= n or rhs(CAP) < 0:
        return CAP
    if abs(rhs(lo)) <= mp.mpf("1e-30"):
        return lo
    return solve_increasing(rhs, lo, CAP)


def mom2(f, N):
    n, d = stats(f, N)
    lo = mp.mpf(max(d, 1))
    hi = min(mp.mpf(N) * MOM2_CAP_FACTOR, CAP)
    rhs = lambda D: D * (1 - h_n(mp.mpf(N) / D, n, N)) - d
    if abs(rhs(lo)) <= mp.mpf("1e-30"):
        return lo
    if not (rhs(lo) < 0 and rhs(hi) > 0):
        return mp.mpf(d)
    # rhs has a kink where N/D crosses N-n, so scan for the bracket first.
    pts = [lo * (hi / lo) ** (mp.mpf(k) / 4000) for k in range(4001)]
    for a, b in zip(pts, pts[1:]):
        if rhs(a) <= 0 < rhs(b):
            return mp.findroot(rhs, (a, b), solver="illinois")
    raise RuntimeError("no bracket")


def main():
    for name, (f, N) in FIXTURES.items():
        n, d = stats(f, N)
        s, g = sichel(f, N)
        vals = {
            "goodman": goodman(f, N),
            "gee": gee(f, N),
            "eb": eb(f, N),
            "chao": chao(f, N),
            "shlosser": shlosser(f, N),
            "jackknife": jackknife(f, N),
            "sichel": s,
            "bootstrap": bootstrap(f, N),
            "ht": ht(f, N),
            "mom1": mom1(f, N),
            "mom2": mom2(f, N),
        }
        print(f"// {name}: f={f} N={N} n={n} d={d} sichel_g={None if g is None else mp.nstr(g, 17)}")
        for k, v in vals.items():
            if isinstance(v, Fraction):
                v = mp.mpf(v.numerator) / v.denominator
            print(f"    {k}: {mp.nstr(v, 17)}")


if __name__ == "__main__":
    main()
