#!/usr/bin/env python3
"""Reference values for the special functions, computed with mpmath at 40 digits.

Regenerate with:  python3 make_golden.py > specfun.txt

Marcum Q1 is evaluated by two independent routes (Poisson-mixture series of
regularized upper incomplete gammas, and direct quadrature of the defining
integral); the script aborts if they disagree.
"""
import mpmath as mp

mp.mp.dps = 40
TOL = "1e-9"


def j0(x):
    return mp.besselj(0, x)


def marcum_series(a, b):
    lam = mp.mpf(a) ** 2 / 2
    x = mp.mpf(b) ** 2 / 2
    total = mp.mpf(0)
    j = 0
    w = mp.exp(-lam)
    while True:
        term = w * mp.gammainc(j + 1, x, mp.inf, regularized=True)
        total += term
        if j > lam and term < mp.mpf(10) ** -35:
            break
        j += 1
        w *= lam / j
    return total


def marcum_quad(a, b):
    a = mp.mpf(a)
    b = mp.mpf(b)
    if b == 0:
        return mp.mpf(1)
    f = lambda t: t * mp.exp(-(t * t + a * a) / 2) * mp.besseli(0, a * t)
    pts = [b, max(b, a), max(b, a) + 10, mp.inf]
    pts = sorted(set(pts))
    return mp.quad(f, pts)


def varrho(k):
    k = mp.mpf(k)
    c = mp.pi * (k - 1) + 2
    return mp.exp(1 / c) / (2 * k) * mp.sqrt((k - 1) * c / mp.pi)


def e1(x):
    return mp.e1(x)


def fmt(v):
    return mp.nstr(v, 20, min_fixed=-mp.inf, max_fixed=mp.inf) if v != 0 else "0"


def emit(name, args, value):
    print(",".join([name] + [repr(float(a)) for a in args] + [mp.nstr(value, 20), TOL]))


print("# function,input(s),expected,abs_tol")
print("# generated by make_golden.py (mpmath, 40 significant digits)")

xs = [i * 0.5 for i in range(-20, 21)] + [2.404825557695773, 5.520078110286311, 3.141592653589793,
      7.9, 8.0, 8.1, 12.5, 17.3, 24.9, 25.1, 33.3, 41.7, 49.99, -13.7, -36.2]
for x in xs:
    emit("bessel_j0", [x], j0(x))

pairs = []
for a in [0.0, 0.1, 0.5, 1.0, 2.0, 3.5, 5.0]:
    for b in [0.0, 0.3, 1.0, 2.0, 4.0, 6.0]:
        pairs.append((a, b))
pairs += [(1.0, 2.0), (4.0, 8.0), (6.0, 5.0), (8.0, 8.0), (10.0, 12.0), (12.0, 10.0),
          (20.0, 21.0), (20.0, 19.0), (30.0, 30.5), (35.0, 33.0), (3.0, 9.0), (9.0, 3.0),
          (50.0, 51.0), (0.2, 6.0)]
for a, b in pairs:
    s = marcum_series(a, b)
    q = marcum_quad(a, b)
    assert abs(s - q) < mp.mpf(10) ** -25, (a, b, s, q)
    emit("marcum_q1", [a, b], s)

for k in [1.0001, 1.001, 1.01, 1.05, 1.1, 1.2, 1.3, 1.5, 1.75, 2.0, 2.25, 2.5, 3.0, 3.5, 4.0,
          4.5, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0, 12.0, 15.0, 20.0, 30.0, 50.0, 100.0, 1000.0]:
    emit("varrho", [k], varrho(k))
for i in range(1, 25):
    emit("varrho", [1.0 + 0.37 * i], varrho(1.0 + 0.37 * i))

for x in [1e-3, 5e-3, 0.01, 0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 0.9, 0.99, 1.0, 1.01, 1.2, 1.5, 2.0,
          2.5, 3.0, 4.0, 5.0, 7.5, 10.0, 15.0, 20.0, 30.0, 50.0]:
    emit("upper_incomplete_gamma_zero", [x], e1(x))
for i in range(1, 31):
    emit("upper_incomplete_gamma_zero", [0.13 * i], e1(0.13 * i))

# Lemma-style bound evaluated directly.
for a, b, k in [(0.5, 3.0, 2.0), (1.0, 1.000001, 2.0), (0.1, 5.0, 1.5), (2.0, 9.0, 4.0)]:
    a_, b_, k_ = mp.mpf(a), mp.mpf(b), mp.mpf(k)
    emit("marcum_q1_lower_bound", [a, b, k], varrho(k_) * mp.sqrt(b_ / a_) * mp.exp(-k_ / 2 * (b_ - a_) ** 2))
