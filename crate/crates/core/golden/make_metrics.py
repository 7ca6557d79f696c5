#!/usr/bin/env python3
"""System-level reference values (outage, capacity, MRC, AFD) via scipy/mpmath.

Regenerate with:  python3 make_metrics.py > metrics.txt
Independent from the Rust code path: Marcum Q1 comes from scipy's noncentral
chi-square survival function and the integrals from QUADPACK.
"""
import numpy as np
import mpmath as mp
from scipy import integrate, special, stats


def q1(a, b):
    return stats.ncx2.sf(b * b, 2, a * a)


def mus(n, w):
    return [special.j0(2 * np.pi * (k - 1) * w / (n - 1)) for k in range(2, n + 1)] if n > 1 else []


def outage(rho2, mu):
    al = [np.sqrt(2 * m * m / (1 - m * m)) for m in mu]
    be = [np.sqrt(2 / (1 - m * m)) for m in mu]
    f = lambda t: np.exp(-t) * np.prod([1 - q1(a * np.sqrt(t), b * np.sqrt(rho2)) for a, b in zip(al, be)])
    return integrate.quad(f, 0, rho2, epsabs=1e-13, epsrel=1e-12, limit=400)[0]


def capacity(n, w, g):
    mu = mus(n, w)
    return integrate.quad(lambda y: (1 - outage(y / g, mu)) / (1 + y), 0, np.inf, limit=400, epsrel=1e-10)[0]


def mrc(l, g):
    g = mp.mpf(g)
    return mp.quad(lambda t: mp.log(1 + g * t) * t ** (l - 1) * mp.exp(-t) / mp.factorial(l - 1), [0, 1, 10, mp.inf])


def iid(n, g):
    # independent ports: CDF of t = r_fas^2/sigma^2 is (1 - e^-t)^n
    g = mp.mpf(g)
    pdf = lambda t: n * (1 - mp.exp(-t)) ** (n - 1) * mp.exp(-t)
    return mp.quad(lambda t: mp.log(1 + g * t) * pdf(t), [0, 1, 10, mp.inf])


def emit(name, args, value, tol):
    print(",".join([name] + [repr(float(a)) for a in args] + [repr(float(value)), tol]))


print("# function,input(s),expected,abs_tol")
g10 = 10.0
emit("rayleigh_capacity", [g10], mp.e ** mp.mpf(0.1) * mp.e1(mp.mpf(0.1)), "1e-12")
emit("mrc_capacity", [3, g10], mrc(3, g10), "1e-12")
emit("mrc_capacity", [2, g10], mrc(2, g10), "1e-12")
emit("iid_capacity", [4, g10], iid(4, g10), "1e-12")
emit("outage", [3, 0.5, 1.0], outage(1.0, mus(3, 0.5)), "1e-9")
emit("outage", [5, 1.0, 0.5], outage(0.25, mus(5, 1.0)), "1e-9")
emit("capacity", [10, 0.5, g10], capacity(10, 0.5, g10), "1e-7")
emit("capacity", [4, 1.0, g10], capacity(4, 1.0, g10), "1e-7")
emit("rayleigh_afd_norm", [1.0], (mp.e - 1) / (2 * mp.sqrt(mp.pi)), "1e-12")
emit("lcr_norm", [1.0], 2 * mp.sqrt(mp.pi) * mp.e ** -1, "1e-12")
