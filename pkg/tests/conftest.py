import math

import numpy as np
import pytest

from rfrr.spectrum import explicit_spectrum, power_law_spectrum


def bisect(f, lo, hi, iters=400):
    """Plain bisection in log-space; f(lo) and f(hi) must differ in sign."""
    flo = f(lo)
    a, b = math.log(lo), math.log(hi)
    for _ in range(iters):
        m = 0.5 * (a + b)
        fm = f(math.exp(m))
        if fm == 0:
            return math.exp(m)
        if (fm > 0) == (flo > 0):
            a, flo = m, fm
        else:
            b = m
        if b - a < 1e-15:
            break
    return math.exp(0.5 * (a + b))


def oracle_nu(n, p, lam, eigs):
    """Independent solution of the coupled system.

    nu1 is taken from the first equation, nu1 = lam / (n - Tr S(S+nu2)^-1),
    and the second equation is bisected in nu2 (it is increasing there).
    """
    eigs = np.asarray(eigs, dtype=float)

    def trace(nu2):
        return math.fsum(eigs / (eigs + nu2))

    def h(nu2):
        t = trace(nu2)
        if t >= n:
            return -math.inf
        nu1 = lam / (n - t)
        return p - p * nu1 / nu2 - t

    lo, hi = lam / n, lam / n + float(eigs.sum()) + 1.0
    while h(lo) > 0:
        lo /= 2
    while h(hi) < 0:
        hi *= 2
    nu2 = bisect(h, lo, hi)
    return lam / (n - trace(nu2)), nu2


@pytest.fixture
def rank1():
    return explicit_spectrum([1.0], [1.0])


@pytest.fixture
def pl_small():
    return power_law_spectrum(2.0, 0.75, trunc=1000)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(mod.RESULTS, key=lambda l: int(l.split()[1].rstrip(":"))):
        terminalreporter.write_line(line)
