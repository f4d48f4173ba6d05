"""Self-consistent equations for the effective regularizations (nu1, nu2).

The coupled system solved here is

    n - lam / nu1      = Tr S (S + nu2)^-1
    p - p nu1 / nu2    = Tr S (S + nu2)^-1

together with its two limits: p -> inf (single ``nu_K``) and n -> inf
(``nu_A`` solving ``p = Tr S (S + nu_A)^-1``).
"""
from __future__ import annotations

import math

import numpy as np
from dataclasses import dataclass

from scipy.optimize import brentq

from . import kernels
from .spectrum import Spectrum


@dataclass(frozen=True)
class SolverSettings:
    tol: float = 1e-10
    max_iter: int = 100_000
    damping: float = 1.0
    stall_window: int = 100

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be > 0")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if not 0 < self.damping <= 1:
            raise ValueError("damping must lie in (0, 1]")
        if self.stall_window < 1:
            raise ValueError("stall_window must be >= 1")


DEFAULT_SETTINGS = SolverSettings()


@dataclass(frozen=True)
class FixedPoint:
    nu1: float
    nu2: float
    iterations: int
    residual: float
    method: str = "iteration"


class FixedPointError(ArithmeticError):
    """Raised when the solver cannot reach tolerance; carries the last iterate."""

    def __init__(self, message, last: FixedPoint | None = None):
        super().__init__(message)
        self.last = last


def _check(n, lam, p=1):
    if not lam > 0:
        raise ValueError(f"lam must be > 0 (got {lam}); probe lam -> 0+ instead")
    if n < 1 or p < 1:
        raise ValueError("n and p must be positive")


def coupled_residuals(n, p, lam, nu1, nu2, s: Spectrum):
    t11 = kernels.trace_power(s.eigs, nu2, 1, 1)
    return n - lam / nu1 - t11, p - p * nu1 / nu2 - t11


def _residual(n, p, lam, nu1, nu2, s):
    return max(abs(r) for r in coupled_residuals(n, p, lam, nu1, nu2, s))


def _rounding_floor(n, p):
    # p - p nu1/nu2 cannot be evaluated more accurately than ~p ulps
    return 8.0 * np.finfo(float).eps * (n + p)


def _bracket_log(f, lo, hi):
    """Expand ``[lo, hi]`` (log-scale) until an increasing ``f`` changes sign."""
    flo, fhi = f(lo), f(hi)
    while flo > 0:
        lo -= math.log(4.0)
        flo = f(lo)
        if lo < -700:
            raise FixedPointError("could not bracket root from below")
    while fhi < 0:
        hi += math.log(4.0)
        fhi = f(hi)
        if hi > 700:
            raise FixedPointError("could not bracket root from above")
    return lo, hi, flo, fhi


def _solve_scalar(n, p, lam, s: Spectrum, guess=None, width=1e-6):
    """Bracketed solve of the nu2 equation with nu1 eliminated.

    With ``guess`` the bracket starts at ``guess * exp(+-width)`` and is
    widened only as needed.
    """
    eigs = s.eigs
    c = n / p

    def h(x):
        # p (1 - nu1/nu2) rationalized to 2 (n - lam/nu2) / (1 + c + sqrt(D)),
        # which avoids the p-sized cancellation when p >> n
        nu2 = math.exp(x)
        root = math.sqrt((1.0 - c) ** 2 + 4.0 * lam / (p * nu2))
        return 2.0 * (n - lam / nu2) / (1.0 + c + root) - kernels.trace_power(eigs, nu2, 1, 1)

    lo = math.log(lam / n)
    # h(lam/n) = -Tr(...) <= 0 exactly; zero spectrum gives the root itself
    if h(lo) >= 0:
        return math.exp(lo)
    if guess is not None and guess > lam / n:
        x0 = math.log(guess)
        lo, hi = max(lo, x0 - width), x0 + width
    else:
        hi = math.log(lam / n + max(s.trace, lam / n) / p)
    lo, hi, flo, fhi = _bracket_log(h, lo, hi)
    if fhi == 0:
        return math.exp(hi)
    x = brentq(h, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=500)
    return math.exp(x)


def solve_nu(n: int, p: int, lam: float, s: Spectrum, settings: SolverSettings = DEFAULT_SETTINGS) -> FixedPoint:
    """Solve for (nu1, nu2).

    Runs the alternating update nu1 <- nu1(nu2), nu2 <- nu1 + nu2 Tr(S(S+nu2)^-1)/p,
    then polishes the iterate with a narrow bracketed root solve. When the
    iteration stalls the bracketed solve starts from the global bracket
    [lam/n, ...] instead.
    """
    _check(n, lam, p)
    n, p, lam = float(n), float(p), float(lam)
    nu2_0 = lam / n + s.trace / p
    nu1, nu2, iters, status, _ = kernels.iterate_fixed_point(
        s.eigs, n, p, lam, nu2_0, settings.tol, settings.max_iter,
        settings.damping, settings.stall_window,
    )
    res = _residual(n, p, lam, nu1, nu2, s)
    last = FixedPoint(nu1, nu2, int(iters), res, "iteration")
    converged = status == kernels.CONVERGED
    try:
        if converged:
            # polish the iterate to machine precision in a narrow bracket
            nu2 = _solve_scalar(n, p, lam, s, guess=nu2, width=max(1e-12, 1e3 * settings.tol))
        else:
            nu2 = _solve_scalar(n, p, lam, s)
    except (FixedPointError, ValueError, RuntimeError) as exc:
        raise FixedPointError(f"fixed point failed: {exc}", last) from exc
    nu1 = kernels.nu1_from_nu2(n, p, lam, nu2)
    res = _residual(n, p, lam, nu1, nu2, s)
    fp = FixedPoint(nu1, nu2, int(iters), res, "iteration" if converged else "bracketed")
    bound = max(settings.tol * n, _rounding_floor(n, p))
    if not res <= bound:
        raise FixedPointError(
            f"residual {res:.3e} above tolerance {bound:.3e} "
            f"(n={n:g}, p={p:g}, lam={lam:g})",
            fp,
        )
    return fp


def solve_nu_kernel(n: int, lam: float, s: Spectrum, settings: SolverSettings = DEFAULT_SETTINGS) -> float:
    """Unique positive root of ``n - lam/nu = Tr S (S + nu)^-1``."""
    _check(n, lam)
    n, lam = float(n), float(lam)
    eigs = s.eigs

    def f(x):
        nu = math.exp(x)
        return n - lam / nu - kernels.trace_power(eigs, nu, 1, 1)

    lo = math.log(lam / n)
    if f(lo) >= 0:
        return math.exp(lo)
    hi = math.log(lam / n + s.trace / n + lam)
    lo, hi, _, fhi = _bracket_log(f, lo, hi)
    if fhi == 0:
        return math.exp(hi)
    nu = math.exp(brentq(f, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=500))
    if abs(f(math.log(nu))) > settings.tol * n:
        raise FixedPointError(f"kernel-limit residual above tolerance (n={n:g}, lam={lam:g})")
    return nu


def solve_nu_approx(p: int, s: Spectrum, settings: SolverSettings = DEFAULT_SETTINGS) -> float:
    """``nu_A`` solving ``p = Tr S (S + nu_A)^-1``; 0 when p reaches the rank."""
    if p < 1:
        raise ValueError("p must be positive")
    p = float(p)
    if p >= s.rank:
        return 0.0
    eigs = s.eigs

    def g(x):
        # increasing in x
        return p - kernels.trace_power(eigs, math.exp(x), 1, 1)

    hi = math.log(s.trace / p)  # T(trace/p) <= p
    lo = hi - math.log(4.0)
    lo, hi, _, fhi = _bracket_log(g, lo, hi)
    if fhi == 0:
        return math.exp(hi)
    return math.exp(brentq(g, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=500))
