"""Deterministic equivalents of the RFRR bias, variance and risk."""
from __future__ import annotations

from dataclasses import dataclass

from . import kernels
from .fixed_point import (
    DEFAULT_SETTINGS,
    FixedPoint,
    SolverSettings,
    solve_nu,
    solve_nu_approx,
    solve_nu_kernel,
)
from .spectrum import Spectrum


class OutOfRegimeError(ArithmeticError):
    """Upsilon >= 1 or a degenerate denominator: the equivalent is undefined."""


@dataclass(frozen=True)
class RiskEquivalent:
    upsilon: float
    chi: float
    bias: float
    variance: float
    risk: float
    nu1: float = float("nan")
    nu2: float = float("nan")


def _upsilon_chi(nu1, nu2, n, p, t22, t12):
    denom = p - t22
    if not denom > 0:
        raise OutOfRegimeError(f"p - Tr(S^2(S+nu2)^-2) = {denom:.3e} <= 0")
    ratio = nu1 / nu2
    upsilon = (p / n) * ((1.0 - ratio) ** 2 + ratio**2 * t22 / denom)
    return upsilon, t12 / denom


def upsilon_chi(fp: FixedPoint, n, p, s: Spectrum):
    """Return ``(upsilon, chi)`` at the fixed point ``fp``."""
    _, t22, t12, *_ = kernels.resolvent_sums(s.eigs, s.target, fp.nu2)
    return _upsilon_chi(fp.nu1, fp.nu2, float(n), float(p), t22, t12)


def risk_at_fixed_point(fp: FixedPoint, n, p, sigma2, s: Spectrum) -> RiskEquivalent:
    nu2 = fp.nu2
    _, t22, t12, _, q2, q12 = kernels.resolvent_sums(s.eigs, s.target, nu2)
    upsilon, chi = _upsilon_chi(fp.nu1, nu2, float(n), float(p), t22, t12)
    if not upsilon < 1:
        raise OutOfRegimeError(f"upsilon = {upsilon:.6g} >= 1")
    bias = nu2 * nu2 / (1.0 - upsilon) * (q2 + chi * q12)
    variance = sigma2 * upsilon / (1.0 - upsilon)
    return RiskEquivalent(upsilon, chi, bias, variance, bias + variance, fp.nu1, nu2)


def deterministic_risk(n, p, lam, sigma2, s: Spectrum, settings: SolverSettings = DEFAULT_SETTINGS) -> RiskEquivalent:
    if sigma2 < 0:
        raise ValueError("sigma2 must be >= 0")
    fp = solve_nu(n, p, lam, s, settings)
    return risk_at_fixed_point(fp, n, p, sigma2, s)


def kernel_limit_risk(n, lam, sigma2, s: Spectrum, settings: SolverSettings = DEFAULT_SETTINGS) -> RiskEquivalent:
    """p -> inf limit: both effective regularizations merge into ``nu_K``."""
    if sigma2 < 0:
        raise ValueError("sigma2 must be >= 0")
    nu = solve_nu_kernel(n, lam, s, settings)
    _, t22, _, _, q2, _ = kernels.resolvent_sums(s.eigs, s.target, nu)
    denom = n - t22
    if not denom > 0:
        raise OutOfRegimeError(f"n - Tr(S^2(S+nu_K)^-2) = {denom:.3e} <= 0")
    upsilon = t22 / n
    bias = nu * nu * q2 / (1.0 - upsilon)
    variance = sigma2 * t22 / denom
    return RiskEquivalent(upsilon, 0.0, bias, variance, bias + variance, nu, nu)


def approximation_limit_risk(p, s: Spectrum, settings: SolverSettings = DEFAULT_SETTINGS) -> float:
    """n -> inf limit: the approximation error of width ``p``."""
    nu = solve_nu_approx(p, s, settings)
    if nu == 0.0:
        # limit nu -> 0+: only directions outside the span survive
        return float(sum(s.target[s.eigs == 0] ** 2))
    _, _, _, q1, _, _ = kernels.resolvent_sums(s.eigs, s.target, nu)
    return nu * q1
