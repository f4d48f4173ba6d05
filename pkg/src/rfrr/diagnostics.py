"""Spectral diagnostics controlling how sharp the deterministic equivalent is.

Logs are natural logs. Indices are 1-based; ``floor(eta * k)`` is clamped to
at least 1, and eigenvalues past the end of the spectrum read as 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .fixed_point import DEFAULT_SETTINGS, SolverSettings, solve_nu
from .spectrum import Spectrum

DEFAULT_ETA = 0.25


@dataclass(frozen=True)
class DiagnosticsReport:
    m: int
    r_sigma_at: dict = field(default_factory=dict)
    m_sigma_at: dict = field(default_factory=dict)
    rho_p: float = math.nan
    rho_tilde_np: float = math.nan
    gamma_lambda: float = math.nan
    gamma_plus: float = math.nan
    err_rate: float = math.nan
    ratio1: float = math.nan
    ratio2: float = math.nan
    eta_star: float = DEFAULT_ETA
    rho_gamma_plus: float = math.nan
    nu1: float = math.nan
    nu2: float = math.nan


def intrinsic_dim(s: Spectrum, k: int) -> float:
    """Tail trace from index k over the k-th eigenvalue; ``inf`` when that eigenvalue is 0."""
    if not 1 <= k <= len(s):
        raise IndexError(f"k={k} outside 1..{len(s)}")
    ek = s.eig(k)
    if ek == 0:
        return math.inf
    return s.tail_trace(k) / ek


def _floor_index(eta, k):
    return max(1, int(math.floor(eta * k)))


def _r_or_k(s, j, k):
    # r_Sigma(j) v k; a zero eigenvalue at j carries no tail mass, so only k remains
    if j > len(s) or s.eig(j) == 0:
        return float(k)
    return max(intrinsic_dim(s, j), float(k))


def m_sigma(s: Spectrum, k: int, eta: float = DEFAULT_ETA) -> float:
    v = _r_or_k(s, _floor_index(eta, k), k)
    return 1.0 + v / k * math.log(v)


def rho(s: Spectrum, kappa: float, p: int, eta: float = DEFAULT_ETA) -> float:
    return 1.0 + p * s.eig(_floor_index(eta, p)) / kappa * m_sigma(s, p, eta)


def rho_tilde(s: Spectrum, kappa: float, n: int, p: int, eta: float = DEFAULT_ETA) -> float:
    if n > p / eta:
        return 1.0
    inner = n * s.eig(_floor_index(eta, n)) / kappa + n / p * rho(s, kappa, p, eta)
    return 1.0 + inner * m_sigma(s, n, eta)


def choose_m(n, p, lam, s: Spectrum) -> int:
    """Smallest m with ``p xi_{m+1}^2 <= (lam/n) sum_{k > m} xi_k^2`` (m = len(s) always works)."""
    if not lam > 0:
        raise ValueError("lam must be > 0")
    eigs = s.eigs
    # tails[m] = sum_{k >= m+1} xi_k^2, accumulated from the small end
    tails = np.cumsum(eigs[::-1])[::-1]
    ok = p * eigs <= (lam / n) * tails
    idx = np.flatnonzero(ok)
    return int(idx[0]) if idx.size else len(s)


def approximation_rate(n, p, rho_tilde_lam, rho_gamma_plus):
    return (
        rho_tilde_lam**6 * math.log(n) ** 3.5 / math.sqrt(n)
        + rho_tilde_lam**2 * rho_gamma_plus**8 * math.log(p) ** 3.5 / math.sqrt(p)
    )


def theorem1_diagnostics(n, p, lam, sigma2, s: Spectrum, eta_star: float = DEFAULT_ETA,
                         settings: SolverSettings = DEFAULT_SETTINGS, m: int | None = None) -> DiagnosticsReport:
    """All approximation-rate diagnostics at (n, p, lam).

    ``m`` defaults to :func:`choose_m`. ``sigma2`` does not enter any of the
    quantities; it is accepted so call sites mirror the risk functions.
    """
    if not 0 < eta_star < 0.5:
        raise ValueError("eta_star must lie in (0, 1/2)")
    fp = solve_nu(n, p, lam, s, settings)
    if m is None:
        m = choose_m(n, p, lam, s)
    tail = s.tail_trace(m + 1)
    gamma_lambda = p * lam / n + tail
    gamma_plus = p * fp.nu1 + tail
    rho_tilde_lam = rho_tilde(s, lam, n, p, eta_star)
    rho_gp = rho(s, gamma_plus, p, eta_star)
    t11, t22, _, q1, q2, _ = kernels.resolvent_sums(s.eigs, s.target, fp.nu2)
    jn, jp = _floor_index(eta_star, n), _floor_index(eta_star, p)
    r_at = {j: (intrinsic_dim(s, j) if j <= len(s) else math.inf) for j in sorted({jn, jp})}
    return DiagnosticsReport(
        m=m,
        r_sigma_at=r_at,
        m_sigma_at={n: m_sigma(s, n, eta_star), p: m_sigma(s, p, eta_star)},
        rho_p=rho(s, lam, p, eta_star),
        rho_tilde_np=rho_tilde_lam,
        gamma_lambda=gamma_lambda,
        gamma_plus=gamma_plus,
        err_rate=approximation_rate(n, p, rho_tilde_lam, rho_gp),
        ratio1=t11 / t22 if t22 > 0 else math.inf,
        ratio2=q1 / (fp.nu2 * q2) if q2 > 0 else math.inf,
        eta_star=eta_star,
        rho_gamma_plus=rho_gp,
        nu1=fp.nu1,
        nu2=fp.nu2,
    )
