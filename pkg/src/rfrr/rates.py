"""Closed-form scaling exponents under power-law source/capacity conditions.

With ``p = n**q`` and ``lam = n**-(ell - 1)`` the risk equivalent decays as
``n**-gamma``. Formulas accept ``fractions.Fraction`` inputs and then stay
exact; floats give floats.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import kernels

HALF = Fraction(1, 2)

BIAS_DOMINATED = "bias-dominated"
VARIANCE_SLOW = "variance-slow"
PLATEAU = "plateau"
BOUNDARY_SUFFIX = "+boundary"


@dataclass(frozen=True)
class ScalingConfig:
    alpha: float
    r: float
    ell: float
    q: float
    sigma2: float = 1.0

    def __post_init__(self):
        if not self.alpha > 1:
            raise ValueError("alpha must be > 1")
        if not self.r > 0:
            raise ValueError("r must be > 0")
        if self.ell < 0 or self.q < 0:
            raise ValueError("ell and q must be >= 0")
        if self.sigma2 < 0:
            raise ValueError("sigma2 must be >= 0")


@dataclass(frozen=True)
class Crossovers:
    ell_star: float
    q_star: float
    q_hat: float
    gamma_star: float
    q0: float


@dataclass(frozen=True)
class RateReport:
    gamma_b: float
    gamma_v: float
    gamma: float
    region: str
    crossovers: Crossovers
    valid: bool


def _exact(*xs):
    # integers and fractions are promoted so that the whole formula stays rational
    if all(isinstance(x, (int, Fraction)) and not isinstance(x, bool) for x in xs):
        return tuple(Fraction(x) for x in xs)
    return xs


def _effective(alpha, ell, q):
    # the common min(ell/alpha, q, 1)
    return min(ell / alpha, q, 1)


def gamma_bias(alpha, r, ell, q):
    alpha, r, ell, q = _exact(alpha, r, ell, q)
    m = _effective(alpha, ell, q)
    return min(2 * alpha * m * min(r, 1), (2 * alpha * min(r, HALF) - 1) * m + q)


def gamma_variance(alpha, ell, q):
    alpha, ell, q = _exact(alpha, ell, q)
    return 1 - _effective(alpha, ell, q)


def gamma_total(alpha, r, ell, q, sigma2=1.0):
    gb = gamma_bias(alpha, r, ell, q)
    return min(gb, gamma_variance(alpha, ell, q)) if sigma2 > 0 else gb


def crossovers(alpha, r) -> Crossovers:
    if not alpha > 1 or not r > 0:
        raise ValueError("need alpha > 1 and r > 0")
    alpha, r = _exact(alpha, r)
    r1 = min(r, 1)
    two_r = min(2 * r, 1)
    ell_star = alpha / (2 * alpha * r1 + 1)
    return Crossovers(
        ell_star=ell_star,
        q_star=1 - ell_star * two_r,
        q_hat=1 / (alpha * two_r + 1),
        gamma_star=2 * alpha * r1 / (2 * alpha * r1 + 1),
        q0=(alpha - 1 + 2 * r) / (1 + 2 * alpha * r),
    )


def region_label(alpha, ell, q, gamma_b, gamma_v, sigma2=1.0):
    if ell >= alpha and q >= 1:
        return PLATEAU
    if sigma2 == 0:
        return BIAS_DOMINATED
    if gamma_v < gamma_b:
        return VARIANCE_SLOW
    if gamma_v > gamma_b:
        return BIAS_DOMINATED
    return VARIANCE_SLOW + BOUNDARY_SUFFIX


def validity_region(alpha, ell, q) -> bool:
    """Whether the (ell, q) scaling keeps the approximation rate vanishing."""
    if not alpha > 1:
        raise ValueError("alpha must be > 1")
    if q >= 1:
        return ell <= alpha + Fraction(1, 12)
    return ell <= q * max(alpha + Fraction(1, 16), 1 / (16 * (alpha - 1)))


def rate_exponents(cfg: ScalingConfig) -> RateReport:
    a, r, ell, q = cfg.alpha, cfg.r, cfg.ell, cfg.q
    gb = gamma_bias(a, r, ell, q)
    gv = gamma_variance(a, ell, q)
    g = min(gb, gv) if cfg.sigma2 > 0 else gb
    return RateReport(
        gamma_b=gb,
        gamma_v=gv,
        gamma=g,
        region=region_label(a, ell, q, gb, gv, cfg.sigma2),
        crossovers=crossovers(a, r),
        valid=validity_region(a, ell, q),
    )


def optimal_set_distance(alpha, r, ell, q):
    """Distance from (ell, q) to the set where gamma reaches its optimum.

    For r >= 1/2 that set is ``ell = ell_star, q >= q_star``; for r < 1/2 it
    also contains ``ell >= ell_star, q = q_star``.
    """
    c = crossovers(alpha, r)
    d_vert = abs(ell - c.ell_star) + max(c.q_star - q, 0)
    if r >= HALF:
        return d_vert
    d_horiz = abs(q - c.q_star) + max(c.ell_star - ell, 0)
    return min(d_vert, d_horiz)


def t_sum(s_exp, delta, gamma_exp, nu, alpha, trunc):
    """Partial sum of ``k**(-s - delta alpha) / (k**-alpha + nu)**gamma`` over k <= trunc."""
    if not nu > 0:
        raise ValueError("nu must be > 0")
    return kernels.t_sum(int(s_exp), float(delta), float(gamma_exp), float(nu), float(alpha), int(trunc))


def t_sum_exponent(s_exp, delta, gamma_exp, alpha):
    """Small-nu exponent of the sum: ``min((s - 1 + alpha (delta - gamma)) / alpha, 0)``."""
    return min((s_exp - 1 + alpha * (delta - gamma_exp)) / alpha, 0)
