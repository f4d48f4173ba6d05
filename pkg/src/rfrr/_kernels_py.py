"""Pure-numpy implementations of the hot spectral kernels.

These mirror ``_kernels.pyx`` one-to-one and are used when the compiled
extension is unavailable (or ``RFRR_PURE_PYTHON=1`` is set).
Spectra are stored non-increasing, so every sum is taken over the reversed
array: tail terms are accumulated first.
"""
import math

import numpy as np

CONVERGED = 0
STALLED = 1
MAX_ITER = 2


def nu1_from_nu2(n, p, lam, nu2):
    c = n / p
    d = (1.0 - c) ** 2 + 4.0 * lam / (p * nu2)
    s = math.sqrt(d)
    if c <= 1.0:
        return 0.5 * nu2 * ((1.0 - c) + s)
    # rationalized to avoid cancellation between s and c - 1
    return 2.0 * lam / (p * (s + c - 1.0))


def trace_power(eigs, nu, a, b):
    e = eigs[::-1]
    return float(np.sum(e**a / (e + nu) ** b))


def resolvent_sums(eigs, target, nu):
    """Return (t11, t22, t12, q1, q2, q12) at regularization ``nu``.

    t11 = Tr S(S+nu)^-1, t22 = Tr S^2(S+nu)^-2, t12 = Tr S(S+nu)^-2,
    q1 = <b,(S+nu)^-1 b>, q2 = <b,(S+nu)^-2 b>, q12 = <b,S(S+nu)^-2 b>.
    """
    e = eigs[::-1]
    b2 = target[::-1] ** 2
    inv = 1.0 / (e + nu)
    inv2 = inv * inv
    return (
        float(np.sum(e * inv)),
        float(np.sum(e * e * inv2)),
        float(np.sum(e * inv2)),
        float(np.sum(b2 * inv)),
        float(np.sum(b2 * inv2)),
        float(np.sum(b2 * e * inv2)),
    )


def iterate_fixed_point(eigs, n, p, lam, nu2, tol, max_iter, damping, stall_window):
    """Run the alternating (nu1, nu2) update until the relative change drops below tol.

    Returns (nu1, nu2, iterations, status, last_rel_change).
    """
    e = np.ascontiguousarray(eigs[::-1])
    history = np.empty(stall_window)
    nu1 = nu1_from_nu2(n, p, lam, nu2)
    change = math.inf
    for it in range(1, max_iter + 1):
        nu1 = nu1_from_nu2(n, p, lam, nu2)
        t11 = float(np.sum(e / (e + nu2)))
        new = nu1 + nu2 * t11 / p
        new = (1.0 - damping) * nu2 + damping * new
        change = abs(new - nu2) / nu2
        nu2 = new
        if change <= tol:
            return nu1_from_nu2(n, p, lam, nu2), nu2, it, CONVERGED, change
        slot = it % stall_window
        if it > stall_window and change > 0.1 * history[slot]:
            return nu1, nu2, it, STALLED, change
        history[slot] = change
    return nu1, nu2, max_iter, MAX_ITER, change


def t_sum(s, delta, gamma, nu, alpha, trunc):
    k = np.arange(trunc, 0, -1, dtype=float)
    return float(np.sum(k ** (-s - delta * alpha) / (k**-alpha + nu) ** gamma))
