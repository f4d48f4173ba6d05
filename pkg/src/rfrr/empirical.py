"""Spectrum estimation from samples via the empirical Gram matrix.

The kernel ``K(x, x') = mean_j phi(x, w_j) phi(x', w_j)`` is diagonalized on
N samples; eigenvectors are rescaled so that ``psi_k . psi_k' = N delta``,
which makes them orthonormal under the empirical measure. Labels are
projected onto them to estimate the target coefficients. With noisy labels
the coefficients absorb the noise; no denoising is attempted.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .equivalents import RiskEquivalent, deterministic_risk
from .features import FeatureMapSpec
from .fixed_point import DEFAULT_SETTINGS, SolverSettings
from .spectrum import Spectrum


class EmpiricalSpectrumError(ArithmeticError):
    pass


@dataclass(frozen=True, eq=False)
class EmpiricalSpectrum:
    xi_sq: np.ndarray
    beta: np.ndarray
    N: int
    P: int
    psi: np.ndarray | None = None  # (N, N), column k is psi_k
    gram_trace: float = math.nan
    clamped: int = 0

    def to_spectrum(self) -> Spectrum:
        return Spectrum(self.xi_sq, self.beta, {"source": "empirical", "N": self.N, "P": self.P})


def gram_matrix(X, W, fm: FeatureMapSpec, block=1024):
    """``(N P)^-1 Phi Phi^T`` assembled over column blocks of the weights."""
    X = np.asarray(X, dtype=float)
    W = np.asarray(W, dtype=float)
    N, P = X.shape[0], W.shape[0]
    K = np.zeros((N, N))
    for start in range(0, P, block):
        phi = fm.features(X, W[start : start + block])
        if not np.all(np.isfinite(phi)):
            raise EmpiricalSpectrumError("non-finite feature values")
        K += phi @ phi.T
    K /= N * P
    return K


def empirical_diagonalize(X, y, W, fm: FeatureMapSpec, clamp_rel=1e-10, block=1024,
                          keep_vectors=True) -> EmpiricalSpectrum:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    W = np.atleast_2d(np.asarray(W, dtype=float))
    N, P = X.shape[0], W.shape[0]
    if N < 1 or P < 1:
        raise ValueError("need N >= 1 samples and P >= 1 weights")
    if y.size != N:
        raise ValueError(f"y has {y.size} entries for {N} samples")
    K = gram_matrix(X, W, fm, block)
    K = 0.5 * (K + K.T)
    trace = float(np.trace(K))
    try:
        evals, vecs = sla.eigh(K, check_finite=False)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise EmpiricalSpectrumError(f"eigensolver failed: {exc}") from exc
    order = np.argsort(evals)[::-1]
    evals, vecs = evals[order], vecs[:, order]
    thresh = clamp_rel * abs(trace)
    if np.any(evals < -thresh):
        raise EmpiricalSpectrumError(
            f"Gram matrix has eigenvalue {evals.min():.3e} below -{thresh:.3e}"
        )
    clamped = int(np.count_nonzero(evals < 0))
    evals = np.clip(evals, 0.0, None)
    # deterministic sign: largest-magnitude entry of each eigenvector positive
    pivot = vecs[np.argmax(np.abs(vecs), axis=0), np.arange(N)]
    vecs = vecs * np.where(pivot < 0, -1.0, 1.0)[None, :]
    psi = vecs * math.sqrt(N)
    beta = psi.T @ y / N
    return EmpiricalSpectrum(evals, beta, N, P, psi if keep_vectors else None, trace, clamped)


def predict_risk_from_data(X, y, W, fm: FeatureMapSpec, n, p, lam, sigma2,
                           settings: SolverSettings = DEFAULT_SETTINGS) -> RiskEquivalent:
    """Deterministic-equivalent risk at (n, p, lam) for the estimated spectrum."""
    est = empirical_diagonalize(X, y, W, fm, keep_vectors=False)
    return deterministic_risk(n, p, lam, sigma2, est.to_spectrum(), settings)


def load_matrix(path, standardize=False):
    """Read a headerless numeric CSV; optionally z-score each column."""
    A = np.loadtxt(path, delimiter=",", ndmin=2)
    if standardize:
        A = standardize_columns(A)
    return A


def standardize_columns(A):
    A = np.asarray(A, dtype=float)
    sd = A.std(axis=0)
    sd[sd == 0] = 1.0
    return (A - A.mean(axis=0)) / sd
