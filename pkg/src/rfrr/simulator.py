"""Monte Carlo random feature ridge regression.

Two designs are supported. The Gaussian feature-space design draws
``g_i ~ N(0, I_K)`` and ``f_j ~ N(0, Sigma)`` and scores each fit with the
exact conditional bias/variance, so only design randomness remains. Explicit
feature maps are scored on a held-out test set with noiseless labels.

Replicate ``i`` draws from its own Philox stream keyed by ``(seed, i)``, so
results do not depend on how replicates are scheduled across workers.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from threadpoolctl import threadpool_limits

from .features import FeatureMapSpec, TargetSpec
from .spectrum import Spectrum

_REPLICATE = 0
TARGET_STREAM = 1


def stream(seed, *key):
    """Counter-based generator for the stream ``(seed, *key)``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=key)))


def default_threads():
    env = os.environ.get("RFRR_THREADS")
    return max(1, int(env)) if env else 1


@dataclass(frozen=True)
class GaussianDesign:
    G: np.ndarray  # (n, K) covariates in feature space
    F: np.ndarray  # (p, K) weight features, rows ~ N(0, Sigma)
    Z: np.ndarray  # (n, p) = G F^T / sqrt(p)

    @property
    def sigma_f(self):
        p = self.F.shape[0]
        return self.F @ self.F.T / p


def sample_gaussian_design(n, p, s: Spectrum, rng) -> GaussianDesign:
    K = len(s)
    G = rng.standard_normal((n, K))
    F = rng.standard_normal((p, K)) * np.sqrt(s.eigs)[None, :]
    Z = G @ F.T / math.sqrt(p)
    return GaussianDesign(G, F, Z)


@dataclass(frozen=True)
class McEstimate:
    mean_risk: float
    std_err: float
    replicates: int
    per_replicate: tuple | None = None
    mean_bias: float = float("nan")
    mean_variance: float = float("nan")


class SingularSystemError(np.linalg.LinAlgError):
    pass


def ridge_fit(Z, y, lam, allow_pinv=True):
    """Minimizer of ``||y - Z a||^2 + lam ||a||^2``.

    Cholesky on ``Z^T Z + lam I``; at ``lam == 0`` a singular Gram matrix falls
    back to the minimum-norm least-squares solution when ``allow_pinv``.
    """
    if lam < 0:
        raise ValueError("lam must be >= 0")
    Z = np.asarray(Z, dtype=float)
    y = np.asarray(y, dtype=float)
    A = Z.T @ Z
    A[np.diag_indices_from(A)] += lam
    rhs = Z.T @ y
    try:
        c = sla.cho_factor(A, lower=True, check_finite=False)
        diag = np.abs(np.diag(c[0]))
        # at lam = 0 a numerically rank-deficient Gram matrix still factors;
        # treat pivots at roundoff level as singular
        if lam > 0 or diag.min() ** 2 > A.shape[0] * np.finfo(float).eps * diag.max() ** 2:
            return sla.cho_solve(c, rhs, check_finite=False)
    except np.linalg.LinAlgError:
        if lam > 0:
            raise
    if not allow_pinv:
        raise SingularSystemError("Z^T Z is singular at lam = 0")
    return np.linalg.lstsq(Z, y, rcond=None)[0]


def _spectral_ridge(ZtZ, lam):
    evals, U = np.linalg.eigh(ZtZ)
    evals = np.clip(evals, 0.0, None)
    if lam > 0:
        inv = 1.0 / (evals + lam)
    else:
        cut = evals.max(initial=0.0) * ZtZ.shape[0] * np.finfo(float).eps
        inv = np.where(evals > cut, 1.0 / np.where(evals > cut, evals, 1.0), 0.0)
    return evals, U, inv


def conditional_risk(design: GaussianDesign, beta_star, lam, sigma2, s: Spectrum | None = None):
    """Exact bias and variance of the fit conditional on (G, F).

    bias = ||beta - F^T (Z^T Z + lam)^-1 Z^T G beta / sqrt(p)||^2
    variance = sigma2 Tr(Sigma_F Z^T Z (Z^T Z + lam)^-2)
    """
    G, F, Z = design.G, design.F, design.Z
    beta = np.asarray(beta_star, dtype=float)
    n, p = Z.shape
    if G.shape != (n, beta.size) or F.shape != (p, beta.size):
        raise ValueError(
            f"dimension mismatch: G {G.shape}, F {F.shape}, Z {Z.shape}, beta {beta.shape}"
        )
    if s is not None and len(s) != beta.size:
        raise ValueError("spectrum length differs from design width")
    evals, U, inv = _spectral_ridge(Z.T @ Z, lam)
    v = Z.T @ (G @ beta)
    w = U @ (inv * (U.T @ v))
    resid = beta - F.T @ w / math.sqrt(p)
    bias = float(resid @ resid)
    if sigma2 == 0:
        return bias, 0.0
    # diag of U^T Sigma_F U, with Sigma_F = F F^T / p
    UF = U.T @ F
    weights = np.einsum("ij,ij->i", UF, UF) / p
    variance = sigma2 * float(np.sum(weights * evals * inv * inv))
    return bias, variance


def _run_replicates(fn, replicates, threads, blas_threads):
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    threads = default_threads() if threads is None else max(1, int(threads))
    with threadpool_limits(limits=blas_threads):
        if threads == 1:
            out = [fn(i) for i in range(replicates)]
        else:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                out = list(pool.map(fn, range(replicates)))
    return out


def _summarize(results, keep):
    arr = np.array(results, dtype=float)  # (R, 2) bias, variance
    risk = arr.sum(axis=1)
    R = len(risk)
    mean = float(math.fsum(risk) / R)
    se = float(np.std(risk, ddof=1) / math.sqrt(R)) if R > 1 else 0.0
    return McEstimate(
        mean,
        se,
        R,
        tuple(float(r) for r in risk) if keep else None,
        float(math.fsum(arr[:, 0]) / R),
        float(math.fsum(arr[:, 1]) / R),
    )


def mc_risk_gaussian(n, p, lam, sigma2, s: Spectrum, replicates=20, seed=0,
                     threads=None, blas_threads=1, keep=False) -> McEstimate:
    """Average conditional risk over independently drawn Gaussian designs."""

    def one(i):
        rng = stream(seed, _REPLICATE, i)
        design = sample_gaussian_design(n, p, s, rng)
        return conditional_risk(design, s.target, lam, sigma2)

    return _summarize(_run_replicates(one, replicates, threads, blas_threads), keep)


def feature_map_risk(fm: FeatureMapSpec, target: TargetSpec, X, y, W, X_test, lam):
    """Fit ridge on ``Z = phi(X, W) / sqrt(p)``; return mean squared test error."""
    p = W.shape[0]
    Z = fm.features(X, W) / math.sqrt(p)
    a = ridge_fit(Z, y, lam)
    pred = fm.features(X_test, W) @ a / math.sqrt(p)
    err = target(X_test) - pred
    return float(np.mean(err * err))


def mc_risk_feature_map(fm: FeatureMapSpec, target: TargetSpec, n, p, d, lam, sigma2,
                        n_test=None, replicates=20, seed=0, threads=None,
                        blas_threads=1, keep=False) -> McEstimate:
    """Held-out test risk of RFRR with an explicit feature map."""
    n_test = 10 * n if n_test is None else n_test
    if n_test < 1:
        raise ValueError("n_test must be >= 1")
    target = target.resolve(d, stream(seed, TARGET_STREAM))

    def one(i):
        rng = stream(seed, _REPLICATE, i)
        W = fm.sample_weights(p, d, rng)
        X = fm.sample_data(n, d, rng)
        y = target(X) + math.sqrt(sigma2) * rng.standard_normal(n)
        X_test = fm.sample_data(n_test, d, rng)
        return feature_map_risk(fm, target, X, y, W, X_test, lam), 0.0

    return _summarize(_run_replicates(one, replicates, threads, blas_threads), keep)
