"""Feature spectra: squared eigenvalues and target coefficients."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels

DEFAULT_TRUNC = 10_000


class SpectrumError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Squared eigenvalues ``eigs`` (non-increasing, >= 0) and target coefficients.

    Only squares are stored; signs of the operator eigenvalues never enter
    the deterministic-equivalent formulas. Arrays are made read-only.
    """

    eigs: np.ndarray
    target: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        eigs = np.array(self.eigs, dtype=np.float64).ravel()
        target = np.array(self.target, dtype=np.float64).ravel()
        if eigs.shape != target.shape:
            raise SpectrumError(
                f"eigs and target lengths differ ({eigs.size} vs {target.size})"
            )
        if eigs.size == 0:
            raise SpectrumError("spectrum is empty")
        if not (np.all(np.isfinite(eigs)) and np.all(np.isfinite(target))):
            raise SpectrumError("spectrum contains non-finite values")
        if np.any(eigs < 0):
            raise SpectrumError("negative eigenvalue")
        if np.any(np.diff(eigs) > 0):
            raise SpectrumError("eigenvalues must be non-increasing")
        eigs.flags.writeable = False
        target.flags.writeable = False
        object.__setattr__(self, "eigs", eigs)
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "meta", dict(self.meta))

    def __len__(self):
        return self.eigs.size

    @property
    def trace(self) -> float:
        return float(np.sum(self.eigs[::-1]))

    @property
    def rank(self) -> int:
        return int(np.count_nonzero(self.eigs))

    def tail_trace(self, start: int) -> float:
        """Sum of eigs from 1-based index ``start`` onwards (0 past the end)."""
        if start > len(self):
            return 0.0
        return float(np.sum(self.eigs[max(start, 1) - 1 :][::-1]))

    def eig(self, k: int) -> float:
        """1-based eigenvalue lookup; indices past the end read as 0."""
        if k < 1:
            raise IndexError("spectrum indices start at 1")
        return float(self.eigs[k - 1]) if k <= len(self) else 0.0

    def with_target(self, target) -> "Spectrum":
        return Spectrum(self.eigs, target, self.meta)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["xi_sq", "beta_star"])
            for e, b in zip(self.eigs, self.target):
                w.writerow([repr(float(e)), repr(float(b))])

    @classmethod
    def from_csv(cls, path) -> "Spectrum":
        path = Path(path)
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
        if not rows:
            raise SpectrumError(f"{path}: empty file")
        header = [h.strip() for h in rows[0]]
        if header[:2] != ["xi_sq", "beta_star"]:
            raise SpectrumError(f"{path}: expected header 'xi_sq,beta_star', got {rows[0]}")
        try:
            data = np.array([[float(v) for v in r[:2]] for r in rows[1:]])
        except ValueError as exc:
            raise SpectrumError(f"{path}: {exc}") from None
        if data.size == 0:
            raise SpectrumError(f"{path}: no data rows")
        return cls(data[:, 0], data[:, 1], {"source": str(path)})


def power_law_spectrum(alpha: float, r: float, trunc: int = DEFAULT_TRUNC) -> Spectrum:
    """Eigenvalues ``k**-alpha`` and coefficients ``k**-(1 + 2 alpha r)/2``, k = 1..trunc."""
    if not alpha > 1:
        raise SpectrumError(f"alpha must be > 1 (got {alpha}); the trace diverges otherwise")
    if not r > 0:
        raise SpectrumError(f"r must be > 0 (got {r})")
    if int(trunc) != trunc or trunc < 1:
        raise SpectrumError(f"trunc must be a positive integer (got {trunc})")
    k = np.arange(1, int(trunc) + 1, dtype=np.float64)
    return Spectrum(
        k**-alpha,
        k ** (-(1.0 + 2.0 * alpha * r) / 2.0),
        {"alpha": alpha, "r": r, "trunc": int(trunc)},
    )


def explicit_spectrum(eigs, target) -> Spectrum:
    return Spectrum(eigs, target)


def trace_resolvent(s: Spectrum, nu: float, power_sigma: int = 1, power_res: int = 1) -> float:
    """``sum_k xi_k^(2a) / (xi_k^2 + nu)^b`` with a = power_sigma, b = power_res."""
    if not nu > 0:
        raise ValueError(f"nu must be > 0 (got {nu})")
    if power_sigma not in (1, 2) or power_res not in (1, 2):
        raise ValueError("powers must be 1 or 2")
    return kernels.trace_power(s.eigs, float(nu), power_sigma, power_res)
