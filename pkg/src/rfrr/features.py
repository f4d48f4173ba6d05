"""Random feature maps, data/weight samplers and teacher targets."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import erf

KINDS = ("erf", "tanh", "relu", "spiked", "conv_pooled", "linear")
ACTIVATIONS = {
    "linear": lambda z: z,
    "erf": erf,
    "tanh": np.tanh,
    "relu": lambda z: np.maximum(z, 0.0),
}


def _sphere(m, d, radius, rng):
    x = rng.standard_normal((m, d))
    x *= radius / np.linalg.norm(x, axis=1, keepdims=True)
    return x


@dataclass(frozen=True)
class FeatureMapSpec:
    """A feature map ``phi(x, w)`` together with how x and w are drawn.

    kind
        ``erf``, ``tanh``, ``relu`` and ``linear`` apply the activation to
        ``<w, x>``. ``spiked`` uses ``spike_activation(<w + u v, x>)`` with
        ``u ~ N(0, 1)`` per weight; the shift ``u v`` is folded into the
        sampled weights. ``conv_pooled`` averages ``relu(<w, g_l x>)`` over all
        cyclic shifts ``g_l``.
    weight_dist
        ``gaussian``: ``N(0, weight_scale**2 / d I)``; ``sphere``: uniform on
        the sphere of radius ``weight_scale``.
    data_dist
        ``gaussian``: ``N(0, I)``; ``sphere``: uniform on the sphere of radius
        ``data_radius`` (``sqrt(d)`` when unset).
    """

    kind: str = "relu"
    spike: np.ndarray | None = None
    spike_activation: str = "tanh"
    weight_dist: str = "gaussian"
    weight_scale: float = 1.0
    data_dist: str = "gaussian"
    data_radius: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown feature map kind {self.kind!r}; choose from {KINDS}")
        if self.weight_dist not in ("gaussian", "sphere"):
            raise ValueError(f"unknown weight_dist {self.weight_dist!r}")
        if self.data_dist not in ("gaussian", "sphere"):
            raise ValueError(f"unknown data_dist {self.data_dist!r}")
        if self.spike_activation not in ACTIVATIONS:
            raise ValueError(f"unknown spike activation {self.spike_activation!r}")
        if self.kind == "spiked" and self.spike is None:
            raise ValueError("spiked feature map needs a spike vector")
        if self.spike is not None:
            object.__setattr__(self, "spike", np.asarray(self.spike, dtype=float).ravel())

    def sample_data(self, m, d, rng):
        if self.data_dist == "sphere":
            r = np.sqrt(d) if self.data_radius is None else self.data_radius
            return _sphere(m, d, r, rng)
        return rng.standard_normal((m, d))

    def sample_weights(self, p, d, rng):
        if self.weight_dist == "sphere":
            w = _sphere(p, d, self.weight_scale, rng)
        else:
            w = rng.standard_normal((p, d)) * (self.weight_scale / np.sqrt(d))
        if self.kind == "spiked":
            if self.spike.size != d:
                raise ValueError(f"spike has dimension {self.spike.size}, data has {d}")
            w = w + rng.standard_normal((p, 1)) * self.spike[None, :]
        return w

    def features(self, X, W):
        """Matrix ``phi(x_i, w_j)`` of shape (len(X), len(W)), unnormalized."""
        X = np.asarray(X, dtype=float)
        W = np.asarray(W, dtype=float)
        if X.shape[1] != W.shape[1]:
            raise ValueError(f"data dimension {X.shape[1]} != weight dimension {W.shape[1]}")
        if self.kind == "conv_pooled":
            return _conv_pooled(X, W)
        act = self.spike_activation if self.kind == "spiked" else self.kind
        return ACTIVATIONS[act](X @ W.T)


def _conv_pooled(X, W):
    d = X.shape[1]
    # (N, d, P): every cyclic shift of every input against every weight
    shifted = np.stack([np.roll(X, -l, axis=1) for l in range(d)], axis=1)
    vals = np.maximum(np.einsum("nsd,pd->nsp", shifted, W), 0.0)
    # summing in sorted order makes the pooled value independent of which
    # shift comes first, so phi(g x, w) == phi(x, w) bit for bit
    vals.sort(axis=1)
    return vals.sum(axis=1) / d


@dataclass(frozen=True)
class TargetSpec:
    """Teacher ``f*(x) = activation(<beta, x>)``."""

    activation: str = "tanh"
    beta: np.ndarray | None = None

    def __post_init__(self):
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown target activation {self.activation!r}")
        if self.beta is not None:
            object.__setattr__(self, "beta", np.asarray(self.beta, dtype=float).ravel())

    def resolve(self, d, rng) -> "TargetSpec":
        """Fix ``beta`` (unit norm, random direction) if it was left unset."""
        if self.beta is not None:
            if self.beta.size != d:
                raise ValueError(f"beta has dimension {self.beta.size}, data has {d}")
            return self
        b = rng.standard_normal(d)
        return TargetSpec(self.activation, b / np.linalg.norm(b))

    def __call__(self, X):
        return ACTIVATIONS[self.activation](np.asarray(X) @ self.beta)


def spike_with_overlap(beta, overlap):
    """Spike vector along the teacher with ``<v, beta> = overlap``."""
    beta = np.asarray(beta, dtype=float)
    return overlap * beta / float(beta @ beta)
