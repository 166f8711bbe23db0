"""Planted temporal Poisson block-model generators."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import InteractionTensor, tensor_from_dense


@dataclass
class PlantedModel:
    """Sizes, mixing weights and a ``(K, K, D)`` array of per-interval Poisson rates."""

    N: int
    U: int
    node_weights: np.ndarray
    time_weights: np.ndarray
    rates: np.ndarray

    def __post_init__(self):
        self.node_weights = np.asarray(self.node_weights, dtype=float)
        self.time_weights = np.asarray(self.time_weights, dtype=float)
        self.rates = np.asarray(self.rates, dtype=float)
        K, D = self.node_weights.size, self.time_weights.size
        if self.N < 1 or self.U < 1:
            raise ValueError("N and U must be positive")
        for name, w in (("node_weights", self.node_weights), ("time_weights", self.time_weights)):
            if w.ndim != 1 or (w < 0).any() or abs(w.sum() - 1.0) > 1e-12:
                raise ValueError(f"{name} must be a probability vector")
        if self.rates.shape != (K, K, D):
            raise ValueError(f"rates must have shape {(K, K, D)}, got {self.rates.shape}")
        if not np.isfinite(self.rates).all() or (self.rates < 0).any():
            raise ValueError("rates must be finite and non-negative")

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "U": self.U,
            "node_weights": self.node_weights.tolist(),
            "time_weights": self.time_weights.tolist(),
            "rates": self.rates.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PlantedModel":
        return cls(int(d["N"]), int(d["U"]), d["node_weights"], d["time_weights"], d["rates"])


def sample_planted(model: PlantedModel, seed) -> tuple[InteractionTensor, np.ndarray, np.ndarray]:
    """Draw labels from the weights, then independent Poisson counts for every off-diagonal cell."""
    rng = np.random.default_rng(seed)
    c = rng.choice(model.node_weights.size, size=model.N, p=model.node_weights)
    y = rng.choice(model.time_weights.size, size=model.U, p=model.time_weights)
    return _sample_counts(model, c, y, rng), c, y


def _sample_counts(model: PlantedModel, c, y, rng) -> InteractionTensor:
    lam = model.rates[c[:, None], c[None, :]][:, :, y]  # (N, N, U)
    x = rng.poisson(lam)
    x[np.arange(model.N), np.arange(model.N), :] = 0
    return tensor_from_dense(x)


def scenario1_model(psi: float, gamma_contrast: float, N: int = 50, U: int = 50) -> PlantedModel:
    """Three communities (``psi`` inside, 2 across) scaled by 1, sqrt(gamma), gamma in three time clusters."""
    if psi < 2:
        raise ValueError(f"psi must be >= 2, got {psi}")
    if gamma_contrast < 1:
        raise ValueError(f"gamma must be >= 1, got {gamma_contrast}")
    L = np.full((3, 3), 2.0)
    np.fill_diagonal(L, psi)
    scale = np.array([1.0, math.sqrt(gamma_contrast), gamma_contrast])
    w = np.full(3, 1 / 3)
    w[-1] = 1.0 - w[:-1].sum()
    return PlantedModel(N, U, w, w.copy(), L[:, :, None] * scale[None, None, :])


def scenario1(psi: float, gamma_contrast: float, N: int = 50, U: int = 50, seed=0):
    return sample_planted(scenario1_model(psi, gamma_contrast, N, U), seed)


SCENARIO2_L1 = np.array([[2.0, 1.0], [1.0, 2.0]])
SCENARIO2_L2 = np.array([[1.0, 2.0], [2.0, 1.0]])


def scenario2_model(N: int = 50, U: int = 100) -> PlantedModel:
    """Community pattern in one time cluster, bipartite pattern in the other."""
    if N < 4 or U < 4:
        raise ValueError("scenario 2 needs N, U >= 4")
    return PlantedModel(N, U, [0.5, 0.5], [0.5, 0.5], np.stack([SCENARIO2_L1, SCENARIO2_L2], axis=2))


def scenario2(N: int = 50, U: int = 100, seed=0, fixed_balanced_y: bool = False):
    """Scenario 2 sample; ``fixed_balanced_y`` puts exactly U/2 intervals in each time cluster."""
    model = scenario2_model(N, U)
    if not fixed_balanced_y:
        return sample_planted(model, seed)
    if U % 2:
        raise ValueError("fixed_balanced_y needs an even U")
    rng = np.random.default_rng(seed)
    c = rng.choice(2, size=N, p=model.node_weights)
    y = rng.permutation(np.repeat([0, 1], U // 2))
    return _sample_counts(model, c, y, rng), c, y
