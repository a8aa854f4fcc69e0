"""Hierarchical federated training: local SGD, fog aggregation, cloud update.

The model is multinomial logistic regression with an l2 penalty; the bias is
an appended constant feature, so the weight matrix has shape (q+1, classes).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import DataShard


@dataclass
class ModelState:
    w: np.ndarray   # (q+1, classes)
    g: int = 0

    def __post_init__(self):
        if not np.all(np.isfinite(self.w)):
            raise ValueError("model weights must be finite")

    @property
    def num_params(self) -> int:
        return self.w.size

    @classmethod
    def zeros(cls, q: int, num_classes: int) -> "ModelState":
        return cls(np.zeros((q + 1, num_classes)), 0)


@dataclass
class GradientUpdate:
    delta: np.ndarray      # sum of the L stochastic gradients
    local_loss: float      # F_ij at the round-start model, full shard
    owner: tuple[int, int]


def _with_bias(X: np.ndarray) -> np.ndarray:
    return np.hstack([X, np.ones((X.shape[0], 1))])


def softmax_loss_grad(w: np.ndarray, X: np.ndarray, y: np.ndarray, reg: float):
    """Mean cross-entropy + (reg/2)||w||^2 and its gradient.

    ``X`` must already carry the bias column.
    """
    z = X @ w
    z -= z.max(axis=1, keepdims=True)
    ez = np.exp(z)
    probs = ez / ez.sum(axis=1, keepdims=True)
    n = X.shape[0]
    loss = -np.mean(np.log(probs[np.arange(n), y] + 1e-300)) + 0.5 * reg * float(np.sum(w * w))
    probs[np.arange(n), y] -= 1.0
    grad = X.T @ probs / n + reg * w
    return loss, grad


def shard_loss(w: np.ndarray, shard: DataShard, reg: float) -> float:
    loss, _ = softmax_loss_grad(w, _with_bias(shard.X), shard.y, reg)
    return loss


def local_round(model: ModelState, shard: DataShard, L: int, B: int,
                eta_g: float, rng: np.random.Generator, reg: float) -> GradientUpdate:
    """Run L mini-batch SGD steps from the round-start model.

    Returns the summed stochastic gradients, so the local trajectory satisfies
    w_L - w_0 = -eta_g * delta, plus the full-shard loss at the start model.
    """
    if B > shard.n:
        raise ValueError(f"batch size {B} exceeds shard size {shard.n}")
    if eta_g <= 0:
        raise ValueError("learning rate must be positive")
    Xb = _with_bias(shard.X)
    start_loss, _ = softmax_loss_grad(model.w, Xb, shard.y, reg)
    w = model.w.copy()
    delta = np.zeros_like(w)
    for _ in range(L):
        idx = rng.choice(shard.n, size=B, replace=False)
        _, grad = softmax_loss_grad(w, Xb[idx], shard.y[idx], reg)
        if not np.all(np.isfinite(grad)):
            raise FloatingPointError(
                f"non-finite gradient at UE {shard.owner} in round {model.g}")
        w -= eta_g * grad
        delta += grad
    return GradientUpdate(delta=delta, local_loss=start_loss, owner=shard.owner)


def fog_aggregate(updates: list[GradientUpdate]) -> tuple[np.ndarray, float]:
    """Sum a cell's gradient updates and local losses, in index order."""
    if not updates:
        raise ValueError("fog_aggregate needs at least one update")
    shape = updates[0].delta.shape
    for u in updates[1:]:
        if u.delta.shape != shape:
            raise ValueError("gradient shape mismatch within a fog cell")
    delta = np.zeros(shape)
    loss = 0.0
    for u in updates:
        delta += u.delta
        loss += u.local_loss
    return delta, loss


def global_update(model: ModelState, fog_deltas: list[np.ndarray],
                  eta_g: float, count: int) -> ModelState:
    """Cloud update w <- w - eta_g * (sum of fog deltas) / count."""
    if count < 1:
        raise ValueError("global_update needs at least one participant")
    total = np.zeros_like(model.w)
    for d in fog_deltas:
        total += d
    return ModelState(model.w - eta_g * total / count, model.g + 1)


def global_loss(w: np.ndarray, shards: list[DataShard], reg: float) -> float:
    """Network loss (1/J) * sum_j F_ij(w | D_ij)."""
    if not shards:
        raise ValueError("global_loss needs at least one shard")
    return sum(shard_loss(w, s, reg) for s in shards) / len(shards)


def accuracy(w: np.ndarray, X: np.ndarray, y: np.ndarray) -> float:
    pred = np.argmax(_with_bias(X) @ w, axis=1)
    return float(np.mean(pred == y))


def lr_schedule(g: int, eta0: float, decay: float | None = None,
                lam: float | None = None, psi: float | None = None) -> float:
    """Geometric decay eta0/decay^g, or the diminishing 16/(lam*(g+1+psi))."""
    if decay is not None:
        return eta0 / decay ** g
    if lam is None or psi is None:
        raise ValueError("need either decay or (lam, psi)")
    return 16.0 / (lam * (g + 1 + psi))


def ue_rng(master_seed: int, g: int, ue_id: int) -> np.random.Generator:
    """Independent per-UE-per-round stream; order of use cannot matter."""
    return np.random.default_rng([master_seed, g, ue_id])
