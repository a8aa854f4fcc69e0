"""Datasets: synthetic Gaussian-cluster generator, IDX readers, sharding."""
from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np


@dataclass
class Dataset:
    X: np.ndarray  # (n, q) features
    y: np.ndarray  # (n,) integer labels

    def __post_init__(self):
        if self.X.shape[0] != self.y.shape[0]:
            raise ValueError("feature/label count mismatch")

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def q(self) -> int:
        return self.X.shape[1]

    @property
    def num_classes(self) -> int:
        return int(self.y.max()) + 1


@dataclass
class DataShard:
    """One UE's private slice of the training set."""

    X: np.ndarray
    y: np.ndarray
    owner: tuple[int, int]  # (fog_id, ue_id)

    @property
    def n(self) -> int:
        return self.X.shape[0]


def synthetic_clusters(n_samples: int, q: int, num_classes: int,
                       rng: np.random.Generator, *, spread: float = 1.0,
                       sep: float = 2.0) -> Dataset:
    """Balanced Gaussian class clusters; cheap stand-in for image data."""
    per_class = n_samples // num_classes
    means = rng.normal(0.0, sep, size=(num_classes, q))
    xs, ys = [], []
    for c in range(num_classes):
        xs.append(means[c] + rng.normal(0.0, spread, size=(per_class, q)))
        ys.append(np.full(per_class, c, dtype=np.int64))
    X = np.concatenate(xs)
    y = np.concatenate(ys)
    perm = rng.permutation(X.shape[0])
    return Dataset(X[perm], y[perm])


def read_idx_images(path) -> np.ndarray:
    """IDX image file -> (n, rows*cols) float array scaled to [0, 1]."""
    with open(path, "rb") as fh:
        magic, n, rows, cols = struct.unpack(">IIII", fh.read(16))
        if magic != 2051:
            raise ValueError(f"{path}: bad IDX image magic {magic}")
        buf = fh.read(n * rows * cols)
    arr = np.frombuffer(buf, dtype=np.uint8).reshape(n, rows * cols)
    return arr.astype(np.float64) / 255.0


def read_idx_labels(path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic, n = struct.unpack(">II", fh.read(8))
        if magic != 2049:
            raise ValueError(f"{path}: bad IDX label magic {magic}")
        buf = fh.read(n)
    return np.frombuffer(buf, dtype=np.uint8).astype(np.int64)


def partition(dataset: Dataset, J: int, mode: str, rng: np.random.Generator,
              fog_of_ue=None) -> list[DataShard]:
    """Split a dataset into J equal, disjoint shards.

    ``one-class`` assigns each UE samples of a single label (classes cycle
    over UEs); ``iid`` is a uniform random split.  Trailing samples that do
    not fit the equal shard size are dropped.
    """
    if J > dataset.n:
        raise ValueError(f"cannot split {dataset.n} samples into {J} shards")
    if fog_of_ue is None:
        fog_of_ue = [0] * J

    if mode == "iid":
        perm = rng.permutation(dataset.n)
        size = dataset.n // J
        shards = []
        for j in range(J):
            idx = perm[j * size:(j + 1) * size]
            shards.append(DataShard(dataset.X[idx], dataset.y[idx], (fog_of_ue[j], j)))
        return shards

    if mode != "one-class":
        raise ValueError(f"unknown partition mode {mode!r}")

    classes = np.unique(dataset.y)
    owners_of_class = {c: [j for j in range(J) if classes[j % len(classes)] == c]
                       for c in classes}
    # equal shard size across all UEs
    sizes = []
    for c, owners in owners_of_class.items():
        if owners:
            sizes.append(int(np.sum(dataset.y == c)) // len(owners))
    size = min(s for s in sizes if s > 0) if sizes else 0
    if size == 0:
        raise ValueError("not enough samples per class for this many shards")

    shards: list[DataShard | None] = [None] * J
    for c in classes:
        idx = np.nonzero(dataset.y == c)[0]
        idx = idx[rng.permutation(idx.size)]
        for k, j in enumerate(owners_of_class[c]):
            sel = idx[k * size:(k + 1) * size]
            shards[j] = DataShard(dataset.X[sel], dataset.y[sel], (fog_of_ue[j], j))
    return [s for s in shards if s is not None]
