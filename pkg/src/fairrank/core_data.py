"""Labeled (X, Y, Z) samples, per-cell counts and train/validation splitting.

Labels are always in {-1, +1} and groups in {0, 1}; any other coding is
converted at ingestion time (see :mod:`fairrank.tabular_data`).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import ConfigurationError, ShapeError

CELLS = ((-1, 0), (-1, 1), (+1, 0), (+1, 1))
CELL_NAMES = {(-1, 0): "H0", (-1, 1): "H1", (+1, 0): "G0", (+1, 1): "G1"}


@dataclass(frozen=True)
class LabeledSample:
    features: np.ndarray
    label: int
    group: int


class Dataset:
    """An immutable, ordered collection of labeled samples.

    Stored column-wise: ``X`` has shape (n, d), ``y`` and ``z`` shape (n,).
    """

    __slots__ = ("X", "y", "z")

    def __init__(self, X, y, z):
        X = np.array(X, dtype=np.float64, copy=True)
        y = np.array(y, dtype=np.int64, copy=True).ravel()
        z = np.array(z, dtype=np.int64, copy=True).ravel()
        if X.ndim == 1:
            X = X[:, None]
        if X.ndim != 2:
            raise ShapeError(f"features must be 2-d, got shape {X.shape}")
        n = X.shape[0]
        if n < 1:
            raise ShapeError("a dataset needs at least one sample")
        if y.shape != (n,) or z.shape != (n,):
            raise ShapeError(
                f"features/labels/groups disagree: {X.shape}, {y.shape}, {z.shape}"
            )
        if not np.all((y == -1) | (y == 1)):
            raise ShapeError("labels must be in {-1, +1}")
        if not np.all((z == 0) | (z == 1)):
            raise ShapeError("groups must be in {0, 1}")
        for a in (X, y, z):
            a.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "z", z)

    def __setattr__(self, name, value):
        raise AttributeError("Dataset is immutable")

    @classmethod
    def from_samples(cls, samples: Sequence[LabeledSample]) -> "Dataset":
        if not samples:
            raise ShapeError("a dataset needs at least one sample")
        d = len(samples[0].features)
        if any(len(s.features) != d for s in samples):
            raise ShapeError("all samples must share the feature dimension")
        X = np.array([s.features for s in samples], dtype=np.float64)
        return cls(X, [s.label for s in samples], [s.group for s in samples])

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    def __len__(self) -> int:
        return self.n

    @property
    def samples(self) -> Iterator[LabeledSample]:
        for i in range(self.n):
            yield LabeledSample(self.X[i], int(self.y[i]), int(self.z[i]))

    def subset(self, index) -> "Dataset":
        index = np.asarray(index, dtype=np.int64)
        return Dataset(self.X[index], self.y[index], self.z[index])

    def cell_mask(self, label: int, group: int) -> np.ndarray:
        return (self.y == label) & (self.z == group)

    def __repr__(self):
        return f"Dataset(n={self.n}, d={self.d})"


@dataclass(frozen=True)
class CellCounts:
    """Number of samples in each (label, group) cell.

    ``n_pos_by_group[z]`` counts y=+1 in group z, ``n_neg_by_group[z]``
    counts y=-1 in group z.
    """

    n_pos_by_group: tuple[int, int]
    n_neg_by_group: tuple[int, int]

    @property
    def n(self) -> int:
        return sum(self.n_pos_by_group) + sum(self.n_neg_by_group)

    @property
    def n_pos(self) -> int:
        return sum(self.n_pos_by_group)

    @property
    def n_neg(self) -> int:
        return sum(self.n_neg_by_group)

    def n_group(self, z: int) -> int:
        return self.n_pos_by_group[z] + self.n_neg_by_group[z]

    def count(self, label: int, group: int) -> int:
        return (self.n_pos_by_group if label == 1 else self.n_neg_by_group)[group]

    @property
    def p(self) -> float:
        """Empirical P(Y=+1)."""
        return self.n_pos / self.n

    def q(self, z: int) -> float:
        """Empirical P(Z=z)."""
        return self.n_group(z) / self.n

    def p_group(self, z: int) -> float:
        """Empirical P(Y=+1 | Z=z); nan for an empty group."""
        nz = self.n_group(z)
        return self.n_pos_by_group[z] / nz if nz else float("nan")

    def rates(self) -> dict:
        return {
            "p": self.p,
            "p0": self.p_group(0),
            "p1": self.p_group(1),
            "q0": self.q(0),
            "q1": self.q(1),
        }

    def __add__(self, other: "CellCounts") -> "CellCounts":
        return CellCounts(
            tuple(a + b for a, b in zip(self.n_pos_by_group, other.n_pos_by_group)),
            tuple(a + b for a, b in zip(self.n_neg_by_group, other.n_neg_by_group)),
        )

    def as_dict(self) -> dict:
        return {
            "n_pos_by_group": list(self.n_pos_by_group),
            "n_neg_by_group": list(self.n_neg_by_group),
        }


def cell_counts(dataset: Dataset) -> CellCounts:
    pos = tuple(int(np.sum(dataset.cell_mask(1, z))) for z in (0, 1))
    neg = tuple(int(np.sum(dataset.cell_mask(-1, z))) for z in (0, 1))
    return CellCounts(pos, neg)


def split(dataset: Dataset, validation_fraction: float, seed: int, stratified=False):
    """Random train/validation split with ``floor(fraction * n)`` validation rows.

    With ``stratified=True`` each (y, z) cell is split separately, which keeps
    rare cells represented on both sides for small datasets; the total
    validation size is still ``floor(fraction * n)``.
    """
    if not (0.0 <= validation_fraction < 1.0):
        raise ConfigurationError(
            f"validation_fraction must lie in [0, 1), got {validation_fraction}"
        )
    n = dataset.n
    m = int(np.floor(validation_fraction * n))
    rng = np.random.default_rng(seed)
    if not stratified:
        perm = rng.permutation(n)
        val_idx, train_idx = perm[:m], perm[m:]
    else:
        val_parts, train_parts, shares = [], [], []
        for label, group in CELLS:
            idx = np.flatnonzero(dataset.cell_mask(label, group))
            idx = idx[rng.permutation(len(idx))]
            shares.append(idx)
        # largest-remainder allocation so the cell quotas sum to m exactly
        exact = np.array([validation_fraction * len(idx) for idx in shares])
        quota = np.floor(exact).astype(int)
        order = np.argsort(-(exact - quota), kind="stable")
        for k in order[: m - quota.sum()]:
            quota[k] += 1
        for idx, q in zip(shares, quota):
            val_parts.append(idx[:q])
            train_parts.append(idx[q:])
        val_idx = np.sort(np.concatenate(val_parts))
        train_idx = np.sort(np.concatenate(train_parts))
    train = dataset.subset(np.sort(train_idx)) if len(train_idx) else None
    if train is None:
        raise ConfigurationError("split leaves an empty training set")
    validation = _subset_or_empty(dataset, np.sort(val_idx))
    return train, validation


class _EmptyDataset(Dataset):
    """Zero-row dataset; only produced by ``split`` with fraction 0."""

    __slots__ = ()

    def __init__(self, d):
        X = np.empty((0, d))
        X.setflags(write=False)
        y = np.empty(0, dtype=np.int64)
        z = np.empty(0, dtype=np.int64)
        y.setflags(write=False)
        z.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "z", z)


def _subset_or_empty(dataset, index):
    if len(index) == 0:
        return _EmptyDataset(dataset.d)
    return dataset.subset(index)


def concat(a: Dataset, b: Dataset) -> Dataset:
    return Dataset(np.vstack([a.X, b.X]), np.concatenate([a.y, b.y]), np.concatenate([a.z, b.z]))
