"""Sparse labeled points, datasets and the linear model."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp


@dataclass(frozen=True, eq=False)
class LabeledPoint:
    """A sparse feature vector with a label in {-1, +1}.

    ``indices`` are 0-based feature indices, strictly increasing.
    """

    indices: np.ndarray
    values: np.ndarray
    label: int

    def __post_init__(self):
        if self.label not in (-1, 1):
            raise ValueError(f"label must be -1 or +1, got {self.label!r}")
        if self.indices.shape != self.values.shape:
            raise ValueError("indices and values must have the same length")
        if self.indices.size and np.any(np.diff(self.indices) <= 0):
            raise ValueError("feature indices must be unique and sorted")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("feature values must be finite")

    @classmethod
    def from_dict(cls, features: Mapping[int, float], label: int) -> "LabeledPoint":
        items = sorted(features.items())
        idx = np.array([i for i, _ in items], dtype=np.int64)
        if idx.size and idx[0] < 0:
            raise ValueError("feature indices must be nonnegative")
        val = np.array([float(v) for _, v in items], dtype=np.float64)
        return cls(idx, val, int(label))

    @classmethod
    def from_dense(cls, x: Sequence[float], label: int) -> "LabeledPoint":
        x = np.asarray(x, dtype=np.float64)
        idx = np.flatnonzero(x)
        return cls(idx.astype(np.int64), x[idx].copy(), int(label))

    @property
    def features(self) -> dict[int, float]:
        return {int(i): float(v) for i, v in zip(self.indices, self.values)}

    @property
    def dim(self) -> int:
        """Smallest dimension that can hold this point."""
        return int(self.indices[-1]) + 1 if self.indices.size else 0

    def dot(self, w: np.ndarray) -> float:
        if self.indices.size and self.indices[-1] >= w.shape[0]:
            raise ValueError(
                f"point has feature index {int(self.indices[-1])} but model dimension is {w.shape[0]}"
            )
        return float(w[self.indices] @ self.values)

    def to_dense(self, dim: int) -> np.ndarray:
        out = np.zeros(dim)
        out[self.indices] = self.values
        return out

    def __eq__(self, other):
        if not isinstance(other, LabeledPoint):
            return NotImplemented
        return (
            self.label == other.label
            and np.array_equal(self.indices, other.indices)
            and np.array_equal(self.values, other.values)
        )

    def __hash__(self):
        return hash((self.label, self.indices.tobytes(), self.values.tobytes()))


@dataclass(frozen=True, eq=False)
class Dataset:
    """Immutable collection of labeled points stored as a CSR matrix.

    Attributes:
        X: sparse feature matrix, shape (n_points, dim).
        y: labels in {-1, +1}, shape (n_points,).
    """

    X: sp.csr_matrix
    y: np.ndarray
    dim: int = field(default=-1)

    def __post_init__(self):
        X = sp.csr_matrix(self.X, dtype=np.float64)
        X.sort_indices()
        y = np.asarray(self.y, dtype=np.int64)
        if X.shape[0] != y.shape[0]:
            raise ValueError("X and y disagree on the number of points")
        if y.size and not np.all(np.isin(y, (-1, 1))):
            raise ValueError("labels must be -1 or +1")
        dim = max(self.dim, X.shape[1])
        if dim != X.shape[1]:
            X = sp.csr_matrix((X.data, X.indices, X.indptr), shape=(X.shape[0], dim))
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "dim", dim)

    @classmethod
    def from_points(cls, points: Iterable[LabeledPoint], dim: int | None = None) -> "Dataset":
        points = list(points)
        indptr = [0]
        indices, values, labels = [], [], []
        for pt in points:
            indices.append(pt.indices)
            values.append(pt.values)
            labels.append(pt.label)
            indptr.append(indptr[-1] + pt.indices.size)
        need = max((pt.dim for pt in points), default=0)
        dim = need if dim is None else max(dim, need)
        X = sp.csr_matrix(
            (
                np.concatenate(values) if values else np.zeros(0),
                np.concatenate(indices) if indices else np.zeros(0, dtype=np.int64),
                np.asarray(indptr),
            ),
            shape=(len(points), dim),
        )
        return cls(X, np.asarray(labels, dtype=np.int64), dim)

    @classmethod
    def from_dense(cls, X: np.ndarray, y: Sequence[int]) -> "Dataset":
        return cls(sp.csr_matrix(np.asarray(X, dtype=np.float64)), np.asarray(y))

    def __len__(self) -> int:
        return int(self.y.shape[0])

    @property
    def n_pos(self) -> int:
        return int(np.count_nonzero(self.y == 1))

    @property
    def pos_fraction(self) -> float:
        if len(self) == 0:
            raise ValueError("empty dataset has no positive fraction")
        return self.n_pos / len(self)

    @cached_property
    def points(self) -> tuple[LabeledPoint, ...]:
        X = self.X
        return tuple(
            LabeledPoint(
                X.indices[X.indptr[i]:X.indptr[i + 1]].astype(np.int64),
                X.data[X.indptr[i]:X.indptr[i + 1]].copy(),
                int(self.y[i]),
            )
            for i in range(len(self))
        )

    def scores(self, w: np.ndarray) -> np.ndarray:
        w = np.asarray(w, dtype=np.float64)
        if w.shape[0] < self.dim:
            raise ValueError(f"model dimension {w.shape[0]} < data dimension {self.dim}")
        return self.X @ w[: self.dim]

    def subset(self, rows: np.ndarray) -> "Dataset":
        rows = np.asarray(rows, dtype=np.int64)
        return Dataset(self.X[rows], self.y[rows], self.dim)

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.dim == other.dim
            and np.array_equal(self.y, other.y)
            and (self.X != other.X).nnz == 0
        )

    __hash__ = None


def project_ball(w: np.ndarray, radius: float) -> np.ndarray:
    """Euclidean projection onto the ball of the given radius."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    norm = math.sqrt(float(w @ w))
    if norm <= radius:
        return w
    return w * (radius / norm)


@dataclass
class LinearModel:
    """Dense weight vector constrained to a Euclidean ball."""

    weights: np.ndarray
    radius: float = 1.0

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if self.radius <= 0:
            raise ValueError("radius must be positive")

    @classmethod
    def zeros(cls, dim: int, radius: float = 1.0) -> "LinearModel":
        return cls(np.zeros(dim), radius)

    @property
    def dim(self) -> int:
        return self.weights.shape[0]

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.weights))

    def predict(self, data: Dataset) -> np.ndarray:
        """Labels under sign(w.x); a zero score is predicted negative."""
        return np.where(data.scores(self.weights) > 0, 1, -1)

    def copy(self) -> "LinearModel":
        return LinearModel(self.weights.copy(), self.radius)


def weights_of(model) -> np.ndarray:
    if isinstance(model, LinearModel):
        return model.weights
    return np.asarray(model, dtype=np.float64)
