"""Separable Gaussian-blob data for desk-scale experiments."""
from __future__ import annotations

import numpy as np

from .points import Dataset


def make_blobs(
    n: int,
    p: float = 0.3,
    center: tuple[float, float] = (1.5, 1.5),
    scale: float = 1.0,
    margin: float = 0.25,
    seed: int = 0,
) -> Dataset:
    """Two 2-D Gaussian blobs at +center (positives) and -center (negatives).

    Points closer than ``margin`` to the line through the origin orthogonal
    to ``center`` are redrawn, so the classes are linearly separable by a
    separator through the origin. Labels are drawn i.i.d. with P(y=+1) = p.
    """
    if not 0 < p < 1:
        raise ValueError("p must lie in (0, 1)")
    rng = np.random.default_rng(seed)
    c = np.asarray(center, dtype=np.float64)
    u = c / np.linalg.norm(c)
    y = np.where(rng.random(n) < p, 1, -1)
    X = np.empty((n, 2))
    todo = np.arange(n)
    while todo.size:
        draw = y[todo, None] * c + scale * rng.standard_normal((todo.size, 2))
        ok = y[todo] * (draw @ u) >= margin
        X[todo[ok]] = draw[ok]
        todo = todo[~ok]
    return Dataset.from_dense(X, y)


def best_direction_separator(data: Dataset, score, n_angles: int = 3600) -> tuple[np.ndarray, float]:
    """Brute-force search over unit directions in 2-D for the best ``score``.

    ``score(w)`` maps a weight vector to a value to maximize.
    """
    if data.dim != 2:
        raise ValueError("direction search is for 2-D data")
    best_w, best = None, -np.inf
    for theta in np.linspace(0.0, 2 * np.pi, n_angles, endpoint=False):
        w = np.array([np.cos(theta), np.sin(theta)])
        v = score(w)
        if v > best:
            best_w, best = w, v
    return best_w, float(best)
