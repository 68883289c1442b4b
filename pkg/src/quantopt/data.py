"""SVMlight datasets, seeded streams, splits and prevalence-drift resampling."""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

import numpy as np
import scipy.sparse as sp

from .points import Dataset, LabeledPoint

STREAM_ORDERS = ("iid", "shuffled-epoch")


class SVMLightParseError(ValueError):
    """Raised with every offending line of an SVMlight file.

    Attributes:
        errors: list of (line_number, message), 1-based line numbers.
    """

    def __init__(self, errors: list[tuple[int, str]]):
        self.errors = errors
        shown = "; ".join(f"line {n}: {msg}" if n else msg for n, msg in errors[:20])
        more = f" (+{len(errors) - 20} more)" if len(errors) > 20 else ""
        super().__init__(f"{len(errors)} SVMlight parse error(s): {shown}{more}")


_LABELS = {1.0: 1, -1.0: -1, 0.0: -1}


def _parse_label(tok: str) -> int:
    try:
        v = float(tok)
    except ValueError:
        raise ValueError(f"non-numeric label {tok!r}") from None
    if v not in _LABELS:
        raise ValueError(f"label {tok!r} is not binary (expected +1, -1, 1 or 0)")
    return _LABELS[v]


def parse_svmlight(text: bytes | str) -> Dataset:
    """Parse SVMlight text into a :class:`Dataset`.

    Indices in the file are 1-based and become 0-based. ``#`` starts a
    comment and ``qid:`` tokens are ignored. Label 0 is mapped to -1. All
    malformed lines are collected before raising :class:`SVMLightParseError`.
    """
    if isinstance(text, (bytes, bytearray)):
        text = bytes(text).decode("ascii", errors="replace")
    errors: list[tuple[int, str]] = []
    labels: list[int] = []
    indptr = [0]
    indices: list[int] = []
    values: list[float] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "�" in line or not line.isascii():
            errors.append((lineno, "non-ASCII bytes"))
            continue
        toks = line.split()
        try:
            label = _parse_label(toks[0])
        except ValueError as exc:
            errors.append((lineno, str(exc)))
            continue
        row: dict[int, float] = {}
        bad = None
        for tok in toks[1:]:
            key, sep, val = tok.partition(":")
            if not sep:
                bad = f"token {tok!r} is not index:value"
                break
            if key == "qid":
                continue
            try:
                j = int(key)
                v = float(val)
            except ValueError:
                bad = f"non-numeric token {tok!r}"
                break
            if j < 1:
                bad = f"feature index {j} must be >= 1"
                break
            if not math.isfinite(v):
                bad = f"non-finite value in {tok!r}"
                break
            if j - 1 in row:
                bad = f"duplicate feature index {j}"
                break
            row[j - 1] = v
        if bad:
            errors.append((lineno, bad))
            continue
        for j in sorted(row):
            indices.append(j)
            values.append(row[j])
        indptr.append(len(indices))
        labels.append(label)

    if not labels and not errors:
        errors.append((0, "no data lines"))
    if errors:
        raise SVMLightParseError(errors)
    dim = max(indices) + 1 if indices else 0
    X = sp.csr_matrix(
        (np.asarray(values, dtype=np.float64), np.asarray(indices, dtype=np.int64), np.asarray(indptr)),
        shape=(len(labels), dim),
    )
    return Dataset(X, np.asarray(labels, dtype=np.int64), dim)


def load_svmlight(path: str | Path) -> Dataset:
    return parse_svmlight(Path(path).read_bytes())


def serialize_svmlight(data: Dataset) -> str:
    """SVMlight text whose parse is identical to ``data`` (labels as +1/-1)."""
    X = data.X
    lines = []
    for i in range(len(data)):
        lo, hi = X.indptr[i], X.indptr[i + 1]
        feats = " ".join(f"{j + 1}:{v!r}" for j, v in zip(X.indices[lo:hi], X.data[lo:hi].tolist()))
        label = "+1" if data.y[i] == 1 else "-1"
        lines.append(f"{label} {feats}".rstrip())
    return "\n".join(lines) + "\n"


def split_indices(n: int, train_frac: float = 0.7, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Sorted row indices of a seeded shuffle split into (train, test)."""
    if not 0.0 < train_frac < 1.0:
        raise ValueError("train_frac must lie in (0, 1)")
    n_train = int(round(train_frac * n))
    if n_train == 0 or n_train == n:
        raise ValueError(f"split of {n} points at {train_frac} leaves one side empty")
    perm = np.random.default_rng(seed).permutation(n)
    return np.sort(perm[:n_train]), np.sort(perm[n_train:])


def split_train_test(d: Dataset, train_frac: float = 0.7, seed: int = 0) -> tuple[Dataset, Dataset]:
    tr, te = split_indices(len(d), train_frac, seed)
    return d.subset(tr), d.subset(te)


def max_abs_scales(d: Dataset) -> np.ndarray:
    """Per-feature max |value|; features never seen get scale 1."""
    scales = np.asarray(abs(d.X).max(axis=0).todense()).ravel() if len(d) else np.ones(d.dim)
    scales[scales == 0] = 1.0
    return scales


def scale_features(d: Dataset, scales: np.ndarray) -> Dataset:
    """Divide each feature by its scale (max-abs scaling to [-1, 1])."""
    inv = sp.diags(1.0 / np.asarray(scales, dtype=np.float64))
    return Dataset(sp.csr_matrix(d.X @ inv), d.y, d.dim)


@dataclass(frozen=True)
class StreamConfig:
    seed: int = 0
    order: str = "iid"

    def __post_init__(self):
        if self.order not in STREAM_ORDERS:
            raise ValueError(f"unknown stream order {self.order!r}; expected one of {STREAM_ORDERS}")


def stream_sampler(d: Dataset, cfg: StreamConfig = StreamConfig()) -> Iterator[LabeledPoint]:
    """Endless seeded stream over the points of ``d``.

    ``iid`` draws uniformly with replacement. ``shuffled-epoch`` walks
    through fresh seeded permutations.
    """
    if len(d) == 0:
        raise ValueError("cannot stream an empty dataset")
    points = d.points
    n = len(points)
    rng = np.random.default_rng(cfg.seed)
    return _iid(points, n, rng) if cfg.order == "iid" else _epochs(points, n, rng)


def _iid(points, n, rng):
    while True:
        for i in rng.integers(0, n, size=4096).tolist():
            yield points[i]


def _epochs(points, n, rng):
    while True:
        for i in rng.permutation(n).tolist():
            yield points[i]


def drift_rows(test: Dataset, target_p: float, size: int, seed: int = 0) -> np.ndarray:
    """Row indices drawn by :func:`drift_resample` for the same arguments."""
    if not 0.0 < target_p < 1.0:
        raise ValueError("target_p must lie in (0, 1)")
    if size < 1:
        raise ValueError("size must be positive")
    pos = np.flatnonzero(test.y == 1)
    neg = np.flatnonzero(test.y == -1)
    if pos.size == 0 or neg.size == 0:
        raise ValueError("drift resampling needs both classes in the input")
    rng = np.random.default_rng(seed)
    is_pos = rng.random(size) < target_p
    return np.where(
        is_pos,
        pos[rng.integers(0, pos.size, size=size)],
        neg[rng.integers(0, neg.size, size=size)],
    )


def drift_resample(test: Dataset, target_p: float, size: int, seed: int = 0) -> Dataset:
    """Resample ``test`` to class prevalence ``target_p``.

    Each output point first draws its class with probability ``target_p``,
    then a member of that class uniformly with replacement. Class-conditional
    distributions are preserved.
    """
    return test.subset(drift_rows(test, target_p, size, seed))
