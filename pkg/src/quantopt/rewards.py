"""Per-sample rewards, running averages and confusion statistics.

The class-conditional rewards scale a per-point reward by the inverse class
proportion, so their expectations are the class-conditional means of the
reward. With the 0-1 reward those means are exactly TPR and TNR.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .points import Dataset, LabeledPoint, weights_of

REWARD_KINDS = ("hinge", "logistic", "zero-one")


@dataclass(frozen=True)
class ClassPrior:
    """Proportion of positives ``p``; ``n`` is always ``1 - p``."""

    p: float

    def __post_init__(self):
        if not (0.0 < self.p < 1.0) or math.isnan(self.p):
            raise ValueError(f"class prior must lie in (0, 1), got {self.p!r}")

    @property
    def n(self) -> float:
        return 1.0 - self.p


class RunningPrior:
    """Laplace-smoothed running estimate (1 + #pos) / (2 + t)."""

    def __init__(self):
        self.n_pos = 0
        self.t = 0

    def observe(self, label: int) -> None:
        self.t += 1
        if label > 0:
            self.n_pos += 1

    @property
    def p(self) -> float:
        return (1 + self.n_pos) / (2 + self.t)

    @property
    def n(self) -> float:
        return 1.0 - self.p


def _clamp(v: float, bound: float) -> float:
    return -bound if v < -bound else (bound if v > bound else v)


def _softplus(z: float) -> float:
    # log(1 + exp(z)) without overflow
    if z > 0:
        return z + math.log1p(math.exp(-z))
    return math.log1p(math.exp(z))


def _sigmoid(z: float) -> float:
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def reward_hinge(y_hat: float, y: int, bound: float = 10.0) -> float:
    """Inverted hinge reward min(1, y*y_hat), clamped to [-bound, bound]."""
    return _clamp(min(1.0, y * y_hat), bound)


def reward_logistic(y_hat: float, y: int, bound: float = 10.0) -> float:
    """Inverted logistic reward 1 - ln(1 + exp(-y*y_hat)), clamped."""
    return _clamp(1.0 - _softplus(-y * y_hat), bound)


def reward_zero_one(y_hat: float, y: int, bound: float = 10.0) -> float:
    """1 when the sign is right; a zero score counts as an error."""
    return 1.0 if y * y_hat > 0 else 0.0


def prediction_correct(y_hat: float, y: int) -> float:
    """1 when sign(y_hat) matches y with ties predicted negative, as in confusion counts."""
    return 1.0 if (y_hat > 0) == (y > 0) else 0.0


@dataclass(frozen=True)
class RewardFunction:
    """A reward r(y_hat, y) with values clamped to [-bound, bound].

    ``derivative`` returns d r / d y_hat of the unclamped surrogate, which is
    a supergradient of the concave surrogate everywhere.
    """

    kind: str = "hinge"
    bound: float = 10.0

    def __post_init__(self):
        if self.kind not in REWARD_KINDS:
            raise ValueError(f"unknown reward kind {self.kind!r}; expected one of {REWARD_KINDS}")
        if not self.bound > 0:
            raise ValueError("reward bound must be positive")

    def __call__(self, y_hat: float, y: int) -> float:
        if self.kind == "hinge":
            return reward_hinge(y_hat, y, self.bound)
        if self.kind == "logistic":
            return reward_logistic(y_hat, y, self.bound)
        return reward_zero_one(y_hat, y)

    def derivative(self, y_hat: float, y: int) -> float:
        if self.kind == "hinge":
            # kink at y*y_hat == 1 takes the informative side
            return float(y) if y * y_hat <= 1.0 else 0.0
        if self.kind == "logistic":
            return y * _sigmoid(-y * y_hat)
        return 0.0


def class_conditional_reward(
    w, x: LabeledPoint, prior: ClassPrior, r: RewardFunction
) -> tuple[float, float]:
    """Return (r+, r-) for one point; the other class's entry is zero."""
    if not (0.0 < prior.p < 1.0):
        raise ValueError("class prior must lie in (0, 1)")
    value = r(x.dot(weights_of(w)), x.label)
    if x.label > 0:
        return value / prior.p, 0.0
    return 0.0, value / (1.0 - prior.p)


def supergradient_reward(
    r: RewardFunction, y_hat: float, x: LabeledPoint, prior: ClassPrior, dim: int
) -> np.ndarray:
    """Supergradient in w of the class-scaled reward r+ or r- at this point."""
    scale = 1.0 / prior.p if x.label > 0 else 1.0 / (1.0 - prior.p)
    g = np.zeros(dim)
    g[x.indices] = (r.derivative(y_hat, x.label) * scale) * x.values
    return g


@dataclass(frozen=True)
class RewardState:
    """Running means of (r+, r-) plus the auxiliary vector q."""

    r_avg: tuple[float, float] = (0.0, 0.0)
    q_vec: tuple[float, float] = (0.0, 0.0)
    t: int = 0


def update_running_averages(state: RewardState, sample_rewards: Sequence[float]) -> RewardState:
    t = state.t
    if t < 0:
        raise ValueError("sample count must be nonnegative")
    r1 = (t * state.r_avg[0] + sample_rewards[0]) / (t + 1)
    r2 = (t * state.r_avg[1] + sample_rewards[1]) / (t + 1)
    return RewardState((r1, r2), state.q_vec, t + 1)


@dataclass(frozen=True)
class ConfusionSummary:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def n_pos(self) -> int:
        return self.tp + self.fn

    @property
    def n_neg(self) -> int:
        return self.tn + self.fp

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    @property
    def tpr(self) -> float:
        # no positives: nothing to miss
        return self.tp / self.n_pos if self.n_pos else 1.0

    @property
    def tnr(self) -> float:
        return self.tn / self.n_neg if self.n_neg else 1.0

    @property
    def predicted_pos_fraction(self) -> float:
        return (self.tp + self.fp) / self.total

    @property
    def true_pos_fraction(self) -> float:
        return self.n_pos / self.total

    def __add__(self, other: "ConfusionSummary") -> "ConfusionSummary":
        return ConfusionSummary(
            self.tp + other.tp, self.fp + other.fp, self.tn + other.tn, self.fn + other.fn
        )


def confusion_from_labels(y_true: np.ndarray, y_pred: np.ndarray) -> ConfusionSummary:
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    pos = y_true == 1
    pred = y_pred == 1
    return ConfusionSummary(
        tp=int(np.count_nonzero(pos & pred)),
        fp=int(np.count_nonzero(~pos & pred)),
        tn=int(np.count_nonzero(~pos & ~pred)),
        fn=int(np.count_nonzero(pos & ~pred)),
    )


def empirical_confusion(w, data: Dataset | Sequence[LabeledPoint]) -> ConfusionSummary:
    """Confusion counts of sign(w.x) on ``data``; ties are predicted negative."""
    weights = weights_of(w)
    if isinstance(data, Dataset):
        if len(data) == 0:
            raise ValueError("empty dataset")
        scores = data.scores(weights)
        labels = data.y
    else:
        data = list(data)
        if not data:
            raise ValueError("empty dataset")
        scores = np.array([pt.dot(weights) for pt in data])
        labels = np.array([pt.label for pt in data])
    return confusion_from_labels(labels, np.where(scores > 0, 1, -1))


def mean_class_rewards(w, data: Dataset, r: RewardFunction) -> tuple[float, float]:
    """Per-class mean rewards (P, N) of ``w`` on ``data``.

    With the 0-1 reward this is (TPR, TNR); a class absent from ``data``
    gets 1, as for the rates.
    """
    scores = data.scores(weights_of(w))
    y = data.y
    if r.kind == "hinge":
        vals = np.clip(np.minimum(1.0, y * scores), -r.bound, r.bound)
    elif r.kind == "logistic":
        vals = np.clip(1.0 - np.logaddexp(0.0, -y * scores), -r.bound, r.bound)
    else:
        vals = (y * scores > 0).astype(np.float64)
    pos = y == 1
    P = float(vals[pos].mean()) if pos.any() else 1.0
    N = float(vals[~pos].mean()) if (~pos).any() else 1.0
    return P, N
