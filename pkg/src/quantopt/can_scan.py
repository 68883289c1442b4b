"""Alternating maximization for pseudo-concave (ratio) measures.

A ratio measure ``pclass / pquant`` has convex upper level sets, described by
the valuation ``V(w, v) = pclass(w) - v * pquant(w)``: the measure is at least
``v`` exactly where ``V(w, v) >= 0``. CAN alternates an exact valuation
maximization with a level update. SCAN does the same on a stream, using
NEMSIS epochs for the maximization and fresh samples to estimate the level.
"""
from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Iterator, Sequence

import numpy as np

from .measures import NestedMeasureSpec, PseudoMeasureSpec, linear_component, negate
from .nemsis import NemsisConfig, nemsis_run
from .points import Dataset, LabeledPoint, LinearModel, weights_of
from .rewards import RewardFunction, empirical_confusion, mean_class_rewards

MODES = ("surrogate", "ns")


@dataclass(frozen=True)
class ValuationSpec:
    pseudo: PseudoMeasureSpec
    level: float

    def __post_init__(self):
        if not self.level >= 0:
            raise ValueError("level must be nonnegative")

    def nested(self) -> NestedMeasureSpec:
        """The valuation as a nested concave measure: zeta1 + v * (-pquant)."""
        ps = self.pseudo
        return NestedMeasureSpec(
            f"valuation[{ps.name}]",
            linear_component(1.0, self.level, "valuation_outer"),
            ps.pclass,
            negate(ps.pquant),
            ps.prior,
            {"level": self.level},
        )


def valuation(P: float, N: float, spec: ValuationSpec) -> float:
    ps = spec.pseudo
    return ps.pclass.value(P, N) - spec.level * ps.pquant.value(P, N)


# -- CAN -------------------------------------------------------------------


@dataclass
class CanResult:
    model: Any
    levels: list[float]
    models: list[Any]
    truncated: bool

    @property
    def iterations(self) -> int:
        return len(self.levels) - 1


def can_run(
    pseudo: PseudoMeasureSpec,
    inner_oracle: Callable[[float], Any],
    tol: float,
    rates: Callable[[Any], tuple[float, float]],
    initial_model: Any,
    max_iterations: int = 1000,
    level_noise: Callable[[int], float] | None = None,
) -> CanResult:
    """Concave alternation.

    Args:
        pseudo: the ratio measure to maximize.
        inner_oracle: maps a level v to a model maximizing V(., v).
        tol: stop once a level improves by no more than this.
        rates: maps a model to its (P, N).
        initial_model: w_0.
        max_iterations: hard cap; reaching it sets ``truncated``.
        level_noise: optional perturbation added to each new level, for
            studying inexact level estimates.

    Returns:
        The last model, the level sequence v_0, v_1, ... and all models.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    v = pseudo.value(*rates(initial_model))
    if level_noise is not None:
        v += level_noise(0)
    levels, models = [v], [initial_model]
    for t in range(1, max_iterations + 1):
        w = inner_oracle(max(v, 0.0))
        v_new = pseudo.value(*rates(w))
        if level_noise is not None:
            v_new += level_noise(t)
        levels.append(v_new)
        models.append(w)
        if v_new <= v + tol:
            return CanResult(w, levels, models, False)
        v = v_new
    return CanResult(models[-1], levels, models, True)


def candidate_oracle(
    pseudo: PseudoMeasureSpec, candidate_rates: Sequence[tuple[float, float]]
) -> Callable[[float], int]:
    """Exact valuation maximizer over a finite set of candidate models.

    Models are indices into ``candidate_rates``; ties go to the lowest index.
    """

    def oracle(level: float) -> int:
        spec = ValuationSpec(pseudo, level)
        vals = [valuation(P, N, spec) for P, N in candidate_rates]
        return int(np.argmax(vals))

    return oracle


def nemsis_oracle(
    train: Dataset,
    pseudo: PseudoMeasureSpec,
    cfg: NemsisConfig,
    seed: int = 0,
) -> Callable[[float], LinearModel]:
    """Valuation maximizer backed by a NEMSIS run on a fresh seeded stream.

    Each call uses a new stream seed derived from ``seed`` and the call count.
    """
    from .data import StreamConfig, stream_sampler

    calls = itertools.count()

    def oracle(level: float) -> LinearModel:
        spec = ValuationSpec(pseudo, level).nested()
        stream = stream_sampler(train, StreamConfig(seed=seed * 1_000_003 + next(calls)))
        return nemsis_run(stream, spec, cfg, dim=train.dim).model

    return oracle


# -- SCAN ------------------------------------------------------------------


@dataclass(frozen=True)
class EpochSchedule:
    """Epoch lengths s_e = ceil(s0 * growth^e) and s'_e likewise."""

    s0: int = 500
    s0_prime: int = 500
    growth: float = 2.0
    max_epochs: int = 20

    def __post_init__(self):
        if self.s0 < 1 or self.s0_prime < 1:
            raise ValueError("epoch lengths must be positive")
        if not self.growth > 1:
            raise ValueError("growth must exceed 1")
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be positive")

    def learn_length(self, e: int) -> int:
        return math.ceil(self.s0 * self.growth**e)

    def estimate_length(self, e: int) -> int:
        return math.ceil(self.s0_prime * self.growth**e)


@dataclass
class LevelState:
    v_e: float = 0.0
    v_plus: float = 0.0
    v_minus: float = 0.0
    epoch: int = 0


@dataclass(frozen=True)
class ScanEpoch:
    epoch: int
    level: float
    new_level: float
    learn_samples: int
    estimate_samples: int
    weights: np.ndarray
    wall_clock_seconds: float


@dataclass
class ScanResult:
    model: LinearModel
    trace: list[ScanEpoch] = field(default_factory=list)
    truncated: bool = False

    @property
    def levels(self) -> list[float]:
        return [0.0] + [ep.new_level for ep in self.trace]


def _level(pseudo: PseudoMeasureSpec, v_plus: float, v_minus: float) -> float:
    P = min(max(v_plus, 0.0), 1.0)
    N = min(max(v_minus, 0.0), 1.0)
    return pseudo.pclass.value(P, N) / pseudo.pquant.value(P, N)


def estimate_level(
    model,
    samples: Iterable[LabeledPoint] | Dataset,
    pseudo: PseudoMeasureSpec,
    mode: str = "surrogate",
    reward: RewardFunction = RewardFunction("hinge"),
) -> float:
    """Level of ``model`` from per-class mean rewards on ``samples``.

    "ns" mode uses the empirical TPR and TNR (ties predicted negative).
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if not isinstance(samples, Dataset):
        samples = list(samples)
    if len(samples) == 0:
        raise ValueError("empty sample set")
    if mode == "ns":
        c = empirical_confusion(model, samples)
        return _level(pseudo, c.tpr, c.tnr)
    if not isinstance(samples, Dataset):
        samples = Dataset.from_points(samples, dim=weights_of(model).shape[0])
    return _level(pseudo, *mean_class_rewards(model, samples, reward))


def scan_run(
    stream: Iterable[LabeledPoint],
    pseudo: PseudoMeasureSpec,
    sched: EpochSchedule,
    nemsis_cfg: NemsisConfig,
    mode: str = "surrogate",
    dim: int | None = None,
    w0: np.ndarray | None = None,
) -> ScanResult:
    """Stochastic concave alternation over ``stream``.

    Epoch e runs s_e NEMSIS steps on V(., v_e), warm-started from the
    previous model. The NEMSIS averaged model becomes the new model. The next
    s'_e fresh samples then estimate its level. A stream that runs dry
    mid-epoch returns the last completed epoch's model with ``truncated`` set.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if dim is None:
        raise ValueError("model dimension is required")
    it: Iterator[LabeledPoint] = iter(stream)
    w = np.zeros(dim) if w0 is None else np.asarray(w0, dtype=np.float64)
    state = LevelState()
    result = ScanResult(LinearModel(w.copy(), nemsis_cfg.radius))
    start = time.monotonic()

    for e in range(sched.max_epochs):
        s_e, s_prime = sched.learn_length(e), sched.estimate_length(e)
        learn = list(itertools.islice(it, s_e))
        if len(learn) < s_e:
            result.truncated = True
            break
        spec = ValuationSpec(pseudo, state.v_e).nested()
        cfg = NemsisConfig(
            eta0=nemsis_cfg.eta0,
            radius=nemsis_cfg.radius,
            mode=nemsis_cfg.mode,
            reward=nemsis_cfg.reward,
            max_samples=s_e,
            trace_every=0,
            estimate_prior=nemsis_cfg.estimate_prior,
        )
        new_w = nemsis_run(learn, spec, cfg, dim=dim, w0=w).model.weights

        est = list(itertools.islice(it, s_prime))
        if len(est) < s_prime:
            result.truncated = True
            break
        if mode == "ns":
            c = empirical_confusion(new_w, est)
            state.v_plus, state.v_minus = c.tpr, c.tnr
        else:
            sums = [0.0, 0.0]
            counts = [0, 0]
            for pt in est:
                k = 0 if pt.label > 0 else 1
                sums[k] += nemsis_cfg.reward(pt.dot(new_w), pt.label)
                counts[k] += 1
            state.v_plus = sums[0] / counts[0] if counts[0] else 1.0
            state.v_minus = sums[1] / counts[1] if counts[1] else 1.0
        new_level = _level(pseudo, state.v_plus, state.v_minus)

        result.trace.append(
            ScanEpoch(e, state.v_e, new_level, s_e, s_prime, new_w.copy(), time.monotonic() - start)
        )
        result.model = LinearModel(new_w.copy(), nemsis_cfg.radius)
        w = new_w
        state.v_e = new_level
        state.epoch = e + 1
    return result
