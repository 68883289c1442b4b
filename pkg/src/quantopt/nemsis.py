"""Nested primal-dual stochastic updates for nested concave measures.

Each sample triggers one projected stochastic ascent step on the model,
weighted by the current dual variables. It then updates the running reward
averages ``r`` and the auxiliary averages ``q``, and refreshes the three duals
in closed form. The duals follow the leader: each is the gradient of its
component at the matching running average.
"""
from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np

from .measures import NestedMeasureSpec, conjugate_value_at_dual, dual_update
from .points import Dataset, LabeledPoint, LinearModel, project_ball
from .rewards import (
    ClassPrior,
    RewardFunction,
    RewardState,
    RunningPrior,
    mean_class_rewards,
    prediction_correct,
)

__all__ = [
    "DualState",
    "NemsisConfig",
    "NemsisResult",
    "NemsisState",
    "NemsisTraceEntry",
    "StepSchedule",
    "nemsis_run",
    "nemsis_step",
    "project_ball",
]

MODES = ("surrogate", "ns")
# neutral confusion used before any sample has been seen
INITIAL_AVERAGE = (0.5, 0.5)

Pair = tuple[float, float]


@dataclass(frozen=True)
class StepSchedule:
    """Step sizes eta_t = eta0 / sqrt(t), indexed from t = 1."""

    eta0: float = 1.0

    def __post_init__(self):
        if not self.eta0 > 0:
            raise ValueError("eta0 must be positive")

    def eta(self, t: int) -> float:
        if t < 1:
            raise ValueError("step index starts at 1")
        return self.eta0 / math.sqrt(t)


@dataclass(frozen=True)
class DualState:
    """Duals for zeta1 (alpha), zeta2 (beta) and psi (gamma).

    ``r_anchor`` and ``q_anchor`` are the (clamped) averages the duals were
    computed at; ``alpha_conj``/``beta_conj`` are zeta1*(alpha), zeta2*(beta).
    """

    alpha: Pair
    beta: Pair
    gamma: Pair
    r_anchor: Pair
    q_anchor: Pair
    alpha_conj: float
    beta_conj: float

    @classmethod
    def at(cls, spec: NestedMeasureSpec, r: Pair, q: Pair) -> "DualState":
        z1, z2, psi = spec.zeta1, spec.zeta2, spec.psi
        return cls(
            alpha=dual_update(z1, r),
            beta=dual_update(z2, r),
            gamma=dual_update(psi, q),
            r_anchor=z1.clamp(*r),
            q_anchor=psi.clamp(*q),
            alpha_conj=conjugate_value_at_dual(z1, r),
            beta_conj=conjugate_value_at_dual(z2, r),
        )


@dataclass
class NemsisState:
    model: LinearModel
    duals: DualState
    rewards: RewardState
    sum_model: np.ndarray
    t: int = 0

    @classmethod
    def initial(
        cls, spec: NestedMeasureSpec, dim: int, radius: float, w0: np.ndarray | None = None
    ) -> "NemsisState":
        w = np.zeros(dim) if w0 is None else project_ball(np.array(w0, dtype=np.float64), radius)
        if w.shape != (dim,):
            raise ValueError("initial model has the wrong dimension")
        duals = DualState.at(spec, INITIAL_AVERAGE, INITIAL_AVERAGE)
        rewards = RewardState(INITIAL_AVERAGE, INITIAL_AVERAGE, 0)
        return cls(LinearModel(w, radius), duals, rewards, np.zeros(dim), 0)

    def averaged_model(self) -> LinearModel:
        """Mean of the iterates w_1..w_t (w_0 when no step was taken)."""
        if self.t == 0:
            return self.model.copy()
        return LinearModel(self.sum_model / self.t, self.model.radius)

    def objective_estimate(self, spec: NestedMeasureSpec) -> float:
        return spec.value(*self.rewards.r_avg)


def nemsis_step(
    state: NemsisState,
    sample: LabeledPoint,
    spec: NestedMeasureSpec,
    sched: StepSchedule,
    mode: str = "surrogate",
    reward: RewardFunction = RewardFunction("hinge"),
    prior: ClassPrior | RunningPrior | None = None,
) -> NemsisState:
    """Advance ``state`` by one sample in place and return it.

    ``prior`` scales the rewards by 1/p or 1/(1-p); it defaults to the
    measure's prior. In "ns" mode the reward averages and q use 0-1
    correctness of the prediction (ties predicted negative, as in confusion
    counts) while the primal step still follows the surrogate.
    """
    w = state.model.weights
    idx, vals, y = sample.indices, sample.values, sample.label
    if idx.size and idx[-1] >= w.shape[0]:
        raise ValueError(
            f"sample has feature index {int(idx[-1])} but model dimension is {w.shape[0]}"
        )
    if prior is None:
        prior = spec.prior
    elif isinstance(prior, RunningPrior):
        prior.observe(y)

    y_hat = float(w[idx] @ vals)
    d = state.duals
    t = state.t
    if y > 0:
        scale = 1.0 / prior.p
        coef = d.gamma[0] * d.alpha[0] + d.gamma[1] * d.beta[0]
    else:
        scale = 1.0 / prior.n
        coef = d.gamma[0] * d.alpha[1] + d.gamma[1] * d.beta[1]

    # primal ascent
    g = reward.derivative(y_hat, y) * scale
    step = sched.eta(t + 1) * coef * g
    if step != 0.0 and idx.size:
        w = w.copy()
        w[idx] += step * vals
        w = project_ball(w, state.model.radius)

    # reward and q bookkeeping
    book = prediction_correct(y_hat, y) if mode == "ns" else reward(y_hat, y)
    s = (book * scale, 0.0) if y > 0 else (0.0, book * scale)
    r1, r2 = state.rewards.r_avg
    q1, q2 = state.rewards.q_vec
    q_acc1 = t * q1 + d.alpha[0] * s[0] + d.alpha[1] * s[1]
    q_acc2 = t * q2 + d.beta[0] * s[0] + d.beta[1] * s[1]
    r_new = ((t * r1 + s[0]) / (t + 1), (t * r2 + s[1]) / (t + 1))
    q_new = ((q_acc1 - d.alpha_conj) / (t + 1), (q_acc2 - d.beta_conj) / (t + 1))

    state.model.weights = w
    state.rewards = RewardState(r_new, q_new, t + 1)
    state.duals = DualState.at(spec, r_new, q_new)
    state.sum_model += w
    state.t = t + 1
    return state


@dataclass(frozen=True)
class NemsisConfig:
    eta0: float = 1.0
    radius: float = 10.0
    mode: str = "surrogate"
    reward: RewardFunction = field(default_factory=RewardFunction)
    max_samples: int | None = 50_000
    trace_every: int = 0
    estimate_prior: bool = False

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        if not self.radius > 0:
            raise ValueError("radius must be positive")
        if self.max_samples is not None and self.max_samples < 1:
            raise ValueError("max_samples must be at least 1")
        if self.trace_every < 0:
            raise ValueError("trace_every must be nonnegative")
        StepSchedule(self.eta0)

    @property
    def schedule(self) -> StepSchedule:
        return StepSchedule(self.eta0)


@dataclass(frozen=True)
class NemsisTraceEntry:
    t: int
    wall_clock_seconds: float
    objective: float
    alpha: Pair
    beta: Pair
    gamma: Pair
    model_norm: float
    weights: np.ndarray
    probe_objective: float | None = None


@dataclass
class NemsisResult:
    model: LinearModel
    last_model: LinearModel
    trace: list[NemsisTraceEntry]
    state: NemsisState
    n_samples: int


def is_checkpoint(t: int, every: int) -> bool:
    """Powers of two, plus multiples of ``every`` when it is positive."""
    return (t & (t - 1)) == 0 or (every > 0 and t % every == 0)


def nemsis_run(
    stream: Iterable[LabeledPoint],
    spec: NestedMeasureSpec,
    cfg: NemsisConfig,
    dim: int,
    w0: np.ndarray | None = None,
    probe: Dataset | None = None,
) -> NemsisResult:
    """Run NEMSIS over ``stream`` and return the averaged model with a trace.

    The trace records the running objective estimate, the duals and the
    averaged model at every checkpoint. If ``probe`` is given, it also
    records the measure evaluated on the probe set with the training reward.
    """
    state = NemsisState.initial(spec, dim, cfg.radius, w0)
    sched = cfg.schedule
    prior = RunningPrior() if cfg.estimate_prior else spec.prior
    trace: list[NemsisTraceEntry] = []
    start = time.monotonic()

    def record():
        avg = state.averaged_model()
        probe_obj = None
        if probe is not None:
            probe_obj = spec.value(*mean_class_rewards(avg, probe, cfg.reward))
        d = state.duals
        trace.append(
            NemsisTraceEntry(
                state.t,
                time.monotonic() - start,
                state.objective_estimate(spec),
                d.alpha,
                d.beta,
                d.gamma,
                avg.norm,
                avg.weights.copy(),
                probe_obj,
            )
        )

    it: Iterator[LabeledPoint] = iter(stream)
    if cfg.max_samples is not None:
        it = itertools.islice(it, cfg.max_samples)
    for sample in it:
        nemsis_step(state, sample, spec, sched, cfg.mode, cfg.reward, prior)
        if is_checkpoint(state.t, cfg.trace_every):
            record()
    if state.t == 0:
        raise ValueError("empty stream")
    if trace[-1].t != state.t:
        record()
    return NemsisResult(state.averaged_model(), state.model.copy(), trace, state, state.t)
