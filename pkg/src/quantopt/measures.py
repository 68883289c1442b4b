"""Performance measures in canonical (P, N) form and their dual machinery.

``P`` and ``N`` are the true positive and true negative rates, or the mean
class-conditional surrogate rewards standing in for them. Every measure is
built from small differentiable :class:`Component` objects. Nested concave
measures compose an outer component with two inner ones, and pseudo-concave
measures divide a concave component by a convex one.

Dual updates use the gradient-inverse rule: the minimizer of
``<u, a> - f*(u)`` is ``grad f(a)``. The conjugate value at that dual is
``<grad f(a), a> - f(a)`` (Fenchel-Young with equality).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .rewards import ClassPrior

LOG_FLOOR = 1e-12
QMEASURE_FLOOR = 1e-12

MEASURE_IDS = ("negkld", "qmeasure", "bakld", "nss", "ba", "cqreward", "bkreward", "cqb")
NESTED_IDS = ("negkld", "qmeasure", "bakld", "nss", "ba")
PSEUDO_IDS = ("cqreward", "bkreward")

Pair = tuple[float, float]


@dataclass(frozen=True)
class SmoothingConfig:
    epsilon: float

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("smoothing epsilon must be positive")

    @classmethod
    def for_size(cls, n: int) -> "SmoothingConfig":
        """The usual choice 1 / (2 |S|)."""
        if n <= 0:
            raise ValueError("set size must be positive")
        return cls(1.0 / (2 * n))


def _eps(cfg) -> float:
    return cfg.epsilon if isinstance(cfg, SmoothingConfig) else float(cfg)


@dataclass(frozen=True)
class Component:
    """A differentiable function of two reals with a box-shaped safe domain.

    ``value`` and ``grad`` first clamp their arguments into ``[lo, hi]``
    coordinate-wise, so callers never see a domain error mid-stream.
    """

    name: str
    fn: Callable[[float, float], float]
    grad_fn: Callable[[float, float], Pair]
    lo: Pair = (-math.inf, -math.inf)
    hi: Pair = (math.inf, math.inf)

    def clamp(self, x1: float, x2: float) -> Pair:
        lo, hi = self.lo, self.hi
        x1 = lo[0] if x1 < lo[0] else (hi[0] if x1 > hi[0] else x1)
        x2 = lo[1] if x2 < lo[1] else (hi[1] if x2 > hi[1] else x2)
        return x1, x2

    def value(self, x1: float, x2: float) -> float:
        return self.fn(*self.clamp(x1, x2))

    def grad(self, x1: float, x2: float) -> Pair:
        return self.grad_fn(*self.clamp(x1, x2))


ConcaveComponent = Component

_UNIT = ((0.0, 0.0), (1.0, 1.0))


def linear_component(a1: float, a2: float, name: str = "linear") -> Component:
    return Component(name, lambda x, y: a1 * x + a2 * y, lambda x, y: (a1, a2))


def negate(c: Component) -> Component:
    def fn(x, y):
        return -c.fn(x, y)

    def grad_fn(x, y):
        g1, g2 = c.grad_fn(x, y)
        return -g1, -g2

    return Component(f"-{c.name}", fn, grad_fn, c.lo, c.hi)


def ba_component() -> Component:
    return Component("ba", lambda P, N: 0.5 * (P + N), lambda P, N: (0.5, 0.5), *_UNIT)


def nss_component(prior: ClassPrior) -> Component:
    p, n = prior.p, prior.n

    def fn(P, N):
        d = p * (1.0 - P) - n * (1.0 - N)
        return 1.0 - d * d

    def grad_fn(P, N):
        d = p * (1.0 - P) - n * (1.0 - N)
        return 2.0 * d * p, -2.0 * d * n

    return Component("nss", fn, grad_fn, *_UNIT)


def log_pred_pos_component(prior: ClassPrior, eps: float = 0.0) -> Component:
    """log of the smoothed predicted positive fraction p*P + n*(1 - N)."""
    p, n = prior.p, prior.n
    norm = 1.0 + 2.0 * eps

    def arg(P, N):
        return max(eps + p * P + n * (1.0 - N), LOG_FLOOR)

    def fn(P, N):
        return math.log(arg(P, N) / norm)

    def grad_fn(P, N):
        k = 1.0 / arg(P, N)
        return p * k, -n * k

    return Component("log_pred_pos", fn, grad_fn, *_UNIT)


def log_pred_neg_component(prior: ClassPrior, eps: float = 0.0) -> Component:
    """log of the smoothed predicted negative fraction n*N + p*(1 - P)."""
    p, n = prior.p, prior.n
    norm = 1.0 + 2.0 * eps

    def arg(P, N):
        return max(eps + n * N + p * (1.0 - P), LOG_FLOOR)

    def fn(P, N):
        return math.log(arg(P, N) / norm)

    def grad_fn(P, N):
        k = 1.0 / arg(P, N)
        return -p * k, n * k

    return Component("log_pred_neg", fn, grad_fn, *_UNIT)


def negkld_component(prior: ClassPrior, eps: float = 0.0) -> Component:
    """p log p̂+ + n log p̂- as one concave function of (P, N)."""
    pos = log_pred_pos_component(prior, eps)
    neg = log_pred_neg_component(prior, eps)
    p, n = prior.p, prior.n

    def fn(P, N):
        return p * pos.fn(P, N) + n * neg.fn(P, N)

    def grad_fn(P, N):
        a1, a2 = pos.grad_fn(P, N)
        b1, b2 = neg.grad_fn(P, N)
        return p * a1 + n * b1, p * a2 + n * b2

    return Component("negkld", fn, grad_fn, *_UNIT)


def qmeasure_outer(beta: float = 1.0) -> Component:
    """Weighted harmonic combination of (classification, quantification)."""
    if not beta > 0:
        raise ValueError("beta must be positive")
    b2 = beta * beta
    c = 1.0 + b2

    def fn(x, y):
        return c * x * y / (b2 * x + y)

    def grad_fn(x, y):
        z = y / (b2 * x + y)
        return c * z * z, c * (1.0 - z) ** 2 / b2

    return Component("qmeasure_outer", fn, grad_fn, (QMEASURE_FLOOR, QMEASURE_FLOOR))


def cq_quant_component(prior: ClassPrior) -> Component:
    """Convex denominator 1 + (p(1-P) - n(1-N))^2 = 2 - NSS."""
    nss = nss_component(prior)
    return Component("cq_quant", lambda P, N: 2.0 - nss.fn(P, N), negate(nss).grad_fn, *_UNIT)


def bk_quant_component(prior: ClassPrior, eps: float) -> Component:
    """Convex denominator 1 + KLD(p_s, p̂_s), both sides smoothed."""
    p, n = prior.p, prior.n
    norm = 1.0 + 2.0 * eps
    ps, ns = (eps + p) / norm, (eps + n) / norm
    entropy_part = ps * math.log(ps) + ns * math.log(ns)

    def fn(P, N):
        a = max(eps + p * P + n * (1.0 - N), LOG_FLOOR) / norm
        b = max(eps + n * N + p * (1.0 - P), LOG_FLOOR) / norm
        return 1.0 + entropy_part - ps * math.log(a) - ns * math.log(b)

    def grad_fn(P, N):
        ka = ps / max(eps + p * P + n * (1.0 - N), LOG_FLOOR)
        kb = ns / max(eps + n * N + p * (1.0 - P), LOG_FLOOR)
        return -ka * p + kb * p, ka * n - kb * n

    return Component("bk_quant", fn, grad_fn, *_UNIT)


@dataclass(frozen=True)
class NestedMeasureSpec:
    """psi(zeta1(P, N), zeta2(P, N)) with psi non-decreasing in both arguments."""

    name: str
    psi: Component
    zeta1: Component
    zeta2: Component
    prior: ClassPrior
    params: dict = field(default_factory=dict)

    def value(self, P: float, N: float) -> float:
        return self.psi.value(self.zeta1.value(P, N), self.zeta2.value(P, N))


@dataclass(frozen=True)
class PseudoMeasureSpec:
    """pclass / pquant with pquant in [m, M] on the unit square."""

    name: str
    pclass: Component
    pquant: Component
    m: float
    M: float
    prior: ClassPrior
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (0 < self.m <= self.M):
            raise ValueError("need 0 < m <= M")

    def value(self, P: float, N: float) -> float:
        return self.pclass.value(P, N) / self.pquant.value(P, N)


def negkld_measure(prior: ClassPrior, eps: float = 0.0) -> NestedMeasureSpec:
    return NestedMeasureSpec(
        "negkld",
        linear_component(prior.p, prior.n, "negkld_outer"),
        log_pred_pos_component(prior, eps),
        log_pred_neg_component(prior, eps),
        prior,
        {"eps": eps},
    )


def qmeasure_measure(prior: ClassPrior, beta: float = 1.0) -> NestedMeasureSpec:
    return NestedMeasureSpec(
        "qmeasure", qmeasure_outer(beta), ba_component(), nss_component(prior), prior, {"beta": beta}
    )


def bakld_measure(prior: ClassPrior, C: float = 0.5, eps: float = 0.0) -> NestedMeasureSpec:
    if not 0.0 <= C <= 1.0:
        raise ValueError("CWeight must lie in [0, 1]")
    return NestedMeasureSpec(
        "bakld",
        linear_component(C, 1.0 - C, "bakld_outer"),
        ba_component(),
        negkld_component(prior, eps),
        prior,
        {"C": C, "eps": eps},
    )


def nss_measure(prior: ClassPrior) -> NestedMeasureSpec:
    return NestedMeasureSpec(
        "nss", linear_component(1.0, 0.0, "select_first"), nss_component(prior), ba_component(), prior
    )


def ba_measure(prior: ClassPrior) -> NestedMeasureSpec:
    return NestedMeasureSpec(
        "ba", linear_component(1.0, 0.0, "select_first"), ba_component(), ba_component(), prior
    )


def cqreward_measure(prior: ClassPrior) -> PseudoMeasureSpec:
    return PseudoMeasureSpec("cqreward", ba_component(), cq_quant_component(prior), 1.0, 2.0, prior)


def bkreward_measure(prior: ClassPrior, eps: float) -> PseudoMeasureSpec:
    if not eps > 0:
        raise ValueError("BKReward needs a positive smoothing epsilon")
    M = 2.0 + math.log(1.0 / eps)
    return PseudoMeasureSpec(
        "bkreward", ba_component(), bk_quant_component(prior, eps), 1.0, M, prior, {"eps": eps}
    )


def make_measure(
    name: str, prior: ClassPrior, *, eps: float = 0.0, C: float = 0.5, beta: float = 1.0
) -> NestedMeasureSpec | PseudoMeasureSpec:
    """Build a trainable measure by its identifier."""
    if name == "negkld":
        return negkld_measure(prior, eps)
    if name == "qmeasure":
        return qmeasure_measure(prior, beta)
    if name == "bakld":
        return bakld_measure(prior, C, eps)
    if name == "nss":
        return nss_measure(prior)
    if name == "ba":
        return ba_measure(prior)
    if name == "cqreward":
        return cqreward_measure(prior)
    if name == "bkreward":
        return bkreward_measure(prior, eps)
    if name == "cqb":
        raise ValueError("cqb is an evaluation-only measure and cannot be optimized")
    raise ValueError(f"unknown measure {name!r}; expected one of {MEASURE_IDS}")


# -- dual machinery ---------------------------------------------------------


def dual_update(c: Component, avg: Sequence[float]) -> Pair:
    """argmin_u <u, avg> - c*(u), i.e. the gradient of ``c`` at ``avg``."""
    return c.grad(avg[0], avg[1])


def conjugate_value_at_dual(c: Component, avg: Sequence[float]) -> float:
    """c*(grad c(avg)) computed as <grad c(avg), avg> - c(avg)."""
    x1, x2 = c.clamp(avg[0], avg[1])
    g1, g2 = c.grad_fn(x1, x2)
    return g1 * x1 + g2 * x2 - c.fn(x1, x2)


# -- plain measure evaluations ----------------------------------------------


def _check_pair(dist: Sequence[float], what: str, check_sum: bool) -> Pair:
    if len(dist) != 2:
        raise ValueError(f"{what} must have two entries")
    a, b = float(dist[0]), float(dist[1])
    if not (math.isfinite(a) and math.isfinite(b)) or a < 0 or b < 0:
        raise ValueError(f"{what} must be finite and nonnegative, got {dist!r}")
    if check_sum and abs(a + b - 1.0) > 1e-9:
        raise ValueError(f"{what} must sum to 1, got {a + b!r}")
    return a, b


def smooth_distribution(p_dist: Sequence[float], epsilon: float) -> Pair:
    """Additive smoothing (eps + p(c)) / (2 eps + sum p)."""
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    a, b = _check_pair(p_dist, "distribution", check_sum=False)
    denom = 2.0 * epsilon + a + b
    return (epsilon + a) / denom, (epsilon + b) / denom


def eval_kld(p_true: Sequence[float], p_hat: Sequence[float], cfg) -> float:
    """KLD between smoothed true and estimated class distributions."""
    eps = _eps(cfg)
    p1, p2 = smooth_distribution(_check_pair(p_true, "p_true", True), eps)
    q1, q2 = smooth_distribution(_check_pair(p_hat, "p_hat", True), eps)
    return p1 * math.log(p1 / q1) + p2 * math.log(p2 / q2)


def predicted_distribution(P: float, N: float, prior: ClassPrior) -> Pair:
    """(p̂+, p̂-) implied by rates (P, N) under class prior p."""
    P = min(max(P, 0.0), 1.0)
    N = min(max(N, 0.0), 1.0)
    a = prior.p * P + prior.n * (1.0 - N)
    return a, 1.0 - a


def eval_negkld_objective(P: float, N: float, prior: ClassPrior, eps: float = 0.0) -> float:
    """p log p̂+ + n log p̂- with p̂ smoothed by ``eps``.

    This is -KLD(p, p̂) shifted by the constant p log p + n log n.
    """
    return negkld_component(prior, eps).value(P, N)


def eval_nss(P: float, N: float, prior: ClassPrior) -> float:
    d = prior.p * (1.0 - P) - prior.n * (1.0 - N)
    return 1.0 - d * d


def eval_nss_counts(fn: int, fp: int, p: float, size: int) -> float:
    """Count-based NSS normalised by max(p, 1 - p) |S|."""
    return 1.0 - ((fn - fp) / (max(p, 1.0 - p) * size)) ** 2


def eval_ba(P: float, N: float) -> float:
    return 0.5 * (P + N)


def eval_qmeasure(P: float, N: float, prior: ClassPrior, beta: float = 1.0) -> float:
    ba = max(eval_ba(P, N), QMEASURE_FLOOR)
    nss = max(eval_nss(P, N, prior), QMEASURE_FLOOR)
    b2 = beta * beta
    return (1.0 + b2) * ba * nss / (b2 * ba + nss)


def eval_bakld(P: float, N: float, prior: ClassPrior, C: float, eps: float = 0.0) -> float:
    if not 0.0 <= C <= 1.0:
        raise ValueError("CWeight must lie in [0, 1]")
    return C * eval_ba(P, N) + (1.0 - C) * eval_negkld_objective(P, N, prior, eps)


def eval_cqb(fp: int, fn: int) -> float:
    if fp < 0 or fn < 0:
        raise ValueError("counts must be nonnegative")
    return float(abs(fp * fp - fn * fn))


def eval_pseudo(P: float, N: float, spec: PseudoMeasureSpec) -> float:
    return spec.value(P, N)
