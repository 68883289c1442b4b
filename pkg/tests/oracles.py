"""Reference computations that do not reuse package internals.

Most components are rank one: f(x) = g(a.x + b) for a scalar concave g. Their
concave conjugate is finite only on the ray u = k a, where
f*(k a) = g*(k) - k b, and the dual-loss minimiser over that ray is found by
a convex 1-D grid search. The conjugates g* below were derived by hand.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np


def central_grad(f, x, y, h=1e-6):
    return (
        (f(x + h, y) - f(x - h, y)) / (2 * h),
        (f(x, y + h) - f(x, y - h)) / (2 * h),
    )


# -- scalar conjugates g*(k) = inf_s k s - g(s) --------------------------------


def conj_log(c: float) -> Callable[[float], float]:
    """g(s) = log(s / c), defined for k > 0."""
    return lambda k: 1.0 + math.log(k) + math.log(c) if k > 0 else -math.inf


def conj_one_minus_square(k: float) -> float:
    """g(s) = 1 - s^2."""
    return -k * k / 4.0 - 1.0


def conj_minus_one_minus_square(k: float) -> float:
    """g(s) = -1 - s^2."""
    return 1.0 - k * k / 4.0


def conj_log_pair(wp: float, wn: float, c: float, shift: float = 0.0) -> Callable[[float], float]:
    """g(s) = wp log(s/c) + wn log((c - s)/c) + shift on 0 < s < c.

    Stationarity k s^2 - (k c + W) s + wp c = 0 with W = wp + wn; the root in
    (0, c) is 2 wp c / ((k c + W) + sqrt(disc)) for every real k.
    """
    W = wp + wn

    def g(s):
        return wp * math.log(s / c) + wn * math.log((c - s) / c) + shift

    def conj(k):
        disc = (k * c + W) ** 2 - 4.0 * k * wp * c
        s = 2.0 * wp * c / ((k * c + W) + math.sqrt(disc))
        return k * s - g(s)

    return conj


@dataclass
class RankOne:
    """f(x) = g(a.x + b) described by its direction, offset and g*."""

    a: tuple[float, float]
    b: float
    gstar: Callable[[float], float]
    k_range: tuple[float, float]

    def conj(self, u) -> float:
        a = np.asarray(self.a)
        k = float(np.dot(u, a) / np.dot(a, a))
        # off the ray the conjugate is -inf
        assert np.allclose(k * a, u, atol=1e-9), "dual off the conjugate's ray"
        return self.gstar(k) - k * self.b

    def ftl_argmin(self, x, resolution=1e-3) -> np.ndarray:
        """argmin over u = k a of <u, x> - f*(u), by iterated grid refinement."""
        a = np.asarray(self.a)
        s = float(a @ np.asarray(x)) + self.b
        lo, hi = self.k_range
        step_target = resolution / np.abs(a).max() / 4.0
        while True:
            ks = np.linspace(lo, hi, 2001)
            vals = np.array([k * s - self.gstar(k) for k in ks])
            i = int(np.nanargmin(np.where(np.isfinite(vals), vals, np.inf)))
            step = ks[1] - ks[0]
            if step <= step_target:
                return ks[i] * a
            lo, hi = ks[max(i - 2, 0)], ks[min(i + 2, len(ks) - 1)]


@dataclass
class Fixed:
    """Linear component: the dual set is the single gradient point."""

    u: tuple[float, float]

    def conj(self, u) -> float:
        assert np.allclose(u, self.u, atol=1e-12)
        return 0.0

    def ftl_argmin(self, x, resolution=1e-3) -> np.ndarray:
        return np.asarray(self.u, dtype=float)


class QOuter:
    """Weighted harmonic mean psi(x, y) = c x y / (b2 x + y), c = 1 + b2.

    psi is positively homogeneous, so psi* is 0 on the feasible set
    {u : u1 + u2 t >= psi(1, t) for all t >= 0} and -inf elsewhere. The
    dual-loss minimiser is min <u, q> over that set, searched on a lattice.
    """

    def __init__(self, beta: float, resolution: float = 1e-3):
        self.b2 = beta * beta
        self.c = 1.0 + self.b2
        self.res = resolution
        self.u1 = np.arange(0.0, self.c + resolution, resolution)
        ts = np.logspace(-8, 8, 4001)
        bound = np.empty_like(self.u1)
        for j in range(0, self.u1.size, 256):
            u1 = self.u1[j : j + 256, None]
            # u2 >= (psi(1, t) - u1) / t for every t
            bound[j : j + 256] = np.max(self.c / (self.b2 + ts) - u1 / ts, axis=1)
        bound = np.maximum(bound, 0.0)
        self.u2 = np.ceil(bound / resolution - 1e-9) * resolution

    def psi(self, x, y):
        return self.c * x * y / (self.b2 * x + y)

    def conj(self, u) -> float:
        return 0.0

    def feasible(self, u, tol=1e-9) -> bool:
        ts = np.logspace(-8, 8, 4001)
        return bool(np.all(u[0] + u[1] * ts >= self.psi(1.0, ts) - tol))

    def ftl_argmin(self, q, resolution=None) -> np.ndarray:
        vals = self.u1 * q[0] + self.u2 * q[1]
        i = int(np.argmin(vals))
        return np.array([self.u1[i], self.u2[i]])


def reference_components(p: float, eps: float, beta: float = 1.0) -> dict:
    """Oracle descriptions keyed by component name, for prior p and smoothing eps."""
    n = 1.0 - p
    c = 1.0 + 2.0 * eps
    kmax = 1.0 / max(eps, 1e-6) + 10.0
    ps, ns = (eps + p) / c, (eps + n) / c
    H = ps * math.log(ps) + ns * math.log(ns)
    return {
        "ba": Fixed((0.5, 0.5)),
        "log_pred_pos": RankOne((p, -n), eps + n, conj_log(c), (1e-9, kmax)),
        "log_pred_neg": RankOne((-p, n), eps + p, conj_log(c), (1e-9, kmax)),
        "negkld": RankOne((p, -n), eps + n, conj_log_pair(p, n, c), (-kmax, kmax)),
        "nss": RankOne((-p, n), p - n, conj_one_minus_square, (-2.5, 2.5)),
        "-cq_quant": RankOne((-p, n), p - n, conj_minus_one_minus_square, (-2.5, 2.5)),
        "-bk_quant": RankOne((p, -n), eps + n, conj_log_pair(ps, ns, c, -1.0 - H), (-kmax, kmax)),
        "qmeasure_outer": None if beta is None else QOuter(beta),
    }


def brute_force_confusion(w, X, y):
    """Counts of sign(w.x) > 0 against labels by enumeration."""
    tp = fp = tn = fn = 0
    for xi, yi in zip(X, y):
        pred = 1 if sum(a * b for a, b in zip(w, xi)) > 0 else -1
        if pred == 1 and yi == 1:
            tp += 1
        elif pred == 1:
            fp += 1
        elif yi == 1:
            fn += 1
        else:
            tn += 1
    return tp, fp, tn, fn


def exhaustive_alternation(pclass, pquant, rates, start, tol, max_iter=1000):
    """CAN by hand: argmax over all candidates of pclass - v pquant each round."""
    ratio = lambda i: pclass(*rates[i]) / pquant(*rates[i])
    v = ratio(start)
    levels, picks = [v], [start]
    for _ in range(max_iter):
        vals = [pclass(*r) - max(v, 0.0) * pquant(*r) for r in rates]
        best = int(np.argmax(vals))
        v_new = ratio(best)
        levels.append(v_new)
        picks.append(best)
        if v_new <= v + tol:
            break
        v = v_new
    return levels, picks
