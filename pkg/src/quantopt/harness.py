"""Experiment driver: data preparation, algorithm dispatch, tuning and sweeps.

A run loads a dataset (an SVMlight file or the built-in Gaussian blobs),
splits it, fits max-abs feature scaling on the training side and trains the
selected algorithm on a seeded stream over the training points. Checkpoints
are scored on a fixed probe subset of the test set; the last record is
scored on the full test set.
"""
from __future__ import annotations

import concurrent.futures
import dataclasses
import itertools
import json
import math
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import data as dio
from .can_scan import EpochSchedule, can_run, nemsis_oracle, scan_run
from .measures import (
    MEASURE_IDS,
    NESTED_IDS,
    PSEUDO_IDS,
    NestedMeasureSpec,
    PseudoMeasureSpec,
    SmoothingConfig,
    eval_cqb,
    eval_kld,
    eval_nss_counts,
    make_measure,
)
from .nemsis import NemsisConfig, nemsis_run
from .points import Dataset, LinearModel, project_ball
from .rewards import ClassPrior, RewardFunction, empirical_confusion, mean_class_rewards
from .synthetic import make_blobs

ALGORITHMS = ("nemsis", "nemsis-ns", "can", "scan", "scan-ns", "cc-baseline")
TRACE_FORMATS = ("csv", "jsonl")
TUNABLE = ("eta0", "radius", "reward_bound")
SWEEPABLE = ("cweight", "target_p")
DEFAULT_GRID = tuple(10.0**k for k in range(-4, 5))
PROBE_SIZE = 2000
VALIDATION_FRAC = 0.2
SYNTHETIC = "synthetic"


class ConfigError(ValueError):
    """Invalid experiment configuration."""


class DataError(OSError):
    """Unreadable or malformed input data, with the offending path."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce a run.

    ``epsilon`` overrides the smoothing constant, which otherwise is
    1/(2|S|) for the set being scored. ``max_epochs`` bounds CAN iterations
    and SCAN epochs; when unset, SCAN runs as many epochs as ``max_samples``
    allows and CAN stops after 10 iterations.
    """

    measure: str = "negkld"
    algo: str = "nemsis"
    data: str = SYNTHETIC
    train_frac: float = 0.7
    seed: int = 0
    eta0: float = 1.0
    radius: float = 10.0
    reward: str = "hinge"
    reward_bound: float = 10.0
    mode: str | None = None
    epsilon: float | None = None
    cweight: float = 0.5
    qbeta: float = 1.0
    s0: int = 500
    growth: float = 2.0
    max_epochs: int | None = None
    max_samples: int = 50_000
    trace_every: int = 0
    drift_p: float | None = None
    can_tol: float = 1e-4
    synthetic_size: int = 20_000
    synthetic_p: float = 0.3
    scale: bool = True
    out: str | None = None
    format: str = "csv"

    def __post_init__(self):
        def bad(msg):
            raise ConfigError(msg)

        if self.measure not in MEASURE_IDS:
            bad(f"unknown measure {self.measure!r}; expected one of {', '.join(MEASURE_IDS)}")
        if self.algo not in ALGORITHMS:
            bad(f"unknown algorithm {self.algo!r}; expected one of {', '.join(ALGORITHMS)}")
        if self.algo in ("nemsis", "nemsis-ns") and self.measure not in NESTED_IDS:
            bad(f"{self.algo} needs a nested concave measure ({', '.join(NESTED_IDS)})")
        if self.algo in ("can", "scan", "scan-ns") and self.measure not in PSEUDO_IDS:
            bad(f"{self.algo} needs a pseudo-concave measure ({', '.join(PSEUDO_IDS)})")
        if self.reward not in ("hinge", "logistic"):
            bad("reward must be hinge or logistic")
        if self.mode not in (None, "surrogate", "ns"):
            bad("mode must be surrogate or ns")
        if self.format not in TRACE_FORMATS:
            bad(f"format must be one of {TRACE_FORMATS}")
        if not 0.0 < self.train_frac < 1.0:
            bad("train-frac must lie in (0, 1)")
        checks = [
            (self.eta0 > 0, "eta0 must be positive"),
            (self.radius > 0, "radius must be positive"),
            (self.reward_bound > 0, "reward bound must be positive"),
            (self.epsilon is None or self.epsilon > 0, "epsilon must be positive"),
            (0.0 <= self.cweight <= 1.0, "cweight must lie in [0, 1]"),
            (self.qbeta > 0, "qbeta must be positive"),
            (self.s0 >= 1, "s0 must be at least 1"),
            (self.growth > 1, "growth must exceed 1"),
            (self.max_epochs is None or self.max_epochs >= 1, "max-epochs must be at least 1"),
            (self.max_samples >= 1, "max-samples must be at least 1"),
            (self.trace_every >= 0, "trace-every must be nonnegative"),
            (self.drift_p is None or 0.0 < self.drift_p < 1.0, "drift-p must lie in (0, 1)"),
            (self.can_tol > 0, "CAN tolerance must be positive"),
            (self.synthetic_size >= 10, "synthetic size must be at least 10"),
            (0.0 < self.synthetic_p < 1.0, "synthetic p must lie in (0, 1)"),
        ]
        for ok, msg in checks:
            # NaN fails every comparison and lands here too
            if not ok:
                bad(msg)
        for name in ("eta0", "radius", "reward_bound", "cweight", "qbeta", "growth", "can_tol"):
            if not math.isfinite(getattr(self, name)):
                bad(f"{name} must be finite")

    @property
    def effective_mode(self) -> str:
        if self.mode is not None:
            return self.mode
        return "ns" if self.algo.endswith("-ns") else "surrogate"

    def replace(self, **kw) -> "ExperimentConfig":
        return dataclasses.replace(self, **kw)


@dataclass(frozen=True)
class TraceRecord:
    """One checkpoint. ``epoch`` is set for CAN and SCAN, None otherwise."""

    t: int
    epoch: int | None
    wall_clock_seconds: float
    objective: float
    kld: float
    ba: float
    nss: float
    measure_value: float
    model_norm: float
    eval_set: str = "probe"


TRACE_FIELDS = tuple(f.name for f in dataclasses.fields(TraceRecord))


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    records: list[TraceRecord]
    model: LinearModel
    truncated: bool = False
    n_train: int = 0
    n_test: int = 0

    def metadata(self) -> dict:
        return {
            "config": dataclasses.asdict(self.config),
            "truncated": self.truncated,
            "n_train": self.n_train,
            "n_test": self.n_test,
        }


# -- data preparation --------------------------------------------------------


@dataclass
class Prepared:
    train: Dataset
    test: Dataset
    probe: Dataset
    train_rows: np.ndarray
    probe_rows: np.ndarray


def load_dataset(cfg: ExperimentConfig) -> Dataset:
    if cfg.data == SYNTHETIC:
        return make_blobs(cfg.synthetic_size, p=cfg.synthetic_p, seed=cfg.seed)
    try:
        return dio.load_svmlight(cfg.data)
    except dio.SVMLightParseError as exc:
        raise DataError(f"{cfg.data}: {exc}") from exc
    except OSError as exc:
        raise DataError(f"{cfg.data}: {exc.strerror or exc}") from exc


def prepare(cfg: ExperimentConfig, full: Dataset | None = None) -> Prepared:
    """Split, scale, optionally drift the test side, and draw the probe set."""
    full = load_dataset(cfg) if full is None else full
    try:
        tr_rows, te_rows = dio.split_indices(len(full), cfg.train_frac, cfg.seed)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    train, test = full.subset(tr_rows), full.subset(te_rows)
    if cfg.scale:
        scales = dio.max_abs_scales(train)
        train, test = dio.scale_features(train, scales), dio.scale_features(test, scales)
    if cfg.drift_p is not None:
        try:
            rows = dio.drift_rows(test, cfg.drift_p, len(test), seed=cfg.seed + 1)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        test, te_rows = test.subset(rows), te_rows[rows]
    k = min(PROBE_SIZE, len(test))
    pick = np.sort(np.random.default_rng(cfg.seed + 2).permutation(len(test))[:k])
    probe = test.subset(pick)
    probe_rows = te_rows[pick]
    # probe points come from the held-out side only
    assert np.intersect1d(tr_rows, probe_rows).size == 0
    return Prepared(train, test, probe, tr_rows, probe_rows)


# -- scoring -----------------------------------------------------------------


def _train_eps(cfg: ExperimentConfig, n: int) -> float:
    return cfg.epsilon if cfg.epsilon is not None else 1.0 / (2 * n)


def build_measure(cfg: ExperimentConfig, train: Dataset) -> NestedMeasureSpec | PseudoMeasureSpec | None:
    if cfg.measure == "cqb":
        return None
    p = train.pos_fraction
    if not 0.0 < p < 1.0:
        raise ConfigError("training data must contain both classes")
    return make_measure(
        cfg.measure, ClassPrior(p), eps=_train_eps(cfg, len(train)), C=cfg.cweight, beta=cfg.qbeta
    )


def score(
    w: np.ndarray,
    data: Dataset,
    cfg: ExperimentConfig,
    spec,
    reward: RewardFunction,
) -> dict[str, float]:
    """KLD, BA, NSS and measure value at 0-1 rates; objective at surrogate rates."""
    c = empirical_confusion(w, data)
    eps = cfg.epsilon if cfg.epsilon is not None else 1.0 / (2 * len(data))
    p_true = c.true_pos_fraction
    p_hat = c.predicted_pos_fraction
    kld = eval_kld((p_true, 1.0 - p_true), (p_hat, 1.0 - p_hat), SmoothingConfig(eps))
    ba = 0.5 * (c.tpr + c.tnr)
    nss = eval_nss_counts(c.fn, c.fp, p_true, c.total)
    if spec is None:
        mv = eval_cqb(c.fp, c.fn)
        obj = -mv
    else:
        mv = spec.value(c.tpr, c.tnr)
        P, N = mean_class_rewards(w, data, reward)
        if isinstance(spec, PseudoMeasureSpec):
            P, N = min(max(P, 0.0), 1.0), min(max(N, 0.0), 1.0)
        obj = spec.value(P, N)
    return {"objective": obj, "kld": kld, "ba": ba, "nss": nss, "measure_value": mv}


def _record(t, epoch, clock, w, data, cfg, spec, reward, eval_set) -> TraceRecord:
    s = score(w, data, cfg, spec, reward)
    return TraceRecord(
        int(t), epoch, float(clock), s["objective"], s["kld"], s["ba"], s["nss"],
        s["measure_value"], float(np.linalg.norm(w)), eval_set,
    )


# -- algorithms --------------------------------------------------------------


def _nemsis_cfg(cfg: ExperimentConfig, mode: str, max_samples: int | None) -> NemsisConfig:
    return NemsisConfig(
        eta0=cfg.eta0,
        radius=cfg.radius,
        mode=mode,
        reward=RewardFunction(cfg.reward, cfg.reward_bound),
        max_samples=max_samples,
        trace_every=cfg.trace_every,
    )


def _scan_epochs(cfg: ExperimentConfig) -> tuple[int, bool]:
    """Epoch count for SCAN; the flag is set when the budget forces a cut."""
    sched = EpochSchedule(cfg.s0, cfg.s0, cfg.growth, 1)
    used, e = 0, 0
    while True:
        need = sched.learn_length(e) + sched.estimate_length(e)
        if used + need > cfg.max_samples:
            break
        used += need
        e += 1
    if cfg.max_epochs is None:
        return max(e, 1), e == 0
    return cfg.max_epochs, cfg.max_epochs > e


def baseline_classify_count(
    train: Dataset, test: Dataset, cfg: ExperimentConfig, weights: np.ndarray | None = None
) -> tuple[TraceRecord, np.ndarray]:
    """Classify and count with a logistic-SGD linear classifier.

    Steps eta0/sqrt(t) on the logistic log-likelihood with projection onto
    the radius ball; the prevalence estimate is the fraction of test points
    predicted positive. Passing ``weights`` skips training and counts with
    that fixed classifier instead.
    """
    if len(train) == 0 or len(test) == 0:
        raise ConfigError("classify-and-count needs non-empty train and test sets")
    start = time.monotonic()
    dim = max(train.dim, test.dim)
    if weights is not None:
        w = np.asarray(weights, dtype=np.float64)
        if w.shape != (dim,):
            raise ConfigError(f"baseline weights must have shape ({dim},)")
        steps = 0
    else:
        w, steps = np.zeros(dim), cfg.max_samples
    stream = dio.stream_sampler(train, dio.StreamConfig(cfg.seed))
    for t, pt in enumerate(itertools.islice(stream, steps), start=1):
        m = pt.label * float(w[pt.indices] @ pt.values)
        # d/dm log sigmoid(m) = sigmoid(-m)
        g = pt.label * 0.5 * (1.0 - math.tanh(0.5 * m))
        if g != 0.0 and pt.indices.size:
            w[pt.indices] += cfg.eta0 / math.sqrt(t) * g * pt.values
            w = project_ball(w, cfg.radius)
    spec = build_measure(cfg, train)
    reward = RewardFunction(cfg.reward, cfg.reward_bound)
    rec = _record(steps, None, time.monotonic() - start, w, test, cfg, spec, reward, "test")
    return rec, w


def _run_on(cfg: ExperimentConfig, train: Dataset, probe: Dataset, final: Dataset) -> ExperimentResult:
    """Train on ``train``; score checkpoints on ``probe`` and the end on ``final``."""
    dim = max(train.dim, probe.dim, final.dim)
    train = Dataset(train.X, train.y, dim) if train.dim != dim else train
    if cfg.algo == "cc-baseline":
        rec, w = baseline_classify_count(train, final, cfg)
        return ExperimentResult(cfg, [rec], LinearModel(w, cfg.radius), False, len(train), len(final))

    spec = build_measure(cfg, train)
    reward = RewardFunction(cfg.reward, cfg.reward_bound)
    stream = dio.stream_sampler(train, dio.StreamConfig(cfg.seed))
    # (t, epoch, clock, weights)
    checkpoints: list[tuple[int, int | None, float, np.ndarray]] = []
    truncated = False

    if cfg.algo in ("nemsis", "nemsis-ns"):
        res = nemsis_run(stream, spec, _nemsis_cfg(cfg, cfg.effective_mode, cfg.max_samples), dim)
        checkpoints = [(e.t, None, e.wall_clock_seconds, e.weights) for e in res.trace]
        model = res.model
    elif cfg.algo in ("scan", "scan-ns"):
        n_epochs, truncated = _scan_epochs(cfg)
        sched = EpochSchedule(cfg.s0, cfg.s0, cfg.growth, n_epochs)
        budget = itertools.islice(stream, cfg.max_samples)
        res = scan_run(budget, spec, sched, _nemsis_cfg(cfg, "surrogate", None), cfg.effective_mode, dim)
        truncated = truncated or res.truncated
        used = 0
        for ep in res.trace:
            used += ep.learn_samples + ep.estimate_samples
            checkpoints.append((used, ep.epoch, ep.wall_clock_seconds, ep.weights))
        model = res.model
        if not checkpoints:
            checkpoints = [(0, None, 0.0, model.weights)]
    else:  # can
        inner = _nemsis_cfg(cfg, "surrogate", cfg.max_samples)
        oracle = nemsis_oracle(train, spec, inner, seed=cfg.seed)
        start = time.monotonic()
        stamps: list[float] = []

        def rates(model):
            stamps.append(time.monotonic() - start)
            P, N = mean_class_rewards(model, train, reward)
            return min(max(P, 0.0), 1.0), min(max(N, 0.0), 1.0)

        res = can_run(
            spec, oracle, cfg.can_tol, rates, LinearModel.zeros(dim, cfg.radius),
            max_iterations=cfg.max_epochs or 10,
        )
        truncated = res.truncated
        for i, m in enumerate(res.models):
            checkpoints.append((i * cfg.max_samples, i, stamps[i], m.weights))
        model = res.model

    records = [
        _record(t, ep, clk, w, probe, cfg, spec, reward, "probe") for t, ep, clk, w in checkpoints[:-1]
    ]
    t, ep, clk, w = checkpoints[-1]
    records.append(_record(t, ep, clk, w, final, cfg, spec, reward, "test"))
    return ExperimentResult(cfg, records, model, truncated, len(train), len(final))


def run_experiment(cfg: ExperimentConfig, full: Dataset | None = None) -> ExperimentResult:
    """Run one configured experiment and write its traces if ``cfg.out`` is set.

    Args:
        cfg: the experiment configuration.
        full: optional preloaded dataset used instead of ``cfg.data``.

    Raises:
        ConfigError: invalid configuration or unusable data split.
        DataError: unreadable or malformed data file, or unwritable output.
    """
    prep = prepare(cfg, full)
    result = _run_on(cfg, prep.train, prep.probe, prep.test)
    if cfg.out:
        emit_traces(result.records, cfg.format, cfg.out, metadata=result.metadata())
    return result


# -- trace emission ----------------------------------------------------------


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return "%.17g" % v
    return str(v)


def _json_value(v) -> str:
    if v is None:
        return "null"
    if isinstance(v, float):
        if math.isnan(v):
            return "NaN"
        if math.isinf(v):
            return "Infinity" if v > 0 else "-Infinity"
        return "%.17g" % v
    if isinstance(v, str):
        return json.dumps(v)
    return str(v)


def emit_traces(
    records: Sequence[TraceRecord], format: str, path: str | Path, metadata: dict | None = None
) -> None:
    """Write records as CSV (fixed header) or JSON lines.

    Floats carry 17 significant digits. When ``metadata`` is given it is
    written next to the trace as ``<path>.meta.json``.
    """
    if format not in TRACE_FORMATS:
        raise ConfigError(f"format must be one of {TRACE_FORMATS}")
    path = Path(path)
    if format == "csv":
        lines = [",".join(TRACE_FIELDS)]
        lines += [",".join(_fmt(getattr(r, f)) for f in TRACE_FIELDS) for r in records]
    else:
        lines = [
            "{" + ", ".join(f'"{f}": {_json_value(getattr(r, f))}' for f in TRACE_FIELDS) + "}"
            for r in records
        ]
    text = "\n".join(lines) + ("\n" if lines else "")
    try:
        path.write_text(text)
        if metadata is not None:
            Path(str(path) + ".meta.json").write_text(json.dumps(metadata, indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        raise DataError(f"cannot write {path}: {exc.strerror or exc}") from exc


def _parse_field(name: str, raw):
    if name in ("t",):
        return int(raw)
    if name == "epoch":
        return None if raw in ("", None) else int(raw)
    if name == "eval_set":
        return str(raw)
    return float(raw)


def read_traces(path: str | Path, format: str) -> list[TraceRecord]:
    """Inverse of :func:`emit_traces`."""
    text = Path(path).read_text()
    out = []
    if format == "csv":
        lines = text.splitlines()
        if not lines or tuple(lines[0].split(",")) != TRACE_FIELDS:
            raise ValueError(f"{path}: unexpected trace header")
        for line in lines[1:]:
            vals = line.split(",")
            out.append(TraceRecord(**{f: _parse_field(f, v) for f, v in zip(TRACE_FIELDS, vals)}))
    elif format == "jsonl":
        for line in text.splitlines():
            if line.strip():
                obj = json.loads(line)
                out.append(TraceRecord(**{f: _parse_field(f, obj[f]) for f in TRACE_FIELDS}))
    else:
        raise ValueError(f"format must be one of {TRACE_FORMATS}")
    return out


# -- pools, tuning and sweeps ------------------------------------------------


def pool_width(n_cells: int) -> int:
    """Worker count: QUANTOPT_THREADS if set, else the CPU count, capped by cells."""
    env = os.environ.get("QUANTOPT_THREADS")
    try:
        width = int(env) if env else (os.cpu_count() or 1)
    except ValueError:
        raise ConfigError(f"QUANTOPT_THREADS must be an integer, got {env!r}") from None
    return max(1, min(width, n_cells))


def _map_cells(fn, jobs: list) -> list:
    width = pool_width(len(jobs))
    if width == 1:
        return [fn(*j) for j in jobs]
    with concurrent.futures.ProcessPoolExecutor(max_workers=width) as ex:
        return list(ex.map(fn, *zip(*jobs)))


@dataclass(frozen=True)
class TuneRow:
    params: dict
    objective: float
    error: str | None = None


@dataclass
class TuneReport:
    best: ExperimentConfig
    best_params: dict
    rows: list[TuneRow] = field(default_factory=list)


def _tune_cell(cfg: ExperimentConfig, train: Dataset, val: Dataset) -> tuple[float, str | None]:
    try:
        res = _run_on(cfg.replace(out=None), train, val, val)
    except (ValueError, ArithmeticError) as exc:
        return -math.inf, f"{type(exc).__name__}: {exc}"
    v = res.records[-1].measure_value
    return (-v if cfg.measure == "cqb" else v), None


def tune_grid(
    cfg: ExperimentConfig,
    grid_params: Sequence[str],
    grids: dict[str, Sequence[float]] | None = None,
    validation_frac: float = VALIDATION_FRAC,
    full: Dataset | None = None,
) -> TuneReport:
    """Grid search on a validation split carved from the training data.

    Every combination of the named parameters is trained on the remaining
    training points and scored by the final measure value on the validation
    split (for cqb, lower is better). Ties go to the smaller eta0, then the
    smaller radius.
    """
    grid_params = list(dict.fromkeys(grid_params))
    if not grid_params:
        raise ConfigError("tuning needs at least one parameter")
    for g in grid_params:
        if g not in TUNABLE:
            raise ConfigError(f"cannot tune {g!r}; expected a subset of {TUNABLE}")
    grids = dict(grids or {})
    axes = [tuple(grids.get(g, DEFAULT_GRID)) for g in grid_params]
    if any(len(a) == 0 for a in axes):
        raise ConfigError("tuning grid is empty")

    prep = prepare(cfg.replace(drift_p=None), full)
    try:
        fit_rows, val_rows = dio.split_indices(len(prep.train), 1.0 - validation_frac, cfg.seed + 3)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    fit, val = prep.train.subset(fit_rows), prep.train.subset(val_rows)

    combos = [dict(zip(grid_params, vals)) for vals in itertools.product(*axes)]
    cells = []
    for combo in combos:
        try:
            cells.append(cfg.replace(out=None, **combo))
        except ConfigError as exc:
            cells.append(exc)
    jobs = [(c, fit, val) for c in cells if isinstance(c, ExperimentConfig)]
    outcomes = iter(_map_cells(_tune_cell, jobs))
    rows = []
    for combo, c in zip(combos, cells):
        if isinstance(c, ConfigError):
            rows.append(TuneRow(combo, -math.inf, str(c)))
        else:
            obj, err = next(outcomes)
            rows.append(TuneRow(combo, obj, err))

    def key(i):
        c = combos[i]
        obj = rows[i].objective
        obj = -math.inf if math.isnan(obj) else obj
        return (-obj, c.get("eta0", cfg.eta0), c.get("radius", cfg.radius), c.get("reward_bound", cfg.reward_bound))

    best_i = min(range(len(rows)), key=key)
    if rows[best_i].error is not None:
        raise ConfigError(f"every tuning cell failed; first error: {rows[best_i].error}")
    return TuneReport(cfg.replace(**combos[best_i]), combos[best_i], rows)


@dataclass(frozen=True)
class SweepRow:
    param: str
    value: float
    ba: float
    kld: float
    measure_value: float
    truncated: bool = False
    error: str | None = None


def _sweep_cell(cfg: ExperimentConfig, full: Dataset | None) -> tuple[TraceRecord | None, bool, str | None]:
    try:
        res = run_experiment(cfg, full)
    except (ValueError, ArithmeticError, OSError) as exc:
        return None, False, f"{type(exc).__name__}: {exc}"
    return res.records[-1], res.truncated, None


def sweep(
    cfg: ExperimentConfig,
    sweep_param: str,
    values: Sequence[float],
    full: Dataset | None = None,
) -> list[SweepRow]:
    """One run per value with a shared seed; rows sorted by value.

    Failed cells are kept as rows with NaN metrics and an error message.
    """
    if sweep_param not in SWEEPABLE:
        raise ConfigError(f"cannot sweep {sweep_param!r}; expected one of {SWEEPABLE}")
    values = sorted(float(v) for v in values)
    if not values:
        raise ConfigError("sweep needs at least one value")
    field_name = "cweight" if sweep_param == "cweight" else "drift_p"
    cells = []
    for v in values:
        try:
            cells.append(cfg.replace(out=None, **{field_name: v}))
        except ConfigError as exc:
            cells.append(exc)
    jobs = [(c, full) for c in cells if isinstance(c, ExperimentConfig)]
    outcomes = iter(_map_cells(_sweep_cell, jobs))
    rows = []
    nan = float("nan")
    for v, c in zip(values, cells):
        if isinstance(c, ConfigError):
            rows.append(SweepRow(sweep_param, v, nan, nan, nan, False, str(c)))
            continue
        rec, trunc, err = next(outcomes)
        if rec is None:
            rows.append(SweepRow(sweep_param, v, nan, nan, nan, False, err))
        else:
            rows.append(SweepRow(sweep_param, v, rec.ba, rec.kld, rec.measure_value, trunc))
    return rows


def sweep_long(rows: Iterable[SweepRow]) -> list[tuple[str, float, str, float]]:
    """Tidy (param, value, metric, metric_value) rows for plotting."""
    out = []
    for r in rows:
        for metric in ("ba", "kld", "measure_value"):
            out.append((r.param, r.value, metric, getattr(r, metric)))
    return out


def emit_sweep(rows: Sequence[SweepRow], format: str, path: str | Path) -> None:
    """Write the long-format sweep table as CSV or JSON lines."""
    path = Path(path)
    long = sweep_long(rows)
    errors = {(r.param, r.value): r.error for r in rows}
    if format == "csv":
        lines = ["param,value,metric,metric_value,error"]
        for p, v, m, mv in long:
            err = (errors[(p, v)] or "").replace(",", ";").replace("\n", " ")
            lines.append(f"{p},{_fmt(v)},{m},{_fmt(mv)},{err}")
    elif format == "jsonl":
        lines = [
            "{" + f'"param": {json.dumps(p)}, "value": {_json_value(v)}, "metric": {json.dumps(m)}, '
            f'"metric_value": {_json_value(mv)}, "error": {json.dumps(errors[(p, v)])}' + "}"
            for p, v, m, mv in long
        ]
    else:
        raise ConfigError(f"format must be one of {TRACE_FORMATS}")
    try:
        path.write_text("\n".join(lines) + "\n")
    except OSError as exc:
        raise DataError(f"cannot write {path}: {exc.strerror or exc}") from exc


def emit_tune_report(report: TuneReport, format: str, path: str | Path) -> None:
    path = Path(path)
    names = list(report.rows[0].params) if report.rows else []
    if format == "csv":
        lines = [",".join(names + ["objective", "error"])]
        for r in report.rows:
            err = (r.error or "").replace(",", ";").replace("\n", " ")
            lines.append(",".join([_fmt(r.params[n]) for n in names] + [_fmt(r.objective), err]))
    elif format == "jsonl":
        lines = [
            "{" + ", ".join(f"{json.dumps(n)}: {_json_value(r.params[n])}" for n in names)
            + f', "objective": {_json_value(r.objective)}, "error": {json.dumps(r.error)}' + "}"
            for r in report.rows
        ]
    else:
        raise ConfigError(f"format must be one of {TRACE_FORMATS}")
    try:
        path.write_text("\n".join(lines) + "\n")
    except OSError as exc:
        raise DataError(f"cannot write {path}: {exc.strerror or exc}") from exc
