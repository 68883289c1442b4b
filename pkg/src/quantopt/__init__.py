"""Stochastic optimization of quantification performance measures."""
from .can_scan import (
    EpochSchedule,
    ValuationSpec,
    can_run,
    candidate_oracle,
    estimate_level,
    nemsis_oracle,
    scan_run,
    valuation,
)
from .data import (
    StreamConfig,
    SVMLightParseError,
    drift_resample,
    load_svmlight,
    parse_svmlight,
    serialize_svmlight,
    split_train_test,
    stream_sampler,
)
from .harness import (
    ExperimentConfig,
    TraceRecord,
    baseline_classify_count,
    emit_traces,
    read_traces,
    run_experiment,
    sweep,
    tune_grid,
)
from .measures import (
    SmoothingConfig,
    conjugate_value_at_dual,
    dual_update,
    eval_kld,
    make_measure,
)
from .nemsis import NemsisConfig, nemsis_run, nemsis_step
from .points import Dataset, LabeledPoint, LinearModel
from .rewards import ClassPrior, RewardFunction, empirical_confusion
from .synthetic import make_blobs

__all__ = [
    "ClassPrior",
    "Dataset",
    "EpochSchedule",
    "ExperimentConfig",
    "LabeledPoint",
    "LinearModel",
    "NemsisConfig",
    "RewardFunction",
    "SVMLightParseError",
    "SmoothingConfig",
    "StreamConfig",
    "TraceRecord",
    "ValuationSpec",
    "baseline_classify_count",
    "can_run",
    "candidate_oracle",
    "conjugate_value_at_dual",
    "drift_resample",
    "dual_update",
    "emit_traces",
    "empirical_confusion",
    "estimate_level",
    "eval_kld",
    "load_svmlight",
    "make_blobs",
    "make_measure",
    "nemsis_oracle",
    "nemsis_run",
    "nemsis_step",
    "parse_svmlight",
    "read_traces",
    "run_experiment",
    "scan_run",
    "serialize_svmlight",
    "split_train_test",
    "stream_sampler",
    "sweep",
    "tune_grid",
    "valuation",
]
