"""Command-line entry point.

Exit codes: 0 success, 1 validation error, 2 I/O error, 3 truncated run.
"""
from __future__ import annotations

import argparse
import math
import sys
from typing import Sequence

from . import harness
from .harness import ALGORITHMS, SWEEPABLE, TRACE_FORMATS, TUNABLE, ConfigError, DataError, ExperimentConfig
from .measures import MEASURE_IDS

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_TRUNCATED = 0, 1, 2, 3

_TUNE_ALIASES = {"eta0": "eta0", "radius": "radius", "b_r": "reward_bound", "reward_bound": "reward_bound"}


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags; that code is reserved for I/O
    def error(self, message):
        raise ConfigError(message)


def _finite(kind):
    def conv(text: str):
        try:
            v = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid number {text!r}") from None
        if isinstance(v, float) and not math.isfinite(v):
            raise argparse.ArgumentTypeError(f"{text!r} is not finite")
        return v

    return conv


def build_parser() -> argparse.ArgumentParser:
    d = ExperimentConfig()
    p = _Parser(prog="quantopt", description="Train and evaluate quantification-oriented linear models.")
    p.add_argument("--algo", choices=ALGORITHMS, default=d.algo)
    p.add_argument("--measure", choices=MEASURE_IDS, default=d.measure)
    p.add_argument("--data", default=d.data, help="SVMlight file, or 'synthetic' for Gaussian blobs")
    p.add_argument("--train-frac", type=_finite(float), default=d.train_frac)
    p.add_argument("--seed", type=_finite(int), default=d.seed)
    p.add_argument("--eta0", type=_finite(float), default=d.eta0)
    p.add_argument("--radius", type=_finite(float), default=d.radius)
    p.add_argument("--reward", choices=("hinge", "logistic"), default=d.reward)
    p.add_argument("--reward-bound", type=_finite(float), default=d.reward_bound, help="reward clamp B_r")
    p.add_argument("--mode", choices=("surrogate", "ns"), default=None)
    p.add_argument("--cweight", type=_finite(float), default=d.cweight)
    p.add_argument("--qbeta", type=_finite(float), default=d.qbeta)
    p.add_argument("--epsilon", type=_finite(float), default=None)
    p.add_argument("--s0", type=_finite(int), default=d.s0)
    p.add_argument("--growth", type=_finite(float), default=d.growth)
    p.add_argument("--max-epochs", type=_finite(int), default=None)
    p.add_argument("--max-samples", type=_finite(int), default=d.max_samples)
    p.add_argument("--trace-every", type=_finite(int), default=d.trace_every)
    p.add_argument("--drift-p", type=_finite(float), default=None)
    p.add_argument("--sweep", default=None, metavar="PARAM=V1,V2,...", help=f"PARAM in {SWEEPABLE}")
    p.add_argument("--tune", default=None, metavar="PARAM,...", help="subset of eta0,radius,B_r")
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=TRACE_FORMATS, default=d.format)
    return p


def parse_sweep(text: str) -> tuple[str, list[float]]:
    name, sep, rest = text.partition("=")
    name = name.strip().replace("-", "_")
    if not sep or name not in SWEEPABLE:
        raise ConfigError(f"--sweep expects PARAM=V1,V2,... with PARAM in {SWEEPABLE}")
    try:
        values = [float(v) for v in rest.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"--sweep values must be numbers, got {rest!r}") from None
    if not values or not all(math.isfinite(v) for v in values):
        raise ConfigError("--sweep needs at least one finite value")
    return name, values


def parse_tune(text: str) -> list[str]:
    names = [t.strip().lower() for t in text.split(",") if t.strip()]
    if not names or any(n not in _TUNE_ALIASES for n in names):
        raise ConfigError(f"--tune expects a comma list drawn from {TUNABLE}")
    return [_TUNE_ALIASES[n] for n in names]


def config_from_args(ns: argparse.Namespace) -> ExperimentConfig:
    return ExperimentConfig(
        measure=ns.measure, algo=ns.algo, data=ns.data, train_frac=ns.train_frac, seed=ns.seed,
        eta0=ns.eta0, radius=ns.radius, reward=ns.reward, reward_bound=ns.reward_bound, mode=ns.mode,
        epsilon=ns.epsilon, cweight=ns.cweight, qbeta=ns.qbeta, s0=ns.s0, growth=ns.growth,
        max_epochs=ns.max_epochs, max_samples=ns.max_samples, trace_every=ns.trace_every,
        drift_p=ns.drift_p, out=ns.out, format=ns.format,
    )


def _summary(rec) -> str:
    return (
        f"t={rec.t} kld={rec.kld:.6g} ba={rec.ba:.6g} nss={rec.nss:.6g} "
        f"measure={rec.measure_value:.6g} norm={rec.model_norm:.6g}"
    )


def run(argv: Sequence[str] | None = None) -> int:
    try:
        ns = build_parser().parse_args(argv)
        cfg = config_from_args(ns)
        if ns.sweep and ns.tune:
            raise ConfigError("--sweep and --tune are mutually exclusive")
        if ns.sweep:
            name, values = parse_sweep(ns.sweep)
            rows = harness.sweep(cfg, name, values)
            if cfg.out:
                harness.emit_sweep(rows, cfg.format, cfg.out)
            for r in rows:
                status = f"error: {r.error}" if r.error else f"ba={r.ba:.6g} kld={r.kld:.6g} measure={r.measure_value:.6g}"
                print(f"{r.param}={r.value:g} {status}")
            if any(r.error for r in rows):
                return EXIT_CONFIG
            return EXIT_TRUNCATED if any(r.truncated for r in rows) else EXIT_OK
        if ns.tune:
            report = harness.tune_grid(cfg.replace(out=None), parse_tune(ns.tune))
            print("best " + " ".join(f"{k}={v:g}" for k, v in report.best_params.items()))
            if cfg.out:
                harness.emit_tune_report(report, cfg.format, cfg.out + ".tune")
            cfg = cfg.replace(**report.best_params)
        result = harness.run_experiment(cfg)
        print(_summary(result.records[-1]))
        if result.truncated:
            print("warning: run truncated before its schedule completed", file=sys.stderr)
            return EXIT_TRUNCATED
        return EXIT_OK
    except ConfigError as exc:
        print(f"quantopt: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, OSError) as exc:
        print(f"quantopt: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"quantopt: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
