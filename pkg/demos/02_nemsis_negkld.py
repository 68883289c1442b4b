"""Online NegKLD training with NEMSIS on separable Gaussian blobs.

Run: python3 demos/02_nemsis_negkld.py
"""
import numpy as np

from quantopt import ClassPrior, NemsisConfig, make_blobs, nemsis_run
from quantopt.data import StreamConfig, split_train_test, stream_sampler
from quantopt.measures import eval_kld, negkld_measure, SmoothingConfig
from quantopt.rewards import empirical_confusion

data = make_blobs(20_000, p=0.3, seed=0)
train, test = split_train_test(data, 0.7, seed=0)
print(f"train {len(train)} points, p = {train.pos_fraction:.3f}; test {len(test)} points")

spec = negkld_measure(ClassPrior(train.pos_fraction), eps=1 / (2 * len(train)))
cfg = NemsisConfig(eta0=1.0, radius=10.0, max_samples=50_000, trace_every=10_000)
res = nemsis_run(stream_sampler(train, StreamConfig(seed=0)), spec, cfg, dim=train.dim)

# Checkpoints fall on powers of two and on multiples of trace_every.
smooth = SmoothingConfig.for_size(len(test))
print("\n      t   running objective   test KLD    |w|")
for e in res.trace:
    if e.t < 256:
        continue
    c = empirical_confusion(e.weights, test)
    kld = eval_kld((c.true_pos_fraction, 1 - c.true_pos_fraction),
                   (c.predicted_pos_fraction, 1 - c.predicted_pos_fraction), smooth)
    print(f"{e.t:7d}   {e.objective:17.5f}   {kld:9.2e}   {e.model_norm:.3f}")

w = res.model.weights
print("\naveraged model direction:", (w / np.linalg.norm(w)).round(3))
