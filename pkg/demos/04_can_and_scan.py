"""Ratio measures: exact alternation on a toy, then the streaming version.

Run: python3 demos/04_can_and_scan.py
"""
from quantopt import ClassPrior, make_blobs
from quantopt.can_scan import EpochSchedule, can_run, candidate_oracle, scan_run
from quantopt.data import StreamConfig, split_train_test, stream_sampler
from quantopt.measures import cqreward_measure
from quantopt.nemsis import NemsisConfig
from quantopt.rewards import empirical_confusion
from quantopt.synthetic import best_direction_separator

# Three candidate classifiers, given by their (TPR, TNR), on a rare-positive task.
ps = cqreward_measure(ClassPrior(0.1))
rates = [(0.0, 1.0), (1.0, 0.6), (0.5, 0.96)]
for i, r in enumerate(rates):
    print(f"candidate {i}: rates {r}  CQReward {ps.value(*r):.4f}")

res = can_run(ps, candidate_oracle(ps, rates), 1e-9, lambda i: rates[i], 0)
print("CAN picks", res.models, "levels", [round(v, 4) for v in res.levels])

# Streaming: each epoch runs NEMSIS on the current valuation, then estimates the new level.
data = make_blobs(20_000, p=0.3, seed=0)
train, test = split_train_test(data, 0.7, seed=0)
ps = cqreward_measure(ClassPrior(train.pos_fraction))
res = scan_run(stream_sampler(train, StreamConfig(0)), ps, EpochSchedule(max_epochs=6),
               NemsisConfig(eta0=1.0, radius=10.0), dim=2)
print("\nepoch  samples  level -> new level")
for ep in res.trace:
    print(f"{ep.epoch:5d}  {ep.learn_samples + ep.estimate_samples:7d}  {ep.level:.4f} -> {ep.new_level:.4f}")


def test_cqreward(w):
    c = empirical_confusion(w, test)
    return ps.value(c.tpr, c.tnr)


_, best = best_direction_separator(test, test_cqreward, 720)
print(f"\ntest CQReward {test_cqreward(res.model.weights):.4f}; best direction by brute force {best:.4f}")
