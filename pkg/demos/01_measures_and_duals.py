"""Performance measures as functions of the true positive and true negative rates.

Run: python3 demos/01_measures_and_duals.py
"""
import numpy as np

from quantopt import ClassPrior
from quantopt.measures import (
    conjugate_value_at_dual,
    dual_update,
    eval_ba,
    eval_kld,
    eval_nss,
    make_measure,
    SmoothingConfig,
)

prior = ClassPrior(0.3)

# A few (TPR, TNR) operating points and how each measure scores them.
points = [(1.0, 1.0), (0.9, 0.7), (0.7, 0.9), (0.0, 1.0)]
names = ["negkld", "qmeasure", "bakld", "nss", "ba"]
print("TPR   TNR  " + "".join(f"{n:>10}" for n in names))
for P, N in points:
    row = [make_measure(n, prior, eps=1e-3).value(P, N) for n in names]
    print(f"{P:.2f}  {N:.2f}" + "".join(f"{v:10.4f}" for v in row))

# NSS rewards equal false positive and false negative mass, even when both are large.
print("\nNSS at TPR=0.4, TNR=0.8 with p=0.25:", eval_nss(0.4, 0.8, ClassPrior(0.25)))
print("BA at the same point:", eval_ba(0.4, 0.8))

# Smoothed KLD stays finite even when the estimate puts no mass on a class.
cfg = SmoothingConfig(1 / 200)
print("\nKLD((1,0) || (0,1)) with eps=1/200:", round(eval_kld((1, 0), (0, 1), cfg), 4))
print("bound log(1/eps) + 1:", round(np.log(200) + 1, 4))

# Duals are gradients at the running average; the conjugate closes the Fenchel-Young identity.
spec = make_measure("qmeasure", prior)
x = (0.8, 0.6)
u = np.array(dual_update(spec.zeta2, x))
lhs = spec.zeta2.value(*x) + conjugate_value_at_dual(spec.zeta2, x)
print("\nNSS dual at", x, "=", u.round(4), "; f(x) + f*(u) - <u, x> =", lhs - u @ np.array(x))
