"""The two constrained logistic regression solvers and the exact oracle.

Fits one l1-ball problem (signed features) and one group-norm problem
(one-hot features) with mirror descent, then compares against the
projected-gradient reference minimizer and the step-size suboptimality
guarantee that the averaged iterate must satisfy.
"""

import numpy as np
from scipy.special import expit

from mrflearn import (RegressionProblem, logistic_loss, mirror_descent_l1,
                      mirror_descent_l21, reference_minimizer)

rng = np.random.default_rng(1)

# --- l1 geometry: features in {-1,+1}^n -----------------------------------
n, num = 12, 400
x = rng.choice([-1.0, 1.0], size=(num, n))
w_true = np.zeros(n)
w_true[:3] = [0.6, -0.4, 0.5]
y = np.where(rng.random(num) < expit(x @ w_true), 1.0, -1.0)
prob = RegressionProblem(x=x, y=y, radius=2.0)

report = mirror_descent_l1(prob, 5000)
w_ref = reference_minimizer(prob, tol=1e-9)
gap = logistic_loss(report.weights, prob) - logistic_loss(w_ref, prob)
print("l1 solve: loss", round(report.loss_trajectory[-1], 4),
      "| gap to exact minimizer", f"{gap:.2e}",
      "| guarantee", f"{report.suboptimality_bound:.2e}")
print("leading weights:", np.round(report.weights[:4], 3))

# --- group geometry: one-hot rows over a 3-symbol alphabet ----------------
n, k, num = 6, 3, 600
sym = rng.integers(0, k, size=(num, n))
w_true = rng.normal(size=(n, k)) * 0.5
w_true -= w_true.mean(axis=1, keepdims=True)
margins = w_true[np.arange(n)[None, :], sym].sum(axis=1)
y = np.where(rng.random(num) < expit(margins), 1.0, -1.0)
gprob = RegressionProblem(x=sym, y=y, radius=2.5, k=k)

greport = mirror_descent_l21(gprob, 5000)
g_ref = reference_minimizer(gprob, tol=1e-9)
ggap = logistic_loss(greport.weights, gprob) - logistic_loss(g_ref, gprob)
print("\ngroup solve: loss", round(greport.loss_trajectory[-1], 4),
      "| gap to exact minimizer", f"{ggap:.2e}",
      "| guarantee", f"{greport.suboptimality_bound:.2e}")
print("row norms (sum must stay within the ball):",
      np.round(np.linalg.norm(greport.weights, axis=1), 3),
      "| total", round(np.linalg.norm(greport.weights, axis=1).sum(), 3),
      "<=", gprob.radius)
