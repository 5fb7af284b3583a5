"""Batch learner vs the online multiplicative-weights baseline on a grid.

Both learners see identical samples from a 3x3 grid whose edges carry
random-sign +-0.2 centered patterns. The defaults keep this demo quick
(alphabet size 2, reduced runs); --k 4 or --k 6 reproduces the larger
alphabets (slower), and --runs 100 matches the shipped comparison.

At alphabet size 2 the batch learner needs visibly fewer samples. At
alphabet 4+ the online baseline's held-out candidate selection shrinks
non-edge estimates enough to win the exact-recovery race at small sample
counts even though its weight estimates are worse; the printed error
columns make that trade visible.
"""

import argparse

from mrflearn import ExperimentConfig, run_recovery_experiment

parser = argparse.ArgumentParser()
parser.add_argument("--k", type=int, default=2, choices=(2, 4, 6))
parser.add_argument("--runs", type=int, default=20)
args = parser.parse_args()

sizes = {2: [500, 1000, 2000, 4000],
         4: [4000, 8000, 16000, 32000],
         6: [9000, 18000, 36000]}[args.k]
base = dict(family="grid", rows=3, cols=3, k=args.k, edge_weight=0.2,
            eta=0.2, sample_sizes=sizes, runs=args.runs, master_seed=11,
            tol=3e-4, jobs=2)

print(f"3x3 grid, alphabet {args.k}, {args.runs} runs per size")
ours = run_recovery_experiment(
    ExperimentConfig(solver="reference", **base))
baseline = run_recovery_experiment(
    ExperimentConfig(solver="sparsitron", **base))

print("  size    batch(frac)  online(frac)  batch(err)  online(err)")
for a, b in zip(ours.aggregates(), baseline.aggregates()):
    print(f"  {a['sample_size']:6d}  {a['recovery_fraction']:11.2f}"
          f"  {b['recovery_fraction']:12.2f}  {a['mean_max_error']:10.4f}"
          f"  {b['mean_max_error']:11.4f}")
