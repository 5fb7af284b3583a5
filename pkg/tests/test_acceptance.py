"""End-to-end acceptance suite.

One test per shipped acceptance criterion, each printing a single PASS/FAIL
line with its elapsed time (run with ``pytest tests/test_acceptance.py -s``).
The two diamond-graph criteria share a single 100-runs-per-size sweep; the
grid comparison criterion runs both learners on identical per-run samples.
"""

import itertools
import time

import numpy as np
import pytest
from scipy.special import expit

from mrflearn import (ExperimentConfig, LearnConfig, PairwiseModel,
                      RegressionProblem, build_diamond, check_delta_unbiased,
                      conditional_distribution, emit_plot_data,
                      exact_distribution, incoherence, learn_ising,
                      learn_pairwise, logistic_gradient, logistic_loss,
                      min_site_conditional, mirror_descent_l1,
                      mirror_descent_l21, reference_minimizer,
                      run_recovery_experiment, sample_exact,
                      unbiasedness_bound)
from mrflearn.logreg import l1_bound, l21_bound
from mrflearn.sampling import as_symbols

from helpers import random_centered_pairwise, random_ising, raw_pairwise_table

MASTER_SEED = 20260808


class Criterion:
    """Tiny helper: timing plus the one-line report."""

    def __init__(self, number, label, budget_seconds):
        self.number = number
        self.label = label
        self.budget = budget_seconds
        self.start = time.perf_counter()

    def finish(self, ok, detail=""):
        elapsed = time.perf_counter() - self.start
        status = "PASS" if ok and elapsed < self.budget else "FAIL"
        print(f"[criterion {self.number}] {status} "
              f"({elapsed:.1f}s < {self.budget:.0f}s budget) {self.label}"
              + (f" :: {detail}" if detail else ""))
        assert elapsed < self.budget, f"criterion {self.number} over budget"
        assert ok, f"criterion {self.number} failed: {detail}"


def random_small_model(rng, max_n, max_k):
    n = int(rng.integers(2, max_n + 1))
    if rng.random() < 0.4:
        return random_ising(rng, n)
    k = int(rng.integers(2, max_k + 1))
    return random_centered_pairwise(rng, n, k)


def test_criterion_01_sampler_correctness():
    crit = Criterion(1, "exact distribution and conditionals", 60)
    rng = np.random.default_rng(MASTER_SEED)
    for _ in range(50):
        model = random_small_model(rng, 6, 4)
        n, k = model.n, model.k
        p = exact_distribution(model)
        assert abs(p.sum() - 1.0) < 1e-12
        joint = p.reshape((k,) * n)
        binary = hasattr(model, "coupling")
        for _ in range(200):
            i = int(rng.integers(n))
            syms = rng.integers(0, k, size=n - 1)
            slicer = tuple(syms[:i]) + (slice(None),) + tuple(syms[i:])
            sl = joint[slicer]
            expected = sl / sl.sum()
            rest = (1 - 2 * syms).astype(int) if binary else syms
            got = conditional_distribution(model, i, rest)
            if np.abs(got - expected).max() >= 1e-10:
                crit.finish(False, f"conditional mismatch on n={n} k={k}")
    crit.finish(True, "50 models, 200 conditionals each")


def test_criterion_02_delta_unbiasedness():
    crit = Criterion(2, "conditional floor, marginals, conditioned pairs", 60)
    rng = np.random.default_rng(MASTER_SEED + 1)
    worst_margin = np.inf
    for _ in range(20):
        model = random_small_model(rng, 5, 3)
        n, k = model.n, model.k
        delta = unbiasedness_bound(model)
        min_cond, bound = check_delta_unbiased(model)
        assert bound == pytest.approx(delta)
        worst_margin = min(worst_margin, min_cond - bound)
        joint = exact_distribution(model).reshape((k,) * n)
        for i in range(n):
            assert min_site_conditional(joint.sum(axis=i)) >= delta - 1e-12
        if n >= 2:
            for alpha in range(k):
                for beta in range(alpha + 1, k):
                    cond = (joint[..., alpha] + joint[..., beta])
                    cond = cond / cond.sum()
                    if min_site_conditional(cond) < delta - 1e-12:
                        crit.finish(False, "conditioned pair set below floor")
    crit.finish(True, f"20 models, slack min {worst_margin:.3e}")


def test_criterion_03_mirror_descent_bound():
    crit = Criterion(3, "averaged-iterate suboptimality bounds", 300)
    rng = np.random.default_rng(MASTER_SEED + 2)
    iters = 10_000
    worst = -np.inf
    for _ in range(20):
        n = int(rng.integers(5, 21))
        num = int(rng.integers(50, 201))
        x = rng.choice([-1.0, 1.0], size=(num, n))
        w0 = rng.normal(size=n) * 0.3
        y = np.where(rng.random(num) < expit(x @ w0), 1.0, -1.0)
        radius = float(rng.uniform(0.5, 3.0))
        prob = RegressionProblem(x=x, y=y, radius=radius)
        rep = mirror_descent_l1(prob, iters)
        ref = reference_minimizer(prob, tol=1e-9)
        gap = logistic_loss(rep.weights, prob) - logistic_loss(ref, prob)
        bound = l1_bound(radius, n, iters)
        worst = max(worst, gap / bound)
        if gap > bound:
            crit.finish(False, f"l1 gap {gap:.3e} above bound {bound:.3e}")
    worst21 = -np.inf
    for _ in range(20):
        n = int(rng.integers(3, 11))
        k = int(rng.integers(2, 4))
        num = int(rng.integers(100, 301))
        sym = rng.integers(0, k, size=(num, n))
        w0 = rng.normal(size=(n, k)) * 0.4
        w0 -= w0.mean(axis=1, keepdims=True)
        m = w0[np.arange(n)[None, :], sym].sum(axis=1)
        y = np.where(rng.random(num) < expit(m), 1.0, -1.0)
        radius = float(rng.uniform(0.5, 3.0))
        prob = RegressionProblem(x=sym, y=y, radius=radius, k=k)
        rep = mirror_descent_l21(prob, iters)
        ref = reference_minimizer(prob, tol=1e-9)
        gap = logistic_loss(rep.weights, prob) - logistic_loss(ref, prob)
        bound = l21_bound(radius, n, iters)
        worst21 = max(worst21, gap / bound)
        if gap > bound:
            crit.finish(False, f"group gap {gap:.3e} above bound {bound:.3e}")
    crit.finish(True, f"worst gap/bound: l1 {worst:.3f}, group {worst21:.3f}")


def test_criterion_04_property_suite():
    crit = Criterion(4, "Pinsker, sigmoid gap, KL identity, gradients", 120)
    rng = np.random.default_rng(MASTER_SEED + 3)

    a = rng.uniform(-20, 20, size=100_000)
    b = rng.uniform(-20, 20, size=100_000)
    gap_ok = (np.abs(expit(a) - expit(b))
              >= np.exp(-np.abs(a) - 3) * np.minimum(1.0, np.abs(a - b)) - 1e-300).all()

    pa = rng.uniform(1e-9, 1 - 1e-9, size=100_000)
    pb = rng.uniform(1e-9, 1 - 1e-9, size=100_000)
    kl = pa * np.log(pa / pb) + (1 - pa) * np.log((1 - pa) / (1 - pb))
    pinsker_ok = ((pa - pb) ** 2 <= kl / 2 + 1e-12).all()

    # KL identity, fully vectorized over 10^4 enumerable instances
    n_cases, n = 10_000, 3
    xs = np.array(list(itertools.product((-1.0, 1.0), repeat=n)))
    probs = rng.random((n_cases, len(xs)))
    probs /= probs.sum(axis=1, keepdims=True)
    w_star = rng.normal(size=(n_cases, n)) * 0.5
    w_alt = rng.normal(size=(n_cases, n)) * 0.5
    s_star = expit(w_star @ xs.T)
    s_alt = expit(w_alt @ xs.T)

    def expected_loss(sw):
        return np.sum(probs * (-s_star * np.log(sw)
                               - (1 - s_star) * np.log(1 - sw)), axis=1)

    lhs = expected_loss(s_alt) - expected_loss(s_star)
    kl_term = np.sum(probs * (s_star * np.log(s_star / s_alt)
                              + (1 - s_star) * np.log((1 - s_star) / (1 - s_alt))),
                     axis=1)
    kl_identity_ok = np.abs(lhs - kl_term).max() < 1e-10

    grad_bad = 0
    h = 1e-6
    for case in range(10_000):
        if case % 50 == 0:
            geom = rng.random() < 0.5
            if geom:
                prob = RegressionProblem(
                    x=rng.choice([-1.0, 1.0], size=(20, 5)),
                    y=rng.choice([-1.0, 1.0], size=20), radius=1.0)
                w = rng.normal(size=5) * 0.5
            else:
                prob = RegressionProblem(
                    x=rng.integers(0, 3, size=(20, 4)),
                    y=rng.choice([-1.0, 1.0], size=20), radius=1.0, k=3)
                w = rng.normal(size=(4, 3)) * 0.5
            g = logistic_gradient(w, prob)
        flat = w.ravel().copy()
        idx = int(rng.integers(flat.size))
        e = np.zeros_like(flat)
        e[idx] = h
        up = logistic_loss((flat + e).reshape(w.shape), prob)
        dn = logistic_loss((flat - e).reshape(w.shape), prob)
        fd = (up - dn) / (2 * h)
        if abs(g.ravel()[idx] - fd) > 1e-6 * max(1.0, abs(g.ravel()[idx])):
            grad_bad += 1
    ok = gap_ok and pinsker_ok and kl_identity_ok and grad_bad == 0
    crit.finish(ok, f"gap={gap_ok} pinsker={pinsker_ok} "
                    f"kl={kl_identity_ok} grad_mismatches={grad_bad}")


def test_criterion_05_centering_invariance():
    crit = Criterion(5, "centering leaves the distribution unchanged", 60)
    rng = np.random.default_rng(MASTER_SEED + 4)
    worst = 0.0
    for _ in range(20):
        n = int(rng.integers(2, 5))
        k = int(rng.integers(2, 5))
        raw = {}
        for i in range(n):
            for j in range(i + 1, n):
                if rng.random() < 0.7:
                    raw[(i, j)] = rng.normal(size=(k, k)) * 0.5
        theta = rng.normal(size=(n, k)) * 0.3
        reference = raw_pairwise_table(n, k, raw, theta)
        model = PairwiseModel.from_raw(k, {key: w.copy() for key, w in raw.items()},
                                       theta.copy())
        got = exact_distribution(model)
        worst = max(worst, float(np.abs(got - reference).max()))
        if worst >= 1e-12:
            break
    crit.finish(worst < 1e-12, f"20 models, worst entry diff {worst:.2e}")


DIAMOND_SIZES = [2 ** p for p in range(10, 17)]


@pytest.fixture(scope="module")
def diamond_sweep():
    config = ExperimentConfig(family="diamond", sample_sizes=DIAMOND_SIZES,
                              runs=100, n=8, edge_weight=0.2, eta=0.2,
                              solver="reference", master_seed=MASTER_SEED,
                              jobs=2)
    start = time.perf_counter()
    result = run_recovery_experiment(config)
    return result, time.perf_counter() - start


def _monotone_violations(values, increasing):
    sign = 1.0 if increasing else -1.0
    return sum(1 for a, b in zip(values, values[1:]) if sign * (b - a) < 0)


def test_criterion_06_diamond_recovery_and_incoherence(diamond_sweep):
    result, sweep_seconds = diamond_sweep
    crit = Criterion(6, "diamond recovery curve + incoherence violation", 1800)
    crit.start -= sweep_seconds
    agg = result.aggregates()
    fracs = [row["recovery_fraction"] for row in agg]
    failures = sum(1 for r in result.records if r.failure is not None)

    inco = {(n, a): incoherence(build_diamond(n, a), 0)
            for n in (4, 6, 8, 10) for a in (0.2, 0.4)}
    inco_ok = any(v > 1.0 for v in inco.values())
    trend_ok = all(inco[(n1, a)] <= inco[(n2, a)] + 1e-12
                   for a in (0.2, 0.4)
                   for n1, n2 in zip((4, 6, 8), (6, 8, 10)))

    detail = ("fractions " + " ".join(f"{f:.2f}" for f in fracs)
              + f"; incoherence(8,0.2)={inco[(8, 0.2)]:.3f}"
              + f" (10,0.4)={inco[(10, 0.4)]:.3f}")
    ok = (_monotone_violations(fracs, increasing=True) <= 1
          and fracs[-1] >= 0.9 and failures == 0 and inco_ok and trend_ok)
    crit.finish(ok, detail)


def test_criterion_08_error_scaling(diamond_sweep):
    result, sweep_seconds = diamond_sweep
    crit = Criterion(8, "max-entry error decreases with sample size", 1200)
    crit.start -= sweep_seconds
    errs = [row["mean_max_error"] for row in result.aggregates()]
    ok = _monotone_violations(errs, increasing=False) <= 1
    crit.finish(ok, "errors " + " ".join(f"{e:.4f}" for e in errs))


GRID_SIZES = [4000, 8000, 16000, 32000]


def test_criterion_07_grid_comparison():
    crit = Criterion(7, "grid recovery: batch learner vs online baseline", 3600)
    # solver tolerance 3e-4 keeps per-entry solve error well under the 0.1
    # decision threshold while fitting the runtime budget
    base = dict(family="grid", sample_sizes=GRID_SIZES, runs=100, rows=3,
                cols=3, k=4, edge_weight=0.2, eta=0.2, tol=3e-4,
                master_seed=MASTER_SEED, jobs=2)
    ours = run_recovery_experiment(
        ExperimentConfig(solver="reference", **base))
    theirs = run_recovery_experiment(
        ExperimentConfig(solver="sparsitron", **base))
    f_ours = [row["recovery_fraction"] for row in ours.aggregates()]
    f_sp = [row["recovery_fraction"] for row in theirs.aggregates()]
    e_ours = [row["mean_max_error"] for row in ours.aggregates()]
    e_sp = [row["mean_max_error"] for row in theirs.aggregates()]
    print("\n  size   ours(frac)  sparsitron(frac)  ours(err)  sparsitron(err)")
    for i, size in enumerate(GRID_SIZES):
        print(f"  {size:6d}  {f_ours[i]:9.2f}  {f_sp[i]:15.2f}"
              f"  {e_ours[i]:9.4f}  {e_sp[i]:14.4f}")
    window = [i for i in range(len(GRID_SIZES))
              if 0.05 < f_ours[i] < 0.95 or 0.05 < f_sp[i] < 0.95]
    ordering_ok = all(f_ours[i] >= f_sp[i] for i in window)
    shape_ok = (_monotone_violations(f_ours, increasing=True) <= 1
                and f_ours[-1] >= 0.9)
    crit.finish(ordering_ok and shape_ok,
                f"window sizes {[GRID_SIZES[i] for i in window]}; "
                f"ordering_ok={ordering_ok} shape_ok={shape_ok}")


def test_criterion_09_cross_algorithm_consistency():
    crit = Criterion(9, "binary samples: both learners, identical graphs", 600)
    model = build_diamond(8, 0.2)
    cfg = LearnConfig(lam=1.2, eta=0.2, solver="reference", tol=1e-6)
    agree = 0
    for run in range(100):
        ss = sample_exact(model, 8192, seed=MASTER_SEED + run)
        res_binary = learn_ising(ss, cfg)
        res_pairwise = learn_pairwise(as_symbols(ss), cfg)
        agree += (res_binary.edges == res_pairwise.edges)
    crit.finish(agree >= 95, f"identical edge sets in {agree}/100 runs")


def test_criterion_10_determinism(tmp_path):
    crit = Criterion(10, "byte-identical experiment outputs per seed", 300)
    config = dict(family="grid", sample_sizes=[300, 600], runs=3, rows=2,
                  cols=2, k=3, edge_weight=0.2, solver="mirror",
                  iterations=200, master_seed=MASTER_SEED)
    blobs = []
    for tag in ("first", "second"):
        result = run_recovery_experiment(ExperimentConfig(**config))
        csv_path, manifest_path = emit_plot_data(result,
                                                 tmp_path / f"{tag}.csv")
        blobs.append((csv_path.read_bytes(), manifest_path.read_bytes()))
    ok = blobs[0] == blobs[1]
    crit.finish(ok, "CSV and manifest bytes equal across reruns")
