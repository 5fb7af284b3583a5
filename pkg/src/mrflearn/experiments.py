"""Experiment generators, the incoherence diagnostic, and recovery sweeps.

Model builders cover the two test-bed topologies (a two-pole "diamond" with
every middle node tied to both poles, and a 4-neighbor grid with random-sign
weight patterns) plus a random-graph family. A sweep draws fresh samples for
every (sample size, run) cell, relearns the graph, and aggregates exact
recovery fractions and worst-entry parameter errors into plot-ready CSV.
The whole pipeline is a pure function of (config, master_seed): per-run seeds
are split deterministically from the master seed, so reruns are byte
identical.
"""

import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
from scipy.special import expit

from .learning import LearnConfig, learn_ising, learn_pairwise
from .models import (EDGE_FLOOR, IsingModel, PairwiseModel, width)
from .sampling import STATE_SPACE_CAP, exact_distribution, index_to_config, sample_exact
from .sparsitron import SparsitronConfig, sparsitron_learn_pairwise

FAMILIES = ("diamond", "grid", "random")
SOLVERS = ("mirror", "reference", "sparsitron")


@dataclass
class ExperimentConfig:
    """Recovery-sweep settings.

    family       : diamond (binary), grid (general alphabet), random
    sample_sizes : strictly increasing list of sample counts
    runs         : repetitions per sample size (fresh samples each run; grid
                   and random families also redraw the model's random signs)
    n            : node count for diamond/random; grids use rows x cols
    eta / lam    : threshold and width bounds; None derives them from the
                   built model (eta from the edge weight, lam from the width)
    iterations   : mirror-descent iterations per regression (None = default)
    tol          : reference-solver accuracy per regression
    jobs         : worker processes for runs within the sweep
    """

    family: str
    sample_sizes: list
    runs: int = 100
    n: int = 8
    rows: int = 3
    cols: int = 3
    k: int = 2
    edge_weight: float = 0.2
    eta: float | None = None
    lam: float | None = None
    solver: str = "mirror"
    iterations: int | None = None
    tol: float = 1e-8
    master_seed: int = 0
    jobs: int = 1

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"family must be one of {FAMILIES}")
        if self.solver not in SOLVERS:
            raise ValueError(f"solver must be one of {SOLVERS}")
        sizes = [int(s) for s in self.sample_sizes]
        if len(sizes) == 0 or any(s < 1 for s in sizes):
            raise ValueError("sample_sizes must be positive")
        if any(b <= a for a, b in zip(sizes, sizes[1:])):
            raise ValueError("sample_sizes must be strictly increasing")
        self.sample_sizes = sizes
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        binary_family = self.family == "diamond" or (self.family == "random"
                                                     and self.k == 2)
        if binary_family and self.solver == "sparsitron":
            raise ValueError("the online baseline only wires into the "
                             "pairwise learner; use a grid or k > 2 family")

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


@dataclass
class RunRecord:
    sample_size: int
    run: int
    recovered: bool
    max_error: float
    seconds: float
    failure: str | None = None


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    records: list

    def aggregates(self):
        """Per-sample-size recovery fraction and error statistics."""
        out = []
        for size in self.config.sample_sizes:
            recs = [r for r in self.records if r.sample_size == size]
            if not recs:
                continue
            frac = sum(r.recovered for r in recs) / len(recs)
            errs = np.array([r.max_error for r in recs if r.failure is None])
            if errs.size:
                mean_err = float(errs.mean())
                stderr = float(errs.std(ddof=1) / math.sqrt(errs.size)) if errs.size > 1 else 0.0
            else:
                mean_err, stderr = float("nan"), float("nan")
            out.append({"sample_size": size, "recovery_fraction": frac,
                        "mean_max_error": mean_err, "stderr": stderr})
        return out

    def to_dict(self):
        return {"config": self.config.to_dict(),
                "records": [asdict(r) for r in self.records],
                "aggregates": self.aggregates()}


def build_diamond(n, a):
    """Two poles (nodes 0 and n-1) each tied to every middle node with the
    same positive weight; 2(n-2) edges, no external field."""
    if n < 3:
        raise ValueError("diamond needs at least 3 nodes")
    if a <= 0:
        raise ValueError("edge weight must be positive")
    coupling = np.zeros((n, n))
    for mid in range(1, n - 1):
        coupling[0, mid] = coupling[mid, 0] = a
        coupling[n - 1, mid] = coupling[mid, n - 1] = a
    return IsingModel(coupling=coupling, theta=np.zeros(n))


def centered_sign_pattern(k, magnitude):
    """A k x k pattern with zero-mean rows/columns and max entry ``magnitude``.

    Even alphabets use the parity pattern (+m on equal parity, -m otherwise),
    whose rows and columns cancel exactly; odd alphabets fall back to the
    rank-one outer product of the first discrete-cosine mode scaled to peak
    at ``magnitude``, since a strict +-m pattern cannot have zero-sum rows of
    odd length.
    """
    if k % 2 == 0:
        v = (-1.0) ** np.arange(k)
    else:
        v = np.cos(np.pi * (2 * np.arange(k) + 1) / (2 * k))
        v /= np.abs(v).max()
    return magnitude * np.outer(v, v)


def grid_edges(rows, cols):
    def node(r, c):
        return r * cols + c
    edges = []
    for r in range(rows):
        for c in range(cols):
            if c + 1 < cols:
                edges.append((node(r, c), node(r, c + 1)))
            if r + 1 < rows:
                edges.append((node(r, c), node(r + 1, c)))
    return sorted(edges)


def build_grid(rows, cols, k, magnitude, seed):
    """4-neighbor grid; every edge gets a random sign flip of the centered
    pattern. No external field."""
    pattern = centered_sign_pattern(k, magnitude)
    rng = np.random.default_rng(seed)
    weights = {}
    for i, j in grid_edges(rows, cols):
        sign = 1.0 if rng.random() < 0.5 else -1.0
        weights[(i, j)] = sign * pattern
    return PairwiseModel(k=k, weights=weights,
                         theta=np.zeros((rows * cols, k)))


def build_random(n, k, magnitude, seed):
    """Random-graph family: each pair is an edge with probability 2/(n-1)
    (expected degree 2), weight a random sign times the centered pattern
    (binary models use +-magnitude couplings directly)."""
    rng = np.random.default_rng(seed)
    prob = min(1.0, 2.0 / max(n - 1, 1))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)
             if rng.random() < prob]
    signs = {p: (1.0 if rng.random() < 0.5 else -1.0) for p in pairs}
    if k == 2:
        coupling = np.zeros((n, n))
        for (i, j), s in signs.items():
            coupling[i, j] = coupling[j, i] = s * magnitude
        return IsingModel(coupling=coupling, theta=np.zeros(n))
    pattern = centered_sign_pattern(k, magnitude)
    weights = {p: s * pattern for p, s in signs.items()}
    return PairwiseModel(k=k, weights=weights, theta=np.zeros((n, k)))


def incoherence(model, node, cap=STATE_SPACE_CAP):
    """Irrepresentability diagnostic of node ``node``'s logistic regression.

    Builds the population second-moment matrix of the node's regression
    features weighted by the logistic variance at the true parameter
    (expectation taken exactly over the enumerated distribution of the other
    nodes), partitions it by the true neighborhood S, and returns the max
    absolute row sum of Q[Sc, S] Q[S, S]^-1. Values above 1 violate the
    classical sufficient condition for l1-regularized neighborhood selection.
    The constant feature participates in the moment matrix but not in the
    S / Sc partition.
    """
    if not isinstance(model, IsingModel):
        raise TypeError("incoherence is defined here for binary models")
    n = model.n
    nbrs = [j for j in range(n) if j != node
            and abs(model.coupling[node, j]) > EDGE_FLOOR]
    if not nbrs:
        raise ValueError(f"node {node} has no neighbors")
    marg = exact_distribution(model, cap=cap).reshape((2,) * n).sum(axis=node).ravel()
    others = index_to_config(np.arange(marg.size), n - 1, 2, spin=True).astype(float)
    feats = np.column_stack([others, np.ones(marg.size)])
    w_star = 2.0 * np.append(np.delete(model.coupling[node], node),
                             model.theta[node])
    sig = expit(feats @ w_star)
    weight = marg * sig * (1.0 - sig)
    q = (feats * weight[:, None]).T @ feats

    pos = {j: (j if j < node else j - 1) for j in range(n) if j != node}
    s_idx = [pos[j] for j in nbrs]
    sc_idx = [pos[j] for j in range(n) if j != node and j not in nbrs]
    if not sc_idx:
        return 0.0
    q_ss = q[np.ix_(s_idx, s_idx)]
    q_cs = q[np.ix_(sc_idx, s_idx)]
    try:
        b = np.linalg.solve(q_ss.T, q_cs.T).T
    except np.linalg.LinAlgError as exc:
        raise ValueError(
            f"singular neighborhood moment matrix (cond="
            f"{np.linalg.cond(q_ss):.3e})") from exc
    return float(np.abs(b).sum(axis=1).max())


def _build_model(config, model_seed):
    if config.family == "diamond":
        return build_diamond(config.n, config.edge_weight)
    if config.family == "grid":
        return build_grid(config.rows, config.cols, config.k,
                          config.edge_weight, model_seed)
    return build_random(config.n, config.k, config.edge_weight, model_seed)


def _max_entry_error(model, result):
    if isinstance(model, IsingModel):
        return float(np.abs(model.coupling - result.weights).max())
    worst = 0.0
    n = model.n
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            true = model.pair_weight(i, j)
            if true is None:
                true = np.zeros((model.k, model.k))
            est = result.weights.get((i, j), np.zeros_like(true))
            worst = max(worst, float(np.abs(true - est).max()))
    return worst


def run_single(config, size, run):
    """One (sample size, run) cell; isolated so sweeps can parallelize."""
    seq = np.random.SeedSequence((config.master_seed, size, run))
    model_seed, sample_seed, solver_seed = (int(s) for s in seq.generate_state(3))
    start = time.perf_counter()
    try:
        model = _build_model(config, model_seed)
        lam = config.lam if config.lam is not None else width(model)
        eta = config.eta if config.eta is not None else config.edge_weight
        samples = sample_exact(model, size, sample_seed)
        learn_cfg = LearnConfig(lam=lam, eta=eta,
                                solver=config.solver if config.solver != "sparsitron"
                                else "mirror",
                                iterations=config.iterations, tol=config.tol)
        if isinstance(model, IsingModel):
            result = learn_ising(samples, learn_cfg)
        elif config.solver == "sparsitron":
            result = sparsitron_learn_pairwise(
                samples, learn_cfg, SparsitronConfig(seed=solver_seed))
        else:
            result = learn_pairwise(samples, learn_cfg)
        recovered = result.edges == model.edges()
        max_err = _max_entry_error(model, result)
        return RunRecord(size, run, bool(recovered), max_err,
                         time.perf_counter() - start)
    except Exception as exc:  # per-run failures must not abort the sweep
        return RunRecord(size, run, False, float("nan"),
                         time.perf_counter() - start,
                         failure=f"{type(exc).__name__}: {exc}")


def run_recovery_experiment(config):
    """Full sweep over sample sizes and runs; deterministic per master seed."""
    tasks = [(size, run) for size in config.sample_sizes
             for run in range(config.runs)]
    if config.jobs > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            records = list(pool.map(_run_star,
                                    [(config, s, r) for s, r in tasks],
                                    chunksize=4))
    else:
        records = [run_single(config, s, r) for s, r in tasks]
    records.sort(key=lambda r: (config.sample_sizes.index(r.sample_size), r.run))
    return ExperimentResult(config=config, records=records)


def _run_star(args):
    return run_single(*args)


def emit_plot_data(result, csv_path):
    """Write per-size aggregates as CSV plus a JSON manifest echoing the
    config. Floats use shortest round-trip rendering, so parsing the CSV
    reproduces the aggregates bit for bit."""
    csv_path = Path(csv_path)
    try:
        with open(csv_path, "w") as fh:
            fh.write("sample_size,recovery_fraction,mean_max_error,stderr\n")
            for row in result.aggregates():
                fh.write(f"{row['sample_size']},{row['recovery_fraction']!r},"
                         f"{row['mean_max_error']!r},{row['stderr']!r}\n")
        manifest_path = csv_path.with_suffix(".json")
        failures = sum(1 for r in result.records if r.failure is not None)
        with open(manifest_path, "w") as fh:
            json.dump({"config": result.config.to_dict(),
                       "columns": ["sample_size", "recovery_fraction",
                                   "mean_max_error", "stderr"],
                       "records": len(result.records),
                       "failures": failures}, fh, indent=1)
    except OSError as exc:
        raise OSError(f"failed writing plot data under {csv_path}: {exc}") from exc
    return csv_path, manifest_path
