"""Structure-learning drivers for binary and general-alphabet models.

Each node is regressed on the rest of the configuration: binary models use
one l1-constrained logistic regression per node, general models one
l2,1-constrained regression per node and ordered symbol pair (restricted to
the samples where the node takes one of the two symbols, one-hot encoded).
The per-pair solutions are centered, averaged over the second symbol, and the
resulting edge-weight estimates thresholded at half the minimum edge weight.

Duplicate sample rows are collapsed into multiplicity weights before solving,
which leaves every objective unchanged and makes the per-node problems cheap
on small state spaces. All per-node (and per-pair) regressions are
independent, so the drivers push them through the batched solver cores in a
single vectorized loop.
"""

import json
import logging
import math
import time
from dataclasses import dataclass

import numpy as np

from .logreg import (RegressionProblem, SolveReport, l1_bound, l21_bound,
                     reference_minimizer, solve_l1_batch, solve_l21_shared)
from .sampling import SampleSet

logger = logging.getLogger(__name__)

ITERATION_CAP = 200_000


class EmptyPairError(ValueError):
    """A symbol pair has no samples and strict mode is on."""


@dataclass
class LearnConfig:
    """Learner inputs: trusted width/edge bounds plus solver settings.

    lam        : upper bound on the model width (trusted, not validated
                 against the unknown truth)
    eta        : lower bound on the minimum edge weight; the edge threshold
                 is eta/2
    solver     : "mirror" or "reference"
    iterations : mirror-descent iteration count; None picks the theory-driven
                 default (see ``default_iteration_count``)
    tol        : reference-solver target accuracy
    strict_pairs : raise instead of skipping empty symbol pairs
    or_rule    : accept an edge when either directed estimate clears the
                 threshold (off by default; the standard rule only inspects
                 the lower-indexed node's estimate)
    """

    lam: float
    eta: float
    solver: str = "mirror"
    iterations: int | None = None
    tol: float = 1e-8
    seed: int = 0
    strict_pairs: bool = False
    or_rule: bool = False

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("lam must be nonnegative")
        if self.eta <= 0:
            raise ValueError("eta must be positive")
        if self.iterations is not None and self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.solver not in ("mirror", "reference"):
            raise ValueError("solver must be 'mirror' or 'reference'")


@dataclass
class LearnResult:
    """Estimated weights, recovered edge set, per-regression diagnostics."""

    weights: object
    edges: list
    diagnostics: dict

    def to_dict(self):
        if isinstance(self.weights, np.ndarray):
            weights = self.weights.tolist()
        else:
            weights = [{"i": i, "j": j, "w": w.tolist()}
                       for (i, j), w in sorted(self.weights.items())]
        reports = self.diagnostics.get("reports", {})
        return {"weights": weights,
                "edges": [list(e) for e in self.edges],
                "loss_trajectories": {str(key): rep.loss_trajectory.tolist()
                                      for key, rep in sorted(reports.items())},
                "pair_counts": {str(key): int(v) for key, v in
                                sorted(self.diagnostics.get("pair_counts", {}).items())},
                "solver": self.diagnostics.get("solver"),
                "seconds": self.diagnostics.get("seconds")}

    def save_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1)

    def save_edges_csv(self, path, n):
        adj = np.zeros((n, n), dtype=int)
        for i, j in self.edges:
            adj[i, j] = adj[j, i] = 1
        np.savetxt(path, adj, fmt="%d", delimiter=",")


def default_iteration_count(lam, eta, n, k=2):
    """Iteration budget implied by a target accuracy of eta/2, capped.

    The uncapped value grows like lam^2 k^3 exp(12 lam) ln(n) / (eta/2)^4,
    which is far beyond what the capped budget allows for all but the
    tamest models; experiment configs normally pass an explicit count.
    """
    eps = eta / 2.0
    raw = lam ** 2 * k ** 3 * math.exp(12.0 * lam) * math.log(max(n, 2)) / eps ** 4
    return int(min(max(math.ceil(raw), 1), ITERATION_CAP))


def _as_spin_array(samples):
    if isinstance(samples, SampleSet):
        if not samples.spin:
            raise TypeError("learn_ising requires spin-encoded (-1/+1) samples")
        return samples.samples
    z = np.asarray(samples)
    if z.ndim != 2 or not np.isin(z, (-1, 1)).all():
        raise TypeError("learn_ising requires an (N, n) array of -1/+1 spins")
    return z.astype(np.int8)


def _as_symbol_array(samples, k=None):
    if isinstance(samples, SampleSet):
        if samples.spin:
            raise TypeError("learn_pairwise requires symbol-encoded samples; "
                            "convert spins with sampling.as_symbols")
        return samples.samples, samples.k
    z = np.asarray(samples)
    if z.ndim != 2 or not np.issubdtype(z.dtype, np.integer) or z.min() < 0:
        raise TypeError("learn_pairwise requires an (N, n) array of symbols 0..k-1")
    if k is None:
        k = int(z.max()) + 1
    return z.astype(np.int8), k


def compress_rows(z):
    """Unique rows plus multiplicities; the learner's sample compression."""
    configs, counts = np.unique(z, axis=0, return_counts=True)
    return configs, counts.astype(float)


def node_shift(i, j):
    """Column of node j inside the regression for node i (j's own column is
    removed, so indices above i shift down by one)."""
    return j if j < i else j - 1


def threshold_graph(weights, eta, or_rule=False):
    """Edges whose estimated weight magnitude reaches eta/2 (ties included).

    ``weights`` is either the (n, n) entry-estimate matrix of a binary model
    or a {(i, j): k x k} dict of directed pairwise estimates. The standard
    rule reads only the (i, j), i < j entry; ``or_rule`` also accepts the
    reverse direction.
    """
    if eta <= 0:
        raise ValueError("eta must be positive")
    cut = eta / 2.0
    edges = []
    if isinstance(weights, np.ndarray):
        n = weights.shape[0]
        for i in range(n):
            for j in range(i + 1, n):
                hit = abs(weights[i, j]) >= cut
                if or_rule:
                    hit = hit or abs(weights[j, i]) >= cut
                if hit:
                    edges.append((i, j))
        return edges
    seen = sorted({(min(i, j), max(i, j)) for i, j in weights})
    for i, j in seen:
        hit = (i, j) in weights and np.abs(weights[(i, j)]).max() >= cut
        if or_rule and (j, i) in weights:
            hit = hit or np.abs(weights[(j, i)]).max() >= cut
        if hit:
            edges.append((i, j))
    return edges


def learn_ising(samples, config):
    """Recover a binary model's couplings and graph from spin samples."""
    z = _as_spin_array(samples)
    num, n = z.shape
    if n < 2:
        raise ValueError("need at least 2 nodes")
    t0 = time.perf_counter()
    radius = 2.0 * config.lam
    configs, counts = compress_rows(z)
    u = configs.shape[0]

    a_hat = np.zeros((n, n))
    theta_hat = np.zeros(n)
    reports = {}
    if radius == 0.0:
        for i in range(n):
            reports[i] = SolveReport(np.zeros(n), 0, np.array([math.log(2.0)]), 0.0)
    elif config.solver == "mirror":
        iters = config.iterations or default_iteration_count(config.lam, config.eta, n)
        feats = np.empty((n, u, n))
        labels = np.empty((n, u))
        for i in range(n):
            feats[i, :, :n - 1] = np.delete(configs, i, axis=1)
            feats[i, :, n - 1] = 1.0
            labels[i] = configs[:, i]
        wts = np.broadcast_to(counts, (n, u))
        sol, traj = solve_l1_batch(feats, labels, wts, radius, iters)
        bound = l1_bound(radius, n, iters)
        for i in range(n):
            reports[i] = SolveReport(sol[i], iters, traj[i], bound)
    else:
        for i in range(n):
            prob = RegressionProblem(
                x=np.column_stack([np.delete(configs, i, axis=1).astype(float),
                                   np.ones(u)]),
                y=configs[:, i].astype(float), radius=radius, weights=counts)
            w = reference_minimizer(prob, tol=config.tol)
            reports[i] = SolveReport(w, 0, np.array([]), 0.0)

    for i in range(n):
        w = reports[i].weights
        for j in range(n):
            if j != i:
                a_hat[i, j] = w[node_shift(i, j)] / 2.0
        theta_hat[i] = w[n - 1] / 2.0

    edges = threshold_graph(a_hat, config.eta, or_rule=config.or_rule)
    diagnostics = {"reports": reports, "theta": theta_hat,
                   "solver": config.solver,
                   "seconds": time.perf_counter() - t0}
    return LearnResult(weights=a_hat, edges=edges, diagnostics=diagnostics)


def transform_pair_samples(samples, i, alpha, beta, lam):
    """Regression data for node i restricted to the symbols {alpha, beta}.

    Keeps the samples whose node-i symbol is alpha or beta; features are the
    one-hot encoded remaining symbols plus a constant slot (symbol 0), labels
    are +1 for alpha and -1 for beta, and the constraint radius is
    2 * lam * sqrt(k).
    """
    if alpha == beta:
        raise ValueError("alpha and beta must differ")
    z, k = _as_symbol_array(samples)
    mask = (z[:, i] == alpha) | (z[:, i] == beta)
    if not mask.any():
        raise EmptyPairError(f"empty pair set for node {i}, symbols ({alpha}, {beta})")
    sub = z[mask]
    feats = np.column_stack([np.delete(sub, i, axis=1),
                             np.zeros(sub.shape[0], dtype=np.int8)])
    y = np.where(sub[:, i] == alpha, 1.0, -1.0)
    return RegressionProblem(x=feats, y=y, radius=2.0 * lam * math.sqrt(k), k=k)


def center_regression_solution(w):
    """Center the non-constant rows of a per-pair solution.

    Row means of the first n-1 rows move into the constant row, so the inner
    product with every one-hot feature matrix is preserved exactly.
    """
    u = np.array(w, dtype=float)
    means = u[:-1].mean(axis=1)
    u[:-1] -= means[:, None]
    u[-1] += means.sum()
    return u


def onehot_features(configs, i, k):
    """Dense one-hot design matrix for node i's regressions.

    Row layout per sample: the n-1 other nodes in index order, then a
    constant slot fixed at symbol 0. Returns shape (rows, n*k).
    """
    rows, n = configs.shape
    out = np.zeros((rows, n, k))
    others = np.delete(configs, i, axis=1).astype(np.int64)
    np.put_along_axis(out[:, :n - 1, :], others[:, :, None], 1.0, axis=2)
    out[:, n - 1, 0] = 1.0
    return out.reshape(rows, n * k)


def assemble_pair_weights(u_maps, i, n, k):
    """Average the centered per-pair solutions into edge-weight estimates.

    ``u_maps[(alpha, beta)]`` holds the centered (n, k) solution for the
    ordered pair; the same-symbol matrix is taken to be zero. Returns
    {j: (k, k)} with row alpha equal to the mean over beta of the node-j row.
    """
    stacks = np.zeros((k, k, n, k))
    for (a, b), u in u_maps.items():
        stacks[a, b] = u
    mean_over_b = stacks.sum(axis=1) / k          # (k, n, k)
    out = {}
    for j in range(n):
        if j == i:
            continue
        jt = node_shift(i, j)
        out[j] = mean_over_b[:, jt, :].copy()     # rows indexed by alpha
    return out


def ordered_symbol_pairs(k):
    return [(a, b) for a in range(k) for b in range(k) if a != b]


def learn_pairwise(samples, config):
    """Recover a general-alphabet model's weight matrices and graph."""
    z, k = _as_symbol_array(samples)
    num, n = z.shape
    if n < 2:
        raise ValueError("need at least 2 nodes")
    t0 = time.perf_counter()
    radius = 2.0 * config.lam * math.sqrt(k)
    configs, counts = compress_rows(z)
    u = configs.shape[0]
    pairs = ordered_symbol_pairs(k)

    reports = {}
    pair_counts = {}
    w_hat = {}
    iters = config.iterations or default_iteration_count(config.lam, config.eta, n, k)
    bound = l21_bound(radius, n, iters)
    for i in range(n):
        masks = {}
        for a, b in pairs:
            m = (configs[:, i] == a) | (configs[:, i] == b)
            wts = counts * m
            tot = wts.sum()
            pair_counts[(i, a, b)] = int(tot)
            if tot == 0:
                if config.strict_pairs:
                    raise EmptyPairError(
                        f"empty pair set for node {i}, symbols ({a}, {b})")
                logger.warning("node %d pair (%d, %d) has no samples; "
                               "treating its solution as zero", i, a, b)
                continue
            masks[(a, b)] = wts

        u_maps = {}
        if masks and radius > 0.0:
            live = sorted(masks)
            if config.solver == "mirror":
                x2d = onehot_features(configs, i, k)
                yhat = np.stack([(configs[:, i] == a).astype(float)
                                 for a, b in live], axis=1)
                wts = np.stack([masks[p] for p in live], axis=1)
                sol, traj = solve_l21_shared(x2d, yhat, wts, radius, iters, n, k)
                for idx, p in enumerate(live):
                    reports[(i,) + p] = SolveReport(sol[idx], iters, traj[idx], bound)
                    u_maps[p] = center_regression_solution(sol[idx])
            else:
                feats = np.column_stack([np.delete(configs, i, axis=1),
                                         np.zeros(u, dtype=np.int8)])
                for a, b in live:
                    wts = masks[(a, b)]
                    keep = wts > 0
                    prob = RegressionProblem(
                        x=feats[keep], y=np.where(configs[keep, i] == a, 1.0, -1.0),
                        radius=radius, k=k, weights=wts[keep])
                    w = reference_minimizer(prob, tol=config.tol)
                    reports[(i, a, b)] = SolveReport(w, 0, np.array([]), 0.0)
                    u_maps[(a, b)] = center_regression_solution(w)
        for j, w in assemble_pair_weights(u_maps, i, n, k).items():
            w_hat[(i, j)] = w

    edges = threshold_graph(w_hat, config.eta, or_rule=config.or_rule)
    diagnostics = {"reports": reports, "pair_counts": pair_counts,
                   "solver": config.solver,
                   "seconds": time.perf_counter() - t0}
    return LearnResult(weights=w_hat, edges=edges, diagnostics=diagnostics)
