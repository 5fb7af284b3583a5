"""Online multiplicative-weights baseline learner.

A single pass of Hedge over a learning block produces one candidate weight
vector per sample; a held-out block then selects the candidate with the
smallest squared prediction error. The learner operates on the same doubled
l1 embedding as the entropic mirror-descent solver (positive copy, negative
copy, slack coordinate), so the two methods share a geometry and differ only
in batch-vs-online updates and in the final candidate selection.

The Hedge learning rate and the one-candidate-per-sample schedule follow the
standard formulation of the cited online learner; this artifact's own
protocol only pins the held-out block size, max(200, 0.01 N). The pairwise
driver below wraps the online solver in exactly the same transform / center /
average / threshold pipeline as the batch learner, isolating the solver as
the only difference, and uses a flat l1 constraint of 2 * lam * k on the
one-hot features.
"""

import math
import time
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .learning import (LearnConfig, LearnResult, _as_symbol_array,
                       assemble_pair_weights, center_regression_solution,
                       onehot_features, ordered_symbol_pairs, threshold_graph)

MIN_SELECTION = 200


class InsufficientSamplesError(ValueError):
    """Too few samples to populate the held-out selection block."""


@dataclass
class SparsitronConfig:
    """radius: l1 bound on the weights (None lets drivers derive it);
    candidate_fraction: share of samples moved to the selection block,
    floored at ``MIN_SELECTION``; seed: sample-order shuffle."""

    radius: float | None = None
    candidate_fraction: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if not (0.0 < self.candidate_fraction < 1.0):
            raise ValueError("candidate_fraction must lie in (0, 1)")
        if self.radius is not None and self.radius < 0:
            raise ValueError("radius must be nonnegative")


def selection_size(num, fraction):
    return max(MIN_SELECTION, math.ceil(fraction * num))


def hedge_rate(dim, steps):
    """Standard Hedge rate for ``steps`` rounds of losses in [0, 1]."""
    return 1.0 / (1.0 + math.sqrt(2.0 * math.log(dim) / max(steps, 1)))


def hedge_pass(xgroups, yhat, learn_mask, node_of, radius, steps_per_problem,
               trace=None):
    """One online pass producing per-problem candidate weight stacks.

    xgroups  : (N, G, D) per-step features for each feature group
    yhat     : (N, P) 0/1 labels
    learn_mask : (N, P) bool; True where problem p consumes step t
    node_of  : (P,) group index per problem
    radius   : shared positive l1 bound
    steps_per_problem : (P,) learning-step counts (column sums of the mask)

    Each problem runs Hedge on its own (2D+1)-simplex; the per-step loss
    vector is the usual affine rescaling of the prediction-error gradient
    into [0, 1], whose constant component cancels under normalization. The
    candidate recorded at a step is the simplex point mapped back to the
    original space before its update. Returns (candidates (P, maxT, D)
    float32, counts (P,)).
    """
    num, groups, dim = xgroups.shape
    p_count = yhat.shape[1]
    d = 2 * dim + 1
    rates = np.array([hedge_rate(d, s) for s in steps_per_problem])
    half_log_beta = np.log(rates) / 2.0

    logp = np.full((p_count, d), -math.log(d))
    counts = np.zeros(p_count, dtype=np.int64)
    max_t = int(steps_per_problem.max())
    candidates = np.zeros((p_count, max_t, dim), dtype=np.float32)
    for t in range(num):
        act = learn_mask[t]
        if not act.any():
            continue
        x = xgroups[t, node_of]                      # (P, D)
        w = np.exp(logp - logp.max(axis=1, keepdims=True))
        w /= w.sum(axis=1, keepdims=True)
        if trace is not None:
            trace.append(w.copy())
        q = (w[:, :dim] - w[:, dim:2 * dim]) * radius
        live = np.nonzero(act)[0]
        candidates[live, counts[live]] = q[live]
        counts[live] += 1
        m = np.einsum("pd,pd->p", q, x)
        c = (expit(m) - yhat[t]) * act
        upd = (half_log_beta * c)[:, None] * x
        logp[:, :dim] += upd
        logp[:, dim:2 * dim] -= upd
    return candidates, counts


def select_candidate(candidates, x_hold, yhat_hold):
    """Pick the candidate with the least held-out squared prediction error."""
    margins = candidates.astype(np.float32) @ x_hold.T.astype(np.float32)
    err = ((expit(margins) - yhat_hold.astype(np.float32)) ** 2).mean(axis=1)
    return candidates[int(np.argmin(err))].astype(float)


def sparsitron_learn(problem, config, average_candidates=False):
    """Learn one l1-constrained predictor online; returns the weight vector.

    The problem carries original-space features in [-1, 1]; the doubling
    embedding is applied internally. ``average_candidates`` skips held-out
    selection and returns the mean candidate (diagnostic mode; the two
    mirror-descent relatives should then behave alike).
    """
    if problem.geometry != "l1":
        raise ValueError("expected an l1-geometry problem")
    radius = config.radius if config.radius is not None else problem.radius
    n = problem.n
    if radius == 0.0:
        return np.zeros(n)
    num = problem.num
    hold = selection_size(num, config.candidate_fraction)
    if not average_candidates and num <= hold:
        raise InsufficientSamplesError(
            f"insufficient samples for selection: have {num}, "
            f"need more than {hold}")
    rng = np.random.default_rng(config.seed)
    order = rng.permutation(num)
    x = problem.x[order]
    yhat = ((problem.y[order] + 1.0) / 2.0)[:, None]
    cut = num if average_candidates else num - hold

    learn_mask = np.zeros((num, 1), dtype=bool)
    learn_mask[:cut, 0] = True
    candidates, counts = hedge_pass(
        x[:, None, :], yhat, learn_mask, np.zeros(1, dtype=np.int64),
        radius, np.array([cut]))
    cands = candidates[0, :counts[0]]
    if average_candidates:
        return cands.mean(axis=0).astype(float)
    return select_candidate(cands, x[cut:], yhat[cut:, 0])


def sparsitron_learn_pairwise(samples, config, selection=None):
    """Pairwise structure learning with the online solver swapped in.

    ``config`` is the shared LearnConfig (lam, eta, thresholding flags);
    ``selection`` carries the online solver's own knobs. The flat l1 radius
    defaults to 2 * lam * k.
    """
    if not isinstance(config, LearnConfig):
        raise TypeError("config must be a LearnConfig")
    selection = selection or SparsitronConfig()
    z, k = _as_symbol_array(samples)
    num, n = z.shape
    t0 = time.perf_counter()
    radius = selection.radius if selection.radius is not None else 2.0 * config.lam * k
    dim = n * k
    pairs = ordered_symbol_pairs(k)

    rng = np.random.default_rng(selection.seed)
    order = rng.permutation(num)
    z = z[order]

    # One feature group per node, shared by its k(k-1) pair problems.
    xgroups = np.empty((num, n, dim))
    for i in range(n):
        xgroups[:, i, :] = onehot_features(z, i, k)

    node_of = []
    yhat = np.zeros((num, n * len(pairs)))
    learn_mask = np.zeros((num, n * len(pairs)), dtype=bool)
    hold_rows = []
    steps = np.zeros(n * len(pairs), dtype=np.int64)
    pair_counts = {}
    keys = []
    p = 0
    for i in range(n):
        for a, b in pairs:
            subset = (z[:, i] == a) | (z[:, i] == b)
            size = int(subset.sum())
            pair_counts[(i, a, b)] = size
            hold = selection_size(size, selection.candidate_fraction)
            if size <= hold:
                raise InsufficientSamplesError(
                    f"insufficient samples for selection on node {i} pair "
                    f"({a}, {b}): have {size}, need more than {hold}")
            locs = np.nonzero(subset)[0]
            learn_mask[locs[:size - hold], p] = True
            hold_rows.append(locs[size - hold:])
            yhat[:, p] = (z[:, i] == a)
            steps[p] = size - hold
            node_of.append(i)
            keys.append((i, a, b))
            p += 1

    candidates, counts = hedge_pass(xgroups, yhat, learn_mask,
                                    np.array(node_of), radius, steps)

    index_of = {key: p for p, key in enumerate(keys)}
    w_hat = {}
    for i in range(n):
        u_maps = {}
        for a, b in pairs:
            p = index_of[(i, a, b)]
            rows = hold_rows[p]
            picked = select_candidate(candidates[p, :counts[p]],
                                      xgroups[rows, node_of[p]],
                                      yhat[rows, p])
            u_maps[(a, b)] = center_regression_solution(picked.reshape(n, k))
        for j, w in assemble_pair_weights(u_maps, i, n, k).items():
            w_hat[(i, j)] = w

    edges = threshold_graph(w_hat, config.eta, or_rule=config.or_rule)
    diagnostics = {"reports": {}, "pair_counts": pair_counts,
                   "solver": "sparsitron",
                   "seconds": time.perf_counter() - t0}
    return LearnResult(weights=w_hat, edges=edges, diagnostics=diagnostics)
