"""Shared test utilities: random model generators and an independent
brute-force enumerator used as the oracle for everything exact.

The enumerator deliberately walks configurations with itertools (most
significant node last in the product, then reordered) and accumulates the
exponent with plain Python loops, so it shares no code path with the
package's tensor-based enumeration.
"""

import itertools

import numpy as np

from mrflearn import IsingModel, PairwiseModel, center_weight_matrix


def random_ising(rng, n, scale=0.3, edge_prob=0.6, field_scale=0.2):
    a = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < edge_prob:
                a[i, j] = a[j, i] = rng.uniform(-scale, scale)
    theta = rng.uniform(-field_scale, field_scale, size=n)
    return IsingModel(coupling=a, theta=theta)


def random_centered_pairwise(rng, n, k, scale=0.3, edge_prob=0.6,
                             field_scale=0.2):
    weights = {}
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < edge_prob:
                raw = rng.uniform(-scale, scale, size=(k, k))
                weights[(i, j)], _, _ = center_weight_matrix(raw)
    theta = rng.uniform(-field_scale, field_scale, size=(n, k))
    return PairwiseModel(k=k, weights=weights, theta=theta)


def raw_pairwise_table(n, k, raw_weights, theta):
    """Brute-force probability table for arbitrary (possibly uncentered)
    pairwise parameters, in lexicographic symbol order."""
    theta = np.asarray(theta, dtype=float)
    scores = []
    for z in itertools.product(range(k), repeat=n):
        s = 0.0
        for i in range(n):
            s += theta[i][z[i]]
        for (i, j), w in raw_weights.items():
            s += w[z[i]][z[j]]
        scores.append(s)
    scores = np.array(scores)
    p = np.exp(scores - scores.max())
    return p / p.sum()


def ising_table(model):
    """Brute-force table for a binary model, lexicographic with spin +1 first."""
    n = model.n
    scores = []
    for digits in itertools.product((0, 1), repeat=n):
        z = [1 - 2 * d for d in digits]
        s = 0.0
        for i in range(n):
            s += model.theta[i] * z[i]
            for j in range(i + 1, n):
                s += model.coupling[i, j] * z[i] * z[j]
        scores.append(s)
    scores = np.array(scores)
    p = np.exp(scores - scores.max())
    return p / p.sum()


def pairwise_table(model):
    raw = {key: w for key, w in model.weights.items()}
    return raw_pairwise_table(model.n, model.k, raw, model.theta)


def exact_table(model):
    return ising_table(model) if isinstance(model, IsingModel) else pairwise_table(model)
