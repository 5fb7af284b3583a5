"""Ising and general-alphabet pairwise graphical models.

A binary (Ising) model is parameterized by a symmetric coupling matrix with
zero diagonal plus a per-node external field, over spin configurations in
{-1,+1}^n. A general model has alphabet size k, one k-by-k weight matrix per
node pair (stored once per unordered pair, read transposed in the other
direction), and per-node field vectors with one entry per symbol. Weight
matrices are kept with zero-mean rows and columns; the centering projection
that enforces this is exposed here together with the derived quantities used
by the learners: width, minimum edge weight and the conditional-probability
floor.
"""

import hashlib
import json
import math
from dataclasses import dataclass

import numpy as np

MAX_NODES = 100_000
MAX_ALPHABET = 64

# Absolute tolerance for the centered-rows/columns validity check.
CENTERING_TOL = 1e-10
# Entries at or below this magnitude do not count as an edge.
EDGE_FLOOR = 1e-12


class NoEdgesError(ValueError):
    """An operation required at least one edge but the model has none."""


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass
class IsingModel:
    """Binary pairwise model over spin configurations in {-1,+1}^n.

    coupling : (n, n) symmetric real matrix, zero diagonal
    theta    : (n,) external field
    """

    coupling: np.ndarray
    theta: np.ndarray

    def __post_init__(self):
        A = np.array(self.coupling, dtype=float)
        t = np.array(self.theta, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("coupling must be a square matrix")
        n = A.shape[0]
        if n < 1 or n > MAX_NODES:
            raise ValueError(f"node count must be in [1, {MAX_NODES}]")
        if t.shape != (n,):
            raise ValueError("theta must have one entry per node")
        if not np.isfinite(A).all() or not np.isfinite(t).all():
            raise ValueError("model parameters must be finite")
        if not np.array_equal(A, A.T):
            raise ValueError("coupling matrix must be symmetric")
        if np.any(np.diag(A) != 0.0):
            raise ValueError("coupling diagonal must be zero")
        self.coupling = _frozen(A)
        self.theta = _frozen(t)

    @property
    def n(self):
        return self.coupling.shape[0]

    @property
    def k(self):
        return 2

    def edges(self):
        """Node pairs (i, j), i < j, with a nonnegligible coupling."""
        i, j = np.nonzero(np.triu(np.abs(self.coupling) > EDGE_FLOOR, 1))
        return list(zip(i.tolist(), j.tolist()))


@dataclass
class PairwiseModel:
    """Pairwise model over [k]^n (symbols stored as 0..k-1).

    k       : alphabet size
    weights : {(i, j) with i < j: (k, k) matrix}; the (j, i) direction is the
              transpose, applied on read by ``pair_weight``
    theta   : (n, k) per-node field vectors
    """

    k: int
    weights: dict
    theta: np.ndarray

    def __post_init__(self):
        if not (2 <= self.k <= MAX_ALPHABET):
            raise ValueError(f"alphabet size must be in [2, {MAX_ALPHABET}]")
        t = np.array(self.theta, dtype=float)
        if t.ndim != 2 or t.shape[1] != self.k:
            raise ValueError("theta must be (n, k)")
        n = t.shape[0]
        if n < 1 or n > MAX_NODES:
            raise ValueError(f"node count must be in [1, {MAX_NODES}]")
        if not np.isfinite(t).all():
            raise ValueError("theta must be finite")
        frozen = {}
        for key, w in self.weights.items():
            i, j = key
            if not (0 <= i < j < n):
                raise ValueError(f"weight key {key} must satisfy 0 <= i < j < n")
            w = np.array(w, dtype=float)
            if w.shape != (self.k, self.k) or not np.isfinite(w).all():
                raise ValueError(f"weight for {key} must be a finite {self.k}x{self.k} matrix")
            if (np.abs(w.sum(axis=1)).max() > CENTERING_TOL
                    or np.abs(w.sum(axis=0)).max() > CENTERING_TOL):
                raise ValueError(
                    f"weight for {key} is not centered; use PairwiseModel.from_raw "
                    "to fold row/column means into the field vectors")
            frozen[(int(i), int(j))] = _frozen(w)
        self.weights = frozen
        self.theta = _frozen(t)

    @classmethod
    def from_raw(cls, k, raw_weights, theta):
        """Build a model from possibly uncentered weight matrices.

        Each matrix is replaced by its centered projection and the removed row
        and column offsets are absorbed into the field vectors of its two
        endpoints, so the induced distribution is unchanged.
        """
        theta = np.array(theta, dtype=float)
        centered = {}
        for (i, j), w in raw_weights.items():
            c, row_off, col_off = center_weight_matrix(w)
            theta[i] += row_off
            theta[j] += col_off
            centered[(i, j)] = c
        return cls(k=k, weights=centered, theta=theta)

    @property
    def n(self):
        return self.theta.shape[0]

    def pair_weight(self, i, j):
        """Weight matrix for the ordered pair (i, j); transposed storage read."""
        if i < j:
            return self.weights.get((i, j))
        w = self.weights.get((j, i))
        return None if w is None else w.T

    def edges(self):
        """Node pairs (i, j), i < j, with a nonnegligible weight matrix."""
        return sorted(key for key, w in self.weights.items()
                      if np.abs(w).max() > EDGE_FLOOR)


@dataclass
class ModelBounds:
    """Derived scalar bounds: width, minimum edge weight, conditional floor."""

    width: float
    min_edge: float
    delta: float

    def __post_init__(self):
        if self.width < 0:
            raise ValueError("width must be nonnegative")
        if not (0 < self.delta <= 0.5):
            raise ValueError("delta must lie in (0, 1/2]")


def center_weight_matrix(m):
    """Project a k-by-k matrix onto the zero-mean-rows-and-columns subspace.

    Returns ``(centered, row_offsets, col_offsets)`` with the exact
    decomposition m[a, b] == centered[a, b] + row_offsets[a] + col_offsets[b];
    adding the offsets to the field vectors of the two endpoint nodes leaves
    the induced distribution unchanged. The closed form (subtract row means and
    column means, add back the grand mean) is the Euclidean projection onto the
    intersection of the two centering subspaces.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("expected a square matrix")
    if not np.isfinite(m).all():
        raise ValueError("matrix entries must be finite")
    row_means = m.mean(axis=1)
    col_means = m.mean(axis=0)
    grand = m.mean()
    centered = m - row_means[:, None] - col_means[None, :] + grand
    row_off = row_means - grand / 2.0
    col_off = col_means - grand / 2.0
    return centered, row_off, col_off


def ising_width(model):
    """Largest over nodes of (sum of absolute couplings + |field|)."""
    return float(np.max(np.abs(model.coupling).sum(axis=1) + np.abs(model.theta)))


def pairwise_width(model):
    """Largest over (node, symbol) of the neighborhood weight mass.

    For node i and symbol a this is the sum over neighbors j of
    max_b |W_ij(a, b)|, plus |theta_i(a)|.
    """
    acc = np.abs(model.theta).copy()
    for (i, j), w in model.weights.items():
        aw = np.abs(w)
        acc[i] += aw.max(axis=1)
        acc[j] += aw.max(axis=0)
    return float(acc.max())


def width(model):
    return ising_width(model) if isinstance(model, IsingModel) else pairwise_width(model)


def min_edge_weight(model):
    """Smallest edge magnitude: |A_ij| for Ising, max-entry of W_ij otherwise."""
    if isinstance(model, IsingModel):
        mags = np.abs(model.coupling[np.triu_indices(model.n, 1)])
        mags = mags[mags > EDGE_FLOOR]
    else:
        mags = np.array([np.abs(w).max() for w in model.weights.values()])
        mags = mags[mags > EDGE_FLOOR]
    if mags.size == 0:
        raise NoEdgesError("model has no edges")
    return float(mags.min())


def unbiasedness_bound(model):
    """Lower bound exp(-2 width) / k on every single-site conditional."""
    return math.exp(-2.0 * width(model)) / model.k


def model_bounds(model):
    return ModelBounds(width=width(model),
                       min_edge=min_edge_weight(model),
                       delta=unbiasedness_bound(model))


def ising_to_pairwise(model):
    """Embed an Ising model as an alphabet-2 pairwise model.

    Symbol a in {0, 1} corresponds to spin 1 - 2a. Each coupling A_ij becomes
    the matrix [[A, -A], [-A, A]] and theta_i becomes [theta_i, -theta_i]; the
    induced distributions are identical under the symbol/spin bijection.
    """
    weights = {}
    a = model.coupling
    for i, j in model.edges():
        weights[(i, j)] = a[i, j] * np.array([[1.0, -1.0], [-1.0, 1.0]])
    theta = np.stack([model.theta, -model.theta], axis=1)
    return PairwiseModel(k=2, weights=weights, theta=theta)


def model_to_dict(model, pairwise_form=False):
    """JSON-ready dict. Ising models use the compact {"A", "theta"} form unless
    ``pairwise_form`` asks for the alphabet-2 embedding."""
    if isinstance(model, IsingModel):
        if pairwise_form:
            return model_to_dict(ising_to_pairwise(model))
        return {"n": model.n,
                "A": model.coupling.tolist(),
                "theta": model.theta.tolist()}
    return {"n": model.n,
            "k": model.k,
            "theta": model.theta.tolist(),
            "edges": [{"i": i, "j": j, "w": w.tolist()}
                      for (i, j), w in sorted(model.weights.items())]}


def model_from_dict(d):
    if "A" in d:
        return IsingModel(coupling=np.array(d["A"], dtype=float),
                          theta=np.array(d["theta"], dtype=float))
    weights = {(e["i"], e["j"]): np.array(e["w"], dtype=float) for e in d["edges"]}
    return PairwiseModel(k=int(d["k"]), weights=weights,
                         theta=np.array(d["theta"], dtype=float))


def save_model(model, path, pairwise_form=False):
    with open(path, "w") as fh:
        json.dump(model_to_dict(model, pairwise_form=pairwise_form), fh, indent=1)


def load_model(path):
    with open(path) as fh:
        return model_from_dict(json.load(fh))


def model_digest(model):
    """Short stable hash of the model parameters."""
    payload = json.dumps(model_to_dict(model), sort_keys=True,
                         separators=(",", ":"))
    return hashlib.sha256(payload.encode()).hexdigest()[:16]
