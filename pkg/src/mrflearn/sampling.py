"""Exact and Gibbs sampling for pairwise graphical models.

Small state spaces are handled by exact enumeration: the full probability
table is materialized (log-domain, normalized with log-sum-exp) and i.i.d.
draws use the inverse CDF over a fixed lexicographic configuration order
(node 0 is the most significant digit; symbol 0 / spin +1 comes first). For
state spaces beyond the enumeration cap a systematic-scan Gibbs sampler with
exact single-site conditionals is provided. Gibbs sampling is a convenience
extension for large n; it is not part of the exact protocol and its defaults
are validated against enumeration in the test suite.
"""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import expit, logsumexp

from .models import IsingModel, model_digest, unbiasedness_bound

STATE_SPACE_CAP = 2 ** 24
CONDITIONAL_CAP = 2 ** 20
GIBBS_BURN_IN = 1000
GIBBS_THINNING = 5


class StateSpaceError(ValueError):
    """State space too large for exact enumeration."""


class UnbiasednessError(RuntimeError):
    """An exact conditional fell below the theoretical floor."""


@dataclass
class SampleSet:
    """I.i.d. configurations plus provenance.

    samples : (N, n) int8; spins in {-1,+1} for Ising, symbols 0..k-1 otherwise
    """

    samples: np.ndarray
    seed: int
    method: str
    model_digest: str
    k: int
    spin: bool

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=np.int8)
        if s.ndim != 2 or s.shape[0] < 1:
            raise ValueError("samples must be a nonempty (N, n) array")
        if self.spin:
            if not np.isin(s, (-1, 1)).all():
                raise ValueError("spin samples must take values -1/+1")
        else:
            if s.min() < 0 or s.max() >= self.k:
                raise ValueError("symbol samples must lie in [0, k)")
        if self.method not in ("exact", "gibbs"):
            raise ValueError("method must be 'exact' or 'gibbs'")
        self.samples = s

    @property
    def num(self):
        return self.samples.shape[0]

    @property
    def n(self):
        return self.samples.shape[1]


def _check_cap(n, k, cap):
    if k ** n > cap:
        raise StateSpaceError(
            f"state space too large: {k}^{n} exceeds cap {cap}")


def log_weight_tensor(model):
    """Unnormalized log probabilities as a (k,)*n tensor."""
    n, k = model.n, model.k
    shape = (k,) * n

    def axis_shape(i):
        s = [1] * n
        s[i] = k
        return tuple(s)

    def pair_shape(i, j):
        s = [1] * n
        s[i] = k
        s[j] = k
        return tuple(s)

    logw = np.zeros(shape)
    if isinstance(model, IsingModel):
        spin = np.array([1.0, -1.0])
        for i in range(n):
            if model.theta[i] != 0.0:
                logw += (model.theta[i] * spin).reshape(axis_shape(i))
        a = model.coupling
        for i, j in model.edges():
            table = a[i, j] * np.outer(spin, spin)
            logw += table.reshape(pair_shape(i, j))
    else:
        for i in range(n):
            logw += model.theta[i].reshape(axis_shape(i))
        for (i, j), w in model.weights.items():
            logw += w.reshape(pair_shape(i, j))
    return logw


def exact_distribution(model, cap=STATE_SPACE_CAP):
    """Full probability table, flattened in lexicographic configuration order.

    The table sums to 1 up to a few ulp; normalization goes through
    log-sum-exp so arbitrarily wide models do not overflow.
    """
    _check_cap(model.n, model.k, cap)
    logw = log_weight_tensor(model).ravel()
    p = np.exp(logw - logsumexp(logw))
    p /= p.sum()
    return p


def index_to_config(idx, n, k, spin):
    """Decode flat lexicographic indices into configurations."""
    idx = np.asarray(idx, dtype=np.int64)
    out = np.empty(idx.shape + (n,), dtype=np.int8)
    rem = idx.copy()
    for col in range(n - 1, -1, -1):
        out[..., col] = rem % k
        rem //= k
    if spin:
        out = (1 - 2 * out).astype(np.int8)
    return out


def config_to_index(z, k, spin):
    """Inverse of ``index_to_config``."""
    z = np.asarray(z)
    digits = ((1 - z) // 2).astype(np.int64) if spin else z.astype(np.int64)
    n = z.shape[-1]
    powers = k ** np.arange(n - 1, -1, -1, dtype=np.int64)
    return digits @ powers


def sample_exact(model, num, seed, cap=STATE_SPACE_CAP):
    """Draw ``num`` i.i.d. configurations by inverse CDF on the exact table."""
    if num < 1:
        raise ValueError("num must be >= 1")
    p = exact_distribution(model, cap=cap)
    cdf = np.cumsum(p)
    rng = np.random.default_rng(seed)
    u = rng.random(num)
    idx = np.minimum(np.searchsorted(cdf, u, side="right"), p.size - 1)
    spin = isinstance(model, IsingModel)
    return SampleSet(samples=index_to_config(idx, model.n, model.k, spin),
                     seed=int(seed), method="exact",
                     model_digest=model_digest(model), k=model.k, spin=spin)


def _site_logits(model, state, i):
    """Log-odds vector over symbols for site i given the rest of ``state``."""
    if isinstance(model, IsingModel):
        m = model.coupling[i] @ state + model.theta[i]
        return np.array([m, -m])
    logits = model.theta[i].copy()
    for (a, b), w in model.weights.items():
        if a == i:
            logits += w[:, state[b]]
        elif b == i:
            logits += w[state[a], :]
    return logits


def conditional_distribution(model, i, rest):
    """Exact conditional of site i given an assignment to the other sites.

    ``rest`` has length n-1 and skips site i. For Ising models the result is
    (P[+1], P[-1]); otherwise a length-k vector over symbols.
    """
    rest = np.asarray(rest)
    state = np.insert(rest, i, 0)
    logits = _site_logits(model, state, i)
    logits -= logits.max()
    p = np.exp(logits)
    return p / p.sum()


def pair_conditional_probability(model, i, alpha, beta, rest):
    """P[site i = alpha | site i in {alpha, beta}, rest] as a single sigmoid.

    Computed from the weight-row differences, which is how the per-pair
    regressions see the model.
    """
    rest = np.asarray(rest)
    state = np.insert(rest, i, 0)
    z = model.theta[i, alpha] - model.theta[i, beta]
    for (a, b), w in model.weights.items():
        if a == i:
            z += w[alpha, state[b]] - w[beta, state[b]]
        elif b == i:
            z += w[state[a], alpha] - w[state[a], beta]
    return float(expit(z))


GIBBS_TABLE_CAP = 2 ** 16


def _site_cdf_tables(model, table_cap):
    """Per-site conditional CDFs indexed by the other sites' flat config.

    Only built when k^(n-1) fits under ``table_cap``; larger chains fall back
    to computing conditionals on the fly.
    """
    n, k = model.n, model.k
    rest_space = k ** (n - 1)
    if rest_space > table_cap:
        return None
    spin = isinstance(model, IsingModel)
    rest = index_to_config(np.arange(rest_space), n - 1, k, spin)
    tables = []
    for i in range(n):
        if spin:
            others = np.delete(np.arange(n), i)
            m = rest.astype(float) @ model.coupling[i, others] + model.theta[i]
            logits = np.stack([m, -m], axis=1)
        else:
            logits = np.broadcast_to(model.theta[i], (rest_space, k)).copy()
            pos = 0
            for j in range(n):
                if j == i:
                    continue
                w = model.pair_weight(i, j)
                if w is not None:
                    logits += w[:, rest[:, pos]].T
                pos += 1
        logits -= logits.max(axis=1, keepdims=True)
        p = np.exp(logits)
        cdf = np.cumsum(p, axis=1)
        cdf /= cdf[:, -1:]
        tables.append(cdf.tolist())
    return tables


def sample_gibbs(model, num, seed, burn_in=GIBBS_BURN_IN, thinning=GIBBS_THINNING,
                 table_cap=GIBBS_TABLE_CAP):
    """Systematic-scan Gibbs chain using exact single-site conditionals.

    Records one configuration every ``thinning`` full sweeps once ``burn_in``
    sweeps have passed. Deterministic given the seed.
    """
    if num < 1:
        raise ValueError("num must be >= 1")
    if burn_in < 0:
        raise ValueError("burn_in must be >= 0")
    if thinning < 1:
        raise ValueError("thinning must be >= 1")
    n, k = model.n, model.k
    spin = isinstance(model, IsingModel)
    rng = np.random.default_rng(seed)

    digits = rng.integers(0, k, size=n)
    total_sweeps = burn_in + num * thinning
    uniforms = rng.random((total_sweeps, n))
    out = np.empty((num, n), dtype=np.int8)
    kept = 0

    tables = _site_cdf_tables(model, table_cap)
    if tables is not None:
        # place value of each digit and the digit-removal split per site
        place = [k ** (n - 1 - i) for i in range(n)]
        digits = [int(d) for d in digits]
        idx = sum(d * p for d, p in zip(digits, place))
        urows = uniforms.tolist()
        for s in range(total_sweeps):
            urow = urows[s]
            for i in range(n):
                p_i = place[i]
                rest_idx = (idx // (p_i * k)) * p_i + idx % p_i
                row = tables[i][rest_idx]
                u = urow[i]
                new = k - 1
                for sym in range(k - 1):
                    if u < row[sym]:
                        new = sym
                        break
                idx += (new - digits[i]) * p_i
                digits[i] = new
            if s >= burn_in and (s - burn_in + 1) % thinning == 0:
                out[kept] = digits
                kept += 1
        if spin:
            out = (1 - 2 * out).astype(np.int8)
        return SampleSet(samples=out, seed=int(seed), method="gibbs",
                         model_digest=model_digest(model), k=k, spin=spin)

    state = (1 - 2 * digits).astype(np.int8) if spin else digits.astype(np.int8)
    symbols = np.array([1, -1], dtype=np.int8) if spin else np.arange(k, dtype=np.int8)
    for s in range(total_sweeps):
        for i in range(n):
            logits = _site_logits(model, state, i)
            logits -= logits.max()
            p = np.exp(logits)
            cdf = np.cumsum(p)
            j = int(np.searchsorted(cdf, uniforms[s, i] * cdf[-1], side="right"))
            state[i] = symbols[min(j, k - 1)]
        if s >= burn_in and (s - burn_in + 1) % thinning == 0:
            out[kept] = state
            kept += 1
    return SampleSet(samples=out, seed=int(seed), method="gibbs",
                     model_digest=model_digest(model), k=k, spin=spin)


def min_site_conditional(joint):
    """Smallest single-site conditional probability of a joint table.

    ``joint`` is an m-dimensional array with one axis per site; the result is
    the minimum over sites, assignments to the other sites, and symbols of
    P[site = symbol | rest]. Assignments with zero marginal mass are skipped.
    """
    joint = np.asarray(joint, dtype=float)
    best = np.inf
    for axis in range(joint.ndim):
        tot = joint.sum(axis=axis, keepdims=True)
        with np.errstate(invalid="ignore", divide="ignore"):
            cond = joint / tot
        mask = np.broadcast_to(tot > 0, joint.shape)
        if mask.any():
            best = min(best, float(cond[mask].min()))
    return best


def check_delta_unbiased(model, cap=CONDITIONAL_CAP):
    """Exhaustively verify the conditional floor on a small model.

    Returns ``(min_conditional, bound)`` where the bound is exp(-2 width)/k;
    raises UnbiasednessError if the exhaustive minimum falls below it.
    """
    _check_cap(model.n, model.k, cap)
    joint = exact_distribution(model).reshape((model.k,) * model.n)
    min_cond = min_site_conditional(joint)
    bound = unbiasedness_bound(model)
    if min_cond < bound - 1e-12:
        raise UnbiasednessError(
            f"min conditional {min_cond} below floor {bound}")
    return min_cond, bound


def as_symbols(sample_set):
    """Re-encode spin samples as symbols (spin +1 -> 0, spin -1 -> 1).

    Matches the binary-to-alphabet-2 model embedding, so a general-alphabet
    learner sees the same distribution the spins came from.
    """
    if not sample_set.spin:
        return sample_set
    return SampleSet(samples=((1 - sample_set.samples) // 2).astype(np.int8),
                     seed=sample_set.seed, method=sample_set.method,
                     model_digest=sample_set.model_digest, k=2, spin=False)


def save_samples(sample_set, csv_path):
    """Write one configuration per row (symbols as 1..k, spins as -1/+1) plus
    a JSON sidecar with the provenance fields."""
    csv_path = Path(csv_path)
    data = sample_set.samples if sample_set.spin else sample_set.samples + 1
    np.savetxt(csv_path, data, fmt="%d", delimiter=",")
    sidecar = {"seed": sample_set.seed,
               "method": sample_set.method,
               "model_digest": sample_set.model_digest,
               "k": sample_set.k,
               "spin": sample_set.spin,
               "num_samples": sample_set.num}
    with open(csv_path.with_suffix(".json"), "w") as fh:
        json.dump(sidecar, fh, indent=1)


def load_samples(csv_path):
    csv_path = Path(csv_path)
    with open(csv_path.with_suffix(".json")) as fh:
        meta = json.load(fh)
    data = np.loadtxt(csv_path, dtype=np.int8, delimiter=",", ndmin=2)
    if not meta["spin"]:
        data = data - 1
    return SampleSet(samples=data, seed=meta["seed"], method=meta["method"],
                     model_digest=meta["model_digest"], k=meta["k"],
                     spin=meta["spin"])
