"""Constrained logistic regression solvers.

Two mirror-descent solvers cover the two constraint geometries used by the
structure learners: an entropic solver for l1 balls (signed coordinates are
handled by doubling the dimension and running exponentiated-gradient steps on
a probability simplex) and a scaled power-norm solver for l2,1 balls (group
geometry, rows of a weight matrix). Both return the average of their iterates
together with the per-iteration loss curve and the theoretical suboptimality
bound implied by the step-size choice. A projected-gradient reference
minimizer with exact Euclidean ball projections serves as an independent
high-accuracy oracle for tests.

The batch entry points (`solve_l1_batch`, `solve_l21_shared`) run many
regressions in one vectorized loop; the single-problem functions are thin
wrappers around them. Sample weights act as multiplicities, so callers may
collapse duplicate rows into counts without changing the objective.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit, logsumexp

LOG2 = math.log(2.0)


class NonFiniteError(RuntimeError):
    """A solver encountered a non-finite gradient or iterate."""


class UnsupportedDimensionError(ValueError):
    """The group-norm mirror map needs at least 3 rows."""


class ReferenceSolveError(RuntimeError):
    """Reference minimizer failed to reach the requested accuracy."""

    def __init__(self, message, loss_trajectory):
        super().__init__(message)
        self.loss_trajectory = loss_trajectory


@dataclass
class RegressionProblem:
    """Weighted logistic regression data with a norm-ball constraint.

    x      : features. (N, n) float in [-1, 1] for l1 geometry; for group
             geometry either (N, n) integer symbol indices (one-hot rows,
             ``k`` set) or a dense (N, n, k) array.
    y      : (N,) labels in {-1, +1}
    radius : l1 or l2,1 constraint on the weights
    k      : alphabet size for group geometry; None selects l1 geometry
    weights: optional (N,) nonnegative sample multiplicities
    """

    x: np.ndarray
    y: np.ndarray
    radius: float
    k: int | None = None
    weights: np.ndarray | None = None

    def __post_init__(self):
        self.y = np.asarray(self.y, dtype=float)
        if self.y.ndim != 1 or self.y.size < 1:
            raise ValueError("labels must be a nonempty vector")
        if not np.isin(self.y, (-1.0, 1.0)).all():
            raise ValueError("labels must be -1/+1")
        if not (np.isfinite(self.radius) and self.radius >= 0):
            raise ValueError("radius must be finite and nonnegative")
        x = np.asarray(self.x)
        if self.k is None:
            if x.ndim != 2:
                raise ValueError("l1-geometry features must be (N, n)")
            x = np.asarray(x, dtype=float)
            if not np.isfinite(x).all():
                raise ValueError("features must be finite")
        elif x.ndim == 2:
            if not np.issubdtype(x.dtype, np.integer):
                raise ValueError("one-hot features must be integer symbol indices")
            if x.min() < 0 or x.max() >= self.k:
                raise ValueError("one-hot indices must lie in [0, k)")
        elif x.ndim == 3:
            if x.shape[2] != self.k:
                raise ValueError("dense group features must be (N, n, k)")
            x = np.asarray(x, dtype=float)
        else:
            raise ValueError("unrecognized feature shape")
        if x.shape[0] != self.y.size:
            raise ValueError("feature/label count mismatch")
        self.x = x
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=float)
            if w.shape != (self.y.size,) or (w < 0).any() or w.sum() <= 0:
                raise ValueError("weights must be nonnegative with positive sum")
            self.weights = w

    @property
    def num(self):
        return self.y.size

    @property
    def n(self):
        return self.x.shape[1]

    @property
    def geometry(self):
        return "l1" if self.k is None else "l21"

    def one_hot(self):
        """Dense (N, n, k) expansion of index-encoded one-hot features."""
        if self.k is None:
            raise ValueError("not a group-geometry problem")
        if self.x.ndim == 3:
            return self.x
        out = np.zeros(self.x.shape + (self.k,))
        np.put_along_axis(out, self.x[..., None].astype(np.int64), 1.0, axis=2)
        return out


@dataclass
class SolveReport:
    """Solver output: solution, loss curve and the step-size bound."""

    weights: np.ndarray
    iterations: int
    loss_trajectory: np.ndarray
    suboptimality_bound: float
    iterates: list | None = None

    def __post_init__(self):
        traj = np.asarray(self.loss_trajectory, dtype=float)
        if traj.size and (not np.isfinite(traj).all() or (traj < 0).any()):
            raise ValueError("loss trajectory must be finite and nonnegative")
        self.loss_trajectory = traj

    def to_dict(self):
        return {"weights": np.asarray(self.weights).tolist(),
                "iterations": self.iterations,
                "loss_trajectory": self.loss_trajectory.tolist(),
                "suboptimality_bound": self.suboptimality_bound}


def _norm_weights(problem):
    if problem.weights is None:
        return np.full(problem.num, 1.0 / problem.num)
    return problem.weights / problem.weights.sum()


def _margins(weights, problem):
    if problem.k is None:
        return problem.x @ weights
    if problem.x.ndim == 3:
        return np.tensordot(problem.x, weights, axes=2)
    n = problem.n
    return weights[np.arange(n)[None, :], problem.x].sum(axis=1)


def logistic_loss(weights, problem):
    """Average of ln(1 + exp(-y <w, x>)), computed in the stable branch."""
    z = problem.y * _margins(weights, problem)
    return float(np.logaddexp(0.0, -z) @ _norm_weights(problem))


def logistic_gradient(weights, problem):
    """Exact gradient of ``logistic_loss``; same shape as ``weights``."""
    m = _margins(weights, problem)
    c = (expit(m) - (problem.y + 1.0) / 2.0) * _norm_weights(problem)
    if problem.k is None:
        return problem.x.T @ c
    if problem.x.ndim == 3:
        return np.tensordot(c, problem.x, axes=(0, 0))
    n, k = problem.n, problem.k
    flat = getattr(problem, "_flat_idx", None)
    if flat is None:
        flat = (problem.x + np.arange(n)[None, :] * k).ravel()
        problem._flat_idx = flat
    return np.bincount(flat, weights=np.repeat(c, n),
                       minlength=n * k).reshape(n, k)


def l1_bound(radius, n, iterations):
    """Suboptimality guarantee of the averaged entropic iterate."""
    return 2.0 * radius * math.sqrt(2.0 * math.log(2 * n + 1) / iterations)


def l21_bound(radius, n, iterations):
    """Group-geometry analog; the leading constant is fixed at e."""
    return math.e * radius * math.sqrt(math.log(n) / iterations)


def solve_l1_batch(feats, labels, wts, radius, iterations, trace=None):
    """Entropic mirror descent on a batch of l1-constrained problems.

    feats  : (P, L, n); rows with zero weight are padding
    labels : (P, L) in {-1, +1}
    wts    : (P, L) nonnegative multiplicities, positive row sums
    radius : positive scalar or (P,) array

    Returns ``(weights (P, n), loss_trajectories (P, iterations))``. Each
    problem is lifted to a (2n+1)-simplex (positive copy, negative copy, one
    slack coordinate), updated multiplicatively in the log domain and
    renormalized, which keeps every iterate exactly on the simplex.
    """
    feats = np.asarray(feats, dtype=float)
    P, L, n = feats.shape
    d = 2 * n + 1
    r = np.broadcast_to(np.asarray(radius, dtype=float), (P,))
    if (r <= 0).any():
        raise ValueError("batch solver requires positive radii")
    yhat = (np.asarray(labels, dtype=float) + 1.0) / 2.0
    wn = wts / wts.sum(axis=1, keepdims=True)
    gamma = np.sqrt(2.0 * np.log(d) / iterations) / (2.0 * r)

    logw = np.full((P, d), -np.log(d))
    avg = np.zeros((P, d))
    traj = np.empty((P, iterations))
    rcol = r[:, None]
    for t in range(iterations):
        w = np.exp(logw)
        q = w[:, :n] - w[:, n:2 * n]
        m = np.matmul(feats, q[..., None])[..., 0] * rcol
        if not np.isfinite(m).all():
            raise NonFiniteError(f"non-finite margins at iteration {t}")
        traj[:, t] = np.sum(np.logaddexp(0.0, -(2.0 * yhat - 1.0) * m) * wn, axis=1)
        c = (expit(m) - yhat) * wn
        v = np.matmul(feats.transpose(0, 2, 1), c[..., None])[..., 0] * rcol
        if not np.isfinite(v).all():
            raise NonFiniteError(f"non-finite gradient at iteration {t}")
        if trace is not None:
            trace.append(w.copy())
        avg += w
        gv = gamma[:, None] * v
        logw[:, :n] -= gv
        logw[:, n:2 * n] += gv
        logw -= logsumexp(logw, axis=1, keepdims=True)
    avg /= iterations
    return (avg[:, :n] - avg[:, n:2 * n]) * rcol, traj


def solve_l21_shared(x2d, yhat, wts, radius, iterations, n, k, trace=None):
    """Group-geometry mirror descent for problems sharing one feature matrix.

    x2d    : (N, n*k) dense features, shared by all problems
    yhat   : (N, P) labels in {0, 1}
    wts    : (N, P) nonnegative multiplicities (zero excludes a sample from a
             problem), positive column sums
    radius : positive l2,1 constraint, shared

    Returns ``(weights (P, n, k), loss_trajectories (P, iterations))``. The
    mirror map is the power of the row-norm vector prescribed for this
    geometry (exponent 1 + 1/ln n, scale e*ln n); its gradient inverts in
    closed form on row norms, and iterates that land outside the unit l2,1
    ball are pulled back by radial scaling. Zero rows map to zero rows.
    """
    if n < 3:
        raise UnsupportedDimensionError(
            "group mirror map requires at least 3 rows; use a different solver")
    if radius <= 0:
        raise ValueError("batch solver requires a positive radius")
    x2d = np.asarray(x2d, dtype=float)
    P = yhat.shape[1]
    ln_n = math.log(n)
    p_exp = 1.0 + 1.0 / ln_n
    cmap = math.e * ln_n
    gamma = math.sqrt(math.e * ln_n / iterations) / (2.0 * radius)
    wn = wts / wts.sum(axis=0, keepdims=True)
    ylab = 2.0 * yhat - 1.0

    w = np.full((P, n, k), 1.0 / (n * math.sqrt(k)))
    avg = np.zeros_like(w)
    traj = np.empty((P, iterations))
    for t in range(iterations):
        m = (x2d @ w.reshape(P, n * k).T) * radius          # (N, P)
        if not np.isfinite(m).all():
            raise NonFiniteError(f"non-finite margins at iteration {t}")
        traj[:, t] = np.sum(np.logaddexp(0.0, -ylab * m) * wn, axis=0)
        c = (expit(m) - yhat) * wn
        g = (x2d.T @ c).T.reshape(P, n, k) * radius
        if not np.isfinite(g).all():
            raise NonFiniteError(f"non-finite gradient at iteration {t}")
        if trace is not None:
            trace.append(w.copy())
        avg += w
        rn = np.linalg.norm(w, axis=2)
        unit_w = np.divide(w, rn[:, :, None],
                           out=np.zeros_like(w), where=rn[:, :, None] > 0)
        dual = cmap * (rn ** (p_exp - 1.0))[:, :, None] * unit_w - gamma * g
        tn = np.linalg.norm(dual, axis=2)
        s = (tn / cmap) ** ln_n
        u = np.divide(dual, tn[:, :, None],
                      out=np.zeros_like(dual), where=tn[:, :, None] > 0)
        u *= s[:, :, None]
        ssum = s.sum(axis=1)
        scale = np.where(ssum > 1.0, 1.0 / ssum, 1.0)
        w = u * scale[:, None, None]
    avg /= iterations
    return avg * radius, traj


def _zero_report(problem, shape):
    # radius 0: the only feasible point is 0, whose loss is ln 2 exactly
    return SolveReport(weights=np.zeros(shape), iterations=0,
                       loss_trajectory=np.array([LOG2]),
                       suboptimality_bound=0.0)


def mirror_descent_l1(problem, iterations, record_iterates=False):
    """Solve an l1-constrained problem; returns the averaged iterate."""
    if problem.geometry != "l1":
        raise ValueError("expected an l1-geometry problem")
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    if problem.radius == 0.0:
        return _zero_report(problem, problem.n)
    wts = problem.weights if problem.weights is not None else np.ones(problem.num)
    trace = [] if record_iterates else None
    w, traj = solve_l1_batch(problem.x[None], problem.y[None], wts[None],
                             problem.radius, iterations, trace=trace)
    return SolveReport(
        weights=w[0], iterations=iterations, loss_trajectory=traj[0],
        suboptimality_bound=l1_bound(problem.radius, problem.n, iterations),
        iterates=[t[0] for t in trace] if record_iterates else None)


def _dense2d(problem):
    if problem.x.ndim == 3:
        return problem.x.reshape(problem.num, -1)
    return problem.one_hot().reshape(problem.num, -1)


def mirror_descent_l21(problem, iterations, record_iterates=False):
    """Solve an l2,1-constrained problem; returns the averaged iterate."""
    if problem.geometry != "l21":
        raise ValueError("expected a group-geometry problem")
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    n, k = problem.n, problem.k
    if problem.radius == 0.0:
        return _zero_report(problem, (n, k))
    wts = problem.weights if problem.weights is not None else np.ones(problem.num)
    yhat = ((problem.y + 1.0) / 2.0)[:, None]
    trace = [] if record_iterates else None
    w, traj = solve_l21_shared(_dense2d(problem), yhat, wts[:, None],
                               problem.radius, iterations, n, k, trace=trace)
    return SolveReport(
        weights=w[0], iterations=iterations, loss_trajectory=traj[0],
        suboptimality_bound=l21_bound(problem.radius, n, iterations),
        iterates=[t[0] for t in trace] if record_iterates else None)


def project_l1_ball(v, radius):
    """Euclidean projection onto the l1 ball, by sorting."""
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    v = np.asarray(v, dtype=float)
    if radius == 0:
        return np.zeros_like(v)
    a = np.abs(v)
    if a.sum() <= radius:
        return v.copy()
    u = np.sort(a)[::-1]
    css = np.cumsum(u)
    idx = np.nonzero(u * np.arange(1, v.size + 1) > css - radius)[0][-1]
    tau = (css[idx] - radius) / (idx + 1.0)
    return np.sign(v) * np.maximum(a - tau, 0.0)


def project_l21_ball(w, radius):
    """Euclidean projection onto the l2,1 ball: soft-scale the row norms."""
    w = np.asarray(w, dtype=float)
    norms = np.linalg.norm(w, axis=1)
    if norms.sum() <= radius:
        return w.copy()
    target = project_l1_ball(norms, radius)
    scale = np.divide(target, norms, out=np.zeros_like(norms), where=norms > 0)
    return w * scale[:, None]


def _project(w, problem):
    if problem.geometry == "l1":
        return project_l1_ball(w, problem.radius)
    return project_l21_ball(w, problem.radius)


def reference_minimizer(problem, tol=1e-8, max_iter=100_000):
    """High-accuracy solve by projected gradient with backtracking.

    Accelerated (momentum with function-value restart) but every step is a
    plain projected-gradient step with a backtracked quadratic upper bound
    and an exact Euclidean ball projection. Runs until the unit-step
    fixed-point residual ||w - P(w - grad)|| drops below ``tol`` and
    re-checks that first-order optimality certificate on the returned point.
    Intended as an independent oracle on small instances.
    """
    shape = problem.n if problem.geometry == "l1" else (problem.n, problem.k)
    if problem.radius == 0.0:
        return np.zeros(shape)
    w = np.zeros(shape)
    z = w
    f = logistic_loss(w, problem)
    momentum = 1.0
    step = 1.0
    losses = [f]

    def backtracked(point, f_point, g_point):
        nonlocal step
        while True:
            cand = _project(point - step * g_point, problem)
            dp = cand - point
            f_cand = logistic_loss(cand, problem)
            if f_cand <= f_point + np.vdot(g_point, dp) + np.vdot(dp, dp) / (2.0 * step) + 1e-15:
                return cand, f_cand
            step *= 0.5
            if step < 1e-20:
                raise ReferenceSolveError("backtracking step underflow", losses)

    for it in range(max_iter):
        g_w = None
        if it % 4 == 0 or z is w:  # optimality residual probe
            g_w = logistic_gradient(w, problem)
            resid = np.linalg.norm(w - _project(w - g_w, problem))
            if resid <= tol:
                break
        if z is w:
            w_new, f_new = backtracked(w, f, g_w)
        else:
            w_new, f_new = backtracked(z, logistic_loss(z, problem),
                                       logistic_gradient(z, problem))
            if f_new > f:  # momentum overshoot: retake the step from w
                momentum = 1.0
                if g_w is None:
                    g_w = logistic_gradient(w, problem)
                w_new, f_new = backtracked(w, f, g_w)
        m_new = (1.0 + math.sqrt(1.0 + 4.0 * momentum ** 2)) / 2.0
        coef = (momentum - 1.0) / m_new
        z = w_new if coef == 0.0 else w_new + coef * (w_new - w)
        w, f, momentum = w_new, f_new, m_new
        losses.append(f)
        step = min(step * 1.25, 1e6)
    else:
        raise ReferenceSolveError(
            f"no convergence to tol={tol} within {max_iter} iterations", losses)
    cert = np.linalg.norm(w - _project(w - logistic_gradient(w, problem), problem))
    if cert > tol * (1.0 + 1e-9):
        raise ReferenceSolveError(f"optimality certificate failed: {cert}", losses)
    return w
