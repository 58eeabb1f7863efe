"""Offline comparators: the best cumulative square loss in hindsight.

Finite classes are enumerated exactly. For bounded L-Lipschitz functions on
[0, 1] two comparators are available:

* a dynamic program over grid-valued paths: any Lipschitz ``f`` rounds to a
  feasible grid path within ``h/2``, so the true infimum is at least
  ``best_loss - certified_gap``;
* the exact convex program over the values at the sample points (linear
  interpolation extends any feasible vector to a Lipschitz function), solved
  numerically and certified by a Lagrangian dual bound computed here.
"""

from dataclasses import dataclass
import math

import cvxpy as cp
import numpy as np
import scipy.sparse as sparse
from scipy.ndimage import minimum_filter1d

from .errors import ParameterError, ResourceError

WITNESS_LIMIT = 4_000_000  # stored DP cells above which no witness path is kept


@dataclass(frozen=True)
class RoundData:
    xs: np.ndarray
    ys: np.ndarray

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        ys = np.asarray(self.ys, dtype=float)
        if xs.shape != ys.shape or xs.ndim != 1 or xs.size == 0:
            raise ParameterError("xs and ys must be non-empty 1-D arrays of equal length")
        if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
            raise ParameterError("round data must be finite")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    def __len__(self):
        return self.ys.size


@dataclass(frozen=True)
class OracleResult:
    best_loss: float
    witness: object
    certified_gap: float = 0.0

    @property
    def lower_bound(self) -> float:
        return self.best_loss - self.certified_gap


def best_finite(cls, data: RoundData) -> OracleResult:
    if len(cls) == 0:
        raise ParameterError("empty function class")
    vals = cls.evaluate(data.xs)
    losses = ((data.ys[None, :] - vals) ** 2).sum(axis=1)
    i = int(np.argmin(losses))
    return OracleResult(float(losses[i]), i)


def best_chained_finite(f0, increments, data: RoundData,
                        cap: int = 1_000_000) -> OracleResult:
    """Exact minimum over all sums ``f0_j + g1_i1 + ... + gK_iK``."""
    sizes = [len(f0)] + [len(g) for g in increments]
    total = math.prod(sizes)
    if total > cap:
        raise ResourceError(f"{total} chained combinations exceed cap {cap}")
    t = len(data)
    preds = f0.evaluate(data.xs).reshape(sizes[0], t)
    for g in increments:
        gv = g.evaluate(data.xs).reshape(len(g), t)
        preds = (preds[:, None, :] + gv[None, :, :]).reshape(-1, t)
    losses = ((data.ys[None, :] - preds) ** 2).sum(axis=1)
    flat = int(np.argmin(losses))
    return OracleResult(float(losses[flat]), tuple(int(i) for i in np.unravel_index(flat, sizes)))


def band_radius(lip: float, dx: float, h: float, slack: float | None = None) -> int:
    """Largest grid-index jump allowed by ``|v_i - v_{i-1}| <= lip dx + slack``."""
    slack = h if slack is None else slack
    return int(math.floor((lip * dx + slack) / h * (1.0 + 1e-12)))


def dp_grid(b: float, h: float) -> np.ndarray:
    return -b + h * np.arange(math.ceil(2.0 * b / h - 1e-9) + 1)


def best_lipschitz_dp(data: RoundData, b: float, lip: float, h: float,
                      slack: float | None = None) -> OracleResult:
    """Best grid path ``v`` with ``|v_i - v_{i-1}| <= lip (x_i - x_{i-1}) + slack``.

    ``slack`` defaults to the grid step ``h``; it must be at least ``h`` for
    the certificate. Samples sharing an ``x`` share one value. The gap
    ``T h (4B + h)`` covers the rounding of any bounded ``lip``-Lipschitz
    function onto the grid.

    With the default slack the optimum is *not* monotone under halving ``h``
    (the slack shrinks too); with a fixed slack it is, since the halved grid
    contains the coarse one.
    """
    if not h > 0:
        raise ParameterError(f"grid step must be > 0, got {h}")
    if h >= 2 * b:
        raise ParameterError(f"grid step {h} must be < 2B = {2 * b}")
    if slack is not None and slack < h:
        raise ParameterError(f"slack {slack} must be >= grid step {h}")
    grid = dp_grid(b, h)
    ux, inv = np.unique(data.xs, return_inverse=True)
    order = np.argsort(inv, kind="stable")
    bounds = np.searchsorted(inv[order], np.arange(ux.size + 1))
    ys_sorted = data.ys[order]

    def local(i):
        ys = ys_sorted[bounds[i]:bounds[i + 1]]
        if ys.size == 1:
            return (ys[0] - grid) ** 2
        return ((ys[:, None] - grid[None, :]) ** 2).sum(axis=0)

    keep = ux.size * grid.size <= WITNESS_LIMIT
    history = []
    cost = local(0)
    for i in range(1, ux.size):
        if keep:
            history.append(cost)
        r = band_radius(lip, ux[i] - ux[i - 1], h, slack)
        if r < grid.size - 1:
            reach = minimum_filter1d(cost, size=2 * r + 1, mode="constant", cval=np.inf)
        else:
            reach = np.full_like(cost, cost.min())
        cost = reach + local(i)
    k = int(np.argmin(cost))
    best = float(cost[k])
    witness = None
    if keep:
        path = [k]
        for i in range(ux.size - 1, 0, -1):
            r = band_radius(lip, ux[i] - ux[i - 1], h, slack)
            prev = history[i - 1]
            lo, hi = max(0, k - r), min(grid.size, k + r + 1)
            k = lo + int(np.argmin(prev[lo:hi]))
            path.append(k)
        witness = (ux, grid[np.array(path[::-1])])
    gap = len(data) * h * (4.0 * b + h)
    return OracleResult(best, witness, gap)


def empirical_regret(forecaster_loss: float, oracle: OracleResult) -> float:
    """Forecaster loss minus the oracle's certified lower bound on the best loss."""
    return float(forecaster_loss) - oracle.lower_bound


def _group(data: RoundData):
    ux, inv = np.unique(data.xs, return_inverse=True)
    n = np.bincount(inv, minlength=ux.size).astype(float)
    ybar = np.bincount(inv, weights=data.ys, minlength=ux.size) / n
    residual = float(((data.ys - ybar[inv]) ** 2).sum())
    return ux, n, ybar, residual


def lipschitz_dual_bound(lam, n, ybar, d, b: float) -> float:
    """Lagrangian dual value for multipliers ``lam`` of the constraints
    ``|v_(i+1) - v_i| <= d_i`` (the box ``|v| <= b`` is kept in the primal).

    Weak duality makes this a lower bound on the grouped objective
    ``sum n_i (v_i - ybar_i)^2`` for any real ``lam``.
    """
    c = np.zeros(n.size)
    c[1:] += lam
    c[:-1] -= lam
    v = np.clip(ybar - c / (2.0 * n), -b, b)
    return float((n * (v - ybar) ** 2).sum() + c @ v - np.abs(lam) @ d)


def _feasible(v, d, b):
    out = np.empty_like(v)
    out[0] = min(b, max(-b, v[0]))
    for i in range(1, v.size):
        lo = max(-b, out[i - 1] - d[i - 1])
        hi = min(b, out[i - 1] + d[i - 1])
        out[i] = min(hi, max(lo, v[i]))
    return out


def best_lipschitz_exact(data: RoundData, b: float, lip: float) -> OracleResult:
    """Best bounded ``lip``-Lipschitz fit, solved as a convex quadratic program.

    ``best_loss`` is the loss of a strictly feasible value vector and
    ``certified_gap`` its distance to the dual lower bound, so
    ``best_loss - certified_gap`` never exceeds the true infimum.
    """
    if not b > 0 or lip < 0:
        raise ParameterError("b must be > 0 and lip >= 0")
    ux, n, ybar, residual = _group(data)
    d = lip * np.diff(ux)
    if ux.size == 1:
        v = np.clip(ybar, -b, b)
        loss = float((n * (v - ybar) ** 2).sum()) + residual
        return OracleResult(loss, (ux, v), 0.0)
    m = ux.size - 1
    diff = sparse.diags([-np.ones(m), np.ones(m)], [0, 1], shape=(m, ux.size))
    v = cp.Variable(ux.size)
    up, down = diff @ v <= d, -(diff @ v) <= d
    problem = cp.Problem(cp.Minimize(cp.sum(cp.multiply(n, cp.square(v - ybar)))),
                         [up, down, v <= b, v >= -b])
    try:
        problem.solve(solver=cp.CLARABEL)
        raw, lam = v.value, up.dual_value - down.dual_value
    except cp.error.SolverError:
        raw, lam = None, None
    if raw is None or lam is None:
        raw, lam = ybar, np.zeros(m)
    vals = _feasible(np.asarray(raw, dtype=float), d, b)
    primal = float((n * (vals - ybar) ** 2).sum())
    dual = min(primal, lipschitz_dual_bound(np.asarray(lam, dtype=float), n, ybar, d, b))
    return OracleResult(primal + residual, (ux, vals), primal - dual)
