"""Epsilon-nets used by the chaining forecasters.

Three families live here:

* explicit finite nets (greedy proper covers of a finite family, plus the
  increment sets ``pi_k(f) - pi_{k-1}(f)``) for the generic forecaster;
* dyadic piecewise-constant nets for 1-Lipschitz functions on [0, 1];
* clipped Taylor-polynomial nets on a 4-ary nested partition for Hoelder
  functions on [0, 1].

Sup norms of continuous functions are certified empirically on probe grids;
on a finite input domain the probe set is the domain itself and the check is
exact.
"""

from dataclasses import dataclass, field
import math
import warnings

import numpy as np

from .errors import CertificationError, DomainError, ParameterError, ResourceError
from .simplex import clip

BOUND_TOL = 1e-9
PROBES_PER_CELL = 64


def robust_ceil(v: float) -> int:
    """``ceil`` that ignores floating noise just above an integer."""
    return math.ceil(v - 1e-9)


def nearest_index(values, lo: float, step: float, count: int):
    """Index of the nearest grid point ``lo + j*step``; ties go to the lower one."""
    r = (np.asarray(values, dtype=float) - lo) / step
    j = np.ceil(r - 0.5).astype(int)
    j = np.clip(j, 0, count - 1)
    return int(j) if np.ndim(values) == 0 else j


# ---------------------------------------------------------------- partitions

@dataclass(frozen=True)
class Partition:
    """Base intervals ``[(a-1)w, aw)`` of [0, 1], each split ``branching**m`` ways.

    Indices are 1-based to match the usual (a, n) labelling. The last base
    interval is closed at 1; when ``1/w`` is not an integer it extends past 1.
    """

    width: float
    count: int
    branching: int = 2

    def _locate(self, x):
        if isinstance(x, (float, int, np.floating, np.integer)):
            # scalar fast path, same arithmetic as the array branch
            x = float(x)
            if not 0.0 <= x <= 1.0:
                raise DomainError("input points must lie in [0, 1]")
            a = min(int(math.floor(x / self.width)), self.count - 1)
            s = min(max((x - a * self.width) / self.width, 0.0), 1.0)
            return a + 1, s
        x = np.asarray(x, dtype=float)
        if np.any((x < 0) | (x > 1)) or np.any(np.isnan(x)):
            raise DomainError("input points must lie in [0, 1]")
        a = np.minimum(np.floor(x / self.width).astype(int), self.count - 1)
        s = np.clip((x - a * self.width) / self.width, 0.0, 1.0)
        return a + 1, s

    def cell_index(self, x: float, m: int) -> tuple[int, int]:
        a, s = self._locate(x)
        k = self.branching ** m
        n = min(int(math.floor(float(s) * k)), k - 1) + 1
        return int(a), n

    def path(self, x: float, levels: int) -> tuple[int, list[int]]:
        """Base interval and the cell index at each level ``1..levels``."""
        a, s = self._locate(x)
        s = float(s)
        cells = []
        for m in range(1, levels + 1):
            k = self.branching ** m
            cells.append(min(int(math.floor(s * k)), k - 1) + 1)
        return int(a), cells

    def cell_indices(self, xs, m: int):
        """Vectorised ``cell_index`` returning arrays ``(a, n)``."""
        a, s = self._locate(xs)
        k = self.branching ** m
        n = np.minimum(np.floor(s * k).astype(int), k - 1) + 1
        return a, n

    def cell_width(self, m: int) -> float:
        return self.width / self.branching ** m

    def cell_center(self, a, m: int, n):
        a = np.asarray(a)
        n = np.asarray(n)
        return (a - 1) * self.width + (n - 0.5) * self.cell_width(m)

    def interval_center(self, a):
        return (np.asarray(a) - 0.5) * self.width


# ----------------------------------------------------------- Lipschitz nets

@dataclass
class LipschitzNetConfig:
    b: float
    gamma: float
    levels: int = 0
    horizon: int | None = None

    def __post_init__(self):
        if not self.b > 0:
            raise ParameterError(f"b must be > 0, got {self.b}")
        if not self.gamma > 0:
            raise ParameterError(f"gamma must be > 0, got {self.gamma}")
        if self.levels < 0:
            raise ParameterError(f"levels must be >= 0, got {self.levels}")
        if self.horizon is not None:
            lo = self.b / self.horizon
            if not lo < self.gamma <= self.b:
                clamped = min(max(self.gamma, lo * (1 + 1e-12)), self.b)
                warnings.warn(
                    f"gamma={self.gamma} outside ({lo}, {self.b}]; "
                    f"clamped to {clamped}", stacklevel=2)
                self.gamma = clamped

    @property
    def intervals(self) -> int:
        return robust_ceil(1.0 / self.gamma)

    @property
    def value_grid(self) -> np.ndarray:
        return -self.b + self.gamma * np.arange(robust_ceil(2 * self.b / self.gamma) + 1)

    @property
    def partition(self) -> Partition:
        return Partition(self.gamma, self.intervals, 2)


def lipschitz_cell_index(x: float, config: LipschitzNetConfig, m: int):
    return config.partition.cell_index(x, m)


@dataclass
class ChainCoefficients:
    """``c0[a-1]`` per base interval and ``increments[m][a-1, n-1]`` per cell."""

    config: LipschitzNetConfig
    c0: np.ndarray
    increments: dict = field(default_factory=dict)

    @property
    def levels(self) -> int:
        return len(self.increments)

    def __call__(self, x):
        part = self.config.partition
        a, _ = part.cell_indices(x, 0)
        out = self.c0[a - 1].astype(float)
        for m in range(1, self.levels + 1):
            a, n = part.cell_indices(x, m)
            out = out + self.increments[m][a - 1, n - 1]
        return out

    def max_increment_ratio(self) -> float:
        """Largest ``|c^(m,n)| / (gamma / 2^(m-1))``; at most 1 for a valid chain."""
        g = self.config.gamma
        ratios = [np.max(np.abs(c)) / (g / 2 ** (m - 1))
                  for m, c in self.increments.items()]
        return max(ratios, default=0.0)


def lipschitz_net_bound(gamma: float, levels: int) -> float:
    return gamma if levels == 0 else gamma / 2 ** (levels + 1)


def probe_grid(intervals: int, levels: int, branching: int = 2) -> np.ndarray:
    """``PROBES_PER_CELL * branching**levels`` points per base interval over [0, 1]."""
    return np.linspace(0.0, 1.0, intervals * PROBES_PER_CELL * branching ** levels + 1)


def project_lipschitz(f, config: LipschitzNetConfig, levels: int | None = None,
                      check: bool = True):
    """Chain coefficients interpolating ``f`` at every cell centre.

    ``c0`` rounds ``f`` at the base-interval centre to the value grid; each
    increment then moves the partial sum onto ``f`` at the next cell centre.
    Returns the coefficients and the sup error over a dense probe grid. With
    ``check`` a certificate above the analytic bound raises, which means ``f``
    was not 1-Lipschitz or not bounded by ``b``.
    """
    levels = config.levels if levels is None else levels
    part = config.partition
    grid = config.value_grid
    a_idx = np.arange(1, part.count + 1)
    f_center = np.asarray(f(part.interval_center(a_idx)), dtype=float)
    c0 = grid[nearest_index(f_center, -config.b, config.gamma, grid.size)]

    increments = {}
    prev = c0[:, None]  # partial sums at level m-1, one column per parent cell
    for m in range(1, levels + 1):
        k = 2 ** m
        n_idx = np.arange(1, k + 1)
        centers = part.cell_center(a_idx[:, None], m, n_idx[None, :])
        fc = np.asarray(f(centers.ravel()), dtype=float).reshape(centers.shape)
        parent = np.repeat(prev, 2, axis=1)
        increments[m] = fc - parent
        prev = fc

    coeffs = ChainCoefficients(config, c0, increments)
    probes = probe_grid(part.count, levels)
    err = float(np.max(np.abs(np.asarray(f(probes)) - coeffs(probes))))
    bound = lipschitz_net_bound(config.gamma, levels)
    if check and err > bound + BOUND_TOL:
        raise CertificationError(
            f"sup error {err:.3g} exceeds {bound:.3g}; input is not a valid "
            "bounded 1-Lipschitz function")
    return coeffs, err


# -------------------------------------------------------------- Hoelder nets

@dataclass
class HolderNetConfig:
    q: int
    alpha: float
    lam: float
    b: float
    gamma: float

    def __post_init__(self):
        if self.q < 0:
            raise ParameterError(f"q must be >= 0, got {self.q}")
        if not 0 < self.alpha <= 1:
            raise ParameterError(f"alpha must be in (0, 1], got {self.alpha}")
        if not self.lam > 0 or not self.b > 0 or not self.gamma > 0:
            raise ParameterError("lambda, b and gamma must be > 0")
        if self.beta < 0.5:
            raise ParameterError(f"regularity q+alpha={self.beta} must be >= 1/2")

    @property
    def beta(self) -> float:
        return self.q + self.alpha

    @property
    def delta_x(self) -> float:
        return 2.0 * (math.factorial(self.q) * self.gamma / (2.0 * self.lam)) ** (1.0 / self.beta)

    @property
    def delta_y(self) -> float:
        return self.gamma / math.e

    @property
    def intervals(self) -> int:
        return robust_ceil(1.0 / self.delta_x)

    @property
    def partition(self) -> Partition:
        return Partition(self.delta_x, self.intervals, 4)

    def grid_step(self, m: int) -> float:
        return self.delta_y / 2 ** m

    def grid_size(self, m: int) -> int:
        return robust_ceil(2 ** (m + 1) * self.b / self.delta_y) + 1

    def y_grid(self, m: int) -> np.ndarray:
        """Coefficient grid ``-b + j * delta_y / 2^m``."""
        return -self.b + self.grid_step(m) * np.arange(self.grid_size(m))


@dataclass(frozen=True)
class ClippedPolynomial:
    """``x -> clip(sum_i a_i/i! (x - center)^i, clip_bound)``."""

    center: float
    coefficients: tuple
    clip_bound: float

    def raw(self, x):
        u = np.asarray(x, dtype=float) - self.center
        q = len(self.coefficients) - 1
        acc = np.zeros_like(u) + self.coefficients[q] / math.factorial(q)
        for i in range(q - 1, -1, -1):
            acc = acc * u + self.coefficients[i] / math.factorial(i)
        return acc

    def __call__(self, x):
        return clip(self.raw(x), self.clip_bound)


def taylor_project_holder(derivatives, config: HolderNetConfig, m: int,
                          center: float) -> ClippedPolynomial:
    """Round each derivative value to the level-``m`` grid (ties down) and clip at ``b``."""
    step = config.grid_step(m)
    size = config.grid_size(m)
    coeffs = tuple(float(-config.b + step * nearest_index(d, -config.b, step, size))
                   for d in derivatives)
    return ClippedPolynomial(float(center), coeffs, config.b)


def q_increment(p_m: ClippedPolynomial, p_prev: ClippedPolynomial,
                gamma: float, m: int):
    cap = 3.0 * gamma / 2 ** m

    def increment(x):
        return clip(p_m(x) - p_prev(x), cap)

    return increment


def holder_chain(f, config: HolderNetConfig, levels: int):
    """Compose the nested chain ``P0 + sum_m clip(P^m - P^(m-1), 3 gamma/2^m)``.

    ``f`` must expose ``derivative(i, x)``. Returns a vectorised callable and
    the largest increment magnitude actually used.
    """
    part = config.partition
    q = config.q

    def coeff_table(m, centers):
        step = config.grid_step(m)
        size = config.grid_size(m)
        cols = []
        for i in range(q + 1):
            d = np.asarray(f.derivative(i, centers), dtype=float)
            cols.append(-config.b + step * nearest_index(d, -config.b, step, size))
        return np.stack(cols, axis=-1)

    a_idx = np.arange(1, part.count + 1)
    tables = [(part.interval_center(a_idx), coeff_table(0, part.interval_center(a_idx)))]
    for m in range(1, levels + 1):
        k = 4 ** m
        centers = part.cell_center(a_idx[:, None], m, np.arange(1, k + 1)[None, :])
        tables.append((centers, coeff_table(m, centers)))

    def eval_level(m, xs):
        a, n = part.cell_indices(xs, m)
        centers, coeffs = tables[m]
        if m == 0:
            c, co = centers[a - 1], coeffs[a - 1]
        else:
            c, co = centers[a - 1, n - 1], coeffs[a - 1, n - 1]
        u = xs - c
        acc = co[..., q] / math.factorial(q)
        for i in range(q - 1, -1, -1):
            acc = acc * u + co[..., i] / math.factorial(i)
        return np.clip(acc, -config.b, config.b)

    used = {"max_ratio": 0.0}

    def chained(x):
        xs = np.asarray(x, dtype=float)
        prev = eval_level(0, xs)
        out = prev.copy()
        for m in range(1, levels + 1):
            cur = eval_level(m, xs)
            cap = 3.0 * config.gamma / 2 ** m
            diff = cur - prev
            if diff.size:
                used["max_ratio"] = max(used["max_ratio"], float(np.max(np.abs(diff))) / cap)
            out = out + np.clip(diff, -cap, cap)
            prev = cur
        return out

    return chained, used


def holder_chain_error(f, config: HolderNetConfig, levels: int) -> float:
    chained, _ = holder_chain(f, config, levels)
    probes = probe_grid(config.intervals, levels, 4)
    return float(np.max(np.abs(np.asarray(f(probes)) - chained(probes))))


# ----------------------------------------------------- explicit finite nets

class TabulatedFunction:
    """Function on a finite set of input points given by its table of values."""

    def __init__(self, points, values):
        order = np.argsort(points)
        self.points = np.asarray(points, dtype=float)[order]
        self.values = np.asarray(values, dtype=float)[order]

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        i = np.searchsorted(self.points, x)
        i = np.clip(i, 0, self.points.size - 1)
        if np.any(self.points[i] != x):
            raise DomainError("point outside the tabulated domain")
        out = self.values[i]
        return float(out) if out.ndim == 0 else out

    def __repr__(self):
        return f"TabulatedFunction({self.values.tolist()})"


class DifferenceFunction:
    def __init__(self, f, g):
        self.f, self.g = f, g

    def __call__(self, x):
        return self.f(x) - self.g(x)


def zero_function(x):
    return np.zeros_like(np.asarray(x, dtype=float)) if np.ndim(x) else 0.0


class FiniteFunctionClass:
    def __init__(self, functions, sup_bound: float, labels=None):
        self.functions = list(functions)
        if not self.functions:
            raise ParameterError("a function class needs at least one member")
        self.sup_bound = float(sup_bound)
        self.labels = list(labels) if labels is not None else list(range(len(self.functions)))

    def __len__(self):
        return len(self.functions)

    def __getitem__(self, i):
        return self.functions[i]

    def evaluate(self, x) -> np.ndarray:
        """Values of every member at a scalar ``x`` (shape ``(N,)``) or at an
        array of points (shape ``(N, len(x))``)."""
        return np.array([f(x) for f in self.functions], dtype=float)

    def check_bound(self, probes, tol: float = BOUND_TOL) -> bool:
        return bool(np.all(np.abs(self.evaluate(np.asarray(probes))) <= self.sup_bound + tol))


def sup_distances(values: np.ndarray) -> np.ndarray:
    """Pairwise sup-norm distances between rows of a value table."""
    return np.max(np.abs(values[:, None, :] - values[None, :, :]), axis=2)


def greedy_proper_net(dist: np.ndarray, radius: float) -> list[int]:
    """Greedy set cover: repeatedly take the member covering most uncovered
    members (lowest index on ties). Returned indices are sorted."""
    covers = dist <= radius + BOUND_TOL
    uncovered = np.ones(dist.shape[0], dtype=bool)
    chosen = []
    while uncovered.any():
        gain = (covers & uncovered[None, :]).sum(axis=1)
        i = int(np.argmax(gain))
        chosen.append(i)
        uncovered &= ~covers[i]
    return sorted(chosen)


def minimal_proper_net_size(dist: np.ndarray, radius: float) -> int:
    """Exhaustive minimum cover size; only for tiny families."""
    from itertools import combinations
    n = dist.shape[0]
    covers = dist <= radius + BOUND_TOL
    for size in range(1, n + 1):
        for subset in combinations(range(n), size):
            if covers[list(subset)].any(axis=0).all():
                return size
    return n


@dataclass
class ExplicitNets:
    f0: FiniteFunctionClass
    increments: list
    net_indices: list          # member indices of the proper net at each scale
    projections: np.ndarray    # projections[k, i] = index of pi_k(member i)
    gamma: float

    @property
    def sizes(self) -> list[int]:
        return [len(self.f0)] + [len(g) for g in self.increments]


def build_explicit_nets(family: FiniteFunctionClass, probes, gamma: float,
                        k_max: int, cap: int = 4096) -> ExplicitNets:
    """Proper ``gamma/2^k`` nets of a finite family and their increment sets.

    ``pi_k(f)`` is the nearest member of the level-``k`` net with first-index
    tie breaking. Increment sets collect the distinct differences
    ``pi_k(f) - pi_(k-1)(f)`` over the family (distinct on the probe set).
    """
    if len(family) > cap:
        raise ResourceError(
            f"family of {len(family)} members exceeds enumeration cap {cap}")
    values = family.evaluate(np.asarray(probes, dtype=float))
    if values.ndim == 1:
        values = values[:, None]
    dist = sup_distances(values)
    nets, proj = [], []
    for k in range(k_max + 1):
        net = greedy_proper_net(dist, gamma / 2 ** k)
        nets.append(net)
        proj.append(np.array(net)[np.argmin(dist[:, net], axis=1)])
    proj = np.array(proj)

    f0 = FiniteFunctionClass([family[i] for i in nets[0]], family.sup_bound,
                             [family.labels[i] for i in nets[0]])
    increments = []
    for k in range(1, k_max + 1):
        seen = {}
        funcs, labels = [], []
        for i in range(len(family)):
            hi, lo = int(proj[k, i]), int(proj[k - 1, i])
            key = tuple(values[hi] - values[lo])
            if key in seen:
                continue
            seen[key] = True
            funcs.append(zero_function if hi == lo
                         else DifferenceFunction(family[hi], family[lo]))
            labels.append((hi, lo))
        increments.append(FiniteFunctionClass(funcs, 3 * gamma / 2 ** k, labels))
    return ExplicitNets(f0, increments, nets, proj, gamma)
