"""Nested chaining forecaster for Hoelder classes on [0, 1].

Each base interval of width ``delta_x`` runs its own forecaster. Experts are
the clipped Taylor polynomials with coefficients on ``Y^(0)`` centred at the
interval midpoint; at level ``m`` (4-ary refinement) every visited cell holds,
per expert, adaptive-EG weights over the increment set ``Q^(m)``: the clipped
differences ``[P - P']_{3 gamma / 2^m}`` between a level-``m`` polynomial on the
cell and a level-``(m-1)`` polynomial on its parent.

An increment set depends on the cell only through the child position of the
cell inside its parent, so the sets are enumerated once per (level, child
position) and shared.
"""

from dataclasses import dataclass
from itertools import product
import math
import warnings

import numpy as np

from .errors import ParameterError, ResourceError
from .ewa import EwaState
from .meg import adaptive_eta
from .nets import HolderNetConfig, robust_ceil
from .simplex import gibbs_rows

DEFAULT_Q_SET_CAP = 200_000
DEFAULT_ENUMERATION_LIMIT = 5_000_000
DEDUPE_DIGITS = 12


def horner(coeffs: np.ndarray, u):
    """Evaluate ``sum_i c_i / i! u^i`` for each row of ``coeffs``."""
    q = coeffs.shape[-1] - 1
    acc = coeffs[..., q] / math.factorial(q)
    for i in range(q - 1, -1, -1):
        acc = acc * u + coeffs[..., i] / math.factorial(i)
    return acc


@dataclass
class HolderForecasterConfig:
    q: int
    alpha: float
    lam: float
    b: float
    horizon: int
    q_set_cap: int = DEFAULT_Q_SET_CAP
    enumeration_limit: int = DEFAULT_ENUMERATION_LIMIT
    gamma: float | None = None  # None selects B T^(-beta/(2 beta + 1))

    def __post_init__(self):
        if self.horizon < 2:
            raise ParameterError(f"horizon must be >= 2, got {self.horizon}")
        if self.gamma is None:
            beta = self.q + self.alpha
            self.gamma = self.b * self.horizon ** (-beta / (2 * beta + 1))
        self.net = HolderNetConfig(self.q, self.alpha, self.lam, self.b, self.gamma)

    @property
    def levels(self) -> int:
        return max(0, robust_ceil(math.log2(self.gamma * self.horizon / self.b)))

    @property
    def ewa_eta(self) -> float:
        return 1.0 / (50.0 * self.b ** 2)

    def level_gradient_bound(self, m: int) -> float:
        return 30.0 * self.b * self.gamma / 2 ** m


def theoremC_bound(config: HolderForecasterConfig) -> float:
    """Explicit regret bound of the nested forecaster.

    ``50 B^2 (q+1) A log|Y0| + 4 B^2 + B^2/T + 60 B gamma M sqrt(2 (q+1) log(4eT+1) T A)``
    with ``A = ceil(1/delta_x)`` intervals and ``|Y0| = ceil(2eB/gamma) + 1``.
    With ``A = 1/delta_x = (q! gamma / 2 lam)^(-1/beta) / 2`` and an integer
    ``2eB/gamma`` this is the usual closed form.
    """
    net = config.net
    b, t, q = config.b, config.horizon, config.q
    a = net.intervals
    return (50.0 * b ** 2 * (q + 1) * a * math.log(net.grid_size(0))
            + 4.0 * b ** 2 + b ** 2 / t
            + 60.0 * b * config.gamma * config.levels
            * math.sqrt(2.0 * (q + 1) * math.log(4.0 * math.e * t + 1.0) * t * a))


class QSet:
    """Members ``u -> [[P(u)]_B - [P'(u + offset)]_B]_cap`` of one increment set,
    with ``u = x - (cell centre)`` and ``offset = (cell centre) - (parent centre)``."""

    def __init__(self, hi, lo, offset, cap, b, constants=None):
        self.hi = hi
        self.lo = lo
        self.offset = offset
        self.cap = cap
        self.b = b
        self.constants = constants

    def __len__(self):
        return len(self.constants) if self.constants is not None else len(self.hi)

    def values(self, u) -> np.ndarray:
        if self.constants is not None:
            return self.constants
        p = np.clip(horner(self.hi, u), -self.b, self.b)
        p_prev = np.clip(horner(self.lo, u + self.offset), -self.b, self.b)
        return np.clip(p - p_prev, -self.cap, self.cap)


def _clipped_grid(net: HolderNetConfig, m: int) -> np.ndarray:
    return np.unique(np.clip(net.y_grid(m), -net.b, net.b))


def enumerate_constant_qset(net: HolderNetConfig, m: int) -> QSet:
    """q = 0: increments are constants ``clip(v - v', cap)``."""
    cap = 3.0 * net.gamma / 2 ** m
    hi = _clipped_grid(net, m)
    lo = _clipped_grid(net, m - 1)
    out = set()
    left = np.searchsorted(hi, lo - cap, side="left")
    right = np.searchsorted(hi, lo + cap, side="right")
    for v, i, j in zip(lo, left, right):
        d = np.clip(hi[i:j] - v, -cap, cap)
        out.update(np.round(d, DEDUPE_DIGITS).tolist())
        if i > 0:
            out.add(round(-cap, DEDUPE_DIGITS))
        if j < hi.size:
            out.add(round(cap, DEDUPE_DIGITS))
    consts = np.array(sorted(out))
    return QSet(None, None, 0.0, cap, net.b, constants=consts)


def enumerate_polynomial_qset(net: HolderNetConfig, m: int, child: int,
                              limit: int) -> QSet:
    """q >= 1: all pairs of grid polynomials, deduplicated by their values on a
    probe set of the cell (rounded to ``DEDUPE_DIGITS`` decimals)."""
    q = net.q
    cap = 3.0 * net.gamma / 2 ** m
    width = net.delta_x / 4 ** m
    offset = (child - 1.5) * width
    hi_grid, lo_grid = net.y_grid(m), net.y_grid(m - 1)
    n_pairs = hi_grid.size ** (q + 1) * lo_grid.size ** (q + 1)
    if n_pairs > limit:
        raise ResourceError(
            f"level {m} increment enumeration needs {n_pairs} polynomial pairs "
            f"(limit {limit})")
    hi = np.array(list(product(hi_grid, repeat=q + 1)))
    lo = np.array(list(product(lo_grid, repeat=q + 1)))
    probes = np.linspace(-width / 2, width / 2, 8 * (q + 1) + 1)
    hi_vals = np.clip(horner(hi[:, None, :], probes[None, :]), -net.b, net.b)
    lo_vals = np.clip(horner(lo[:, None, :], probes[None, :] + offset), -net.b, net.b)
    seen = {}
    scale = 10.0 ** DEDUPE_DIGITS
    for j in range(lo.shape[0]):
        diff = np.clip(hi_vals - lo_vals[j], -cap, cap)
        keys = np.round(diff * scale).astype(np.int64)
        _, first = np.unique(keys, axis=0, return_index=True)
        for i in np.sort(first):
            k = keys[i].tobytes()
            if k not in seen:
                seen[k] = (i, j)
    pairs = sorted(seen.values(), key=lambda p: (p[1], p[0]))
    hi_idx = np.array([p[0] for p in pairs])
    lo_idx = np.array([p[1] for p in pairs])
    return QSet(hi[hi_idx], lo[lo_idx], offset, cap, net.b)


class HolderIntervalState:
    def __init__(self, interval_index: int, n_experts: int, eta: float):
        self.interval_index = interval_index
        self.local_time = 0
        self.ewa = EwaState(n_experts, eta)
        self.cell_counts = {}
        self.cell_sums = {}  # (m, n) -> cumulative gradient matrix (experts x |Q|)


class HolderForecaster:
    def __init__(self, config: HolderForecasterConfig):
        self.config = config
        net = config.net
        self.net = net
        self.partition = net.partition
        y0 = net.y_grid(0)
        self.p0 = np.array(list(product(y0, repeat=net.q + 1)))
        self.qsets = {}
        for m in range(1, config.levels + 1):
            if net.q == 0:
                qs = enumerate_constant_qset(net, m)
                sets = [qs] * 4
            else:
                sets = [enumerate_polynomial_qset(net, m, k, config.enumeration_limit)
                        for k in range(4)]
            for k, qs in enumerate(sets):
                if len(qs) > config.q_set_cap:
                    raise ResourceError(
                        f"increment set at level {m} has {len(qs)} members "
                        f"(cap {config.q_set_cap})")
                self.qsets[m, k] = qs
        self.states: dict[int, HolderIntervalState] = {}
        self.max_gradient_norm = [0.0] * config.levels
        self.max_abs_intermediate = 0.0
        self.last_touched = 0
        self.touched_total = 0
        self.max_touched = 0
        self.rounds = 0
        self._pending = None

    @property
    def n_experts(self) -> int:
        return self.p0.shape[0]

    def qset_sizes(self) -> dict:
        return {key: len(qs) for key, qs in self.qsets.items()}

    def _experts(self, x):
        cfg, part = self.config, self.partition
        a, path = part.path(x, cfg.levels)
        state = self.states.get(a)
        center0 = float(part.interval_center(a))
        fhat = np.clip(horner(self.p0, x - center0), -cfg.b, cfg.b)
        cells = []
        for m, n in enumerate(path, start=1):
            qs = self.qsets[m, (n - 1) % 4]
            u = x - float(part.cell_center(a, m, n))
            qv = qs.values(u)
            key = (m, n)
            if state is not None and key in state.cell_sums:
                count = state.cell_counts[key]
                eta = adaptive_eta(len(qs), count, cfg.level_gradient_bound(m))
                w = gibbs_rows(state.cell_sums[key], eta)
                fhat = fhat + w @ qv
            else:
                fhat = fhat + qv.mean()
            cells.append((key, qv))
        return a, cells, state, fhat

    def intermediate_predictions(self, x) -> np.ndarray:
        return self._experts(x)[3]

    def predict(self, x: float) -> float:
        a, cells, state, fhat = self._experts(x)
        self._pending = (x, a, cells, fhat)
        self.max_abs_intermediate = max(self.max_abs_intermediate, float(np.max(np.abs(fhat))))
        if state is None:
            return float(fhat.mean())
        return float(state.ewa.weights() @ fhat)

    def observe(self, x: float, y: float) -> None:
        cfg = self.config
        if abs(y) > cfg.b:
            warnings.warn(f"|y|={abs(y)} exceeds B={cfg.b}; clamped", stacklevel=2)
            y = min(cfg.b, max(-cfg.b, y))
        if self._pending is not None and self._pending[0] == x:
            _, a, cells, fhat = self._pending
        else:
            a, cells, _, fhat = self._experts(x)
        self._pending = None
        state = self.states.get(a)
        if state is None:
            state = HolderIntervalState(a, self.n_experts, cfg.ewa_eta)
            self.states[a] = state
        r = y - fhat
        touched = self.n_experts
        for i, (key, qv) in enumerate(cells):
            grad = np.outer(-2.0 * r, qv)
            if key in state.cell_sums:
                state.cell_sums[key] += grad
            else:
                state.cell_sums[key] = grad
            state.cell_counts[key] = state.cell_counts.get(key, 0) + 1
            self.max_gradient_norm[i] = max(self.max_gradient_norm[i], float(np.max(np.abs(grad))))
            touched += grad.size
        state.ewa.observe(r ** 2)
        state.local_time += 1
        self.last_touched = touched
        self.touched_total += touched
        self.max_touched = max(self.max_touched, touched)
        self.rounds += 1

    def run(self, xs, ys):
        preds = np.empty(len(ys))
        for t, (x, y) in enumerate(zip(xs, ys)):
            preds[t] = self.predict(x)
            self.observe(x, y)
        return preds
