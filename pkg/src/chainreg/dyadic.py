"""Dyadic chaining forecaster for bounded 1-Lipschitz functions on [0, 1].

[0, 1] is cut into ``ceil(1/gamma)`` intervals; each interval runs its own
forecaster on the rounds whose input falls inside it. Within an interval the
``J = ceil(2B/gamma) + 1`` experts start from the constants ``-B + j gamma`` and
add, at every level ``m = 1..M``, a correction ``(gamma / 2^(m-1)) (u2 - u1)``
whose two weights live on the level-``m`` cell containing ``x``. Those two-point
simplices are run by adaptive exponentiated gradient; an EWA mixes the ``J``
experts.

The gradient of the two weights is antisymmetric, so one scalar ``S`` per
(cell, expert) is stored: the weights are ``gibbs((S, -S), eta)`` and
``u2 - u1 = tanh(eta * S)``.
"""

from dataclasses import dataclass, field
import math
import warnings

import numpy as np

from .errors import ParameterError
from .ewa import EwaState
from .meg import adaptive_eta
from .nets import Partition, robust_ceil
from .simplex import gibbs_weights


@dataclass(frozen=True)
class DyadicConfig:
    b: float
    horizon: int

    def __post_init__(self):
        if not self.b > 0:
            raise ParameterError(f"b must be > 0, got {self.b}")
        if self.horizon < 2:
            raise ParameterError(f"horizon must be >= 2, got {self.horizon}")

    @property
    def gamma(self) -> float:
        return self.b * self.horizon ** (-1.0 / 3.0)

    @property
    def levels(self) -> int:
        return max(0, robust_ceil(math.log2(self.gamma * self.horizon / self.b)))

    @property
    def experts_per_interval(self) -> int:
        return robust_ceil(2.0 * self.b / self.gamma) + 1

    @property
    def intervals(self) -> int:
        return robust_ceil(1.0 / self.gamma)

    @property
    def ewa_eta(self) -> float:
        return 1.0 / (32.0 * self.b ** 2)

    @property
    def partition(self) -> Partition:
        return Partition(self.gamma, self.intervals, 2)

    def level_gradient_bound(self, m: int) -> float:
        return 16.0 * self.b * self.gamma / 2 ** m


@dataclass
class DyadicIntervalState:
    interval_index: int
    ewa: EwaState
    local_time: int = 0
    cell_counts: dict = field(default_factory=dict)
    cell_grad_sums: dict = field(default_factory=dict)

    def stored_scalars(self) -> int:
        return self.ewa.n * (1 + len(self.cell_grad_sums))


def cell_weights(s, eta: float) -> np.ndarray:
    """The two-point weights ``(u1, u2)`` of one cell and expert."""
    return gibbs_weights(np.array([s, -s]), eta)


def theorem3_bound(b: float, horizon: int) -> float:
    """Explicit regret bound of the dyadic forecaster.

    ``32 B^2 A log(J) + 32 B (1 + sqrt 2) gamma sqrt(T A log 2) + 2 B^2 + B^2 / (4T)``
    with ``A = ceil(1/gamma)`` intervals and ``J = ceil(2B/gamma) + 1`` experts.
    When ``1/gamma`` and ``2B/gamma`` are integers this is
    ``32 B^2/gamma log(2B/gamma + 1) + 32 B (1 + sqrt 2) sqrt(gamma T log 2) + ...``.
    """
    cfg = DyadicConfig(b, horizon)
    g, a, j = cfg.gamma, cfg.intervals, cfg.experts_per_interval
    return (32.0 * b ** 2 * a * math.log(j)
            + 32.0 * b * (1.0 + math.sqrt(2.0)) * g * math.sqrt(horizon * a * math.log(2.0))
            + 2.0 * b ** 2 + b ** 2 / (4.0 * horizon))


class DyadicForecaster:
    def __init__(self, b: float, horizon: int):
        self.config = DyadicConfig(b, horizon)
        cfg = self.config
        self.grid = -cfg.b + cfg.gamma * np.arange(cfg.experts_per_interval)
        self.states: dict[int, DyadicIntervalState] = {}
        m = np.arange(1, cfg.levels + 1)
        self._coef = cfg.gamma / 2.0 ** (m - 1)
        self._gbound = [cfg.level_gradient_bound(k) for k in m]
        self._zeros = np.zeros(cfg.experts_per_interval)
        self.max_gradient_norm = [0.0] * cfg.levels
        self.last_touched = 0
        self.touched_total = 0
        self.max_touched = 0
        self.rounds = 0
        self._pending = None

    def _experts(self, x):
        cfg = self.config
        a, path = cfg.partition.path(x, cfg.levels)
        state = self.states.get(a)
        keys = [(m, n) for m, n in enumerate(path, start=1)]
        if state is None or not keys:
            sums = np.zeros((len(keys), self.grid.size))
            counts = [0] * len(keys)
        else:
            sums = np.array([state.cell_grad_sums.get(k, self._zeros) for k in keys])
            counts = [state.cell_counts.get(k, 0) for k in keys]
        fhat = self.grid.copy()
        if keys:
            etas = np.array([adaptive_eta(2, c, g) for c, g in zip(counts, self._gbound)])
            fhat += self._coef @ np.tanh(etas[:, None] * sums)
        return a, keys, state, fhat

    def intermediate_predictions(self, x) -> np.ndarray:
        return self._experts(x)[3]

    def predict(self, x: float) -> float:
        a, keys, state, fhat = self._experts(x)
        self._pending = (x, a, keys, fhat)
        w = state.ewa.weights() if state is not None else None
        return float(fhat.mean()) if w is None else float(w @ fhat)

    def observe(self, x: float, y: float) -> None:
        cfg = self.config
        if abs(y) > cfg.b:
            warnings.warn(f"|y|={abs(y)} exceeds B={cfg.b}; clamped", stacklevel=2)
            y = min(cfg.b, max(-cfg.b, y))
        if self._pending is not None and self._pending[0] == x:
            _, a, keys, fhat = self._pending
        else:
            a, keys, _, fhat = self._experts(x)
        self._pending = None
        state = self.states.get(a)
        if state is None:
            state = DyadicIntervalState(a, EwaState(self.grid.size, cfg.ewa_eta))
            self.states[a] = state
        r = y - fhat
        r2max = 2.0 * float(np.max(np.abs(r)))
        for i, key in enumerate(keys):
            grad = 2.0 * r * self._coef[i]
            if key in state.cell_grad_sums:
                state.cell_grad_sums[key] += grad
            else:
                state.cell_grad_sums[key] = grad
            state.cell_counts[key] = state.cell_counts.get(key, 0) + 1
            # sup |2 r c| = 2 c sup |r| exactly for c > 0
            self.max_gradient_norm[i] = max(self.max_gradient_norm[i], float(r2max * self._coef[i]))
        state.ewa.observe(r ** 2)
        state.local_time += 1
        self.last_touched = self.grid.size * (len(keys) + 1)
        self.touched_total += self.last_touched
        self.max_touched = max(self.max_touched, self.last_touched)
        self.rounds += 1

    def run(self, xs, ys):
        preds = np.empty(len(ys))
        for t, (x, y) in enumerate(zip(xs, ys)):
            preds[t] = self.predict(x)
            self.observe(x, y)
        return preds
