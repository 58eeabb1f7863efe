"""Plain EWA over a piecewise-constant epsilon-net of the Lipschitz class.

The net is every function constant on the intervals of width ``eps`` with
values on the grid ``-B + j eps`` (clipped to [-B, B]). EWA over that product
class factorises: the mixture prediction at ``x`` only depends on the EWA run
over the grid values with the losses of rounds falling in the same interval,
so one small EWA per interval reproduces it exactly.
"""

import math

import numpy as np

from .ewa import EwaState
from .errors import ParameterError
from .nets import Partition, robust_ceil


class PiecewiseConstantEWA:
    def __init__(self, b: float, horizon: int, eps: float | None = None):
        if not b > 0 or horizon < 1:
            raise ParameterError("b must be > 0 and horizon >= 1")
        self.b = float(b)
        self.horizon = int(horizon)
        self.eps = b / math.sqrt(horizon) if eps is None else float(eps)
        self.grid = np.unique(np.clip(
            -b + self.eps * np.arange(robust_ceil(2 * b / self.eps) + 1), -b, b))
        self.partition = Partition(self.eps, robust_ceil(1.0 / self.eps), 2)
        self.eta = 1.0 / (8.0 * b ** 2)
        self.states: dict[int, EwaState] = {}
        self.touched_total = 0

    def predict(self, x: float) -> float:
        a, _ = self.partition.cell_index(x, 0)
        state = self.states.get(a)
        if state is None:
            return float(self.grid.mean())
        return float(state.weights() @ self.grid)

    def observe(self, x: float, y: float) -> None:
        a, _ = self.partition.cell_index(x, 0)
        state = self.states.setdefault(a, EwaState(self.grid.size, self.eta))
        state.observe((y - self.grid) ** 2)
        self.touched_total += self.grid.size

    def run(self, xs, ys):
        preds = np.empty(len(ys))
        for t, (x, y) in enumerate(zip(xs, ys)):
            preds[t] = self.predict(x)
            self.observe(x, y)
        return preds

    def regret_bound(self) -> float:
        """EWA regret ``8 B^2 A log J`` plus the net approximation ``T eps (4B + eps)``."""
        return (8.0 * self.b ** 2 * self.partition.count * math.log(self.grid.size)
                + self.horizon * self.eps * (4.0 * self.b + self.eps))
