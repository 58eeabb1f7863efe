"""Multi-variable Exponentiated Gradient over a product of simplices.

Each block ``k`` holds a point of the simplex of size ``N_k``. The learner is
fed the partial gradients of a jointly convex loss at the point it played and
replays ``gibbs_weights(sum of past partial gradients, eta_k)`` per block.

Two learning-rate modes:

* fixed: ``eta_k`` constant, tuned as ``sqrt(2 log N_k / T) / G_k`` for a known
  horizon ``T``;
* adaptive: ``eta_k = sqrt(log N_k / (1 + T_k)) / G_k`` where ``T_k`` counts the
  rounds on which block ``k`` received a nonzero gradient.

Weights are always recomputed from the stored cumulative gradients, so a
change of ``eta_k`` between rounds is applied exactly.
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import DimensionError, ParameterError
from .simplex import gibbs_weights


@dataclass(frozen=True)
class BlockSpec:
    size: int
    gradient_bound: float
    eta: float | None = None  # None selects the adaptive rate

    def __post_init__(self):
        if self.size < 1:
            raise ParameterError(f"block size must be >= 1, got {self.size}")
        if not self.gradient_bound > 0:
            raise ParameterError(
                f"gradient bound must be > 0, got {self.gradient_bound}")
        if self.eta is not None and self.eta < 0:
            raise ParameterError(f"eta must be >= 0, got {self.eta}")

    @property
    def adaptive(self) -> bool:
        return self.eta is None


def fixed_eta(n: int, horizon: int, g: float) -> float:
    return math.sqrt(2.0 * math.log(n) / horizon) / g


def adaptive_eta(n: int, active_rounds: int, g: float) -> float:
    return math.sqrt(math.log(n) / (1.0 + active_rounds)) / g


class MultivarEG:
    def __init__(self, specs):
        specs = list(specs)
        if not specs:
            raise ParameterError("at least one block is required")
        self.specs = specs
        self.cumulative_gradients = [np.zeros(s.size) for s in specs]
        self.active_rounds = [0] * len(specs)
        # diagnostic only: bound violations are recorded, never rejected
        self.max_gradient_norm = [0.0] * len(specs)
        self.rounds = 0

    @classmethod
    def tuned(cls, sizes, gradient_bounds, horizon: int) -> "MultivarEG":
        """Fixed-rate learner with the known-horizon tuning."""
        return cls([BlockSpec(n, g, fixed_eta(n, horizon, g))
                    for n, g in zip(sizes, gradient_bounds)])

    @classmethod
    def adaptive(cls, sizes, gradient_bounds) -> "MultivarEG":
        return cls([BlockSpec(n, g) for n, g in zip(sizes, gradient_bounds)])

    def etas(self) -> list[float]:
        out = []
        for spec, active in zip(self.specs, self.active_rounds):
            if spec.adaptive:
                out.append(adaptive_eta(spec.size, active, spec.gradient_bound))
            else:
                out.append(spec.eta)
        return out

    def weights(self) -> list[np.ndarray]:
        return [gibbs_weights(s, eta)
                for s, eta in zip(self.cumulative_gradients, self.etas())]

    def observe(self, gradients) -> None:
        gradients = [np.asarray(g, dtype=float) for g in gradients]
        if len(gradients) != len(self.specs):
            raise DimensionError(
                f"expected {len(self.specs)} blocks, got {len(gradients)}")
        for k, g in enumerate(gradients):
            if g.shape != (self.specs[k].size,):
                raise DimensionError(
                    f"block {k}: expected shape ({self.specs[k].size},), "
                    f"got {g.shape}")
            if not np.all(np.isfinite(g)):
                raise ValueError(f"block {k}: non-finite gradient")
        for k, g in enumerate(gradients):
            norm = float(np.max(np.abs(g)))
            if norm > 0:
                self.active_rounds[k] += 1
                self.cumulative_gradients[k] += g
            self.max_gradient_norm[k] = max(self.max_gradient_norm[k], norm)
        self.rounds += 1


def meg_regret_bound(specs, horizon: int) -> float:
    """``sqrt(2 T) * sum_k G_k sqrt(log N_k)`` (fixed, known-horizon tuning)."""
    return math.sqrt(2.0 * horizon) * sum(
        s.gradient_bound * math.sqrt(math.log(s.size)) for s in specs)


def adaptive_regret_bound(specs, active_counts) -> float:
    """``2 * sum_k G_k sqrt(T_k log N_k)`` with ``T_k`` the active-round counts."""
    return 2.0 * sum(
        s.gradient_bound * math.sqrt(t * math.log(s.size))
        for s, t in zip(specs, active_counts))
