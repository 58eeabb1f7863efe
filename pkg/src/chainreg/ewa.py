"""Exponentially weighted average aggregation over a finite set of experts.

Only the weights live here; callers form the mixture of whatever the experts
predict.
"""

import numpy as np

from .errors import DimensionError, ParameterError
from .simplex import gibbs_weights


class EwaState:
    def __init__(self, n: int, eta: float):
        if n < 1:
            raise DimensionError(f"need at least one expert, got {n}")
        if not eta > 0:
            raise ParameterError(f"eta must be > 0, got {eta}")
        self.eta = float(eta)
        self.cumulative_losses = np.zeros(n)
        self.rounds_seen = 0

    @property
    def n(self) -> int:
        return self.cumulative_losses.size

    def weights(self) -> np.ndarray:
        return gibbs_weights(self.cumulative_losses, self.eta)

    def observe(self, losses) -> None:
        losses = np.asarray(losses, dtype=float)
        if losses.shape != self.cumulative_losses.shape:
            raise DimensionError(
                f"expected {self.n} losses, got shape {losses.shape}")
        if not np.all(np.isfinite(losses)):
            raise ValueError("losses must be finite")
        self.cumulative_losses += losses
        self.rounds_seen += 1

    def copy(self) -> "EwaState":
        other = EwaState(self.n, self.eta)
        other.cumulative_losses = self.cumulative_losses.copy()
        other.rounds_seen = self.rounds_seen
        return other


def square_loss_expconcave_eta(b: float, range_factor: int) -> float:
    """Learning rate ``1 / (2 (range_factor * b)^2)``.

    The square loss ``(y - z)^2`` is exp-concave with this rate whenever
    ``|y - z| <= range_factor * b``. Factor 5 covers predictions in
    ``[-4b, 4b]`` against ``|y| <= b``; factor 4 covers ``[-3b, 3b]``.
    """
    if range_factor not in (4, 5):
        raise ParameterError(f"range_factor must be 4 or 5, got {range_factor}")
    if not b > 0:
        raise ParameterError(f"b must be > 0, got {b}")
    return 1.0 / (2.0 * (range_factor * b) ** 2)
