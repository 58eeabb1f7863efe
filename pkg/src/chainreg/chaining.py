"""Chaining Exponentially Weighted Average forecaster over explicit nets.

High scale: EWA over the ``N_0`` members of the coarse net. Low scale: for every
coarse member ``j`` a multi-variable EG learner over the increment nets, so the
``j``-th intermediate predictor is

    f_j(x) = f0_j(x) + sum_k sum_i u^(j,k)_i g^(k)_i(x).

Each round computes every ``f_j(x_t)`` once, then applies the low-scale update
(gradients ``-2 (y - f_j) g^(k)_i``) and the high-scale update (losses
``(y - f_j)^2``), both from those round-``t`` values.
"""

from dataclasses import dataclass, field
import math
import warnings

import numpy as np

from .errors import ParameterError
from .ewa import EwaState
from .meg import BlockSpec, MultivarEG, fixed_eta
from .nets import FiniteFunctionClass, build_explicit_nets, robust_ceil


def chaining_levels(gamma: float, horizon: int, b: float) -> int:
    """``K = ceil(log2(gamma T / B))``."""
    return max(0, robust_ceil(math.log2(gamma * horizon / b)))


def level_gradient_bound(b: float, gamma: float, k: int) -> float:
    return 30.0 * b * gamma / 2 ** k


@dataclass
class ChainingConfig:
    b: float
    gamma: float
    horizon: int
    f0: FiniteFunctionClass
    increments: list = field(default_factory=list)
    eta0: float | None = None
    etas: list | None = None

    def __post_init__(self):
        if not self.b > 0:
            raise ParameterError(f"b must be > 0, got {self.b}")
        if self.horizon < 1:
            raise ParameterError(f"horizon must be >= 1, got {self.horizon}")
        lo = self.b / self.horizon
        if not lo < self.gamma <= self.b:
            clamped = min(max(self.gamma, lo * (1 + 1e-12)), self.b)
            warnings.warn(f"gamma={self.gamma} outside ({lo}, {self.b}]; "
                          f"clamped to {clamped}", stacklevel=2)
            self.gamma = clamped
        if self.eta0 is None:
            self.eta0 = 1.0 / (50.0 * self.b ** 2)
        if self.etas is None:
            self.etas = [fixed_eta(len(g), self.horizon, self.grad_bound(k))
                         for k, g in enumerate(self.increments, start=1)]
        if len(self.etas) != len(self.increments):
            raise ParameterError("one eta per increment level is required")

    @property
    def k_levels(self) -> int:
        return len(self.increments)

    @property
    def sizes(self) -> list[int]:
        return [len(self.f0)] + [len(g) for g in self.increments]

    def grad_bound(self, k: int) -> float:
        return level_gradient_bound(self.b, self.gamma, k)

    @classmethod
    def tuned(cls, family: FiniteFunctionClass, probes, b: float, gamma: float,
              horizon: int, cap: int = 4096) -> "ChainingConfig":
        """Nets built from ``family`` with ``K`` from the level formula."""
        k = chaining_levels(gamma, horizon, b)
        nets = build_explicit_nets(family, probes, gamma, k, cap=cap)
        return cls(b, gamma, horizon, nets.f0, nets.increments)


@dataclass(frozen=True)
class Theorem2Quantities:
    grad_bounds: tuple
    proof_bound: float


def theorem2_quantities(config: ChainingConfig) -> Theorem2Quantities:
    """Per-level gradient caps and the discrete regret bound

    ``sqrt(2T) sum_k (30 B gamma / 2^k) sqrt(log N_k) + 50 B^2 log N_0 + 4 B^2 + B^2 / T``.
    """
    b, t = config.b, config.horizon
    caps = tuple(config.grad_bound(k) for k in range(1, config.k_levels + 1))
    low = math.sqrt(2.0 * t) * sum(
        g * math.sqrt(math.log(len(inc))) for g, inc in zip(caps, config.increments))
    high = 50.0 * b ** 2 * math.log(len(config.f0))
    return Theorem2Quantities(caps, low + high + 4.0 * b ** 2 + b ** 2 / t)


class ChainingForecaster:
    def __init__(self, config: ChainingConfig):
        self.config = config
        self.high = EwaState(len(config.f0), config.eta0)
        specs = [BlockSpec(len(g), config.grad_bound(k), eta)
                 for k, (g, eta) in enumerate(zip(config.increments, config.etas), start=1)]
        self.low = [MultivarEG(specs) for _ in range(len(config.f0))] if specs else []
        self.max_abs_intermediate = 0.0
        self.max_abs_prediction = 0.0
        self.rounds = 0
        self._pending = None

    def _intermediate(self, x):
        f0_vals = self.config.f0.evaluate(x)
        g_vals = [inc.evaluate(x) for inc in self.config.increments]
        fhat = f0_vals.copy()
        for j, meg in enumerate(self.low):
            fhat[j] += sum(float(w @ g) for w, g in zip(meg.weights(), g_vals))
        return fhat, g_vals

    def intermediate_predictions(self, x) -> np.ndarray:
        return self._intermediate(x)[0]

    def predict(self, x) -> float:
        fhat, g_vals = self._intermediate(x)
        self._pending = (x, fhat, g_vals)
        y_hat = float(self.high.weights() @ fhat)
        self.max_abs_intermediate = max(self.max_abs_intermediate, float(np.max(np.abs(fhat))))
        self.max_abs_prediction = max(self.max_abs_prediction, abs(y_hat))
        return y_hat

    def observe(self, x, y: float) -> None:
        b = self.config.b
        if abs(y) > b:
            warnings.warn(f"|y|={abs(y)} exceeds B={b}; clamped", stacklevel=2)
            y = min(b, max(-b, y))
        if self._pending is not None and self._pending[0] == x:
            _, fhat, g_vals = self._pending
        else:
            fhat, g_vals = self._intermediate(x)
        self._pending = None
        residual = y - fhat
        for j, meg in enumerate(self.low):
            meg.observe([-2.0 * residual[j] * g for g in g_vals])
        self.high.observe(residual ** 2)
        self.rounds += 1

    def max_gradient_norms(self) -> list[float]:
        """Largest observed low-scale gradient sup-norm per level."""
        if not self.low:
            return []
        return [max(meg.max_gradient_norm[k] for meg in self.low)
                for k in range(self.config.k_levels)]

    def run(self, xs, ys):
        preds = np.empty(len(ys))
        for t, (x, y) in enumerate(zip(xs, ys)):
            preds[t] = self.predict(x)
            self.observe(x, y)
        return preds
