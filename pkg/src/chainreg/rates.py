"""Power-law fits ``R(T) ~ C T^p`` in log-log coordinates."""

from dataclasses import dataclass
import warnings

import numpy as np

from .errors import ParameterError


@dataclass(frozen=True)
class RateModel:
    exponent: float
    constant: float

    def __call__(self, t):
        return self.constant * np.asarray(t, dtype=float) ** self.exponent


def fit_rate(points) -> RateModel:
    """Least-squares fit of ``log R = log C + p log T``.

    Points with nonpositive ``T`` or ``R`` are dropped with a warning.
    """
    pts = [(float(t), float(r)) for t, r in points]
    kept = [(t, r) for t, r in pts if t > 0 and r > 0]
    if len(kept) < len(pts):
        warnings.warn(f"dropped {len(pts) - len(kept)} nonpositive points", stacklevel=2)
    if len(kept) < 2:
        raise ParameterError("need at least two positive points to fit a rate")
    lt = np.log([t for t, _ in kept])
    lr = np.log([r for _, r in kept])
    if np.ptp(lt) == 0:
        raise ParameterError("need at least two distinct horizons")
    slope, intercept = np.polyfit(lt, lr, 1)
    return RateModel(float(slope), float(np.exp(intercept)))


def median_by_horizon(rows) -> list[tuple[int, float]]:
    """Median regret per horizon from ``(T, regret)`` pairs, sorted by ``T``."""
    groups: dict[int, list[float]] = {}
    for t, r in rows:
        groups.setdefault(int(t), []).append(float(r))
    return [(t, float(np.median(v))) for t, v in sorted(groups.items())]
