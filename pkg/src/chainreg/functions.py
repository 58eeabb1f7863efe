"""Random functions with regularity guaranteed by construction.

Used by the sequence generators and by the net-certification tests.
"""

import math

import numpy as np

from .errors import ParameterError


class PiecewiseLinear:
    """Continuous piecewise-linear function on [0, 1], clipped to ``[-b, b]``.

    Knot slopes lie in ``[-lip, lip]`` so the function is ``lip``-Lipschitz;
    clipping preserves that.
    """

    def __init__(self, knots, values, b: float):
        self.knots = np.asarray(knots, dtype=float)
        self.values = np.asarray(values, dtype=float)
        self.b = float(b)

    @classmethod
    def random(cls, rng, b: float = 1.0, lip: float = 1.0, pieces: int = 8):
        inner = np.sort(rng.random(pieces - 1))
        knots = np.concatenate([[0.0], inner, [1.0]])
        slopes = lip * (2.0 * rng.random(pieces) - 1.0)
        start = b * (2.0 * rng.random() - 1.0)
        values = start + np.concatenate([[0.0], np.cumsum(slopes * np.diff(knots))])
        return cls(knots, values, b)

    def __call__(self, x):
        out = np.clip(np.interp(x, self.knots, self.values), -self.b, self.b)
        return float(out) if np.ndim(out) == 0 else out

    def derivative(self, i: int, x):
        if i != 0:
            raise ParameterError("only the 0th derivative is available")
        return self(x)


class HolderFunction:
    """``f`` with ``f^(q)(x) = lam * sum_i w_i s_i |x - c_i|^alpha`` plus a
    degree-``q`` polynomial, scaled so every derivative of order ``<= q`` is
    bounded by ``b``.

    ``||x-c|^alpha - |y-c|^alpha| <= |x-y|^alpha`` for ``alpha`` in (0, 1], and
    ``sum |w_i| <= 1``, so ``f^(q)`` is (alpha, lam)-Hoelder; shrinking by a
    factor <= 1 keeps that. The k-th antiderivative of ``|x-c|^alpha`` is
    ``sign(x-c)^k |x-c|^(alpha+k) / prod_{i<=k}(alpha+i)``.
    """

    SUP_PROBES = 4097
    SAFETY = 0.999

    def __init__(self, q, alpha, lam, b, centers, weights, poly, scale=1.0):
        self.q, self.alpha, self.lam, self.b = int(q), float(alpha), float(lam), float(b)
        self.centers = np.asarray(centers, dtype=float)
        self.weights = np.asarray(weights, dtype=float)
        self.poly = np.asarray(poly, dtype=float)  # Taylor coefficients at 0
        self.scale = float(scale)

    @classmethod
    def random(cls, rng, q: int, alpha: float, lam: float, b: float = 1.0,
               bumps: int = 4):
        centers = rng.random(bumps)
        w = 2.0 * rng.random(bumps) - 1.0
        w /= max(1.0, np.abs(w).sum())
        poly = b * (2.0 * rng.random(q + 1) - 1.0) / 2.0
        f = cls(q, alpha, lam, b, centers, w, poly)
        xs = np.linspace(0.0, 1.0, cls.SUP_PROBES)
        sup = max(np.max(np.abs(f.derivative(i, xs))) for i in range(q + 1))
        f.scale = min(1.0, cls.SAFETY * b / sup) if sup > 0 else 1.0
        return f

    def derivative(self, i: int, x):
        if not 0 <= i <= self.q:
            raise ParameterError(f"derivative order must be in [0, {self.q}]")
        x = np.asarray(x, dtype=float)
        k = self.q - i  # number of antiderivatives applied to f^(q)
        d = x[..., None] - self.centers
        denom = math.prod(self.alpha + j for j in range(1, k + 1))
        bumps = np.sign(d) ** k * np.abs(d) ** (self.alpha + k) / denom
        out = self.lam * (bumps @ self.weights)
        # derivative i of sum_j poly_j x^j / j!
        for j in range(i, self.q + 1):
            out = out + self.poly[j] * x ** (j - i) / math.factorial(j - i)
        out = self.scale * out
        return float(out) if out.ndim == 0 else out

    def __call__(self, x):
        return self.derivative(0, x)
