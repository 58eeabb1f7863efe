"""Deterministic sequence generators.

All randomness comes from numpy's PCG64 bit generator (64-bit-output
permuted congruential generator, 128-bit state) seeded with the given integer,
and only through ``Generator.random`` (uniform doubles in [0, 1)), so streams
are reproducible across platforms and numpy versions that keep PCG64 stable.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .functions import HolderFunction, PiecewiseLinear
from .oracle import RoundData

KINDS = ("lipschitz_signal_plus_noise", "adversarial_bits", "holder_signal", "constant")


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


@dataclass
class GeneratorSpec:
    kind: str
    seed: int = 0
    noise: float = 0.5          # noise amplitude as a fraction of B
    pieces: int = 8             # linear pieces of the Lipschitz target
    value: float = 0.0          # for kind == "constant"
    q: int = 0
    alpha: float = 1.0
    lam: float = 1.0
    domain_size: int | None = None  # snap inputs to an equispaced finite grid

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"unknown generator kind {self.kind!r}; expected one of {KINDS}")


def _inputs(rng, t, domain_size):
    u = rng.random(t)
    if domain_size is None:
        return u
    idx = np.minimum(np.floor(u * domain_size).astype(int), domain_size - 1)
    return domain_points(domain_size)[idx]


def domain_points(domain_size: int) -> np.ndarray:
    return np.linspace(0.0, 1.0, domain_size)


def generate_sequence(spec: GeneratorSpec, t: int, b: float) -> tuple[RoundData, object]:
    """Return the rounds and the noiseless target (``None`` when there is none)."""
    rng = make_rng(spec.seed)
    if spec.kind == "constant":
        if abs(spec.value) > b:
            raise ParameterError(f"constant {spec.value} outside [-{b}, {b}]")
        xs = _inputs(rng, t, spec.domain_size)
        return RoundData(xs, np.full(t, float(spec.value))), None
    if spec.kind == "adversarial_bits":
        xs = _inputs(rng, t, spec.domain_size)
        ys = np.where(rng.random(t) < 0.5, -b, b)
        return RoundData(xs, ys), None
    if spec.kind == "lipschitz_signal_plus_noise":
        target = PiecewiseLinear.random(rng, b=b, lip=1.0, pieces=spec.pieces)
    else:
        target = HolderFunction.random(rng, spec.q, spec.alpha, spec.lam, b=b)
    xs = _inputs(rng, t, spec.domain_size)
    noise = spec.noise * b * (2.0 * rng.random(t) - 1.0)
    ys = np.clip(target(xs) + noise, -b, b)
    return RoundData(xs, ys), target
