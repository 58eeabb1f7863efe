"""End-to-end regret experiments: config, runs, traces and summaries."""

from dataclasses import asdict, dataclass, field, fields
import csv
import json
import math
from pathlib import Path

import numpy as np

from .baseline import PiecewiseConstantEWA
from .chaining import ChainingConfig, ChainingForecaster, theorem2_quantities
from .dyadic import DyadicForecaster, theorem3_bound
from .errors import ChainregError, ParameterError, ResourceError
from .generators import GeneratorSpec, domain_points, generate_sequence
from .holder import HolderForecaster, HolderForecasterConfig, theoremC_bound
from .nets import FiniteFunctionClass, TabulatedFunction
from .oracle import (best_chained_finite, best_lipschitz_dp,
                     best_lipschitz_exact, empirical_regret)

ALGORITHMS = ("chaining_ewa", "dyadic_lipschitz", "nested_holder", "ewa_baseline")
TRACE_COLUMNS = ("t", "x", "y", "prediction", "loss", "cum_loss")
SUMMARY_COLUMNS = ("T", "oracle_loss", "certified_gap", "regret",
                   "theoretical_bound", "touched_weights_total", "bound_ok")


def fmt(v) -> str:
    return format(float(v), ".17g")


@dataclass
class ClassParams:
    b: float = 1.0
    q: int = 0
    alpha: float = 1.0
    lam: float = 1.0
    # chaining_ewa family: clipped lines a + s (x - 1/2) on a finite domain
    family_offsets: int = 9
    family_slopes: int = 5
    q_set_cap: int = 200_000


@dataclass
class OracleSpec:
    kind: str = "exact"         # exact | dp | chained
    h: float | None = None      # absolute DP grid step
    h_factor: float = 0.125     # DP grid step as a multiple of gamma when h is unset
    cap: int = 1_000_000        # enumeration cap for the chained oracle


@dataclass
class ExperimentConfig:
    algorithm: str
    horizons: list
    generator: GeneratorSpec
    class_params: ClassParams = field(default_factory=ClassParams)
    oracle: OracleSpec = field(default_factory=OracleSpec)
    output_path: str = "results"

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ParameterError(f"unknown algorithm {self.algorithm!r}; expected one of {ALGORITHMS}")
        hs = list(self.horizons)
        if not hs or any(int(t) != t or t < 2 for t in hs):
            raise ParameterError("horizons must be integers >= 2")
        if any(b <= a for a, b in zip(hs, hs[1:])):
            raise ParameterError("horizons must be strictly increasing")
        self.horizons = [int(t) for t in hs]
        if self.oracle.kind not in ("exact", "dp", "chained"):
            raise ParameterError(f"unknown oracle kind {self.oracle.kind!r}")
        if (self.oracle.kind == "chained") != (self.algorithm == "chaining_ewa"):
            raise ParameterError("the chained oracle goes with chaining_ewa and only with it")


def _strict(cls, raw, where):
    if not isinstance(raw, dict):
        raise ParameterError(f"{where}: expected a mapping")
    names = {f.name for f in fields(cls)}
    unknown = sorted(set(raw) - names)
    if unknown:
        raise ParameterError(f"{where}: unknown keys {unknown}")
    return raw


def config_from_dict(raw: dict) -> ExperimentConfig:
    raw = dict(_strict(ExperimentConfig, raw, "config"))
    raw["generator"] = GeneratorSpec(**_strict(GeneratorSpec, raw.get("generator"), "generator"))
    if "class_params" in raw:
        raw["class_params"] = ClassParams(**_strict(ClassParams, raw["class_params"], "class_params"))
    if "oracle" in raw:
        raw["oracle"] = OracleSpec(**_strict(OracleSpec, raw["oracle"], "oracle"))
    return ExperimentConfig(**raw)


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        return config_from_dict(json.load(fh))


def config_to_dict(config: ExperimentConfig) -> dict:
    return asdict(config)


@dataclass
class RegretTrace:
    xs: np.ndarray
    ys: np.ndarray
    predictions: np.ndarray
    summary: dict

    @property
    def losses(self) -> np.ndarray:
        return (self.ys - self.predictions) ** 2

    @property
    def cum_losses(self) -> np.ndarray:
        return np.cumsum(self.losses)

    def rows(self):
        for t, (x, y, p, l, c) in enumerate(zip(self.xs, self.ys, self.predictions,
                                                 self.losses, self.cum_losses), start=1):
            yield t, x, y, p, l, c

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(TRACE_COLUMNS)
            for t, *vals in self.rows():
                w.writerow([t] + [fmt(v) for v in vals])


def read_trace_csv(path) -> dict:
    """Columns of a trace CSV as float arrays; checks the running loss sum."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    cols = {c: np.array([float(r[c]) for r in rows]) for c in TRACE_COLUMNS}
    if not np.allclose(np.cumsum(cols["loss"]), cols["cum_loss"], rtol=1e-12, atol=1e-9):
        raise ChainregError(f"{path}: cum_loss does not match the running loss sum")
    return cols


def lines_family(points, b: float, offsets: int, slopes: int) -> FiniteFunctionClass:
    """Clipped lines ``clip(a + s (x - 1/2), b)`` tabulated on ``points``."""
    funcs = []
    for a in np.linspace(-b, b, offsets):
        for s in np.linspace(-1.0, 1.0, slopes):
            funcs.append(TabulatedFunction(points, np.clip(a + s * (points - 0.5), -b, b)))
    return FiniteFunctionClass(funcs, b)


def _lipschitz_oracle(config, data, b, lip, gamma):
    spec = config.oracle
    if spec.kind == "exact":
        return best_lipschitz_exact(data, b, lip)
    h = spec.h if spec.h is not None else spec.h_factor * gamma
    return best_lipschitz_dp(data, b, lip, h)


def run_horizon(config: ExperimentConfig, t: int) -> RegretTrace:
    cp = config.class_params
    b = cp.b
    gen = config.generator
    if config.algorithm == "chaining_ewa" and gen.domain_size is None:
        gen = GeneratorSpec(**{**asdict(gen), "domain_size": 8})
    data, _ = generate_sequence(gen, t, b)

    if config.algorithm == "dyadic_lipschitz":
        fc = DyadicForecaster(b, t)
        preds = fc.run(data.xs, data.ys)
        oracle = _lipschitz_oracle(config, data, b, 1.0, fc.config.gamma)
        bound, touched = theorem3_bound(b, t), fc.touched_total
    elif config.algorithm == "nested_holder":
        hc = HolderForecasterConfig(cp.q, cp.alpha, cp.lam, b, t, q_set_cap=cp.q_set_cap)
        fc = HolderForecaster(hc)
        preds = fc.run(data.xs, data.ys)
        # a C^(q, alpha) function with |f'| <= B is B-Lipschitz; for q = 0,
        # alpha = 1 the class is exactly the lam-Lipschitz one
        lip = cp.lam if (cp.q == 0 and cp.alpha == 1.0) else b
        oracle = _lipschitz_oracle(config, data, b, lip, hc.gamma)
        bound, touched = theoremC_bound(hc), fc.touched_total
    elif config.algorithm == "ewa_baseline":
        fc = PiecewiseConstantEWA(b, t)
        preds = fc.run(data.xs, data.ys)
        oracle = _lipschitz_oracle(config, data, b, 1.0, b * t ** (-1.0 / 3.0))
        bound, touched = fc.regret_bound(), fc.touched_total
    else:
        pts = domain_points(gen.domain_size)
        family = lines_family(pts, b, cp.family_offsets, cp.family_slopes)
        cc = ChainingConfig.tuned(family, pts, b, b * t ** (-1.0 / 3.0), t)
        fc = ChainingForecaster(cc)
        preds = fc.run(data.xs, data.ys)
        oracle = best_chained_finite(cc.f0, cc.increments, data, cap=config.oracle.cap)
        bound = theorem2_quantities(cc).proof_bound
        sizes = cc.sizes
        touched = t * sizes[0] * (1 + sum(sizes[1:]))

    loss = float(((data.ys - preds) ** 2).sum())
    regret = empirical_regret(loss, oracle)
    summary = {
        "T": t,
        "oracle_loss": oracle.best_loss,
        "certified_gap": oracle.certified_gap,
        "regret": regret,
        "theoretical_bound": bound,
        "touched_weights_total": touched,
        "bound_ok": regret <= bound,
    }
    return RegretTrace(data.xs, data.ys, preds, summary)


def summary_block(summary: dict) -> str:
    out = []
    for k in SUMMARY_COLUMNS:
        v = summary[k]
        out.append(f"{k} = {v if isinstance(v, (bool, int, np.integer)) else fmt(v)}")
    return "\n".join(out)


def run_experiment(config: ExperimentConfig, write: bool = True) -> list[RegretTrace]:
    traces = []
    for t in config.horizons:
        try:
            traces.append(run_horizon(config, t))
        except ResourceError as exc:
            raise ResourceError(f"horizon T={t}: {exc}") from exc
    if write:
        write_outputs(config, traces)
    return traces


def write_outputs(config: ExperimentConfig, traces) -> Path:
    out = Path(config.output_path)
    out.mkdir(parents=True, exist_ok=True)
    for tr in traces:
        tr.write_csv(out / f"trace_T{tr.summary['T']}.csv")
    with open(out / "summary.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUMMARY_COLUMNS)
        for tr in traces:
            s = tr.summary
            w.writerow([s["T"]] + [fmt(s[k]) for k in SUMMARY_COLUMNS[1:-2]]
                       + [s["touched_weights_total"], s["bound_ok"]])
    with open(out / "summary.txt", "w") as fh:
        fh.write("\n\n".join(f"[T={tr.summary['T']}]\n{summary_block(tr.summary)}"
                             for tr in traces) + "\n")
    return out


def check_summary(trace_path, summary: dict) -> bool:
    """Recompute the regret of a written trace from its rows and the oracle fields."""
    cols = read_trace_csv(trace_path)
    regret = cols["cum_loss"][-1] - (summary["oracle_loss"] - summary["certified_gap"])
    return math.isclose(regret, summary["regret"], rel_tol=1e-9, abs_tol=1e-9)
