"""Acceptance criteria, one test each, at their stated tolerances.

Every test records a PASS/FAIL line (shown in the "acceptance criteria"
section of the pytest summary). The literal halving claim for the grid DP is
false as stated; it reports FAIL and is marked strict xfail, next to the
fixed-slack statement that is checked for real. See the README.
"""

import filecmp
import math
import pathlib
import time

import numpy as np
import pytest

from chainreg.chaining import ChainingConfig, ChainingForecaster, theorem2_quantities
from chainreg.dyadic import DyadicForecaster, theorem3_bound
from chainreg.ewa import EwaState
from chainreg.experiment import load_config, run_experiment
from chainreg.functions import HolderFunction, PiecewiseLinear
from chainreg.generators import GeneratorSpec, domain_points, generate_sequence, make_rng
from chainreg.holder import HolderForecaster, HolderForecasterConfig, theoremC_bound
from chainreg.meg import MultivarEG, adaptive_regret_bound, meg_regret_bound
from chainreg.nets import (FiniteFunctionClass, HolderNetConfig, LipschitzNetConfig,
                           TabulatedFunction, holder_chain, lipschitz_net_bound,
                           project_lipschitz, zero_function)
from chainreg.oracle import (RoundData, best_chained_finite, best_lipschitz_dp,
                             best_lipschitz_exact, dp_grid)
from chainreg.rates import fit_rate, median_by_horizon

from test_oracle import exhaustive

CONFIGS = pathlib.Path(__file__).resolve().parents[1] / "configs"


# -- 1, 2: multi-variable EG -------------------------------------------------

def quadratic_stream(seed, t, active=None):
    """Losses (y - a.u - b.v)^2 on two simplices; caps 1 and 2 hold by range."""
    rng = make_rng(seed)
    ys = rng.random(t) - 0.5
    a = 0.5 * rng.random((t, 4)) - 0.25
    b = rng.random((t, 8)) - 0.5
    if active is not None:
        a *= (rng.random(t) < active)[:, None]
        b *= (rng.random(t) < active)[:, None]
    return ys, a, b


def play_meg(meg, ys, a, b):
    loss = 0.0
    for y, at, bt in zip(ys, a, b):
        u, v = meg.weights()
        r = y - at @ u - bt @ v
        loss += r * r
        meg.observe([-2 * r * at, -2 * r * bt])
    best = (((ys[:, None, None] - a[:, :, None] - b[:, None, :]) ** 2).sum(axis=0)).min()
    return loss - best


def test_criterion_1_meg_fixed(report):
    t0 = time.perf_counter()
    worst = -math.inf
    for seed in range(50):
        meg = MultivarEG.tuned([4, 8], [1.0, 2.0], 1000)
        reg = play_meg(meg, *quadratic_stream(seed, 1000))
        assert meg.max_gradient_norm[0] <= 1.0 and meg.max_gradient_norm[1] <= 2.0
        worst = max(worst, reg / meg_regret_bound(meg.specs, 1000))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1.0 and elapsed < 5.0
    report("1 fixed MEG regret <= bound", ok, f"max regret/bound {worst:.3f}, {elapsed:.2f}s")
    assert ok


def test_criterion_2_meg_adaptive(report):
    worst = -math.inf
    for seed in range(50):
        meg = MultivarEG.adaptive([4, 8], [1.0, 2.0])
        reg = play_meg(meg, *quadratic_stream(1000 + seed, 1000, active=0.4))
        assert 250 <= min(meg.active_rounds) and max(meg.active_rounds) <= 550
        worst = max(worst, reg / adaptive_regret_bound(meg.specs, meg.active_rounds))
    ok = worst <= 1.0
    report("2 adaptive MEG regret <= bound on 40%-active streams", ok,
           f"max regret/bound {worst:.3f}")
    assert ok


# -- 3: nets -----------------------------------------------------------------

def test_criterion_3_nets(report):
    rng = make_rng(2024)
    cfg = LipschitzNetConfig(1.0, 0.25)
    fs = [PiecewiseLinear.random(rng) for _ in range(200)]
    # check=False so that a violation is measured rather than raised
    lip = {m: max(project_lipschitz(f, cfg, m, check=False)[1] for f in fs) / lipschitz_net_bound(0.25, m)
           for m in range(4)}
    rng = make_rng(77)
    hcfg = HolderNetConfig(0, 1.0, 1.0, 1.0, 0.25)
    probes = np.linspace(0, 1, 4097)
    hol, hol_excess = -math.inf, -math.inf
    for _ in range(50):
        f = HolderFunction.random(rng, 0, 1.0, 1.0)
        for m in range(4):
            chained, used = holder_chain(f, hcfg, m)
            err = float(np.max(np.abs(f(probes) - chained(probes))))
            hol = max(hol, err / (0.25 / 2 ** m))
            hol_excess = max(hol_excess, err - 0.25 / 2 ** m)
            assert used["max_ratio"] <= 1 + 1e-9
    lip_excess = max((r - 1) * lipschitz_net_bound(0.25, m) for m, r in lip.items())
    ok = lip_excess <= 1e-9 and hol_excess <= 1e-9
    report("3 Lipschitz net error <= gamma/2^(M+1); Holder chain error <= gamma/2^M", ok,
           "Lipschitz max error/bound by M: " + ", ".join(f"{m}:{r:.3f}" for m, r in lip.items())
           + f"; Holder max error/bound {hol:.3f}")
    assert ok


# -- 4: chaining EWA ---------------------------------------------------------

def chaining_setup():
    pts = domain_points(6)
    family = FiniteFunctionClass(
        [TabulatedFunction(pts, a + s * (pts - 0.5))
         for a in np.linspace(-0.875, 0.875, 8) for s in np.linspace(-0.03, 0.03, 9)], 1.0)
    return ChainingConfig.tuned(family, pts, 1.0, 0.016, 500)


def test_criterion_4_chaining(report):
    t0 = time.perf_counter()
    cc = chaining_setup()
    sizes = cc.sizes
    assert sizes[0] <= 8 and cc.k_levels <= 3 and math.prod(sizes) <= 10 ** 4
    q = theorem2_quantities(cc)
    worst, ok = -math.inf, True
    for seed in range(20):
        gen = GeneratorSpec("lipschitz_signal_plus_noise", seed=seed, domain_size=6)
        data, _ = generate_sequence(gen, 500, 1.0)
        fc = ChainingForecaster(cc)
        preds = fc.run(data.xs, data.ys)
        oracle = best_chained_finite(cc.f0, cc.increments, data)
        reg = float(((data.ys - preds) ** 2).sum()) - oracle.best_loss
        worst = max(worst, reg / q.proof_bound)
        ok &= fc.max_abs_prediction <= 4.0 and fc.max_abs_intermediate <= 4.0
        ok &= all(g <= c + 1e-12 for g, c in zip(fc.max_gradient_norms(), q.grad_bounds))
    elapsed = time.perf_counter() - t0
    ok = bool(ok and worst <= 1.0 and elapsed < 30.0)
    report("4 chaining EWA regret <= proof bound, |pred| <= 4B, gradient caps", ok,
           f"sizes {sizes}, max regret/bound {worst:.3f}, {elapsed:.1f}s")
    assert ok


# -- 5, 6: dyadic forecaster -------------------------------------------------

HORIZONS = [2 ** k for k in range(9, 16)]


@pytest.fixture(scope="module")
def dyadic_runs():
    t0 = time.perf_counter()
    rows = []
    for t in HORIZONS:
        for seed in range(10):
            data, _ = generate_sequence(GeneratorSpec("lipschitz_signal_plus_noise", seed=seed), t, 1.0)
            fc = DyadicForecaster(1.0, t)
            preds = fc.run(data.xs, data.ys)
            loss = float(((data.ys - preds) ** 2).sum())
            exact = best_lipschitz_exact(data, 1.0, 1.0)
            dp = best_lipschitz_dp(data, 1.0, 1.0, fc.config.gamma / 8)
            cfg = fc.config
            rows.append(dict(t=t, seed=seed, exact=loss - exact.lower_bound,
                             dp=loss - dp.lower_bound, gap=exact.certified_gap,
                             touched=fc.max_touched,
                             touched_cap=cfg.experts_per_interval * (cfg.levels + 1)))
    return rows, time.perf_counter() - t0


def test_criterion_5a_dyadic_bound(report, dyadic_runs):
    rows, elapsed = dyadic_runs
    worst = max(max(r["exact"], r["dp"]) / theorem3_bound(1.0, r["t"]) for r in rows)
    ok = worst <= 1.0 and max(r["gap"] for r in rows) <= 1e-5
    report("5a dyadic regret <= theorem3_bound (exact and DP oracles)", ok,
           f"max regret/bound {worst:.4f}")
    assert ok


def test_criterion_5b_dyadic_rate(report, dyadic_runs):
    rows, elapsed = dyadic_runs
    model = fit_rate(median_by_horizon((r["t"], r["exact"]) for r in rows))
    dp_model = fit_rate(median_by_horizon((r["t"], r["dp"]) for r in rows))
    ok = model.exponent <= 0.50 and elapsed < 180.0
    report("5b dyadic fitted exponent <= 0.50 (exact oracle)", ok,
           f"exponent {model.exponent:.3f} (DP-oracle regret: {dp_model.exponent:.3f}), "
           f"{elapsed:.0f}s for all runs")
    assert ok


def test_criterion_6_dyadic_touched(report, dyadic_runs):
    rows, _ = dyadic_runs
    ok = all(r["touched"] <= r["touched_cap"] for r in rows)
    report("6 dyadic touched weights <= (ceil(2B/gamma)+1)(M+1) every round", ok,
           f"max touched/cap {max(r['touched'] / r['touched_cap'] for r in rows):.3f}")
    assert ok


# -- 7: Holder forecaster ----------------------------------------------------

def test_criterion_7_holder(report):
    ok, worst = True, -math.inf
    for t in (64, 256, 1024):
        cfg = HolderForecasterConfig(0, 1.0, 1.0, 1.0, t)
        data, _ = generate_sequence(GeneratorSpec("holder_signal", seed=t), t, 1.0)
        fc = HolderForecaster(cfg)
        preds = fc.run(data.xs, data.ys)
        oracle = best_lipschitz_exact(data, 1.0, 1.0)
        reg = float(((data.ys - preds) ** 2).sum()) - oracle.lower_bound
        worst = max(worst, reg / theoremC_bound(cfg))
        ok &= np.max(np.abs(preds)) <= 4.0 and fc.max_abs_intermediate <= 4.0
        ok &= all(g <= cfg.level_gradient_bound(m) + 1e-12
                  for m, g in enumerate(fc.max_gradient_norm, start=1))
    smoke = HolderForecasterConfig(1, 1.0, 1.0, 1.0, 4)
    fc = HolderForecaster(smoke)
    data, _ = generate_sequence(GeneratorSpec("holder_signal", seed=1, q=1), 4, 1.0)
    preds = fc.run(data.xs, data.ys)
    sizes = fc.qset_sizes()
    ok &= smoke.levels <= 2 and max(sizes.values()) <= smoke.q_set_cap
    ok = bool(ok and worst <= 1.0 and np.all(np.abs(preds) <= 4.0))
    report("7 Holder q=0 regret <= bound, ranges, caps; q=1 smoke under the Q-set cap", ok,
           f"max regret/bound {worst:.4f}; q=1 M={smoke.levels}, largest Q-set {max(sizes.values())}")
    assert ok


# -- 8: DP oracle ------------------------------------------------------------

def test_criterion_8a_dp_exhaustive(report):
    rng = make_rng(808)
    assert dp_grid(1.0, 0.25).size == 9
    worst = 0.0
    for _ in range(100):
        t = 1 + int(rng.random() * 6)
        xs, ys = rng.random(t), 2 * rng.random(t) - 1
        got = best_lipschitz_dp(RoundData(xs, ys), 1.0, 1.0, 0.25).best_loss
        worst = max(worst, abs(got - exhaustive(xs, ys, 1.0, 1.0, 0.25)))
    ok = worst <= 1e-12
    report("8a DP equals exhaustive enumeration (100 instances)", ok, f"max |diff| {worst:.1e}")
    assert ok


def halving_increase(slack_fixed):
    rng = make_rng(809)
    worst = -math.inf
    for _ in range(100):
        t = 1 + int(rng.random() * 6)
        data = RoundData(rng.random(t), 2 * rng.random(t) - 1)
        h = 0.25
        prev = best_lipschitz_dp(data, 1.0, 1.0, h).best_loss
        for _ in range(3):
            h /= 2
            cur = best_lipschitz_dp(data, 1.0, 1.0, h, slack=0.25 if slack_fixed else None).best_loss
            worst = max(worst, cur - prev)
            prev = cur
    return worst


@pytest.mark.xfail(strict=True, reason="the default slack shrinks with h, so the "
                   "feasible set is not nested; see README")
def test_criterion_8b_dp_halving_literal(report):
    worst = halving_increase(slack_fixed=False)
    ok = worst <= 1e-9
    report("8b halving h never increases DP best_loss (slack = h)", ok,
           f"largest increase {worst:.4f}")
    assert ok


def test_criterion_8b_dp_halving_fixed_slack(report):
    worst = halving_increase(slack_fixed=True)
    ok = worst <= 1e-9
    report("8b' halving h at fixed slack never increases DP best_loss", ok,
           f"largest increase {worst:.1e}")
    assert ok


# -- 9: reductions -----------------------------------------------------------

def test_criterion_9_reductions(report):
    rng = make_rng(909)
    pts = domain_points(5)
    f0 = FiniteFunctionClass([TabulatedFunction(pts, 2 * rng.random(5) - 1) for _ in range(6)], 1.0)
    xs = pts[(rng.random(200) * 5).astype(int)]
    ys = 2 * rng.random(200) - 1
    plain = EwaState(6, 1 / 50)
    k0 = ChainingForecaster(ChainingConfig(1.0, 0.5, 200, f0))
    single = FiniteFunctionClass([zero_function], 0.5)
    chained = ChainingForecaster(ChainingConfig(1.0, 0.5, 200, f0, [single, single]))
    dev0, dev1 = 0.0, 0.0
    for x, y in zip(xs, ys):
        vals = f0.evaluate(x)
        p = plain.weights() @ vals
        dev0 = max(dev0, abs(k0.predict(x) - p))
        dev1 = max(dev1, abs(chained.predict(x) - p))
        plain.observe((y - vals) ** 2)
        k0.observe(x, y)
        chained.observe(x, y)
    ok = dev0 <= 1e-12 and dev1 == 0.0
    report("9 K=0 and singleton increment nets reduce to plain EWA", ok,
           f"K=0 max dev {dev0:.1e}, singleton max dev {dev1:.1e}")
    assert ok


# -- 10: determinism ---------------------------------------------------------

def test_criterion_10_determinism(report, tmp_path):
    files = sorted(CONFIGS.glob("*.json"))
    mismatched = []
    for path in files:
        outs = []
        for run in ("a", "b"):
            cfg = load_config(path)
            cfg.output_path = str(tmp_path / run / path.stem)
            run_experiment(cfg)
            outs.append(pathlib.Path(cfg.output_path))
        names = sorted(p.name for p in outs[0].glob("*.csv"))
        _, bad, err = filecmp.cmpfiles(outs[0], outs[1], names, shallow=False)
        mismatched += [f"{path.stem}/{n}" for n in bad + err]
    ok = bool(files) and not mismatched
    report("10 shipped configs give byte-identical CSVs", ok,
           f"{len(files)} configs" + (f", mismatched {mismatched}" if mismatched else ""))
    assert ok
