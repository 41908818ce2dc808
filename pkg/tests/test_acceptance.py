"""Acceptance suite: each test checks one published criterion at its stated tolerance.

Every test records a single ``PASS``/``FAIL``/``SKIP`` line (printed and
repeated in the terminal summary). Training runs are cached per session so
criteria sharing the same runs (Example 2 AUC/fairness and c-recovery) do not
train twice. Expect a few minutes on one CPU core.
"""

import os
import time
from pathlib import Path

import numpy as np
import pytest

from fairrank import constraints, core_data, metrics, synth_data, tabular_data, trainer
from fairrank.constraints import E1, E2, E3, E4, MixtureConstraint
from fairrank.core_data import Dataset
from fairrank.losses import AdaptiveParams, RocConstraintSpec, loss_auc_constrained, loss_roc_constrained
from fairrank.optimizer import grad_check

from conftest import ACCEPTANCE_LINES, generic_instance

SEEDS = range(10)
N_POOL, N_TEST = 10_000, 20_000
VAL_FRACTION = 0.4
INTRA = constraints.make_named("intra_group")
ALPHAS = (0.125, 0.25, 0.5, 0.75)


def verdict(label, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'}  {label}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def _example_data(name, seed, n=N_POOL):
    pool = synth_data.generate(name, n, seed)
    train, val = core_data.split(pool, VAL_FRACTION, seed)
    test = synth_data.generate(name, N_TEST, 10_000 + seed)
    return train, val, test


class _Runs:
    """Lazily trained runs shared by several criteria."""

    def __init__(self):
        self.cache = {}

    def auc(self, lam, seed):
        key = ("ex2", lam, seed)
        if key not in self.cache:
            train, val, test = _example_data("square", seed)
            t0 = time.perf_counter()
            res = trainer.train_auc(train, val, INTRA,
                                    trainer.AucTrainConfig(lam=lam, lambda_reg=0.01, seed=seed))
            elapsed = time.perf_counter() - t0
            rep = trainer.evaluate(res.model, test, INTRA, alphas=())
            c = synth_data.equivalent_c(res.model.params[0].ravel(), "square")
            self.cache[key] = {"auc": rep["auc"], "delta_auc": rep["delta_auc"], "c": c,
                               "seconds": elapsed}
        return self.cache[key]

    def roc(self, alpha_H, seed, t_init="zero"):
        key = ("ex3", tuple(alpha_H), seed, t_init)
        if key not in self.cache:
            train, val, test = _example_data("disk", seed)
            cfg = trainer.RocTrainConfig(alpha_H=tuple(alpha_H), lambda_H=(1.0,) * len(alpha_H),
                                         lambda_reg=0.01, seed=seed, t_init=t_init)
            t0 = time.perf_counter()
            res = trainer.train_roc(train, val, cfg)
            elapsed = time.perf_counter() - t0
            cells = metrics.split_scores(res.model(test.X), test.y, test.z)
            self.cache[key] = {"auc": trainer.evaluate(res.model, test, alphas=())["auc"],
                               "cells": cells, "seconds": elapsed}
        return self.cache[key]


@pytest.fixture(scope="session")
def runs():
    return _Runs()


def _abs_delta_H(cells, alpha):
    return np.abs(metrics.delta("H", cells["H0"], cells["H1"], alpha))


def test_1_auc_oracle_equivalence():
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    mismatches = 0
    for _ in range(200):
        n_neg, n_pos = rng.integers(1, 201, size=2)
        # few distinct values force many ties
        levels = rng.integers(2, 12)
        neg = rng.integers(0, levels, n_neg).astype(float)
        pos = rng.integers(0, levels, n_pos).astype(float)
        mismatches += metrics.auc(neg, pos) != metrics.auc_brute_force(neg, pos)
    elapsed = time.perf_counter() - t0
    verdict("1 AUC oracle equivalence", mismatches == 0 and elapsed < 1.0,
            f"{mismatches} mismatches over 200 samples, {elapsed:.3f}s (limit 1s)")


def test_2_gradient_correctness():
    rates = {"p": 0.5, "p0": 0.4, "p1": 0.6, "q0": 0.5, "q1": 0.5}
    spec = RocConstraintSpec((0.25, 0.75), (0.5,), (1.0, 0.5), (2.0,))
    adaptive = AdaptiveParams(0.0, [0.3, -0.8], [0.6], [0.1, -0.4], [0.2])
    t0 = time.perf_counter()
    worst = 0.0
    for seed in range(10):
        m, X, y, z = generic_instance(seed, depth=seed % 3)
        gamma = constraints.make_named(constraints.KINDS[seed % 6], rates)

        def f_auc(params):
            m.params = params
            r = loss_auc_constrained(m, X, y, z, gamma, 1.0, -0.7, 0.01, 50,
                                     np.random.default_rng(7), update_stats=False)
            return r.value, r.grads

        def f_roc(params):
            m.params = params
            r = loss_roc_constrained(m, X, y, z, spec, adaptive, 0.01, 50,
                                     np.random.default_rng(7), update_stats=False)
            return r.value, r.grads

        for fn in (f_auc, f_roc):
            worst = max(worst, grad_check(fn, [p.copy() for p in m.params]).max_rel_error)
    elapsed = time.perf_counter() - t0
    verdict("2 gradient correctness", worst < 1e-4 and elapsed < 10.0,
            f"max relative error {worst:.2e} (limit 1e-4), {elapsed:.2f}s (limit 10s)")


@pytest.mark.slow
def test_3_example2_reproduction(runs):
    free = [runs.auc(0.0, s) for s in SEEDS]
    fair = [runs.auc(1.0, s) for s in SEEDS]
    mean = lambda rs, k: float(np.mean([r[k] for r in rs]))
    a0, d0, a1, d1 = mean(free, "auc"), mean(free, "delta_auc"), mean(fair, "auc"), mean(fair, "delta_auc")
    slowest = max(r["seconds"] for r in free + fair)
    ok = (0.76 <= a0 <= 0.82 and 0.23 <= d0 <= 0.33 and 0.70 <= a1 <= 0.76 and d1 <= 0.03
          and slowest <= 120)
    verdict("3 Example 2 reproduction", ok,
            f"lambda=0: AUC {a0:.3f} in [0.76,0.82], dAUC {d0:.3f} in [0.23,0.33]; "
            f"lambda=1: AUC {a1:.3f} in [0.70,0.76], dAUC {d1:.3f} <= 0.03; "
            f"slowest run {slowest:.1f}s")


@pytest.mark.slow
def test_4_example3_reproduction(runs):
    free = [runs.roc((), s) for s in SEEDS]
    fair = [runs.roc((0.75,), s) for s in SEEDS]
    a0 = float(np.mean([r["auc"] for r in free]))
    d0 = float(np.mean([_abs_delta_H(r["cells"], 0.75) for r in free]))
    a1 = float(np.mean([r["auc"] for r in fair]))
    d1 = float(np.mean([_abs_delta_H(r["cells"], 0.75) for r in fair]))
    slowest = max(r["seconds"] for r in free + fair)
    ok = 0.77 <= a0 <= 0.83 and 0.33 <= d0 <= 0.43 and 0.72 <= a1 <= 0.78 and d1 <= 0.03 \
        and slowest <= 120
    verdict("4 Example 3 reproduction", ok,
            f"unconstrained: AUC {a0:.3f} in [0.77,0.83], |D_H,3/4| {d0:.3f} in [0.33,0.43]; "
            f"ROC-constrained: AUC {a1:.3f} in [0.72,0.78], |D_H,3/4| {d1:.3f} <= 0.03; "
            f"slowest run {slowest:.1f}s")


@pytest.mark.slow
def test_4b_example3_threshold_initialization_diagnostic(runs):
    """Not a criterion: the same constrained runs with thresholds started at the target rate."""
    fair = [runs.roc((0.75,), s, t_init="val_quantile") for s in SEEDS]
    a1 = float(np.mean([r["auc"] for r in fair]))
    d1 = float(np.mean([_abs_delta_H(r["cells"], 0.75) for r in fair]))
    line = (f"INFO  4b t_init=val_quantile diagnostic: ROC-constrained AUC {a1:.3f}, "
            f"|D_H,3/4| {d1:.3f}")
    print(line)
    ACCEPTANCE_LINES.append(line)


@pytest.mark.slow
def test_5_c_recovery(runs):
    fair_c = [runs.auc(1.0, s)["c"] for s in SEEDS]
    free_c = [runs.auc(0.0, s)["c"] for s in SEEDS]
    in_band = sum(0.42 <= c <= 0.58 for c in fair_c)
    below = sum(c < 0.45 for c in free_c)
    ok = in_band > len(fair_c) // 2 and below > len(free_c) // 2
    verdict("5 c-recovery", ok,
            f"lambda=1: {in_band}/10 seeds with c in [0.42,0.58] (median {np.median(fair_c):.3f}); "
            f"lambda=0: {below}/10 seeds with c < 0.45 (median {np.median(free_c):.3f})")


@pytest.mark.slow
def test_6_group_symmetry_null():
    rng = np.random.default_rng(77)

    def symmetric(n, seed):
        base = synth_data.generate("square", n, seed)
        # group drawn by a fair coin independently of (X, Y)
        return Dataset(base.X, base.y, rng.integers(0, 2, n))

    train, val = core_data.split(symmetric(20_000, 1), VAL_FRACTION, 1)
    test = symmetric(20_000, 2)
    res = trainer.train_auc(train, val, INTRA, trainer.AucTrainConfig(lam=0.0, lambda_reg=0.01, seed=1))
    rep = metrics.audit_scores(res.model(test.X), test.y, test.z, ALPHAS)
    counts = core_data.cell_counts(test)
    gammas = {k: abs(constraints.make_named(k, counts).value(rep["c_vector"]))
              for k in constraints.KINDS}
    worst_gamma = max(gammas.values())
    worst_delta = max(max(rep["delta_H"].values()), max(rep["delta_G"].values()))
    verdict("6 group-symmetry null", worst_gamma <= 0.02 and worst_delta <= 0.05,
            f"max |Gamma^T C| {worst_gamma:.4f} (limit 0.02), "
            f"max |D_F,alpha| {worst_delta:.4f} (limit 0.05)")


def test_7_relevance():
    rates = core_data.CellCounts((30, 50), (70, 25))
    forms = [constraints.mixture_form(k, rates) for k in constraints.KINDS]
    swapped = MixtureConstraint(E1, E3, E4, E2)
    t0 = time.perf_counter()
    named_ok = all(constraints.is_relevant(f) for f in forms)
    swapped_rejected = not constraints.is_relevant(swapped)
    elapsed = time.perf_counter() - t0
    verdict("7 relevance of named constraints", named_ok and swapped_rejected and elapsed < 1e-3,
            f"6/6 named relevant: {named_ok}; swapped counterexample rejected: "
            f"{swapped_rejected}; {elapsed * 1e3:.3f} ms (limit 1 ms)")


@pytest.mark.slow
def test_8_sup_over_alpha_structure(runs):
    grid = tuple(k / 8 for k in range(1, 7))
    fine = np.linspace(0.0, 0.75, 101)
    details, ok = [], True
    for seed in range(3):
        cells = runs.roc(grid, seed)["cells"]
        sup = float(_abs_delta_H(cells, fine).max())
        at_grid = float(_abs_delta_H(cells, np.array(grid)).max())
        ok &= sup <= at_grid + 0.15
        details.append(f"seed {seed}: sup {sup:.3f} vs grid max {at_grid:.3f} + 0.15")
    verdict("8 sup over alpha vs training grid", ok, "; ".join(details))


@pytest.mark.slow
def test_generalization_trend():
    sizes = (1_000, 2_000, 4_000, 8_000, 16_000)
    means = []
    for n in sizes:
        gaps = []
        for seed in range(5):
            pool = synth_data.generate("square", n, 500 + seed)
            train, val = core_data.split(pool, VAL_FRACTION, seed)
            test = synth_data.generate("square", N_TEST, 20_000 + seed)
            res = trainer.train_auc(train, val, INTRA,
                                    trainer.AucTrainConfig(lam=0.0, lambda_reg=0.01, seed=seed))
            a = trainer.evaluate(res.model, train, INTRA, alphas=())
            b = trainer.evaluate(res.model, test, INTRA, alphas=())
            # the bounds cover the AUC and the constraint gap together
            gaps.append(max(abs(a["auc"] - b["auc"]), abs(a["delta_auc"] - b["delta_auc"])))
        means.append(float(np.mean(gaps)))
    ok = all(later <= earlier for earlier, later in zip(means, means[1:]))
    verdict("generalization trend", ok,
            "mean train/test gap by n: " + ", ".join(f"{n}: {g:.4f}" for n, g in zip(sizes, means)))


COMPAS = os.environ.get("FAIRRANK_COMPAS_CSV")


@pytest.mark.external
@pytest.mark.slow
def test_9_compas():
    if not COMPAS:
        line = "SKIP  9 Compas reproduction: set FAIRRANK_COMPAS_CSV to a compas-scores-two-years.csv"
        print(line)
        ACCEPTANCE_LINES.append(line)
        pytest.skip("external dataset not supplied")
    schema = tabular_data.TabularSchema.from_json(
        Path(__file__).resolve().parents[1] / "schemas" / "compas.json")
    full, _ = tabular_data.load_csv(COMPAS, schema)
    pool, test = core_data.split(full, 0.2, 0)
    train, val = core_data.split(pool, VAL_FRACTION, 0)
    bpsn = constraints.make_named("bpsn", core_data.cell_counts(pool))
    common = dict(depth=2, lambda_reg=0.01, seed=0)
    free = trainer.train_auc(train, val, bpsn, trainer.AucTrainConfig(lam=0.0, **common))
    fair = trainer.train_auc(train, val, bpsn, trainer.AucTrainConfig(lam=1.0, **common))
    roc = trainer.train_roc(train, val, trainer.RocTrainConfig(
        alpha_H=(0.125,), lambda_H=(1.0,), alpha_G=(0.125,), lambda_G=(1.0,), **common))
    r0 = trainer.evaluate(free.model, test, bpsn)
    r1 = trainer.evaluate(fair.model, test, bpsn)
    r2 = trainer.evaluate(roc.model, test, alphas=(0.125,))
    dh, dg = r2["delta_H"]["0.125"], r2["delta_G"]["0.125"]
    ok = (abs(r0["auc"] - 0.72) <= 0.03 and abs(r0["delta_auc"] - 0.20) <= 0.05
          and r1["delta_auc"] <= 0.03 and r1["auc"] >= 0.68 and dh <= 0.04 and dg <= 0.04)
    verdict("9 Compas reproduction", ok,
            f"unconstrained AUC {r0['auc']:.3f}, dAUC(BPSN) {r0['delta_auc']:.3f}; "
            f"AUC-constrained AUC {r1['auc']:.3f}, dAUC {r1['delta_auc']:.3f}; "
            f"ROC-constrained |D_G,1/8| {dg:.3f}, |D_H,1/8| {dh:.3f}")
