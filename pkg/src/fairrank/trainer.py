"""Stochastic training loops for AUC-based and ROC-based fairness constraints.

Both loops sample a batch with replacement, take one ADAM step on the relaxed
objective and, every ``n_adapt`` iterations, re-steer the adaptive
parameters from fairness statistics measured on the validation set with the
model in eval mode.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import asdict, dataclass, field

import numpy as np

from . import metrics
from .constraints import GammaConstraint
from .core_data import CELL_NAMES, Dataset
from .errors import ConfigurationError, NonFiniteError
from .losses import (
    AdaptiveParams,
    RocConstraintSpec,
    loss_auc_constrained,
    loss_roc_constrained,
)
from .model import MlpScorer
from .optimizer import AdamState, adam_step

log = logging.getLogger(__name__)

# "val_quantile" places each threshold at the target rate of the
# batch-normalized validation scores on the first adaptation step, instead of
# walking it there from 0 in steps of delta_t.
T_INIT = ("zero", "val_quantile")


@dataclass
class TrainConfig:
    n_iter: int = 10_000
    batch_size: int = 100
    B: int = 100
    B_v: int = 100_000
    n_adapt: int = 50
    delta_c: float = 0.01
    lambda_reg: float = 0.0
    seed: int = 0
    depth: int = 0
    width: int | None = None
    lr: float = 1e-3
    bn_momentum: float = 0.99
    temperature: float = 1.0
    init_std: float = 0.01

    def validate(self):
        for name in ("n_iter", "batch_size", "B", "B_v", "n_adapt"):
            if getattr(self, name) < 1:
                raise ConfigurationError(f"{name} must be positive")
        if not 0 < self.delta_c <= 1:
            raise ConfigurationError("delta_c must lie in (0, 1]")
        if self.lambda_reg < 0 or self.depth < 0:
            raise ConfigurationError("lambda_reg and depth must be nonnegative")


@dataclass
class AucTrainConfig(TrainConfig):
    lam: float = 0.0

    def validate(self):
        super().validate()
        if self.lam < 0:
            raise ConfigurationError("lambda must be nonnegative")


@dataclass
class RocTrainConfig(TrainConfig):
    alpha_H: tuple = ()
    alpha_G: tuple = ()
    lambda_H: tuple = ()
    lambda_G: tuple = ()
    delta_t: float = 0.001
    t_init: str = "zero"

    def validate(self):
        super().validate()
        if self.t_init not in T_INIT:
            raise ConfigurationError(f"t_init must be one of {T_INIT}")
        for grid, weights, name in ((self.alpha_H, self.lambda_H, "H"),
                                    (self.alpha_G, self.lambda_G, "G")):
            g = np.asarray(grid, dtype=np.float64)
            if len(grid) != len(weights):
                raise ConfigurationError(f"alpha_{name} and lambda_{name} differ in length")
            if np.any(np.diff(g) <= 0) or np.any((g < 0) | (g > 1)):
                raise ConfigurationError(f"alpha_{name} must be strictly increasing in [0, 1]")
            if np.any(np.asarray(weights, dtype=np.float64) < 0):
                raise ConfigurationError(f"lambda_{name} must be nonnegative")
        if self.delta_t <= 0:
            raise ConfigurationError("delta_t must be positive")

    @property
    def spec(self) -> RocConstraintSpec:
        return RocConstraintSpec(self.alpha_H, self.alpha_G, self.lambda_H, self.lambda_G)


@dataclass
class TrainResult:
    model: MlpScorer
    log: list
    adaptive: AdaptiveParams
    optimizer: AdamState
    skipped_terms: int = 0
    config: dict = field(default_factory=dict)


class TrainingAborted(NonFiniteError):
    """Non-finite loss or gradient; ``log`` holds the records written so far."""

    def __init__(self, message, iteration, terms, log_rows):
        super().__init__(message, iteration, terms)
        self.log = log_rows


def _require_cells(ds: Dataset, cells, where: str):
    for label, group in ((-1, 0), (-1, 1), (1, 0), (1, 1)):
        name = CELL_NAMES[(label, group)]
        if name in cells and not ds.cell_mask(label, group).any():
            raise ConfigurationError(f"cell {name} is empty in the {where} set")
    if not (ds.y == 1).any() or not (ds.y == -1).any():
        raise ConfigurationError(f"the {where} set needs both labels")


def _streams(seed: int):
    init, batches, validation = np.random.SeedSequence(seed).spawn(3)
    return (int(init.generate_state(1)[0]), np.random.default_rng(batches),
            np.random.default_rng(validation))


def _new_model(cfg: TrainConfig, d: int, init_seed: int) -> MlpScorer:
    return MlpScorer.init(cfg.depth, d, init_seed, width=cfg.width,
                          init_std=cfg.init_std, momentum=cfg.bn_momentum).train()


def _step(model, res, adam, it, rows):
    if not np.isfinite(res.value):
        raise TrainingAborted(f"non-finite loss at iteration {it}", it, res.terms, rows)
    try:
        model.params, adam = adam_step(model.params, res.grads, adam, it, res.terms)
    except NonFiniteError as exc:
        raise TrainingAborted(str(exc), it, res.terms, rows) from None
    return adam


def validation_gap(scores, y, z, gamma: GammaConstraint, B_v: int, rng) -> float:
    """Incomplete (hard) estimate of the constraint gap with ``B_v`` pairs per AUC."""
    cells = metrics.split_scores(scores, y, z)
    weights, const = gamma.auc_weights()
    est = const
    for (a, b), w in weights.items():
        est += w * metrics.auc_incomplete(cells[a], cells[b], B_v, rng)
    return gamma.gap_scale * est


def train_auc(train: Dataset, val: Dataset, gamma: GammaConstraint,
              cfg: AucTrainConfig) -> TrainResult:
    """Learn a scorer under an AUC-based constraint with an adaptive sign ``c``."""
    cfg.validate()
    needed = gamma.required_cells() if cfg.lam > 0 else set()
    _require_cells(train, needed, "training")
    _require_cells(val, needed, "validation")
    init_seed, rng, val_rng = _streams(cfg.seed)
    model = _new_model(cfg, train.d, init_seed)
    adam = AdamState.like(model.params, lr=cfg.lr)
    adaptive = AdaptiveParams()
    rows, skipped = [], 0
    for it in range(1, cfg.n_iter + 1):
        idx = rng.integers(0, train.n, size=cfg.batch_size)
        res = loss_auc_constrained(
            model, train.X[idx], train.y[idx], train.z[idx], gamma, cfg.lam, adaptive.c,
            cfg.lambda_reg, cfg.B, rng, skip_empty=True, temperature=cfg.temperature,
        )
        skipped += len(res.skipped)
        adam = _step(model, res, adam, it, rows)
        if it % cfg.n_adapt == 0:
            model.eval()
            est = float("nan")
            if gamma.required_cells() <= _present(val):
                est = validation_gap(model(val.X), val.y, val.z, gamma, cfg.B_v, val_rng)
            if cfg.lam > 0:
                adaptive.c += metrics.sign(est) * cfg.delta_c
                adaptive.clip()
            model.train()
            rows.append({"iteration": it, "loss": res.value, "auc_batch": res.terms["auc"],
                         "c": adaptive.c, "val_gap": est, "skipped": skipped})
    model.eval()
    return TrainResult(model, rows, adaptive, adam, skipped, asdict(cfg))


def _present(ds: Dataset) -> set:
    return {CELL_NAMES[k] for k in CELL_NAMES if ds.cell_mask(*k).any()}


def roc_adapt(c: float, t: float, f0: float, f1: float, alpha: float,
              delta_c: float, delta_t: float) -> tuple[float, float]:
    """One adaptation of ``(c, t)`` for a single ROC constraint.

    ``f0, f1`` are the validation CDFs of the two groups at ``t``. The
    threshold moves while the mean exceedance rate ``(2 - f0 - f1) / 2`` is
    further from ``alpha`` than the two CDFs are from each other; otherwise
    ``c`` moves toward the sign of ``f0 - f1``.
    """
    gap = f0 - f1
    spread = (1.0 - f0) + (1.0 - f1) - 2.0 * alpha
    if abs(spread) > abs(gap):
        t = t + metrics.sign(spread) * delta_t
    else:
        c = float(np.clip(c + metrics.sign(gap) * delta_c, -1.0, 1.0))
    return c, t


def train_roc(train: Dataset, val: Dataset, cfg: RocTrainConfig) -> TrainResult:
    """Learn a scorer under pointwise ROC constraints with adaptive ``c`` and ``t``."""
    cfg.validate()
    all_cells = {"H0", "H1", "G0", "G1"}
    _require_cells(train, all_cells, "training")
    _require_cells(val, all_cells, "validation")
    spec = cfg.spec
    init_seed, rng, _ = _streams(cfg.seed)
    model = _new_model(cfg, train.d, init_seed)
    adam = AdamState.like(model.params, lr=cfg.lr)
    adaptive = AdaptiveParams.for_roc(spec.m_H, spec.m_G)
    val_cells = {k: val.cell_mask(*v) for k, v in
                 {"H0": (-1, 0), "H1": (-1, 1), "G0": (1, 0), "G1": (1, 1)}.items()}
    rows, skipped = [], 0
    for it in range(1, cfg.n_iter + 1):
        idx = rng.integers(0, train.n, size=cfg.batch_size)
        res = loss_roc_constrained(
            model, train.X[idx], train.y[idx], train.z[idx], spec, adaptive,
            cfg.lambda_reg, cfg.B, rng, skip_empty=True, temperature=cfg.temperature,
        )
        skipped += len(res.skipped)
        adam = _step(model, res, adam, it, rows)
        if it % cfg.n_adapt == 0:
            if cfg.t_init == "val_quantile" and it == cfg.n_adapt:
                # batch-statistics scale, the one the loss sees
                batch_scores, _ = model.forward(val.X, update_stats=False)
            model.eval()
            scores = model(val.X)
            row = {"iteration": it, "loss": res.value, "auc_batch": res.terms["auc"]}
            for F, alphas, cs, ts in (("H", spec.alpha_H, adaptive.c_H, adaptive.t_H),
                                      ("G", spec.alpha_G, adaptive.c_G, adaptive.t_G)):
                s0 = scores[val_cells[f"{F}0"]]
                s1 = scores[val_cells[f"{F}1"]]
                for k, a in enumerate(alphas):
                    if cfg.t_init == "val_quantile" and it == cfg.n_adapt:
                        pooled = metrics.EmpiricalCdf(np.concatenate(
                            [batch_scores[val_cells[f"{F}0"]], batch_scores[val_cells[f"{F}1"]]]))
                        ts[k] = float(max(pooled.inverse(1.0 - a), pooled.sorted_scores[0]))
                    f0 = float(np.mean(s0 <= ts[k]))
                    f1 = float(np.mean(s1 <= ts[k]))
                    cs[k], ts[k] = roc_adapt(cs[k], ts[k], f0, f1, a, cfg.delta_c, cfg.delta_t)
                    row[f"c_{F}{k}"] = cs[k]
                    row[f"t_{F}{k}"] = ts[k]
                    row[f"val_gap_{F}{k}"] = f0 - f1
            row["skipped"] = skipped
            rows.append(row)
            model.train()
    model.eval()
    return TrainResult(model, rows, adaptive, adam, skipped, asdict(cfg))


def write_log_csv(rows, path):
    if not rows:
        open(path, "w").close()
        return
    fields = list(rows[0])
    for r in rows[1:]:
        fields += [k for k in r if k not in fields]
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fields)
        w.writeheader()
        w.writerows(rows)


def evaluate(model: MlpScorer, ds: Dataset, gamma: GammaConstraint | None = None,
             alphas=(0.125, 0.25, 0.5, 0.75)) -> dict:
    """Test metrics of an eval-mode model: AUC, C vector, gaps and |Delta_{F,alpha}|."""
    rep = metrics.audit_scores(model(ds.X), ds.y, ds.z, alphas)
    if gamma is not None:
        rep["gamma_value"] = gamma.value(rep["c_vector"])
        rep["delta_auc"] = abs(gamma.gap(rep["c_vector"]))
    return rep


def objective_auc(model, ds, gamma: GammaConstraint, lam: float) -> float:
    """AUC - lam * |constraint gap| on ``ds``; the model-selection criterion."""
    rep = evaluate(model, ds, gamma, alphas=())
    return rep["auc"] - lam * rep["delta_auc"]


def objective_roc(model, ds, spec: RocConstraintSpec) -> float:
    """AUC - sum_k lambda_H^k |Delta_{H,alpha^k}| - sum_k lambda_G^k |Delta_{G,alpha^k}|."""
    scores = model(ds.X)
    cells = metrics.split_scores(scores, ds.y, ds.z)
    value = metrics.auc(np.concatenate([cells["H0"], cells["H1"]]),
                        np.concatenate([cells["G0"], cells["G1"]]))
    for a, w in zip(spec.alpha_H, spec.lambda_H):
        value -= w * abs(metrics.delta("H", cells["H0"], cells["H1"], a))
    for a, w in zip(spec.alpha_G, spec.lambda_G):
        value -= w * abs(metrics.delta("G", cells["G0"], cells["G1"], a))
    return float(value)
