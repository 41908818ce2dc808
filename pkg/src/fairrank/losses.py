"""Logistic relaxations of AUCs and group CDFs, and the two training objectives.

Score-level functions return ``(value, d value / d scores)``; the composite
losses push that gradient through an :class:`~fairrank.model.MlpScorer`.
Every pairwise kernel is ``sigma(2 (s_second - s_first) / T)``: for a
positive/negative pair this is exactly ``sigma[(s_i - s_j)(y_i - y_j)]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .constraints import GammaConstraint
from .errors import UndefinedStatisticError

CELL_LABEL_GROUP = {"H0": (-1, 0), "H1": (-1, 1), "G0": (1, 0), "G1": (1, 1)}


@dataclass(frozen=True)
class PairSample:
    """``B`` index pairs (first, second) into a batch."""

    first: np.ndarray
    second: np.ndarray

    @property
    def B(self) -> int:
        return self.first.size


def sample_pairs(first_idx, second_idx, B: int, rng) -> PairSample:
    """Draw ``B`` pairs uniformly with replacement from ``first_idx x second_idx``."""
    first_idx = np.asarray(first_idx)
    second_idx = np.asarray(second_idx)
    if first_idx.size == 0 or second_idx.size == 0:
        raise UndefinedStatisticError("no eligible pairs")
    i = first_idx[rng.integers(0, first_idx.size, size=B)]
    j = second_idx[rng.integers(0, second_idx.size, size=B)]
    return PairSample(i, j)


def _pair_kernel(scores, pairs: PairSample, temperature: float):
    n = scores.size
    diff = 2.0 * (scores[pairs.second] - scores[pairs.first]) / temperature
    k = expit(diff)
    val = float(k.mean())
    dk = k * (1.0 - k) * (2.0 / temperature) / pairs.B
    grad = np.bincount(pairs.second, weights=dk, minlength=n)
    grad -= np.bincount(pairs.first, weights=dk, minlength=n)
    return val, grad


def soft_auc_full(scores, labels, temperature: float = 1.0):
    """Average of the logistic kernel over every positive/negative pair."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    pos = np.flatnonzero(labels == 1)
    neg = np.flatnonzero(labels == -1)
    if pos.size == 0 or neg.size == 0:
        raise UndefinedStatisticError("soft AUC needs at least one positive and one negative")
    diff = 2.0 * (scores[pos][:, None] - scores[neg][None, :]) / temperature
    k = expit(diff)
    npairs = pos.size * neg.size
    dk = k * (1.0 - k) * (2.0 / temperature) / npairs
    grad = np.zeros_like(scores)
    grad[pos] += dk.sum(axis=1)
    grad[neg] -= dk.sum(axis=0)
    return float(k.sum() / npairs), grad


def soft_auc_incomplete(scores, labels, B: int, rng, first_mask=None, second_mask=None,
                        temperature: float = 1.0):
    """Incomplete U-statistic version of :func:`soft_auc_full` with ``B`` pairs.

    By default pairs are (negative, positive); ``first_mask`` and
    ``second_mask`` restrict the two sides to other cells.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    first = labels == -1 if first_mask is None else np.asarray(first_mask, dtype=bool)
    second = labels == 1 if second_mask is None else np.asarray(second_mask, dtype=bool)
    first_idx, second_idx = np.flatnonzero(first), np.flatnonzero(second)
    if first_idx.size == 0 or second_idx.size == 0:
        raise UndefinedStatisticError("soft AUC needs both sides of the pair to be nonempty")
    return _pair_kernel(scores, sample_pairs(first_idx, second_idx, B, rng), temperature)


def soft_group_cdf(F: str, z: int, scores, labels, groups, t: float):
    """Mean of ``sigma(t - s_i)`` over cell (F, z); returns (value, d/dscores, d/dt)."""
    scores = np.asarray(scores, dtype=np.float64)
    label = -1 if F == "H" else 1
    idx = np.flatnonzero((np.asarray(labels) == label) & (np.asarray(groups) == z))
    if idx.size == 0:
        raise UndefinedStatisticError(f"empty cell: {F}{z}")
    k = expit(t - scores[idx])
    dk = k * (1.0 - k) / idx.size
    grad = np.zeros_like(scores)
    grad[idx] = -dk
    return float(k.mean()), grad, float(dk.sum())


@dataclass
class AdaptiveParams:
    """Sign/threshold parameters steered during training.

    ``c`` drives the AUC-based loss; ``c_H, c_G, t_H, t_G`` drive the
    ROC-based one (one entry per constrained alpha). All ``c`` are kept in
    [-1, 1].
    """

    c: float = 0.0
    c_H: list = field(default_factory=list)
    c_G: list = field(default_factory=list)
    t_H: list = field(default_factory=list)
    t_G: list = field(default_factory=list)

    @classmethod
    def for_roc(cls, m_H: int, m_G: int) -> "AdaptiveParams":
        return cls(0.0, [0.0] * m_H, [0.0] * m_G, [0.0] * m_H, [0.0] * m_G)

    def clip(self):
        self.c = float(np.clip(self.c, -1.0, 1.0))
        self.c_H = [float(np.clip(v, -1.0, 1.0)) for v in self.c_H]
        self.c_G = [float(np.clip(v, -1.0, 1.0)) for v in self.c_G]
        return self


@dataclass(frozen=True)
class RocConstraintSpec:
    """Constrained abscissae and weights for the ROC-based objective."""

    alpha_H: tuple = ()
    alpha_G: tuple = ()
    lambda_H: tuple = ()
    lambda_G: tuple = ()

    def __post_init__(self):
        for name in ("alpha_H", "alpha_G", "lambda_H", "lambda_G"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))
        if len(self.alpha_H) != len(self.lambda_H) or len(self.alpha_G) != len(self.lambda_G):
            raise ValueError("each alpha grid needs one weight per point")

    @property
    def m_H(self) -> int:
        return len(self.alpha_H)

    @property
    def m_G(self) -> int:
        return len(self.alpha_G)


@dataclass
class LossResult:
    value: float
    grads: list
    terms: dict
    skipped: list


def _cell_masks(y, z):
    return {name: (y == lab) & (z == grp) for name, (lab, grp) in CELL_LABEL_GROUP.items()}


def _ridge(model, lambda_reg, grads):
    for k in range(0, len(grads), 2):
        grads[k] = grads[k] + lambda_reg * model.params[k]
    return 0.5 * lambda_reg * model.weight_sq_norm()


def loss_auc_constrained(model, X, y, z, gamma: GammaConstraint, lam: float, c: float,
                         lambda_reg: float, B: int, rng, skip_empty: bool = False,
                         temperature: float = 1.0, update_stats: bool = True) -> LossResult:
    """``(1 - AUC~) + lam * c * k * Gamma^T C~(s) + lambda_reg / 2 * ||W||^2`` on a batch.

    ``k`` is ``gamma.gap_scale``, so the penalty is the relaxed difference of
    the constraint's two AUCs (e.g. ``AUC~(H0,G0) - AUC~(H1,G1)`` for the
    intra-group constraint).

    Each AUC appearing in the expansion of Gamma^T C gets its own ``B``
    sampled pairs. With ``skip_empty`` a term whose cell is missing from the
    batch contributes nothing (its name is listed in ``skipped``); otherwise
    an :class:`UndefinedStatisticError` is raised.
    """
    y = np.asarray(y)
    z = np.asarray(z)
    scores, cache = model.forward(X, update_stats=update_stats)
    dscores = np.zeros_like(scores)
    terms, skipped = {}, []

    auc_val, g = soft_auc_incomplete(scores, y, B, rng, temperature=temperature)
    dscores -= g
    value = 1.0 - auc_val
    terms["auc"] = auc_val

    if lam != 0.0 and c != 0.0:
        weights, const = gamma.auc_weights()
        k = gamma.gap_scale
        masks = _cell_masks(y, z)
        fair = k * const
        for (a, b), w in weights.items():
            if not masks[a].any() or not masks[b].any():
                if skip_empty:
                    skipped.append(f"{a},{b}")
                    continue
                raise UndefinedStatisticError(
                    f"empty cell {a if not masks[a].any() else b} in batch"
                )
            v, g = soft_auc_incomplete(scores, y, B, rng, masks[a], masks[b], temperature)
            fair += k * w * v
            dscores += lam * c * k * w * g
        terms["fairness"] = fair
        value += lam * c * fair

    grads = model.backward(cache, dscores)
    ridge = _ridge(model, lambda_reg, grads)
    terms["ridge"] = ridge
    return LossResult(value + ridge, grads, terms, skipped)


def loss_roc_constrained(model, X, y, z, spec: RocConstraintSpec, adaptive: AdaptiveParams,
                         lambda_reg: float, B: int, rng, skip_empty: bool = False,
                         temperature: float = 1.0, update_stats: bool = True) -> LossResult:
    """``(1 - AUC~) + sum_F (1/m_F) sum_k lambda_F^k c_F^k (F~0(t_F^k) - F~1(t_F^k)) + ridge``."""
    y = np.asarray(y)
    z = np.asarray(z)
    scores, cache = model.forward(X, update_stats=update_stats)
    dscores = np.zeros_like(scores)
    terms, skipped = {}, []

    auc_val, g = soft_auc_incomplete(scores, y, B, rng, temperature=temperature)
    dscores -= g
    value = 1.0 - auc_val
    terms["auc"] = auc_val

    for F, alphas, lams, cs, ts in (
        ("H", spec.alpha_H, spec.lambda_H, adaptive.c_H, adaptive.t_H),
        ("G", spec.alpha_G, spec.lambda_G, adaptive.c_G, adaptive.t_G),
    ):
        m = len(alphas)
        for k in range(m):
            weight = lams[k] * cs[k] / m
            if weight == 0.0:
                continue
            try:
                v0, g0, _ = soft_group_cdf(F, 0, scores, y, z, ts[k])
                v1, g1, _ = soft_group_cdf(F, 1, scores, y, z, ts[k])
            except UndefinedStatisticError:
                if skip_empty:
                    skipped.append(f"{F}{k}")
                    continue
                raise
            terms[f"ell_{F}{k}"] = cs[k] * (v0 - v1)
            value += weight * (v0 - v1)
            dscores += weight * (g0 - g1)

    grads = model.backward(cache, dscores)
    ridge = _ridge(model, lambda_reg, grads)
    terms["ridge"] = ridge
    return LossResult(value + ridge, grads, terms, skipped)
