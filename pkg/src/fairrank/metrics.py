"""Exact empirical ROC/AUC machinery.

Everything here works on step functions: empirical CDFs are right-continuous
(``F(t) = #{s_i <= t} / n``) and ROC points are obtained through the
generalized inverse ``F^-1(u) = inf{t : F(t) >= u}``, never by interpolation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, UndefinedStatisticError

CELL_ORDER = ("H0", "H1", "G0", "G1")


class EmpiricalCdf:
    """Empirical distribution function of a finite sample of scores."""

    __slots__ = ("sorted_scores", "name")

    def __init__(self, scores, name: str = "sample"):
        s = np.sort(np.asarray(scores, dtype=np.float64).ravel())
        if np.isnan(s).any():
            raise DomainError(f"{name}: scores contain NaN")
        s.setflags(write=False)
        self.sorted_scores = s
        self.name = name

    @property
    def n(self) -> int:
        return self.sorted_scores.size

    def __len__(self):
        return self.n

    def _require(self):
        if self.n == 0:
            raise UndefinedStatisticError(f"empty sample: {self.name}")

    def __call__(self, t):
        """F(t), vectorized over ``t``."""
        self._require()
        counts = np.searchsorted(self.sorted_scores, t, side="right")
        return counts / self.n

    def inverse(self, u):
        """Generalized inverse; ``inverse(0)`` is ``-inf`` so that F(F^-1(0)) = 0."""
        self._require()
        u = np.asarray(u, dtype=np.float64)
        if np.any((u < 0) | (u > 1)):
            raise DomainError("pseudo-inverse argument must lie in [0, 1]")
        # smallest k with k/n >= u; the slack absorbs rounding in u*n
        k = np.ceil(u * self.n - 1e-9 * self.n).astype(np.int64)
        k = np.clip(k, 0, self.n)
        out = np.where(k == 0, -np.inf, self.sorted_scores[np.maximum(k - 1, 0)])
        return out if out.ndim else float(out)


def as_cdf(x, name="sample") -> EmpiricalCdf:
    return x if isinstance(x, EmpiricalCdf) else EmpiricalCdf(x, name)


def _check_alpha(alpha):
    a = np.asarray(alpha, dtype=np.float64)
    if np.any(np.isnan(a)) or np.any((a < 0) | (a > 1)):
        raise DomainError(f"alpha must lie in [0, 1], got {alpha}")
    return a


def auc_pair_counts(neg, pos) -> tuple[int, int]:
    """Return (2 * #wins + #ties, 2 * n_neg * n_pos) as exact integers."""
    h, g = as_cdf(neg, "neg"), as_cdf(pos, "pos")
    h._require()
    g._require()
    below = np.searchsorted(h.sorted_scores, g.sorted_scores, side="left")
    upto = np.searchsorted(h.sorted_scores, g.sorted_scores, side="right")
    num = int(below.sum(dtype=np.int64)) + int(upto.sum(dtype=np.int64))
    return num, 2 * h.n * g.n


def auc(neg, pos) -> float:
    """P(S_pos > S_neg) + P(S_pos = S_neg) / 2 over all cross pairs.

    Sort-and-search, O((n+m) log n); accumulation is in integers and divided
    once, so the value is the correctly rounded rational.
    """
    num, den = auc_pair_counts(neg, pos)
    return num / den


def auc_brute_force(neg, pos) -> float:
    """Reference implementation: compares every (neg, pos) pair, O(n*m) memory."""
    neg = np.asarray(neg, dtype=np.float64).ravel()
    pos = np.asarray(pos, dtype=np.float64).ravel()
    if neg.size == 0 or pos.size == 0:
        raise UndefinedStatisticError("empty sample")
    wins = int(np.count_nonzero(pos[:, None] > neg[None, :]))
    ties = int(np.count_nonzero(pos[:, None] == neg[None, :]))
    return (2 * wins + ties) / (2 * neg.size * pos.size)


def roc_point(h, g, alpha):
    """ROC_{h,g}(alpha) = 1 - g(h^-1(1 - alpha)); vectorized over alpha."""
    a = _check_alpha(alpha)
    h, g = as_cdf(h, "h"), as_cdf(g, "g")
    out = 1.0 - g(h.inverse(1.0 - a))
    return out if np.ndim(out) else float(out)


class RocCurve:
    """The mapping alpha -> ROC_{h,g}(alpha) between two empirical CDFs."""

    def __init__(self, h, g):
        self.h = as_cdf(h, "h")
        self.g = as_cdf(g, "g")

    def __call__(self, alpha):
        return roc_point(self.h, self.g, alpha)

    def jump_points(self) -> np.ndarray:
        """Abscissae where the step curve can change: k / n_h."""
        return np.arange(self.h.n + 1) / self.h.n

    def grid(self, n_points: int = 512, max_jumps: int = 10_000) -> np.ndarray:
        alphas = np.linspace(0.0, 1.0, n_points)
        if self.h.n + 1 < max_jumps:
            alphas = np.union1d(alphas, self.jump_points())
        return alphas

    def area(self) -> float:
        """Exact area under the step curve."""
        jumps = self.jump_points()
        # on [k/n, (k+1)/n) the curve is constant, equal to its value at k/n
        return float(np.sum(self(jumps[:-1])) / self.h.n)


@dataclass(frozen=True)
class CVector:
    """The five elementary fairness measurements C_1 ... C_5."""

    c: tuple

    def __post_init__(self):
        object.__setattr__(self, "c", tuple(float(v) for v in self.c))
        if len(self.c) != 5:
            raise DomainError("a C vector has exactly five entries")

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.c, dtype=dtype)

    def __getitem__(self, k):
        return self.c[k]

    def __iter__(self):
        return iter(self.c)


def _cells(scores_by_cell) -> list[EmpiricalCdf]:
    if isinstance(scores_by_cell, dict):
        scores_by_cell = [scores_by_cell[k] for k in CELL_ORDER]
    if len(scores_by_cell) != 4:
        raise DomainError("need score lists for H0, H1, G0, G1")
    cdfs = [as_cdf(s, name) for s, name in zip(scores_by_cell, CELL_ORDER)]
    for cdf in cdfs:
        if cdf.n == 0:
            raise UndefinedStatisticError(f"empty cell: {cdf.name}")
    return cdfs


def cell_aucs(scores_by_cell) -> dict:
    """The six AUCs that C(s) is built from, keyed by (first, second) cell."""
    H0, H1, G0, G1 = _cells(scores_by_cell)
    return {
        ("H0", "H1"): auc(H0, H1),
        ("G0", "G1"): auc(G0, G1),
        ("H0", "G0"): auc(H0, G0),
        ("H0", "G1"): auc(H0, G1),
        ("H1", "G0"): auc(H1, G0),
        ("H1", "G1"): auc(H1, G1),
    }


def c_vector_from_aucs(a: dict) -> CVector:
    return CVector((
        a[("H0", "H1")] - 0.5,
        0.5 - a[("G0", "G1")],
        a[("H0", "G0")] - a[("H0", "G1")],
        a[("H0", "G1")] - a[("H1", "G0")],
        a[("H1", "G0")] - a[("H1", "G1")],
    ))


def c_vector(scores_by_cell) -> CVector:
    """C(s) from the four cell samples, given as (H0, H1, G0, G1) or a dict."""
    return c_vector_from_aucs(cell_aucs(scores_by_cell))


def gamma_value(gamma, c) -> float:
    g = np.asarray(getattr(gamma, "gamma", gamma), dtype=np.float64)
    return float(np.dot(g, np.asarray(c, dtype=np.float64)))


def delta(F: str, group0_scores, group1_scores, alpha):
    """Deviation ROC_{F0,F1}(alpha) - alpha of the inter-group ROC from the diagonal.

    ``F`` only labels the error message ("H" for negatives, "G" for positives);
    the computation is the same for both.
    """
    if F not in ("H", "G"):
        raise DomainError(f"F must be 'H' or 'G', got {F!r}")
    f0 = as_cdf(group0_scores, f"{F}0")
    f1 = as_cdf(group1_scores, f"{F}1")
    for cdf in (f0, f1):
        if cdf.n == 0:
            raise UndefinedStatisticError(f"empty cell: {cdf.name}")
    return roc_point(f0, f1, alpha) - _check_alpha(alpha)


def split_scores(scores, labels, groups) -> dict:
    """Scores grouped into the four (label, group) cells."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    groups = np.asarray(groups)
    return {
        "H0": scores[(labels == -1) & (groups == 0)],
        "H1": scores[(labels == -1) & (groups == 1)],
        "G0": scores[(labels == 1) & (groups == 0)],
        "G1": scores[(labels == 1) & (groups == 1)],
    }


def fair_threshold_scan(scores_by_cell, mode: str, grid: Iterable[float], tol: float):
    """Thresholds t at which the classifier ``sign(s - t)`` is fair in FNR or FPR.

    For ``FNR_parity`` the threshold is ``H^-1(1 - alpha)`` (overall false
    positive rate alpha) and the certified gap is ``|G0(t) - G1(t)|``; this is
    exactly the gap between ROC_{H,G0}(alpha) and ROC_{H,G1}(alpha).
    For ``FPR_parity`` the threshold is ``H0^-1(1 - alpha)`` and the certified
    gap is ``|H0(t) - H1(t)|``. Returns ``[(alpha, t), ...]`` for every grid
    point whose gap is at most ``tol``.
    """
    if tol < 0:
        raise DomainError("tol must be nonnegative")
    if mode not in ("FPR_parity", "FNR_parity"):
        raise DomainError(f"unknown mode {mode!r}")
    H0, H1, G0, G1 = _cells(scores_by_cell)
    grid = _check_alpha(np.asarray(list(grid), dtype=np.float64))
    out = []
    if mode == "FNR_parity":
        H = EmpiricalCdf(np.concatenate([H0.sorted_scores, H1.sorted_scores]), "H")
        for a in grid.tolist():
            t = H.inverse(1.0 - a)
            gap = abs(float(G0(t)) - float(G1(t)))
            if gap <= tol:
                out.append((a, float(t)))
    else:
        for a in grid.tolist():
            t = H0.inverse(1.0 - a)
            gap = abs(float(H0(t)) - float(H1(t)))
            if gap <= tol:
                out.append((a, float(t)))
    return out


def audit_scores(scores, labels, groups, alphas: Sequence[float] = (0.125, 0.25, 0.5, 0.75)):
    """All AUC- and ROC-based fairness statistics of a scored sample.

    Returns a plain dict (JSON-ready) with the overall AUC, the C vector,
    the six cell AUCs and ``|Delta_{F,alpha}|`` for both F.
    """
    cells = split_scores(scores, labels, groups)
    neg = np.concatenate([cells["H0"], cells["H1"]])
    pos = np.concatenate([cells["G0"], cells["G1"]])
    aucs = cell_aucs(cells)
    c = c_vector_from_aucs(aucs)
    report = {
        "auc": auc(neg, pos),
        "c_vector": list(c.c),
        "cell_aucs": {f"{a},{b}": v for (a, b), v in aucs.items()},
        "delta_H": {},
        "delta_G": {},
    }
    for a in alphas:
        report["delta_H"][repr(float(a))] = abs(delta("H", cells["H0"], cells["H1"], a))
        report["delta_G"][repr(float(a))] = abs(delta("G", cells["G0"], cells["G1"], a))
    return report


def sign(x: float) -> int:
    """sgn(x) = 2 * 1{x > 0} - 1, so sgn(0) = -1."""
    return 1 if x > 0 else -1



def auc_incomplete(neg, pos, B: int, rng) -> float:
    """Hard AUC averaged over ``B`` (neg, pos) pairs drawn uniformly with replacement."""
    neg = np.asarray(neg, dtype=np.float64).ravel()
    pos = np.asarray(pos, dtype=np.float64).ravel()
    if neg.size == 0 or pos.size == 0:
        raise UndefinedStatisticError("empty sample")
    a = neg[rng.integers(0, neg.size, size=B)]
    b = pos[rng.integers(0, pos.size, size=B)]
    return float((np.count_nonzero(b > a) + 0.5 * np.count_nonzero(b == a)) / B)
