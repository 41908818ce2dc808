"""AUC-based fairness constraints written as Gamma^T C(s) = 0.

Each named constraint also has a mixture form
``AUC(alpha^T D, beta^T D) = AUC(alpha'^T D, beta'^T D)`` over the cell
distributions ``D = (H0, H1, G0, G1)``; :func:`is_relevant` decides whether a
mixture constraint belongs to the Gamma family at all.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core_data import CellCounts
from .errors import ConfigurationError, DegenerateRateError, DomainError
from .metrics import CELL_ORDER

KINDS = ("intra_group", "bnsp", "bpsn", "zero_aeg", "xauc", "reference_group")
ALIASES = {"inter_group_xauc": "xauc", "inter_group": "xauc"}


@dataclass(frozen=True)
class GammaConstraint:
    """Coefficients of ``Gamma^T C(s) = 0``.

    ``gap_scale`` converts ``Gamma^T C(s)`` back to the difference of the two
    sides of the constraint's defining AUC equality (3 for intra-group, 2 for
    BPSN, 1 for the others); losses and reported gaps use that difference.
    """

    gamma: tuple
    kind: str = "custom"
    gap_scale: float = 1.0

    def __post_init__(self):
        g = tuple(float(v) for v in self.gamma)
        if len(g) != 5 or not np.all(np.isfinite(g)):
            raise DomainError(f"Gamma must be five finite numbers, got {self.gamma}")
        object.__setattr__(self, "gamma", g)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.gamma, dtype=dtype)

    def value(self, c) -> float:
        """Gamma^T C."""
        return float(np.dot(self.gamma, np.asarray(c, dtype=np.float64)))

    def gap(self, c) -> float:
        """Signed difference of the constraint's two AUCs, ``gap_scale * Gamma^T C``."""
        return self.gap_scale * self.value(c)

    def auc_weights(self, atol: float = 1e-12) -> tuple[dict, float]:
        """Gamma^T C(s) as ``sum_k w_k * AUC_k + const`` over the six cell AUCs.

        Terms whose weight cancels (e.g. A(H0,G1) for the intra-group
        constraint) are dropped, so a loss built from the expansion only
        samples the AUCs that actually matter.
        """
        # C1 = A(H0,H1) - 1/2, C2 = 1/2 - A(G0,G1), C3 = A(H0,G0) - A(H0,G1),
        # C4 = A(H0,G1) - A(H1,G0), C5 = A(H1,G0) - A(H1,G1)
        g1, g2, g3, g4, g5 = self.gamma
        raw = {
            ("H0", "H1"): g1,
            ("G0", "G1"): -g2,
            ("H0", "G0"): g3,
            ("H0", "G1"): g4 - g3,
            ("H1", "G0"): g5 - g4,
            ("H1", "G1"): -g5,
        }
        weights = {k: w for k, w in raw.items() if abs(w) > atol}
        return weights, (g2 - g1) / 2.0

    def required_cells(self) -> set:
        weights, _ = self.auc_weights()
        return {cell for pair in weights for cell in pair}


@dataclass(frozen=True)
class MixtureConstraint:
    """Equality of two AUCs between mixtures of (H0, H1, G0, G1)."""

    alpha: tuple
    beta: tuple
    alpha_prime: tuple
    beta_prime: tuple

    def __post_init__(self):
        for name in ("alpha", "beta", "alpha_prime", "beta_prime"):
            v = np.asarray(getattr(self, name), dtype=np.float64)
            if v.shape != (4,) or np.any(v < -1e-12) or abs(v.sum() - 1.0) > 1e-9:
                raise DomainError(f"{name} is not a probability vector over 4 cells: {v}")
            object.__setattr__(self, name, tuple(float(x) for x in v))

    def gap(self, cell_auc) -> float:
        """AUC(alpha^T D, beta^T D) - AUC(alpha'^T D, beta'^T D).

        ``cell_auc(a, b)`` must return AUC between cells ``a`` and ``b``
        (names from ``CELL_ORDER``); AUC is bilinear in its two mixture
        arguments, and AUC(F, F) = 1/2.
        """
        def mixed(u, v):
            total = 0.0
            for i, a in enumerate(CELL_ORDER):
                for j, b in enumerate(CELL_ORDER):
                    w = u[i] * v[j]
                    if w:
                        total += w * (0.5 if a == b else cell_auc(a, b))
            return total

        return mixed(self.alpha, self.beta) - mixed(self.alpha_prime, self.beta_prime)


def _e(k):
    v = [0.0] * 4
    v[k] = 1.0
    return tuple(v)


E1, E2, E3, E4 = (_e(k) for k in range(4))


def _rates(rates):
    if rates is None:
        return {}
    if isinstance(rates, CellCounts):
        return rates.rates()
    return dict(rates)


def _need(r, *names):
    missing = [k for k in names if r.get(k) is None]
    if missing:
        raise ConfigurationError(f"rates {missing} are required")
    return [float(r[k]) for k in names]


def canonical_kind(kind: str) -> str:
    kind = ALIASES.get(kind, kind)
    if kind not in KINDS:
        raise ConfigurationError(f"unknown constraint kind {kind!r}; expected one of {KINDS}")
    return kind


def make_named(kind: str, rates=None) -> GammaConstraint:
    """Gamma vector of a named constraint.

    ``rates`` is a :class:`CellCounts` or a mapping with keys ``p, p0, p1,
    q0, q1`` (only needed for ``bnsp``, ``bpsn`` and ``reference_group``).
    """
    kind = canonical_kind(kind)
    r = _rates(rates)
    scale = 1.0
    if kind == "intra_group":
        g = (0, 0, 1 / 3, 1 / 3, 1 / 3)
        scale = 3.0
    elif kind == "bnsp":
        p, p0, p1, q0, q1 = _need(r, "p", "p0", "p1", "q0", "q1")
        if not 0 < p < 1:
            raise DegenerateRateError(f"bnsp needs 0 < p < 1, got p={p}")
        g = (0, 0, q0 * (1 - p0) / (1 - p), 0, q1 * (1 - p1) / (1 - p))
    elif kind == "bpsn":
        p, p0, p1, q0, q1 = _need(r, "p", "p0", "p1", "q0", "q1")
        if not 0 < p < 1:
            raise DegenerateRateError(f"bpsn needs 0 < p < 1, got p={p}")
        g = (0, 0, q0 * p0 / (2 * p), 0.5, q1 * p1 / (2 * p))
        scale = 2.0
    elif kind == "zero_aeg":
        g = (0, 1, 0, 0, 0)
    elif kind == "xauc":
        g = (0, 0, 0, 1, 0)
    else:
        (p0,) = _need(r, "p0")
        if not 0 <= p0 <= 1:
            raise DegenerateRateError(f"reference_group needs p0 in [0, 1], got {p0}")
        g = (0, p0, 1 - p0, 0, 0)
    return GammaConstraint(g, kind, scale)


def mixture_form(kind: str, rates=None) -> MixtureConstraint:
    """The defining AUC equality of a named constraint, as mixture weights."""
    kind = canonical_kind(kind)
    r = _rates(rates)
    if kind == "intra_group":
        return MixtureConstraint(E1, E3, E2, E4)
    if kind == "xauc":
        return MixtureConstraint(E1, E4, E2, E3)
    if kind == "bnsp":
        p, p0, p1, q0, q1 = _need(r, "p", "p0", "p1", "q0", "q1")
        if not 0 < p < 1:
            raise DegenerateRateError(f"bnsp needs 0 < p < 1, got p={p}")
        h = (q0 * (1 - p0) / (1 - p), q1 * (1 - p1) / (1 - p), 0.0, 0.0)
        return MixtureConstraint(h, E3, h, E4)
    p, p0, p1, q0, q1 = _need(r, "p", "p0", "p1", "q0", "q1")
    if not 0 < p < 1:
        raise DegenerateRateError(f"{kind} needs 0 < p < 1, got p={p}")
    g = (0.0, 0.0, q0 * p0 / p, q1 * p1 / p)
    if kind == "bpsn":
        return MixtureConstraint(E1, g, E2, g)
    if kind == "zero_aeg":
        return MixtureConstraint(g, E3, g, E4)
    f0 = (1 - p0, 0.0, p0, 0.0)
    return MixtureConstraint(f0, E3, f0, E4)


def is_relevant(mc: MixtureConstraint, atol: float = 1e-12) -> bool:
    """True iff (e1 + e2)^T [(alpha - alpha') - (beta - beta')] = 0.

    Only such constraints hold automatically whenever H0 = H1 and G0 = G1;
    the others favour one group by construction.
    """
    v = (np.subtract(mc.alpha, mc.alpha_prime)) - (np.subtract(mc.beta, mc.beta_prime))
    return bool(abs(v[0] + v[1]) <= atol)
