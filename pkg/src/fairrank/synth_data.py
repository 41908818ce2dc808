"""The two synthetic distributions on [0, 1]^2 used to study the trade-offs.

``square``: both groups uniform on the unit square, P(Y=+1 | x, Z=0) = x1 and
P(Y=+1 | x, Z=1) = x2.

``disk``: group 0 uniform on the quarter disk of radius 1/2, group 1 uniform
on the quarter annulus 1/2 <= |x| <= 1, and P(Y=+1 | x) = (2/pi) arctan(x2/x1)
for both groups. The support bounds apply to the radius |x| (not |x|^2):
only then do the densities 16/pi and 16/(3 pi) integrate to one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core_data import Dataset
from .errors import ConfigurationError


@dataclass(frozen=True)
class SquareConfig:
    n: int
    q1: float = 17 / 20
    seed: int = 0

    def __post_init__(self):
        _validate(self.n, self.q1)


@dataclass(frozen=True)
class DiskConfig:
    n: int
    q1: float = 0.5
    seed: int = 0

    def __post_init__(self):
        _validate(self.n, self.q1)


def _validate(n, q1):
    if n < 1:
        raise ConfigurationError(f"n must be >= 1, got {n}")
    if not 0.0 <= q1 <= 1.0:
        raise ConfigurationError(f"q1 must lie in [0, 1], got {q1}")


def gen_square(cfg: SquareConfig) -> Dataset:
    rng = np.random.default_rng(cfg.seed)
    z = (rng.random(cfg.n) < cfg.q1).astype(np.int64)
    X = rng.random((cfg.n, 2))
    eta = np.where(z == 1, X[:, 1], X[:, 0])
    y = np.where(rng.random(cfg.n) < eta, 1, -1)
    return Dataset(X, y, z)


def gen_disk(cfg: DiskConfig) -> Dataset:
    rng = np.random.default_rng(cfg.seed)
    z = (rng.random(cfg.n) < cfg.q1).astype(np.int64)
    theta = rng.random(cfg.n) * (np.pi / 2)
    u = rng.random(cfg.n)
    r = np.where(z == 1, np.sqrt(0.25 + 0.75 * u), 0.5 * np.sqrt(u))
    X = np.column_stack([r * np.cos(theta), r * np.sin(theta)])
    eta = (2 / np.pi) * np.arctan2(X[:, 1], X[:, 0])
    y = np.where(rng.random(cfg.n) < eta, 1, -1)
    return Dataset(X, y, z)


GENERATORS = {"square": (SquareConfig, gen_square), "disk": (DiskConfig, gen_disk)}


def generate(name: str, n: int, seed: int, q1: float | None = None) -> Dataset:
    try:
        config_cls, gen = GENERATORS[name]
    except KeyError:
        raise ConfigurationError(f"unknown generator {name!r}; expected one of {sorted(GENERATORS)}")
    cfg = config_cls(n=n, seed=seed) if q1 is None else config_cls(n=n, q1=q1, seed=seed)
    return gen(cfg)


def linear_scores(X, c: float, family: str = "square") -> np.ndarray:
    """``c x1 + (1-c) x2`` for the square, ``-c x1 + (1-c) x2`` for the disk."""
    X = np.asarray(X, dtype=np.float64)
    sign = 1.0 if family == "square" else -1.0
    return sign * c * X[:, 0] + (1 - c) * X[:, 1]


def equivalent_c(weights, family: str = "square") -> float:
    """The ``c`` of the linear family pointing in the same direction as ``weights``.

    Only meaningful when the direction lies in the family's quadrant; the
    sign of the first weight is flipped for the disk family before
    normalizing.
    """
    w = np.asarray(weights, dtype=np.float64).ravel()
    if w.size != 2:
        raise ConfigurationError("equivalent_c needs a 2-d weight vector")
    w1 = w[0] if family == "square" else -w[0]
    return float(w1 / (w1 + w[1]))
