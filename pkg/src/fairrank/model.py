"""Depth-D ReLU scoring network with a batch-normalized scalar output.

The architecture is ``D`` blocks of (affine d->d, ReLU) followed by an affine
map to one unit and a batch-normalization layer with fixed scale 1 and shift
0. Forward and backward passes are written out by hand in numpy.
"""

from __future__ import annotations

import json

import numpy as np

from .errors import ConfigurationError, ShapeError

CHECKPOINT_VERSION = 1


class MlpScorer:
    """Scoring function ``s: R^d -> R``.

    Parameters are kept in ``self.params`` as ``[W1, b1, ..., W_{D+1}, b_{D+1}]``
    with ``W_k`` of shape (fan_in, fan_out). ``running_mean`` and
    ``running_std`` normalize the output in eval mode.
    """

    def __init__(self, depth: int, d: int, width: int | None = None,
                 momentum: float = 0.99, bn_eps: float = 1e-6):
        if depth < 0 or d < 1:
            raise ConfigurationError(f"need depth >= 0 and d >= 1, got {depth}, {d}")
        self.depth = int(depth)
        self.d = int(d)
        self.width = int(width) if width is not None else int(d)
        self.momentum = float(momentum)
        self.bn_eps = float(bn_eps)
        self.params = []
        fan_in = self.d
        for _ in range(self.depth):
            self.params += [np.zeros((fan_in, self.width)), np.zeros(self.width)]
            fan_in = self.width
        self.params += [np.zeros((fan_in, 1)), np.zeros(1)]
        self.running_mean = 0.0
        self.running_std = 1.0
        self.training = False

    @classmethod
    def init(cls, depth: int, d: int, seed: int, width: int | None = None,
             init_std: float = 0.01, **kwargs) -> "MlpScorer":
        """Weights i.i.d. N(0, init_std^2), biases zero."""
        model = cls(depth, d, width=width, **kwargs)
        rng = np.random.default_rng(seed)
        for k in range(0, len(model.params), 2):
            model.params[k] = rng.normal(0.0, init_std, size=model.params[k].shape)
        return model

    @property
    def weights(self):
        return self.params[0::2]

    @property
    def n_params(self) -> int:
        return sum(p.size for p in self.params)

    def weight_sq_norm(self) -> float:
        return float(sum(np.sum(W * W) for W in self.weights))

    def train(self):
        self.training = True
        return self

    def eval(self):
        self.training = False
        return self

    def copy(self) -> "MlpScorer":
        other = MlpScorer(self.depth, self.d, self.width, self.momentum, self.bn_eps)
        other.params = [p.copy() for p in self.params]
        other.running_mean = self.running_mean
        other.running_std = self.running_std
        other.training = self.training
        return other

    def _check(self, X):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.d:
            raise ShapeError(f"expected a batch of shape (N, {self.d}), got {X.shape}")
        return X

    def pre_activation(self, X) -> np.ndarray:
        """Output of the last affine layer, before normalization."""
        h = self._check(X)
        for k in range(self.depth):
            h = np.maximum(h @ self.params[2 * k] + self.params[2 * k + 1], 0.0)
        return (h @ self.params[-2] + self.params[-1])[:, 0]

    def forward(self, X, update_stats: bool = True):
        """Scores of a batch plus the cache needed by :meth:`backward`.

        In train mode the output is normalized with the batch mean and the
        biased batch standard deviation (floored at ``bn_eps``), and the
        running statistics move toward them unless ``update_stats`` is False.
        """
        X = self._check(X)
        acts = [X]
        masks = []
        h = X
        for k in range(self.depth):
            pre = h @ self.params[2 * k] + self.params[2 * k + 1]
            mask = pre > 0
            h = np.where(mask, pre, 0.0)
            masks.append(mask)
            acts.append(h)
        out = (h @ self.params[-2] + self.params[-1])[:, 0]
        if self.training:
            mu = float(out.mean())
            raw_std = float(np.sqrt(np.mean((out - mu) ** 2)))
            std = max(raw_std, self.bn_eps)
            if update_stats:
                m = self.momentum
                self.running_mean = m * self.running_mean + (1 - m) * mu
                self.running_std = max(m * self.running_std + (1 - m) * std, self.bn_eps)
        else:
            mu, std, raw_std = self.running_mean, self.running_std, None
        scores = (out - mu) / std
        cache = {
            "acts": acts,
            "masks": masks,
            "scores": scores,
            "std": std,
            "batch_stats": self.training,
            "std_floored": raw_std is not None and raw_std < self.bn_eps,
        }
        return scores, cache

    def __call__(self, X) -> np.ndarray:
        """Eval-mode scores; never touches the running statistics."""
        X = self._check(X)
        return (self.pre_activation(X) - self.running_mean) / self.running_std

    def backward(self, cache, dscores) -> list:
        """Gradient of a scalar loss w.r.t. every parameter, given dL/dscores."""
        ds = np.asarray(dscores, dtype=np.float64)
        s = cache["scores"]
        std = cache["std"]
        if cache["batch_stats"] and not cache["std_floored"]:
            # batch mean and std are functions of the batch
            dout = (ds - ds.mean() - s * np.mean(ds * s)) / std
        elif cache["batch_stats"]:
            dout = (ds - ds.mean()) / std
        else:
            dout = ds / std
        grads = [None] * len(self.params)
        acts, masks = cache["acts"], cache["masks"]
        g = dout[:, None]
        grads[-2] = acts[-1].T @ g
        grads[-1] = g.sum(axis=0)
        g = g @ self.params[-2].T
        for k in range(self.depth - 1, -1, -1):
            g = np.where(masks[k], g, 0.0)
            grads[2 * k] = acts[k].T @ g
            grads[2 * k + 1] = g.sum(axis=0)
            if k:
                g = g @ self.params[2 * k].T
        return grads

    def state_dict(self) -> dict:
        return {
            "depth": self.depth,
            "d": self.d,
            "width": self.width,
            "momentum": self.momentum,
            "bn_eps": self.bn_eps,
            "running_mean": self.running_mean,
            "running_std": self.running_std,
        }


def save_checkpoint(model: MlpScorer, path, extra: dict | None = None, optimizer=None):
    """Write parameters, running statistics and optional metadata to ``.npz``.

    Values are stored as raw float64 arrays, so a round trip reproduces eval
    outputs bit for bit.
    """
    arrays = {f"param_{i}": p for i, p in enumerate(model.params)}
    arrays["running"] = np.array([model.running_mean, model.running_std])
    meta = {"version": CHECKPOINT_VERSION, "model": model.state_dict(), "extra": extra or {}}
    if optimizer is not None:
        opt = optimizer.state_dict()
        meta["optimizer"] = {k: v for k, v in opt.items() if k not in ("m", "v")}
        for i, (m, v) in enumerate(zip(opt["m"], opt["v"])):
            arrays[f"adam_m_{i}"] = m
            arrays[f"adam_v_{i}"] = v
    arrays["meta"] = np.frombuffer(json.dumps(meta).encode("utf-8"), dtype=np.uint8)
    with open(path, "wb") as fh:
        np.savez(fh, **arrays)


def load_checkpoint(path):
    """Return ``(model, extra, optimizer_state_or_None)``."""
    with np.load(path) as data:
        meta = json.loads(bytes(data["meta"]).decode("utf-8"))
        if meta.get("version") != CHECKPOINT_VERSION:
            raise ConfigurationError(f"unsupported checkpoint version {meta.get('version')}")
        cfg = meta["model"]
        model = MlpScorer(cfg["depth"], cfg["d"], cfg["width"], cfg["momentum"], cfg["bn_eps"])
        model.params = [data[f"param_{i}"].copy() for i in range(len(model.params))]
        running = data["running"]
        model.running_mean = float(running[0])
        model.running_std = float(running[1])
        opt = None
        if "optimizer" in meta:
            opt = dict(meta["optimizer"])
            n = len(model.params)
            opt["m"] = [data[f"adam_m_{i}"].copy() for i in range(n)]
            opt["v"] = [data[f"adam_v_{i}"].copy() for i in range(n)]
    return model, meta.get("extra", {}), opt
