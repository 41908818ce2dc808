"""ADAM with bias correction, and a central finite-difference gradient check."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NonFiniteError


@dataclass
class AdamState:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: list = field(default_factory=list)
    v: list = field(default_factory=list)

    @classmethod
    def like(cls, params, **hyper) -> "AdamState":
        return cls(m=[np.zeros_like(p) for p in params],
                   v=[np.zeros_like(p) for p in params], **hyper)

    def copy(self) -> "AdamState":
        return AdamState(self.lr, self.beta1, self.beta2, self.eps, self.t,
                         [a.copy() for a in self.m], [a.copy() for a in self.v])

    def state_dict(self) -> dict:
        return {"lr": self.lr, "beta1": self.beta1, "beta2": self.beta2,
                "eps": self.eps, "t": self.t, "m": self.m, "v": self.v}

    @classmethod
    def from_state_dict(cls, d: dict) -> "AdamState":
        return cls(d["lr"], d["beta1"], d["beta2"], d["eps"], int(d["t"]),
                   [np.array(a) for a in d["m"]], [np.array(a) for a in d["v"]])


def adam_step(params, grads, state: AdamState, iteration=None, terms=None):
    """One ADAM update. Returns ``(new_params, new_state)``; inputs are not modified."""
    if len(params) != len(grads):
        raise ValueError("params and grads differ in length")
    for g in grads:
        if not np.all(np.isfinite(g)):
            raise NonFiniteError(
                f"non-finite gradient at iteration {iteration}", iteration, terms
            )
    if not state.m:
        state = AdamState.like(params, lr=state.lr, beta1=state.beta1,
                               beta2=state.beta2, eps=state.eps)
    t = state.t + 1
    b1, b2 = state.beta1, state.beta2
    new_params, new_m, new_v = [], [], []
    with np.errstate(over="ignore", invalid="ignore"):
        for p, g, m, v in zip(params, grads, state.m, state.v):
            m = b1 * m + (1 - b1) * g
            v = b2 * v + (1 - b2) * g * g
            m_hat = m / (1 - b1 ** t)
            v_hat = v / (1 - b2 ** t)
            new_params.append(p - state.lr * m_hat / (np.sqrt(v_hat) + state.eps))
            new_m.append(m)
            new_v.append(v)
    # overflowing moments silently freeze the step, so treat them as divergence
    if not all(np.all(np.isfinite(a)) for a in new_params + new_m + new_v):
        raise NonFiniteError(f"optimizer state overflowed at iteration {iteration}",
                             iteration, terms)
    return new_params, AdamState(state.lr, b1, b2, state.eps, t, new_m, new_v)


@dataclass
class GradCheckReport:
    max_rel_error: float
    worst_param: int | None
    worst_index: tuple | None
    n_checked: int
    analytic: list
    numeric: list

    def passed(self, rel_tol: float) -> bool:
        return self.max_rel_error < rel_tol


def grad_check(loss_fn, params, step: float = 1e-5, rel_tol: float = 1e-4,
               min_grad: float = 1e-8) -> GradCheckReport:
    """Compare ``loss_fn``'s analytic gradient with central differences.

    ``loss_fn(params) -> (loss, grads)`` must be deterministic. Relative error
    is ``|a - f| / max(|a|, |f|)``, scored on coordinates whose analytic
    gradient exceeds ``min_grad`` in magnitude.
    """
    params = [np.array(p, dtype=np.float64) for p in params]
    _, analytic = loss_fn(params)
    analytic = [np.asarray(a, dtype=np.float64) for a in analytic]
    numeric = [np.zeros_like(p) for p in params]
    worst, where, checked = 0.0, (None, None), 0
    for k, p in enumerate(params):
        for idx in np.ndindex(p.shape):
            orig = p[idx]
            p[idx] = orig + step
            up, _ = loss_fn(params)
            p[idx] = orig - step
            down, _ = loss_fn(params)
            p[idx] = orig
            f = (up - down) / (2 * step)
            numeric[k][idx] = f
            a = analytic[k][idx]
            if abs(a) <= min_grad:
                continue
            checked += 1
            err = abs(a - f) / max(abs(a), abs(f))
            if err > worst:
                worst, where = err, (k, idx)
    return GradCheckReport(worst, where[0], where[1], checked, analytic, numeric)
