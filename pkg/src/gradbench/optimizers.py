"""The seven parameter-update rules, each with per-parameter state.

Update rules, written per coordinate (applied identically to the
coefficient vector and the bias scalar):

  sgd                 theta' = theta - lr * g
  momentum (classic)  v = mom * v + lr * g;          theta' = theta - v
  momentum (decoupled) v = mom * v + g;              theta' = theta - lr * v
  nag (classic)       v = mom * v + lr * g(theta - mom * v_prev)
                                                     theta' = theta - v
  nag (decoupled)     v = mom * v + g; d = g + mom * v
                                                     theta' = theta - lr * d
  adagrad             G += g^2;                      theta' = theta - lr * g / sqrt(G + eps)
  rmsprop             E = decay * E + (1-decay) * g^2
                                                     theta' = theta - lr * g / sqrt(E + eps)
  adadelta            rms_g = sqrt(E[g^2] + eps), rms_d = sqrt(E[d^2] + eps) from
                      the previous step; delta = -(rms_d / rms_g) * g; E[d^2]
                      accumulates the unscaled delta; theta' = theta + lr * delta
  adam                m = b1*m + (1-b1)*g; v = b2*v + (1-b2)*g^2; bias-corrected
                      by 1/(1 - b^t);               theta' = theta - lr * mhat / (sqrt(vhat) + eps)

Note the epsilon placement: inside the square root for adagrad, rmsprop
and adadelta, outside for adam. The classic and decoupled forms of
momentum and NAG differ in where the learning rate enters the velocity;
classic NAG is the only rule that needs a gradient evaluated away from
the current parameters, so it takes a gradient callback.

Updates are functional: `step` returns a fresh (model, state) pair and
never mutates its inputs, so trajectories are replayable.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .model import Gradient, LinearModel

GradientFn = Callable[[LinearModel], Gradient]

_PARAM_KEYS = ("theta", "bias")


class DivergenceError(Exception):
    """Raised when a gradient contains non-finite entries."""


class OptimizerKind(enum.Enum):
    SGD = "sgd"
    MOMENTUM = "momentum"
    NAG = "nag"
    ADAGRAD = "adagrad"
    RMSPROP = "rmsprop"
    ADADELTA = "adadelta"
    ADAM = "adam"


class Variant(enum.Enum):
    """Which published form of momentum/NAG to use.

    CLASSIC keeps the learning rate inside the velocity recursion;
    DECOUPLED (the common framework form) accumulates raw gradients and
    applies the learning rate at the end. Ignored by the other kinds.
    """

    CLASSIC = "classic"
    DECOUPLED = "decoupled"


CONSTANT_LR_KINDS = (OptimizerKind.SGD, OptimizerKind.MOMENTUM, OptimizerKind.NAG)
ADAPTIVE_LR_KINDS = (
    OptimizerKind.ADAGRAD,
    OptimizerKind.RMSPROP,
    OptimizerKind.ADADELTA,
    OptimizerKind.ADAM,
)
MOMENTUM_KINDS = (OptimizerKind.MOMENTUM, OptimizerKind.NAG)

# Per-kind learning-rate defaults used when the caller does not pick one.
_DEFAULT_LR = {
    OptimizerKind.RMSPROP: 0.001,
    OptimizerKind.ADADELTA: 1.0,
    OptimizerKind.ADAM: 0.001,
}


@dataclass(frozen=True)
class OptimizerSpec:
    """Hyperparameters for one optimizer instance.

    lr=None resolves to the kind's customary default (0.001 for rmsprop
    and adam, 1.0 for adadelta, 0.01 otherwise). lr=0 is permitted so a
    run can be frozen deliberately.
    """

    kind: OptimizerKind
    variant: Variant = Variant.DECOUPLED
    lr: Optional[float] = None
    momentum: float = 0.9
    decay: float = 0.9
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if self.lr is None:
            object.__setattr__(self, "lr", _DEFAULT_LR.get(self.kind, 0.01))
        if self.lr < 0:
            raise ValueError(f"lr must be >= 0, got {self.lr}")
        if not 0.0 <= self.momentum < 1.0:
            raise ValueError(f"momentum must be in [0, 1), got {self.momentum}")
        if not 0.0 < self.decay < 1.0:
            raise ValueError(f"decay must be in (0, 1), got {self.decay}")
        if not 0.0 <= self.beta1 < 1.0:
            raise ValueError(f"beta1 must be in [0, 1), got {self.beta1}")
        if not 0.0 <= self.beta2 < 1.0:
            raise ValueError(f"beta2 must be in [0, 1), got {self.beta2}")
        if self.eps <= 0:
            raise ValueError(f"eps must be > 0, got {self.eps}")


def _zeros(p: int) -> dict:
    return {"theta": np.zeros(p), "bias": np.float64(0.0)}


@dataclass(frozen=True)
class OptimizerState:
    """Zero-initialized accumulators, one slot per rule family.

    Each slot mirrors the parameter layout: a (p,) array for the
    coefficients and a scalar for the bias. Unused slots stay at zero.
    """

    step_count: int
    velocity: dict
    grad_sq_sum: dict  # adagrad G
    avg_sq_grad: dict  # rmsprop / adadelta E[g^2]
    avg_sq_update: dict  # adadelta E[delta^2]
    moment1: dict  # adam m
    moment2: dict  # adam v

    @classmethod
    def initial(cls, p: int) -> "OptimizerState":
        return cls(
            step_count=0,
            velocity=_zeros(p),
            grad_sq_sum=_zeros(p),
            avg_sq_grad=_zeros(p),
            avg_sq_update=_zeros(p),
            moment1=_zeros(p),
            moment2=_zeros(p),
        )


def _split(model: LinearModel, grad: Gradient):
    params = {"theta": model.theta, "bias": np.float64(model.bias)}
    g = {"theta": grad.d_theta, "bias": np.float64(grad.d_bias)}
    return params, g


def _join(params: dict) -> LinearModel:
    return LinearModel(theta=params["theta"], bias=float(params["bias"]))


def _require_finite(grad: Gradient) -> None:
    if not (np.isfinite(grad.d_theta).all() and math.isfinite(grad.d_bias)):
        raise DivergenceError("gradient contains non-finite entries")


def step_sgd(spec, state, model, grad):
    _require_finite(grad)
    params, g = _split(model, grad)
    new = {k: params[k] - spec.lr * g[k] for k in _PARAM_KEYS}
    return _join(new), replace(state, step_count=state.step_count + 1)


def step_momentum_classic(spec, state, model, grad):
    _require_finite(grad)
    params, g = _split(model, grad)
    v, new = {}, {}
    for k in _PARAM_KEYS:
        v[k] = spec.momentum * state.velocity[k] + spec.lr * g[k]
        new[k] = params[k] - v[k]
    return _join(new), replace(state, step_count=state.step_count + 1, velocity=v)


def step_momentum_decoupled(spec, state, model, grad):
    _require_finite(grad)
    params, g = _split(model, grad)
    v, new = {}, {}
    for k in _PARAM_KEYS:
        v[k] = spec.momentum * state.velocity[k] + g[k]
        new[k] = params[k] - spec.lr * v[k]
    return _join(new), replace(state, step_count=state.step_count + 1, velocity=v)


def step_nag_classic(spec, state, model, grad_fn: GradientFn):
    """Velocity update uses the gradient at the look-ahead point
    theta - momentum * v, so the caller supplies a gradient function."""
    lookahead = LinearModel(
        theta=model.theta - spec.momentum * state.velocity["theta"],
        bias=float(model.bias - spec.momentum * state.velocity["bias"]),
    )
    grad = grad_fn(lookahead)
    _require_finite(grad)
    params, g = _split(model, grad)
    v, new = {}, {}
    for k in _PARAM_KEYS:
        v[k] = spec.momentum * state.velocity[k] + spec.lr * g[k]
        new[k] = params[k] - v[k]
    return _join(new), replace(state, step_count=state.step_count + 1, velocity=v)


def step_nag_decoupled(spec, state, model, grad):
    _require_finite(grad)
    params, g = _split(model, grad)
    v, new = {}, {}
    for k in _PARAM_KEYS:
        v[k] = spec.momentum * state.velocity[k] + g[k]
        d = g[k] + spec.momentum * v[k]
        new[k] = params[k] - spec.lr * d
    return _join(new), replace(state, step_count=state.step_count + 1, velocity=v)


def step_adagrad(spec, state, model, grad):
    _require_finite(grad)
    params, g = _split(model, grad)
    accum, new = {}, {}
    for k in _PARAM_KEYS:
        accum[k] = state.grad_sq_sum[k] + g[k] * g[k]
        new[k] = params[k] - spec.lr * g[k] / np.sqrt(accum[k] + spec.eps)
    return _join(new), replace(
        state, step_count=state.step_count + 1, grad_sq_sum=accum
    )


def step_rmsprop(spec, state, model, grad):
    _require_finite(grad)
    params, g = _split(model, grad)
    avg, new = {}, {}
    for k in _PARAM_KEYS:
        avg[k] = spec.decay * state.avg_sq_grad[k] + (1.0 - spec.decay) * g[k] * g[k]
        new[k] = params[k] - spec.lr * g[k] / np.sqrt(avg[k] + spec.eps)
    return _join(new), replace(state, step_count=state.step_count + 1, avg_sq_grad=avg)


def step_adadelta(spec, state, model, grad):
    """RMS-ratio rule. The update accumulator sees the raw delta; the
    learning rate (1 by default) only scales what is applied."""
    _require_finite(grad)
    params, g = _split(model, grad)
    avg_g, avg_d, new = {}, {}, {}
    for k in _PARAM_KEYS:
        avg_g[k] = spec.decay * state.avg_sq_grad[k] + (1.0 - spec.decay) * g[k] * g[k]
        rms_g = np.sqrt(avg_g[k] + spec.eps)
        rms_d_prev = np.sqrt(state.avg_sq_update[k] + spec.eps)
        delta = -(rms_d_prev / rms_g) * g[k]
        avg_d[k] = spec.decay * state.avg_sq_update[k] + (1.0 - spec.decay) * delta * delta
        new[k] = params[k] + spec.lr * delta
    return _join(new), replace(
        state,
        step_count=state.step_count + 1,
        avg_sq_grad=avg_g,
        avg_sq_update=avg_d,
    )


def step_adam(spec, state, model, grad):
    _require_finite(grad)
    params, g = _split(model, grad)
    t = state.step_count + 1
    c1 = 1.0 - spec.beta1**t
    c2 = 1.0 - spec.beta2**t
    m, v, new = {}, {}, {}
    for k in _PARAM_KEYS:
        m[k] = spec.beta1 * state.moment1[k] + (1.0 - spec.beta1) * g[k]
        v[k] = spec.beta2 * state.moment2[k] + (1.0 - spec.beta2) * g[k] * g[k]
        m_hat = m[k] / c1
        v_hat = v[k] / c2
        new[k] = params[k] - spec.lr * m_hat / (np.sqrt(v_hat) + spec.eps)
    return _join(new), replace(state, step_count=t, moment1=m, moment2=v)


def step(
    spec: OptimizerSpec,
    state: OptimizerState,
    model: LinearModel,
    grad: Optional[Gradient] = None,
    *,
    grad_fn: Optional[GradientFn] = None,
):
    """Apply one update of the rule selected by spec.kind/spec.variant.

    Classic NAG requires grad_fn (it re-evaluates the gradient at the
    look-ahead point); every other rule takes grad directly, falling back
    to grad_fn(model) when only the callback is given. Each rule calls
    grad_fn at most once.
    """
    kind = spec.kind
    if kind is OptimizerKind.NAG and spec.variant is Variant.CLASSIC:
        if grad_fn is None:
            raise ValueError("classic NAG needs a gradient function for its look-ahead")
        return step_nag_classic(spec, state, model, grad_fn)
    if grad is None:
        if grad_fn is None:
            raise ValueError("step needs a gradient or a gradient function")
        grad = grad_fn(model)
    if kind is OptimizerKind.SGD:
        return step_sgd(spec, state, model, grad)
    if kind is OptimizerKind.MOMENTUM:
        if spec.variant is Variant.CLASSIC:
            return step_momentum_classic(spec, state, model, grad)
        return step_momentum_decoupled(spec, state, model, grad)
    if kind is OptimizerKind.NAG:
        return step_nag_decoupled(spec, state, model, grad)
    if kind is OptimizerKind.ADAGRAD:
        return step_adagrad(spec, state, model, grad)
    if kind is OptimizerKind.RMSPROP:
        return step_rmsprop(spec, state, model, grad)
    if kind is OptimizerKind.ADADELTA:
        return step_adadelta(spec, state, model, grad)
    if kind is OptimizerKind.ADAM:
        return step_adam(spec, state, model, grad)
    raise ValueError(f"unknown optimizer kind {kind!r}")
