"""Linear model, MSE/MAE losses with analytic (sub)gradients, a
finite-difference gradient checker, and the normal-equations solution.

Conventions pinned here and relied on by the tests:
  * MSE gradient carries the true-derivative factor 2/B, not a halved
    convention.
  * MAE uses the subgradient with sign(0) = 0.
  * The closed-form fit augments the design matrix with a ones column,
    so the bias comes out of the same linear solve as the coefficients.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .numerics import as_matrix, as_vector, gram, solve_spd


class LossKind(enum.Enum):
    MSE = "mse"
    MAE = "mae"


@dataclass(frozen=True)
class LinearModel:
    theta: np.ndarray  # (p,)
    bias: float


@dataclass(frozen=True)
class Gradient:
    d_theta: np.ndarray  # (p,)
    d_bias: float


def predict(m: LinearModel, x) -> np.ndarray:
    """x @ theta + bias for a batch of rows."""
    x = as_matrix(x)
    if x.shape[1] != m.theta.shape[0]:
        raise ValueError(
            f"feature count {x.shape[1]} does not match theta length {m.theta.shape[0]}"
        )
    return x @ m.theta + m.bias


def loss(kind: LossKind, pred, target) -> float:
    """Mean squared (or absolute) residual."""
    pred = as_vector(pred)
    target = as_vector(target)
    if pred.shape != target.shape:
        raise ValueError(f"length mismatch: {pred.shape[0]} vs {target.shape[0]}")
    if pred.shape[0] == 0:
        raise ValueError("loss of empty vectors is undefined")
    r = pred - target
    if kind is LossKind.MSE:
        return float(np.dot(r, r) / r.shape[0])
    return float(np.abs(r).mean())


def loss_gradient(kind: LossKind, m: LinearModel, x, target) -> Gradient:
    """Analytic gradient of the batch loss with respect to (theta, bias).

    MSE: d_theta = (2/B) x.T (pred - target), d_bias = (2/B) sum(pred - target).
    MAE: same with the residual replaced by its sign (sign(0) = 0) and
    factor 1/B.
    """
    x = as_matrix(x)
    target = as_vector(target)
    if x.shape[0] != target.shape[0]:
        raise ValueError(f"row count {x.shape[0]} does not match targets {target.shape[0]}")
    if x.shape[0] == 0:
        raise ValueError("gradient of an empty batch is undefined")
    r = predict(m, x) - target
    b = x.shape[0]
    if kind is LossKind.MSE:
        scale = 2.0 / b
        return Gradient(d_theta=scale * (x.T @ r), d_bias=float(scale * r.sum()))
    s = np.sign(r)
    return Gradient(d_theta=(x.T @ s) / b, d_bias=float(s.sum() / b))


def gradient_check(
    kind: LossKind, m: LinearModel, x, target, h: float = 1e-6
) -> float:
    """Max relative error between the analytic gradient and central
    differences over all p+1 coordinates.

    The denominator is max(|analytic|, |numeric|, 1e-3): a floor so that
    coordinates with near-zero gradient compare absolutely instead of
    amplifying rounding noise. MAE callers must avoid points with a zero
    residual; the kink makes finite differences meaningless there.
    """
    if h <= 0:
        raise ValueError(f"h must be positive, got {h}")
    x = as_matrix(x)
    target = as_vector(target)
    analytic = loss_gradient(kind, m, x, target)

    def loss_at(theta: np.ndarray, bias: float) -> float:
        return loss(kind, predict(LinearModel(theta, bias), x), target)

    worst = 0.0
    p = m.theta.shape[0]
    for k in range(p + 1):
        if k < p:
            bump = np.zeros(p)
            bump[k] = h
            numeric = (
                loss_at(m.theta + bump, m.bias) - loss_at(m.theta - bump, m.bias)
            ) / (2 * h)
            a = analytic.d_theta[k]
        else:
            numeric = (loss_at(m.theta, m.bias + h) - loss_at(m.theta, m.bias - h)) / (
                2 * h
            )
            a = analytic.d_bias
        err = abs(a - numeric) / max(abs(a), abs(numeric), 1e-3)
        worst = max(worst, err)
    return worst


def closed_form(x, y) -> LinearModel:
    """Least-squares minimizer via the normal equations.

    Appends a ones column for the bias, forms the Gram matrix and solves
    with the SPD solver. Raises SingularMatrixError when the augmented
    Gram matrix is rank deficient.
    """
    x = as_matrix(x)
    y = as_vector(y)
    if x.shape[0] != y.shape[0]:
        raise ValueError(f"row count {x.shape[0]} does not match targets {y.shape[0]}")
    augmented = np.hstack([x, np.ones((x.shape[0], 1))])
    params = solve_spd(gram(augmented), augmented.T @ y)
    return LinearModel(theta=params[:-1].copy(), bias=float(params[-1]))
