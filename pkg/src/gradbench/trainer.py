"""Training loop: batch sampling, one optimizer step per epoch, and
per-epoch train/validation loss records with a divergence guard.

An epoch here is exactly one parameter update on one sampled batch, so a
run with batch size B and E epochs touches B*E gradient rows in total.
Train loss is reported in the configured loss kind; validation loss is
always MSE. The guard flags an epoch as diverged (and stops the run)
when any loss or parameter is non-finite or exceeds the threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dataset import Dataset, Split
from .model import LinearModel, LossKind, loss, loss_gradient, predict
from .numerics import Rng
from .optimizers import (
    DivergenceError,
    OptimizerSpec,
    OptimizerState,
    step,
)

DEFAULT_DIVERGENCE_THRESHOLD = 1e10


@dataclass(frozen=True)
class BatchStrategy:
    """Batch size B: 1 is stochastic, the train-set size is full batch,
    anything between is mini-batch."""

    batch_size: int

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")


@dataclass(frozen=True)
class RunConfig:
    """One experiment cell: optimizer, loss, batch regime and the seeds
    that make the run reproducible."""

    optimizer: OptimizerSpec
    loss: LossKind = LossKind.MSE
    batch: BatchStrategy = field(default_factory=lambda: BatchStrategy(32))
    epochs: int = 1000
    data_seed: int = 100
    split_seed: int = 200
    init_seed: int = 300
    batch_seed: int = 400
    divergence_threshold: float = DEFAULT_DIVERGENCE_THRESHOLD

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.divergence_threshold <= 0:
            raise ValueError("divergence_threshold must be positive")


@dataclass(frozen=True)
class EpochRecord:
    epoch: int  # 1-based
    train_loss: float
    val_loss: float  # always MSE
    diverged: bool


@dataclass
class GradientCounter:
    """Optional instrumentation: counts example rows used in gradient
    evaluations (B per epoch, lookahead included)."""

    rows: int = 0


def init_model(p: int, seed: int) -> LinearModel:
    """Coefficients and bias drawn i.i.d. uniform on (-1/sqrt(p), 1/sqrt(p)),
    theta entries first, bias last."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    rng = Rng(seed)
    bound = 1.0 / math.sqrt(p)
    theta = np.array([rng.uniform(-bound, bound) for _ in range(p)])
    return LinearModel(theta=theta, bias=rng.uniform(-bound, bound))


def sample_batch(
    strategy: BatchStrategy, train_indices: np.ndarray, rng: Rng
) -> np.ndarray:
    """B distinct indices drawn uniformly without replacement via a
    partial Fisher-Yates pass. Full batch returns the train indices in
    order without consuming randomness."""
    n = len(train_indices)
    b = strategy.batch_size
    if b > n:
        raise ValueError(f"batch size {b} exceeds train size {n}")
    if b == n:
        return np.asarray(train_indices)
    pool = list(train_indices)
    for i in range(b):
        j = i + rng.below(n - i)
        pool[i], pool[j] = pool[j], pool[i]
    return np.array(pool[:b], dtype=np.int64)


def _exceeds(value: float, threshold: float) -> bool:
    return not math.isfinite(value) or abs(value) > threshold


def run(
    config: RunConfig,
    d: Dataset,
    s: Split,
    counter: GradientCounter | None = None,
) -> list[EpochRecord]:
    """Execute one training run and return its per-epoch records.

    Deterministic: the same (config, dataset, split) always produces the
    same record sequence, regardless of what else runs concurrently.
    """
    if config.batch.batch_size > len(s.train_indices):
        raise ValueError(
            f"batch size {config.batch.batch_size} exceeds "
            f"train size {len(s.train_indices)}"
        )
    x_train = d.x_norm[s.train_indices]
    y_train = d.y[s.train_indices]
    x_val = d.x_norm[s.val_indices]
    y_val = d.y[s.val_indices]

    model = init_model(d.p, config.init_seed)
    state = OptimizerState.initial(d.p)
    rng = Rng(config.batch_seed)
    threshold = config.divergence_threshold

    records: list[EpochRecord] = []
    for epoch in range(1, config.epochs + 1):
        idx = sample_batch(config.batch, s.train_indices, rng)
        xb = d.x_norm[idx]
        yb = d.y[idx]

        def grad_fn(m: LinearModel):
            if counter is not None:
                counter.rows += len(idx)
            return loss_gradient(config.loss, m, xb, yb)

        try:
            model, state = step(config.optimizer, state, model, grad_fn=grad_fn)
        except DivergenceError:
            records.append(
                EpochRecord(epoch, float("nan"), float("nan"), diverged=True)
            )
            break

        train_loss = loss(config.loss, predict(model, x_train), y_train)
        val_loss = loss(LossKind.MSE, predict(model, x_val), y_val)
        diverged = (
            _exceeds(train_loss, threshold)
            or _exceeds(val_loss, threshold)
            or not np.isfinite(model.theta).all()
            or np.abs(model.theta).max() > threshold
            or _exceeds(model.bias, threshold)
        )
        records.append(EpochRecord(epoch, train_loss, val_loss, diverged))
        if diverged:
            break
    return records
