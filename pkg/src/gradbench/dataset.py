"""Synthetic least-squares dataset generation and train/validation split.

The recipe: draw an n-by-p design matrix from U(0, 100), divide every
entry by the single global maximum so all features land in [0, 1], draw
ground-truth coefficients, bias and noise from N(0, 1), and assemble
targets as y = x_norm @ theta + bias + noise_scale * eps.

Draw order (one Rng seeded with the dataset seed):
  1. n*p uniforms filling the raw design matrix row by row,
  2. p normals for the true coefficients,
  3. one normal for the true bias,
  4. n normals for the noise vector.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .numerics import Rng

DEFAULT_SEED = 100
DEFAULT_N = 1000
DEFAULT_P = 5
DEFAULT_NOISE_SCALE = 0.1


@dataclass(frozen=True)
class Dataset:
    """Generated data plus the ground truth that produced it."""

    x_norm: np.ndarray  # (n, p), entries in [0, 1]
    y: np.ndarray  # (n,)
    true_theta: np.ndarray  # (p,)
    true_bias: float
    noise_scale: float
    seed: int

    @property
    def n(self) -> int:
        return self.x_norm.shape[0]

    @property
    def p(self) -> int:
        return self.x_norm.shape[1]


@dataclass(frozen=True)
class Split:
    """Disjoint train/validation index sets covering 0..n-1."""

    train_indices: np.ndarray
    val_indices: np.ndarray


def generate(
    seed: int = DEFAULT_SEED,
    n: int = DEFAULT_N,
    p: int = DEFAULT_P,
    noise_scale: float = DEFAULT_NOISE_SCALE,
) -> Dataset:
    """Generate a dataset; a pure function of (seed, n, p, noise_scale)."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if noise_scale < 0:
        raise ValueError(f"noise_scale must be >= 0, got {noise_scale}")

    rng = Rng(seed)
    raw = np.empty((n, p))
    flat = raw.reshape(-1)
    for i in range(n * p):
        flat[i] = rng.uniform(0.0, 100.0)
    theta = np.array([rng.normal() for _ in range(p)])
    bias = rng.normal()
    eps = np.array([rng.normal() for _ in range(n)])

    x_norm = raw / raw.max()
    y = x_norm @ theta + bias + noise_scale * eps
    x_norm.setflags(write=False)
    y.setflags(write=False)
    theta.setflags(write=False)
    return Dataset(
        x_norm=x_norm,
        y=y,
        true_theta=theta,
        true_bias=bias,
        noise_scale=noise_scale,
        seed=seed,
    )


def split(d: Dataset, seed: int, train_fraction: float = 0.9) -> Split:
    """Seeded shuffle of 0..n-1; first floor(n * fraction) indices train,
    the remainder validation."""
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must be in (0, 1), got {train_fraction}")
    rng = Rng(seed)
    order = list(range(d.n))
    rng.shuffle(order)
    n_train = int(d.n * train_fraction)
    train = np.array(order[:n_train], dtype=np.int64)
    val = np.array(order[n_train:], dtype=np.int64)
    train.setflags(write=False)
    val.setflags(write=False)
    return Split(train_indices=train, val_indices=val)


def write_csv(d: Dataset, path: str | Path) -> None:
    """Write the dataset as CSV with header x1..xp,y, 17 significant
    digits, plus a JSON sidecar <path>.json with the generation recipe."""
    path = Path(path)
    with open(path, "w") as f:
        f.write(",".join(f"x{j + 1}" for j in range(d.p)) + ",y\n")
        for i in range(d.n):
            row = [f"{v:.17g}" for v in d.x_norm[i]]
            row.append(f"{d.y[i]:.17g}")
            f.write(",".join(row) + "\n")
    sidecar = {
        "seed": d.seed,
        "n": d.n,
        "p": d.p,
        "noise_scale": d.noise_scale,
        "true_theta": [float(v) for v in d.true_theta],
        "true_bias": d.true_bias,
    }
    with open(path.with_suffix(path.suffix + ".json"), "w") as f:
        json.dump(sidecar, f, indent=2)
        f.write("\n")
