"""Optimizer benchmark on synthetic least-squares problems."""

from .bench import Grid, default_grid, read_csv, run_grid, write_csv
from .dataset import Dataset, Split, generate, split
from .model import (
    Gradient,
    LinearModel,
    LossKind,
    closed_form,
    gradient_check,
    loss,
    loss_gradient,
    predict,
)
from .numerics import Rng, SingularMatrixError, gram, matvec, solve_spd
from .optimizers import (
    DivergenceError,
    OptimizerKind,
    OptimizerSpec,
    OptimizerState,
    Variant,
    step,
)
from .trainer import (
    BatchStrategy,
    EpochRecord,
    GradientCounter,
    RunConfig,
    init_model,
    run,
    sample_batch,
)

__version__ = "0.1.0"

__all__ = [
    "BatchStrategy",
    "Dataset",
    "DivergenceError",
    "EpochRecord",
    "Gradient",
    "GradientCounter",
    "Grid",
    "LinearModel",
    "LossKind",
    "OptimizerKind",
    "OptimizerSpec",
    "OptimizerState",
    "Rng",
    "RunConfig",
    "SingularMatrixError",
    "Split",
    "Variant",
    "closed_form",
    "default_grid",
    "generate",
    "gradient_check",
    "gram",
    "init_model",
    "loss",
    "loss_gradient",
    "matvec",
    "predict",
    "read_csv",
    "run",
    "run_grid",
    "sample_batch",
    "solve_spd",
    "split",
    "step",
    "write_csv",
]
