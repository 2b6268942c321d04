"""Experiment grid: cell enumeration, parallel execution, CSV persistence.

The default grid crosses 7 optimizers x 4 learning rates x 3 batch
regimes, with a momentum axis {0.1, 0.9} for the two momentum-bearing
optimizers, 1000 epochs each. Results are written as CSV with losses at
17 significant digits so a parse-back reproduces every double exactly,
and rows sorted by (run_id, epoch) so output is byte-identical at any
parallelism level.
"""

from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

from .dataset import Dataset, Split
from .model import LossKind
from .optimizers import (
    MOMENTUM_KINDS,
    OptimizerKind,
    OptimizerSpec,
    Variant,
)
from .trainer import (
    DEFAULT_DIVERGENCE_THRESHOLD,
    BatchStrategy,
    EpochRecord,
    RunConfig,
    run,
)

FULL_BATCH = None  # sentinel in Grid.batch_sizes, resolved to the train size

DEFAULT_LEARNING_RATES = (1.0, 0.1, 0.01, 0.001)
DEFAULT_BATCH_SIZES = (1, 32, FULL_BATCH)
DEFAULT_MOMENTA = (0.1, 0.9)

DEFAULT_SPLIT_SEED = 200
DEFAULT_INIT_SEED = 300
DEFAULT_BATCH_SEED = 400

CSV_HEADER = (
    "run_id,optimizer,variant,lr,momentum,batch_size,epoch,train_loss,val_loss,diverged"
)


class CsvFormatError(Exception):
    """Raised on malformed result CSV, carrying the offending line number."""

    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


@dataclass(frozen=True)
class Grid:
    """Cell axes. batch_sizes may contain FULL_BATCH (None), resolved to
    the train-set size when cells are enumerated."""

    optimizers: Sequence[OptimizerSpec]
    learning_rates: Sequence[float] = DEFAULT_LEARNING_RATES
    batch_sizes: Sequence[Optional[int]] = DEFAULT_BATCH_SIZES
    momenta: Sequence[float] = DEFAULT_MOMENTA
    epochs: int = 1000
    loss: LossKind = LossKind.MSE


def default_grid(variant: Variant = Variant.DECOUPLED, epochs: int = 1000) -> Grid:
    templates = tuple(OptimizerSpec(kind=kind, variant=variant) for kind in OptimizerKind)
    return Grid(optimizers=templates, epochs=epochs)


@dataclass(frozen=True)
class GridCell:
    run_id: str
    spec: OptimizerSpec
    batch_size: int


@dataclass(frozen=True)
class RunResult:
    cell: GridCell
    records: list[EpochRecord] = field(default_factory=list)


def make_run_id(spec: OptimizerSpec, batch_size: int) -> str:
    """Stable key: kind[-variant]-lr..[-m..]-b.. with the momentum and
    variant parts present only for momentum-bearing optimizers."""
    parts = [spec.kind.value]
    if spec.kind in MOMENTUM_KINDS:
        parts.append(spec.variant.value)
    parts.append(f"lr{spec.lr:g}")
    if spec.kind in MOMENTUM_KINDS:
        parts.append(f"m{spec.momentum:g}")
    parts.append(f"b{batch_size}")
    return "-".join(parts)


def enumerate_cells(grid: Grid, n_train: int) -> list[GridCell]:
    """Cartesian product of the applicable axes, skipping the momentum
    axis for optimizers that do not use it."""
    cells = []
    for template in grid.optimizers:
        momenta = grid.momenta if template.kind in MOMENTUM_KINDS else (template.momentum,)
        for lr in grid.learning_rates:
            for mom in momenta:
                spec = replace(template, lr=lr, momentum=mom)
                for b in grid.batch_sizes:
                    size = n_train if b is FULL_BATCH else b
                    cells.append(GridCell(make_run_id(spec, size), spec, size))
    ids = [c.run_id for c in cells]
    if len(set(ids)) != len(ids):
        raise ValueError("grid produced duplicate run ids")
    return cells


def _cell_config(cell: GridCell, grid_args: dict) -> RunConfig:
    return RunConfig(
        optimizer=cell.spec,
        loss=grid_args["loss"],
        batch=BatchStrategy(cell.batch_size),
        epochs=grid_args["epochs"],
        data_seed=grid_args["data_seed"],
        split_seed=grid_args["split_seed"],
        init_seed=grid_args["init_seed"],
        batch_seed=grid_args["batch_seed"],
        divergence_threshold=grid_args["divergence_threshold"],
    )


def _run_cell(args) -> RunResult:
    cell, d, s, grid_args = args
    records = run(_cell_config(cell, grid_args), d, s)
    return RunResult(cell=cell, records=records)


def run_grid(
    grid: Grid,
    d: Dataset,
    s: Split,
    parallelism: int = 1,
    *,
    split_seed: int = DEFAULT_SPLIT_SEED,
    init_seed: int = DEFAULT_INIT_SEED,
    batch_seed: int = DEFAULT_BATCH_SEED,
    divergence_threshold: float = DEFAULT_DIVERGENCE_THRESHOLD,
) -> list[RunResult]:
    """Run every cell and return results sorted by run_id.

    Cells are independent (shared init and batch seeds, fresh state), so
    the output is identical for any parallelism level. Diverged cells
    simply carry truncated records; they never abort the grid.
    """
    if parallelism < 1:
        raise ValueError(f"parallelism must be >= 1, got {parallelism}")
    cells = enumerate_cells(grid, n_train=len(s.train_indices))
    grid_args = {
        "loss": grid.loss,
        "epochs": grid.epochs,
        "data_seed": d.seed,
        "split_seed": split_seed,
        "init_seed": init_seed,
        "batch_seed": batch_seed,
        "divergence_threshold": divergence_threshold,
    }
    tasks = [(cell, d, s, grid_args) for cell in cells]
    if parallelism == 1:
        results = [_run_cell(t) for t in tasks]
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=parallelism) as pool:
            results = list(pool.map(_run_cell, tasks))
    results.sort(key=lambda r: r.cell.run_id)
    return results


def _format_row(cell: GridCell, rec: EpochRecord) -> str:
    spec = cell.spec
    with_momentum = spec.kind in MOMENTUM_KINDS
    fields = [
        cell.run_id,
        spec.kind.value,
        spec.variant.value if with_momentum else "",
        f"{spec.lr:g}",
        f"{spec.momentum:g}" if with_momentum else "",
        str(cell.batch_size),
        str(rec.epoch),
        f"{rec.train_loss:.17g}",
        f"{rec.val_loss:.17g}",
        "true" if rec.diverged else "false",
    ]
    return ",".join(fields)


def write_csv(results: Sequence[RunResult], path: str | Path) -> None:
    """Persist results, sorted by (run_id, epoch), one row per epoch."""
    ordered = sorted(results, key=lambda r: r.cell.run_id)
    try:
        with open(path, "w") as f:
            f.write(CSV_HEADER + "\n")
            for result in ordered:
                for rec in result.records:
                    f.write(_format_row(result.cell, rec) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc}") from exc


@dataclass(frozen=True)
class CsvRow:
    run_id: str
    optimizer: str
    variant: str
    lr: float
    momentum: Optional[float]
    batch_size: int
    epoch: int
    train_loss: float
    val_loss: float
    diverged: bool


def read_csv(path: str | Path) -> list[CsvRow]:
    """Parse a results CSV back into typed rows, validating the layout."""
    rows = []
    with open(path) as f:
        lines = f.read().splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise CsvFormatError(1, "missing or wrong header")
    for i, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != 10:
            raise CsvFormatError(i, f"expected 10 fields, found {len(parts)}")
        try:
            rows.append(
                CsvRow(
                    run_id=parts[0],
                    optimizer=parts[1],
                    variant=parts[2],
                    lr=float(parts[3]),
                    momentum=float(parts[4]) if parts[4] else None,
                    batch_size=int(parts[5]),
                    epoch=int(parts[6]),
                    train_loss=float(parts[7]),
                    val_loss=float(parts[8]),
                    diverged={"true": True, "false": False}[parts[9]],
                )
            )
        except (ValueError, KeyError) as exc:
            raise CsvFormatError(i, f"bad field value: {exc}") from exc
    return rows
