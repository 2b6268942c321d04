"""Command-line entry point.

Subcommands: generate, run, grid, plot, gradcheck, oracle.
Exit codes: 0 success, 1 usage or check failure, 2 divergence in
single-run mode.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import bench, dataset, plots
from .model import LinearModel, LossKind, closed_form, gradient_check, loss, predict
from .numerics import Rng
from .optimizers import OptimizerKind, OptimizerSpec, Variant
from .trainer import BatchStrategy, RunConfig, run


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; the CLI contract wants 1
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _add_data_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=dataset.DEFAULT_SEED,
                   help="dataset generation seed")
    p.add_argument("--n", type=int, default=dataset.DEFAULT_N)
    p.add_argument("--p", type=int, default=dataset.DEFAULT_P)
    p.add_argument("--noise-scale", type=float, default=dataset.DEFAULT_NOISE_SCALE)
    p.add_argument("--train-frac", type=float, default=0.9)
    p.add_argument("--split-seed", type=int, default=bench.DEFAULT_SPLIT_SEED)


def _add_run_seeds(p: argparse.ArgumentParser) -> None:
    p.add_argument("--init-seed", type=int, default=bench.DEFAULT_INIT_SEED)
    p.add_argument("--batch-seed", type=int, default=bench.DEFAULT_BATCH_SEED)


def _add_optimizer_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--opt", required=True,
                   choices=[k.value for k in OptimizerKind])
    p.add_argument("--variant", choices=[v.value for v in Variant],
                   default=Variant.DECOUPLED.value)
    p.add_argument("--lr", type=float, default=None,
                   help="learning rate (defaults to the optimizer's customary value)")
    p.add_argument("--momentum", type=float, default=0.9)
    p.add_argument("--decay", type=float, default=0.9)
    p.add_argument("--beta1", type=float, default=0.9)
    p.add_argument("--beta2", type=float, default=0.999)
    p.add_argument("--eps", type=float, default=1e-8)


def _parse_batch(value: str, n_train: int) -> int:
    if value == "full":
        return n_train
    try:
        return int(value)
    except ValueError:
        print(f"error: --batch must be an integer or 'full', got {value!r}",
              file=sys.stderr)
        raise SystemExit(1)


def _make_dataset(args):
    d = dataset.generate(args.seed, args.n, args.p, args.noise_scale)
    s = dataset.split(d, args.split_seed, args.train_frac)
    return d, s


def _cmd_generate(args) -> int:
    d = dataset.generate(args.seed, args.n, args.p, args.noise_scale)
    dataset.write_csv(d, args.out)
    print(f"wrote {args.out} and {args.out}.json (n={d.n}, p={d.p}, seed={d.seed})")
    return 0


def _cmd_run(args) -> int:
    d, s = _make_dataset(args)
    spec = OptimizerSpec(
        kind=OptimizerKind(args.opt),
        variant=Variant(args.variant),
        lr=args.lr,
        momentum=args.momentum,
        decay=args.decay,
        beta1=args.beta1,
        beta2=args.beta2,
        eps=args.eps,
    )
    config = RunConfig(
        optimizer=spec,
        loss=LossKind(args.loss),
        batch=BatchStrategy(_parse_batch(args.batch, len(s.train_indices))),
        epochs=args.epochs,
        data_seed=args.seed,
        split_seed=args.split_seed,
        init_seed=args.init_seed,
        batch_seed=args.batch_seed,
    )
    records = run(config, d, s)
    print("epoch,train_loss,val_loss,diverged")
    for rec in records:
        flag = "true" if rec.diverged else "false"
        print(f"{rec.epoch},{rec.train_loss:.17g},{rec.val_loss:.17g},{flag}")
    if args.out:
        cell = bench.GridCell(
            bench.make_run_id(spec, config.batch.batch_size),
            spec,
            config.batch.batch_size,
        )
        bench.write_csv([bench.RunResult(cell, records)], args.out)
        print(f"wrote {args.out}", file=sys.stderr)
    if records and records[-1].diverged:
        print("run diverged", file=sys.stderr)
        return 2
    return 0


def _cmd_grid(args) -> int:
    d, s = _make_dataset(args)
    grid = bench.default_grid(variant=Variant(args.variant), epochs=args.epochs)
    results = bench.run_grid(
        grid,
        d,
        s,
        parallelism=args.parallelism,
        split_seed=args.split_seed,
        init_seed=args.init_seed,
        batch_seed=args.batch_seed,
    )
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "results.csv"
    bench.write_csv(results, csv_path)
    diverged = sum(1 for r in results if r.records and r.records[-1].diverged)
    print(f"wrote {csv_path}: {len(results)} cells, {diverged} diverged")
    if not args.no_charts:
        written = plots.plot_curves(csv_path, out_dir)
        print(f"wrote {len(written)} charts to {out_dir}")
    return 0


def _cmd_plot(args) -> int:
    written = plots.plot_curves(args.csv, args.out_dir)
    print(f"wrote {len(written)} charts to {args.out_dir}")
    return 0


def _cmd_gradcheck(args) -> int:
    kind = LossKind(args.loss)
    rng = Rng(args.seed)
    worst = 0.0
    checked = 0
    while checked < args.points:
        x = np.array([[rng.uniform(-1, 1) for _ in range(args.p)] for _ in range(8)])
        target = np.array([rng.normal() for _ in range(8)])
        m = LinearModel(
            theta=np.array([rng.normal() for _ in range(args.p)]),
            bias=rng.normal(),
        )
        if kind is LossKind.MAE:
            # central differences are meaningless across the kink
            residual = predict(m, x) - target
            if np.abs(residual).min() < 1000 * args.h:
                continue
        worst = max(worst, gradient_check(kind, m, x, target, args.h))
        checked += 1
    print(f"max relative gradient error: {worst:.3e}")
    if worst > args.tol:
        print(f"exceeds tolerance {args.tol:g}", file=sys.stderr)
        return 1
    return 0


def _cmd_oracle(args) -> int:
    d, s = _make_dataset(args)
    m = closed_form(d.x_norm, d.y)
    fit_mse = loss(LossKind.MSE, predict(m, d.x_norm), d.y)
    val_mse = loss(LossKind.MSE, predict(m, d.x_norm[s.val_indices]), d.y[s.val_indices])
    print(f"closed-form fit MSE: {fit_mse:.17g}")
    print(f"closed-form validation MSE: {val_mse:.17g}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gradbench",
                     description="optimizer benchmark on a synthetic least-squares problem")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write the synthetic dataset as CSV + JSON sidecar")
    p.add_argument("--seed", type=int, default=dataset.DEFAULT_SEED)
    p.add_argument("--n", type=int, default=dataset.DEFAULT_N)
    p.add_argument("--p", type=int, default=dataset.DEFAULT_P)
    p.add_argument("--noise-scale", type=float, default=dataset.DEFAULT_NOISE_SCALE)
    p.add_argument("--out", default="dataset.csv")
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("run", help="train one experiment cell")
    _add_data_args(p)
    _add_run_seeds(p)
    _add_optimizer_args(p)
    p.add_argument("--loss", choices=[k.value for k in LossKind], default="mse")
    p.add_argument("--batch", default="32", help="batch size or 'full'")
    p.add_argument("--epochs", type=int, default=1000)
    p.add_argument("--out", default=None, help="optional results CSV path")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("grid", help="run the full experiment grid")
    _add_data_args(p)
    _add_run_seeds(p)
    p.add_argument("--variant", choices=[v.value for v in Variant],
                   default=Variant.DECOUPLED.value)
    p.add_argument("--epochs", type=int, default=1000)
    p.add_argument("--parallelism", type=int, default=1)
    p.add_argument("--out", default="results")
    p.add_argument("--no-charts", action="store_true")
    p.set_defaults(func=_cmd_grid)

    p = sub.add_parser("plot", help="render charts from a results CSV")
    p.add_argument("--csv", required=True)
    p.add_argument("--out-dir", default="charts")
    p.set_defaults(func=_cmd_plot)

    p = sub.add_parser("gradcheck", help="compare analytic gradients to finite differences")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--p", type=int, default=5)
    p.add_argument("--points", type=int, default=100)
    p.add_argument("--loss", choices=[k.value for k in LossKind], default="mse")
    p.add_argument("--h", type=float, default=1e-6)
    p.add_argument("--tol", type=float, default=1e-6)
    p.set_defaults(func=_cmd_gradcheck)

    p = sub.add_parser("oracle", help="closed-form fit and its validation MSE")
    _add_data_args(p)
    p.set_defaults(func=_cmd_oracle)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
