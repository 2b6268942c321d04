"""Acceptance suite: one test per criterion, each printing a PASS line.

Run with `pytest tests/test_acceptance.py -v -s`. The full default grid
(108 cells x 1000 epochs) executes once as a session fixture and backs
the oracle-optimality, divergence, noise-ordering, adadelta and runtime
criteria.
"""

import math
import time

import numpy as np
import pytest

from gradbench.bench import default_grid, run_grid
from gradbench.cli import main as cli_main
from gradbench.dataset import generate, split
from gradbench.model import (
    Gradient,
    LinearModel,
    LossKind,
    closed_form,
    loss,
    loss_gradient,
    predict,
)
from gradbench.numerics import Rng
from gradbench.optimizers import (
    OptimizerKind,
    OptimizerSpec,
    OptimizerState,
    Variant,
    step,
)
from gradbench.trainer import BatchStrategy, GradientCounter, RunConfig, run

GRID_TIME_BUDGET_SECONDS = 600.0


def _report(number: int, name: str) -> None:
    print(f"ACCEPTANCE {number:02d} ({name}): PASS")


@pytest.fixture(scope="session")
def data():
    d = generate()  # seed 100, 1000 x 5, noise 0.1
    return d, split(d, seed=200)


@pytest.fixture(scope="session")
def grid_outcome(data):
    d, s = data
    start = time.perf_counter()
    results = run_grid(default_grid(), d, s, parallelism=1)
    elapsed = time.perf_counter() - start
    return {r.cell.run_id: r.records for r in results}, elapsed


@pytest.fixture(scope="session")
def oracle_val_mse(data):
    d, s = data
    m = closed_form(d.x_norm, d.y)
    return loss(LossKind.MSE, predict(m, d.x_norm[s.val_indices]), d.y[s.val_indices])


def _central_difference(kind, m, x, target, h):
    p = len(m.theta)
    out = np.zeros(p + 1)
    for k in range(p + 1):
        tp, tm = m.theta.copy(), m.theta.copy()
        bp = bm = m.bias
        if k < p:
            tp[k] += h
            tm[k] -= h
        else:
            bp += h
            bm -= h
        jp = loss(kind, predict(LinearModel(tp, bp), x), target)
        jm = loss(kind, predict(LinearModel(tm, bm), x), target)
        out[k] = (jp - jm) / (2 * h)
    return out


def test_criterion_01_gradient_correctness():
    h = 1e-6
    rng = Rng(1234)
    start = time.perf_counter()
    for kind in (LossKind.MSE, LossKind.MAE):
        checked = 0
        while checked < 100:
            x = np.array([[rng.uniform(-1, 1) for _ in range(5)] for _ in range(12)])
            target = np.array([rng.normal() for _ in range(12)])
            m = LinearModel(
                theta=np.array([rng.normal() for _ in range(5)]), bias=rng.normal()
            )
            if kind is LossKind.MAE:
                if np.abs(predict(m, x) - target).min() < 1e-3:
                    continue  # keep the kink outside the stencil
            analytic = loss_gradient(kind, m, x, target)
            stacked = np.append(analytic.d_theta, analytic.d_bias)
            numeric = _central_difference(kind, m, x, target, h)
            denom = np.maximum(np.maximum(np.abs(stacked), np.abs(numeric)), 1e-3)
            assert (np.abs(stacked - numeric) / denom).max() < 1e-6
            checked += 1
    elapsed = time.perf_counter() - start
    assert elapsed < 1.0, f"gradient checks took {elapsed:.2f}s"
    _report(1, "gradient correctness")


def test_criterion_02_oracle_optimality(data, grid_outcome, oracle_val_mse):
    results, _ = grid_outcome
    finals = {rid: records[-1].val_loss for rid, records in results.items()}
    assert len(finals) == 108
    for rid, val in finals.items():
        assert not math.isnan(val), rid
        assert oracle_val_mse <= val, f"{rid} beat the oracle: {val} < {oracle_val_mse}"

    noise_free = generate(seed=100, noise_scale=0.0)
    fit = closed_form(noise_free.x_norm, noise_free.y)
    assert np.abs(fit.theta - noise_free.true_theta).max() < 1e-8
    assert abs(fit.bias - noise_free.true_bias) < 1e-8
    _report(2, "oracle optimality")


def test_criterion_03_convergence_to_oracle(data, oracle_val_mse):
    d, s = data
    config = RunConfig(
        optimizer=OptimizerSpec(OptimizerKind.SGD, lr=0.1),
        batch=BatchStrategy(len(s.train_indices)),
        epochs=1000,
    )
    start = time.perf_counter()
    records = run(config, d, s)
    elapsed = time.perf_counter() - start
    assert elapsed < 10.0, f"run took {elapsed:.2f}s"
    assert len(records) == 1000
    assert records[-1].val_loss <= 1.1 * oracle_val_mse
    _report(3, "convergence to oracle")


def test_criterion_04_divergence_reproduction(grid_outcome):
    results, _ = grid_outcome
    for rid in (
        "sgd-lr1-b900",
        "momentum-decoupled-lr1-m0.9-b900",
        "nag-decoupled-lr1-m0.9-b900",
    ):
        records = results[rid]
        assert records[-1].diverged, rid
        assert len(records) < 1000, rid
    adagrad = results["adagrad-lr1-b900"]
    assert len(adagrad) == 1000
    assert not adagrad[-1].diverged
    assert math.isfinite(adagrad[-1].val_loss)
    _report(4, "divergence reproduction")


def test_criterion_05_reduction_identities():
    rng = Rng(42)
    stream = [
        Gradient(d_theta=np.array([rng.normal() for _ in range(5)]), d_bias=rng.normal())
        for _ in range(100)
    ]
    theta0 = np.array([rng.normal() for _ in range(5)])

    def trajectory(spec):
        model = LinearModel(theta=theta0.copy(), bias=0.5)
        state = OptimizerState.initial(5)
        out = []
        for g in stream:
            model, state = step(spec, state, model, g, grad_fn=lambda m, g=g: g)
            out.append((model.theta.tobytes(), model.bias))
        return out

    reference = trajectory(OptimizerSpec(OptimizerKind.SGD, lr=0.05))
    for kind in (OptimizerKind.MOMENTUM, OptimizerKind.NAG):
        for variant in Variant:
            spec = OptimizerSpec(kind, variant=variant, lr=0.05, momentum=0.0)
            assert trajectory(spec) == reference, (kind, variant)
    _report(5, "reduction identities")


def test_criterion_06_noise_ordering(grid_outcome):
    results, _ = grid_outcome
    stds = {}
    for b in (1, 32, 900):
        records = results[f"sgd-lr0.01-b{b}"]
        assert len(records) == 1000
        stds[b] = np.std([r.val_loss for r in records[-100:]])
    assert stds[1] > stds[32] > stds[900], stds
    _report(6, "noise ordering")


def test_criterion_07_adadelta_learning_rate(grid_outcome):
    results, _ = grid_outcome
    finals = {
        lr: results[f"adadelta-lr{lr:g}-b32"][-1].val_loss
        for lr in (0.001, 0.01, 0.1, 1.0)
    }
    assert min(finals, key=finals.get) == 1.0, finals
    _report(7, "adadelta learning-rate claim")


def test_criterion_08_parallelism_determinism(tmp_path):
    base = ["grid", "--epochs", "60", "--no-charts"]
    assert cli_main(base + ["--parallelism", "1", "--out", str(tmp_path / "p1")]) == 0
    assert cli_main(base + ["--parallelism", "2", "--out", str(tmp_path / "p2")]) == 0
    a = (tmp_path / "p1" / "results.csv").read_bytes()
    b = (tmp_path / "p2" / "results.csv").read_bytes()
    assert a == b
    _report(8, "parallelism determinism")


def test_criterion_09_sample_accounting(data):
    d, s = data
    for b, epochs in ((1, 1000), (32, 1000), (900, 50)):
        counter = GradientCounter()
        config = RunConfig(
            optimizer=OptimizerSpec(OptimizerKind.SGD, lr=0.01),
            batch=BatchStrategy(b),
            epochs=epochs,
        )
        run(config, d, s, counter=counter)
        assert counter.rows == b * epochs, (b, epochs)
    _report(9, "sample accounting")


def test_criterion_10_step_oracles():
    g, steps = 0.7, 3
    lr, decay, eps = 0.05, 0.9, 1e-8
    b1, b2 = 0.9, 0.999

    # independent scripted recursions in plain floats
    ref = {}
    G, th = 0.0, 0.0
    ref["adagrad"] = []
    for _ in range(steps):
        G += g * g
        th -= lr * g / math.sqrt(G + eps)
        ref["adagrad"].append(th)
    E, th = 0.0, 0.0
    ref["rmsprop"] = []
    for _ in range(steps):
        E = decay * E + (1 - decay) * g * g
        th -= lr * g / math.sqrt(E + eps)
        ref["rmsprop"].append(th)
    Eg, Ed, th = 0.0, 0.0, 0.0
    ref["adadelta"] = []
    for _ in range(steps):
        Eg = decay * Eg + (1 - decay) * g * g
        delta = -(math.sqrt(Ed + eps) / math.sqrt(Eg + eps)) * g
        Ed = decay * Ed + (1 - decay) * delta * delta
        th += lr * delta
        ref["adadelta"].append(th)
    m_1, v_2, th = 0.0, 0.0, 0.0
    ref["adam"] = []
    for t in range(1, steps + 1):
        m_1 = b1 * m_1 + (1 - b1) * g
        v_2 = b2 * v_2 + (1 - b2) * g * g
        th -= lr * (m_1 / (1 - b1**t)) / (math.sqrt(v_2 / (1 - b2**t)) + eps)
        ref["adam"].append(th)

    specs = {
        "adagrad": OptimizerSpec(OptimizerKind.ADAGRAD, lr=lr, eps=eps),
        "rmsprop": OptimizerSpec(OptimizerKind.RMSPROP, lr=lr, decay=decay, eps=eps),
        "adadelta": OptimizerSpec(OptimizerKind.ADADELTA, lr=lr, decay=decay, eps=eps),
        "adam": OptimizerSpec(OptimizerKind.ADAM, lr=lr, beta1=b1, beta2=b2, eps=eps),
    }
    grad = Gradient(d_theta=np.array([g]), d_bias=g)
    for name, spec in specs.items():
        model = LinearModel(theta=np.array([0.0]), bias=0.0)
        state = OptimizerState.initial(1)
        for t in range(steps):
            model, state = step(spec, state, model, grad)
            assert abs(model.theta[0] - ref[name][t]) < 1e-12, (name, t)
            assert abs(model.bias - ref[name][t]) < 1e-12, (name, t)
    _report(10, "optimizer step oracles")


def test_default_grid_runtime_budget(grid_outcome):
    _, elapsed = grid_outcome
    assert elapsed < GRID_TIME_BUDGET_SECONDS, f"grid took {elapsed:.1f}s"
    print(f"ACCEPTANCE (grid runtime): PASS ({elapsed:.1f}s for 108 cells)")
