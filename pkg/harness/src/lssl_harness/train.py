"""Training loop, noise-robustness experiment grid, and the CLI entry point.

The experiment mirrors the noise-robustness protocol at desk scale: train a
baseline-initialized and an uncertainty-aware-initialized model on data at
one noise level, evaluate both across a range of noise levels, and emit a
CSV of paired accuracies. Configuration comes from one JSON file; every key
is documented in the README.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import asdict, dataclass, field

import numpy as np
import torch

from .model import build_model
from .task import add_noise, make_task


class TrainingDiverged(RuntimeError):
    """Loss became non-finite during training."""


@dataclass
class HarnessConfig:
    bank_hippo: str = "hippo.unh"
    bank_unhippo: str = "unhippo.unh"
    layers: int = 2
    n: int = 32
    h: int = 8
    m: int = 2
    t_min: float = 10.0
    t_max: float = 1000.0
    per_class: int = 60
    length: int = 128
    freqs: list = field(default_factory=lambda: [2.0, 5.0, 11.0])
    rho_train: list = field(default_factory=lambda: [0.25])
    rho_eval: list = field(default_factory=lambda: [0.0, 1.0, 2.0])
    seeds: list = field(default_factory=lambda: [0, 1, 2])
    steps: int = 500
    batch_size: int = 16
    learning_rate: float = 5e-3
    dropout: float = 0.1
    eval_draws: int = 3
    out_csv: str = "results.csv"

    @classmethod
    def from_json(cls, path) -> "HarnessConfig":
        with open(path) as fh:
            raw = json.load(fh)
        unknown = set(raw) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**raw)


def train_model(model, xs, ys, steps: int, batch_size: int, lr: float, seed: int):
    """Adam on the trainable parameters; raises TrainingDiverged on NaN loss."""
    torch.set_num_threads(1)
    torch.manual_seed(seed)
    x = torch.as_tensor(xs, dtype=torch.float64)
    y = torch.as_tensor(ys, dtype=torch.long)
    optimizer = torch.optim.Adam(model.parameters(), lr=lr)
    generator = np.random.Generator(np.random.Philox(seed))
    model.train()
    for step in range(steps):
        idx = generator.integers(0, len(x), size=batch_size)
        logits = model(x[idx])
        loss = torch.nn.functional.cross_entropy(logits, y[idx])
        if not torch.isfinite(loss):
            raise TrainingDiverged(f"loss became non-finite at step {step}")
        optimizer.zero_grad()
        loss.backward()
        optimizer.step()
    model.eval()
    return model


def evaluate(model, xs, ys) -> float:
    model.eval()
    with torch.no_grad():
        logits = model(torch.as_tensor(xs, dtype=torch.float64))
    predictions = logits.argmax(dim=1).numpy()
    return float((predictions == ys).mean())


def _train_one(config: HarnessConfig, bank_path, task, rho_train: float, seed: int):
    model = build_model(
        bank_path,
        layers=config.layers,
        h=config.h,
        m=config.m,
        num_classes=task.num_classes,
        length=config.length,
        t_min=config.t_min,
        t_max=config.t_max,
        dropout=config.dropout,
        expected_n=config.n,
        seed=seed,
    )
    noisy = add_noise(task.train_x, rho_train, seed=task.seed * 1000 + seed)
    return train_model(
        model, noisy, task.train_y, config.steps, config.batch_size,
        config.learning_rate, seed,
    )


def run_experiment(config: HarnessConfig):
    """Train both models per (rho_train, seed), evaluate across rho_eval.

    Returns result rows; a diverged training run yields NaN accuracies for
    its cells and the grid continues.
    """
    rows = []
    for seed in config.seeds:
        task = make_task(config.per_class, config.length, seed, config.freqs)
        for rho_train in config.rho_train:
            models = {}
            for kind, bank in (("lssl", config.bank_hippo), ("unlssl", config.bank_unhippo)):
                try:
                    models[kind] = _train_one(config, bank, task, rho_train, seed)
                except TrainingDiverged:
                    models[kind] = None
            for rho_eval in config.rho_eval:
                # average over a few noise draws so eval noise does not
                # drown the paired comparison
                eval_sets = [
                    add_noise(task.test_x, rho_eval, seed=task.seed * 2000 + 7 + draw)
                    for draw in range(config.eval_draws)
                ]
                accs = {}
                for kind, model in models.items():
                    if model is None:
                        accs[kind] = float("nan")
                    else:
                        accs[kind] = float(
                            np.mean([evaluate(model, x, task.test_y) for x in eval_sets])
                        )
                rows.append(
                    {
                        "rho_train": rho_train,
                        "rho_eval": rho_eval,
                        "seed": seed,
                        "acc_lssl": accs["lssl"],
                        "acc_unlssl": accs["unlssl"],
                        "delta": accs["unlssl"] - accs["lssl"],
                    }
                )
    return rows


def write_results(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(
            fh, fieldnames=["rho_train", "rho_eval", "seed", "acc_lssl", "acc_unlssl", "delta"]
        )
        writer.writeheader()
        writer.writerows(rows)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="lssl-harness",
        description="Noise-robustness comparison of frozen SSM initializations at toy scale",
    )
    parser.add_argument("--config", required=True, help="JSON config file")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        config = HarnessConfig.from_json(args.config)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    rows = run_experiment(config)
    write_results(config.out_csv, rows)
    for row in rows:
        print(
            f"rho_train={row['rho_train']} rho_eval={row['rho_eval']} seed={row['seed']} "
            f"acc_lssl={row['acc_lssl']:.4f} acc_unlssl={row['acc_unlssl']:.4f} "
            f"delta={row['delta']:+.4f}"
        )
    print(f"wrote={config.out_csv} config={asdict(config)}")
    return 0


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
