"""Synthetic sequence-classification tasks.

Each class is a sinusoid at a class-specific frequency with random phase
and mildly jittered amplitude; Gaussian noise of configurable level is
added separately to training and evaluation copies. Classes are balanced
and everything is deterministic given the seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_FREQS = (2.0, 5.0, 11.0)


@dataclass
class ToyTask:
    num_classes: int
    length: int
    seed: int
    train_x: np.ndarray  # (N, L) clean
    train_y: np.ndarray  # (N,)
    test_x: np.ndarray
    test_y: np.ndarray
    freqs: tuple = DEFAULT_FREQS


def _sequences(rng, per_class: int, length: int, freqs) -> tuple:
    xs = np.empty((per_class * len(freqs), length))
    ys = np.empty(per_class * len(freqs), dtype=np.int64)
    t = np.arange(length) / length
    row = 0
    for label, freq in enumerate(freqs):
        for _ in range(per_class):
            phase = rng.uniform(0.0, 2.0 * np.pi)
            amp = 1.0 + 0.1 * rng.standard_normal()
            xs[row] = amp * np.sin(2.0 * np.pi * freq * t + phase)
            ys[row] = label
            row += 1
    order = rng.permutation(row)
    return xs[order], ys[order]


def make_task(
    per_class: int = 80,
    length: int = 256,
    seed: int = 0,
    freqs=DEFAULT_FREQS,
) -> ToyTask:
    rng = np.random.Generator(np.random.Philox(seed))
    train_x, train_y = _sequences(rng, per_class, length, freqs)
    test_x, test_y = _sequences(rng, per_class, length, freqs)
    return ToyTask(
        num_classes=len(freqs),
        length=length,
        seed=seed,
        train_x=train_x,
        train_y=train_y,
        test_x=test_x,
        test_y=test_y,
        freqs=tuple(freqs),
    )


def add_noise(xs: np.ndarray, rho: float, seed: int) -> np.ndarray:
    """Clean sequences plus i.i.d. Gaussian noise of standard deviation rho."""
    if rho < 0:
        raise ValueError(f"noise level must be nonnegative, got {rho}")
    if rho == 0:
        return xs.copy()
    rng = np.random.Generator(np.random.Philox(seed))
    return xs + rho * rng.standard_normal(xs.shape)
