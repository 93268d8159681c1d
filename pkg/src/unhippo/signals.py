"""Synthetic test signals, noise injection, and reconstruction metrics.

Traces are reproducible: all randomness comes from numpy's counter-based
Philox generator seeded explicitly, and the generator name is recorded on
the trace. The CSV trace format is ``tau,clean,noisy`` with 17 significant
digits, enough for float64 round trips.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace

import numpy as np

from .errors import NumericError

GENERATOR = "numpy.random.Philox"

_JITTER_START = 1e-9
_JITTER_LIMIT = 1e-6


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


@dataclass(frozen=True)
class SignalTrace:
    """A sampled signal with an optional noisy copy.

    ``rho`` and ``seed`` are None for traces loaded from CSV, which carries
    no provenance.
    """

    taus: np.ndarray
    clean: np.ndarray
    noisy: np.ndarray
    rho: float | None
    seed: int | None
    generator: str = GENERATOR

    def __post_init__(self):
        if not (len(self.taus) == len(self.clean) == len(self.noisy)):
            raise ValueError("trace arrays must have equal lengths")
        if np.any(np.diff(self.taus) <= 0):
            raise ValueError("trace times must be strictly increasing")
        if self.rho is not None and self.rho < 0:
            raise ValueError(f"noise level must be nonnegative, got {self.rho}")


def sample_gp(num_points: int, t_end: float, length_scale: float, seed: int) -> SignalTrace:
    """Sample a zero-mean Gaussian process on an equispaced grid.

    Squared-exponential kernel exp(-(tau - tau')^2 / (2 l^2)), drawn via
    Cholesky with a small diagonal jitter (escalated tenfold up to 1e-6 if
    the factorization fails). Deterministic given the seed.
    """
    if num_points < 2:
        raise ValueError(f"need at least 2 points, got {num_points}")
    if not length_scale > 0:
        raise ValueError(f"length scale must be positive, got {length_scale}")
    taus = np.linspace(0.0, t_end, num_points)
    sq_dists = (taus[:, None] - taus[None, :]) ** 2
    kernel = np.exp(-sq_dists / (2.0 * length_scale**2))
    jitter = _JITTER_START
    while True:
        try:
            chol = np.linalg.cholesky(kernel + jitter * np.eye(num_points))
            break
        except np.linalg.LinAlgError:
            jitter *= 10.0
            if jitter > _JITTER_LIMIT:
                raise NumericError(
                    f"GP kernel is not positive definite even with jitter {_JITTER_LIMIT}"
                ) from None
    clean = chol @ _rng(seed).standard_normal(num_points)
    return SignalTrace(taus, clean, clean.copy(), rho=0.0, seed=seed)


def add_noise(trace: SignalTrace, rho: float, seed: int) -> SignalTrace:
    """Add i.i.d. Gaussian noise of standard deviation ``rho`` to the clean
    signal. The returned trace records the noise seed."""
    if rho < 0:
        raise ValueError(f"noise level must be nonnegative, got {rho}")
    noise = rho * _rng(seed).standard_normal(len(trace.clean))
    return replace(trace, noisy=trace.clean + noise, rho=rho, seed=seed)


def mse(a, b) -> float:
    """Mean squared difference of two equally long value arrays."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    return float(np.mean((a - b) ** 2))


def write_trace(path, trace: SignalTrace) -> None:
    """Write a trace as CSV with header ``tau,clean,noisy``."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["tau", "clean", "noisy"])
        for tau, clean, noisy in zip(trace.taus, trace.clean, trace.noisy):
            writer.writerow([f"{tau:.17g}", f"{clean:.17g}", f"{noisy:.17g}"])


def read_trace(path) -> SignalTrace:
    """Read a ``tau,clean,noisy`` CSV back into a trace (without provenance)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["tau", "clean", "noisy"]:
            raise ValueError(f"{path}: expected header 'tau,clean,noisy', got {header}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise ValueError(f"{path}:{lineno}: expected 3 columns, got {len(row)}")
            try:
                rows.append([float(cell) for cell in row])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
    if len(rows) < 2:
        raise ValueError(f"{path}: need at least 2 data rows, got {len(rows)}")
    data = np.asarray(rows, dtype=np.float64)
    return SignalTrace(data[:, 0], data[:, 1], data[:, 2], rho=None, seed=None)
