"""Inference-only linear state space layers.

A core is the scalar-input recurrence c_k = A c_{k-1} + B u_k with latent
readout y_k = C c_k + D u_k. With a fixed (A, B) the recurrence equals a
causal convolution with the kernel K_j = C A^j B, which is how stacked layers
evaluate cheaply. Layers run one core per input feature, mix the per-feature
channels position-wise after a GELU, and never mix across time outside the
cores.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import erf

from .errors import NumericError

_SQRT2 = np.sqrt(2.0)


def gelu(x):
    """Exact Gaussian-CDF GELU: x * Phi(x)."""
    x = np.asarray(x, dtype=np.float64)
    return 0.5 * x * (1.0 + erf(x / _SQRT2))


@dataclass(frozen=True)
class SsmCore:
    """State map ``a`` (n x n), input ``b`` (n,), readout ``c`` (m x n),
    feedthrough ``d`` (m,)."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray

    def __post_init__(self):
        n = self.b.shape[0]
        m = self.d.shape[0]
        if self.a.shape != (n, n) or self.c.shape != (m, n):
            raise ValueError(
                f"inconsistent core shapes: a {self.a.shape}, b {self.b.shape}, "
                f"c {self.c.shape}, d {self.d.shape}"
            )
        for name in ("a", "b", "c", "d"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"core parameter {name} has non-finite entries")

    @property
    def n(self) -> int:
        return self.b.shape[0]

    @property
    def m(self) -> int:
        return self.d.shape[0]


def ssm_recurrence(core: SsmCore, u, c0=None):
    """Run the recurrence over a scalar sequence.

    Returns the (L, m) output sequence and the final state. The state is
    checked for finiteness each step; divergence raises NumericError with the
    offending step index.
    """
    u = np.asarray(u, dtype=np.float64)
    if u.ndim != 1 or u.size < 1:
        raise ValueError(f"input must be a nonempty 1-D sequence, got shape {u.shape}")
    state = np.zeros(core.n) if c0 is None else np.asarray(c0, dtype=np.float64).copy()
    if state.shape != (core.n,):
        raise ValueError(f"initial state must have shape ({core.n},), got {state.shape}")
    y = np.empty((u.size, core.m))
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(u.size):
            state = core.a @ state + core.b * u[k]
            if not np.all(np.isfinite(state)):
                raise NumericError(f"recurrence state became non-finite at step {k}")
            y[k] = core.c @ state + core.d * u[k]
    return y, state


def krylov_kernel(core: SsmCore, length: int, narrow: bool = False) -> np.ndarray:
    """Convolution kernel K_j = C A^j B for j = 0..length-1, shape (length, m).

    Built by iterated multiplication in float64. With ``narrow`` the finished
    kernel is cast to float32 (the construction itself must stay in double).
    Non-finite kernel entries raise NumericError with the power index.
    """
    if length < 1:
        raise ValueError(f"kernel length must be >= 1, got {length}")
    kernel = np.empty((length, core.m))
    v = core.b.copy()
    with np.errstate(over="ignore", invalid="ignore"):
        for j in range(length):
            if not np.all(np.isfinite(v)):
                raise NumericError(f"kernel construction diverged at power {j}")
            kernel[j] = core.c @ v
            if j + 1 < length:
                v = core.a @ v
    return kernel.astype(np.float32) if narrow else kernel


def krylov_conv(kernel: np.ndarray, u, d) -> np.ndarray:
    """Causal convolution y_k = sum_{j<=k} K_j u_{k-j} + d u_k.

    Matches ssm_recurrence with zero initial state exactly in indexing:
    K_0 multiplies the current input. Direct (non-FFT) convolution, adequate
    for desk-scale lengths.
    """
    kernel = np.asarray(kernel, dtype=np.float64)  # accepts narrowed kernels
    u = np.asarray(u, dtype=np.float64)
    d = np.atleast_1d(np.asarray(d, dtype=np.float64))
    if kernel.ndim != 2:
        raise ValueError(f"kernel must be (L, m), got shape {kernel.shape}")
    if u.ndim != 1 or u.size != kernel.shape[0]:
        raise ValueError(
            f"input length {u.shape} does not match kernel length {kernel.shape[0]}"
        )
    if d.shape != (kernel.shape[1],):
        raise ValueError(f"feedthrough must have shape ({kernel.shape[1]},), got {d.shape}")
    length, m = kernel.shape
    y = np.empty((length, m))
    for ch in range(m):
        y[:, ch] = np.convolve(u, kernel[:, ch])[:length]
    y += u[:, None] * d
    return y


@dataclass(frozen=True)
class LsslLayer:
    """One core per input feature plus a position-wise channel mixer.

    ``mix_weights`` has shape (h*m, h) and acts on the per-position
    concatenation of all features' channel outputs (feature-major order);
    ``mix_bias`` has shape (h,).
    """

    cores: tuple
    mix_weights: np.ndarray
    mix_bias: np.ndarray

    def __post_init__(self):
        if not self.cores:
            raise ValueError("layer needs at least one core")
        n, m = self.cores[0].n, self.cores[0].m
        if any(core.n != n or core.m != m for core in self.cores):
            raise ValueError("all cores in a layer must share state and channel sizes")
        h = len(self.cores)
        if self.mix_weights.shape != (h * m, h) or self.mix_bias.shape != (h,):
            raise ValueError(
                f"mixer shapes {self.mix_weights.shape}, {self.mix_bias.shape} do not "
                f"match h={h}, m={m}"
            )

    @property
    def h(self) -> int:
        return len(self.cores)

    @property
    def n(self) -> int:
        return self.cores[0].n

    @property
    def m(self) -> int:
        return self.cores[0].m


def layer_forward(layer: LsslLayer, u) -> np.ndarray:
    """Run an (L, h) input through the layer, returning an (L, h) output.

    Each feature is processed independently by its core; the per-position
    (h, m) channel block is passed through GELU, flattened feature-major and
    mixed linearly. There is no temporal mixing outside the cores.
    """
    u = np.asarray(u, dtype=np.float64)
    if u.ndim != 2 or u.shape[1] != layer.h:
        raise ValueError(f"input must have shape (L, {layer.h}), got {u.shape}")
    length = u.shape[0]
    channels = np.empty((length, layer.h, layer.m))
    for j, core in enumerate(layer.cores):
        channels[:, j, :], _ = ssm_recurrence(core, u[:, j])
    flat = gelu(channels).reshape(length, layer.h * layer.m)
    return flat @ layer.mix_weights + layer.mix_bias
