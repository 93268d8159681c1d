"""Sequence classifier built on frozen state-space initialization pairs.

The per-feature dynamics (A, B) come from an exported bank and never train;
they enter the model as precomputed Krylov states A^j B, so each forward
pass only contracts the trainable readout against a cached tensor and runs
one grouped causal convolution. Readouts, feedthrough, channel mixer,
encoder and decoder are trainable.
"""

from __future__ import annotations

import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F

from . import container


class ConfigError(ValueError):
    """Model configuration does not match the provided bank."""


class LsslBlock(nn.Module):
    """h frozen cores, GELU, position-wise channel mixing, optional residual."""

    def __init__(self, pairs, m: int, length: int, dropout: float = 0.0, residual: bool = False):
        super().__init__()
        h = len(pairs)
        n = pairs[0][1].shape[0]
        states = np.empty((h, length, n))
        for f, (a, b) in enumerate(pairs):
            v = b.copy()
            for j in range(length):
                states[f, j] = v
                v = a @ v
        # A^j B per feature; frozen, hence a buffer
        self.register_buffer("krylov_states", torch.as_tensor(states, dtype=torch.float64))
        self.h, self.n, self.m, self.length = h, n, m, length
        # initial readout scaled per feature so initial kernel energy is
        # comparable across initializations (gain magnitudes differ a lot)
        rms = np.sqrt(np.mean(states**2, axis=(1, 2))) + 1e-30
        scale = torch.as_tensor(1.0 / (np.sqrt(n) * rms), dtype=torch.float64)
        self.readout = nn.Parameter(
            torch.randn(h, m, n, dtype=torch.float64) * scale.reshape(h, 1, 1)
        )
        self.feedthrough = nn.Parameter(torch.zeros(h, m, dtype=torch.float64))
        self.mix = nn.Linear(h * m, h, dtype=torch.float64)
        self.dropout = nn.Dropout(dropout)
        self.residual = residual

    def forward(self, u: torch.Tensor) -> torch.Tensor:
        batch, length, h = u.shape
        if h != self.h or length != self.length:
            raise ConfigError(
                f"input shape {tuple(u.shape)} does not match block (L={self.length}, h={self.h})"
            )
        # kernel K[f, c, j] = readout[f, c] . (A^j B)[f, j]
        kernel = torch.einsum("fcn,fjn->fcj", self.readout, self.krylov_states)
        weight = kernel.flip(-1).reshape(self.h * self.m, 1, length)
        x = u.permute(0, 2, 1)  # (B, h, L)
        y = F.conv1d(F.pad(x, (length - 1, 0)), weight, groups=self.h)
        y = y + self.feedthrough.reshape(1, -1, 1) * x.repeat_interleave(self.m, dim=1)
        y = y.reshape(batch, self.h, self.m, length).permute(0, 3, 1, 2)
        y = self.dropout(F.gelu(y)).reshape(batch, length, self.h * self.m)
        out = self.mix(y)
        return out + u if self.residual else out


class LsslClassifier(nn.Module):
    """Linear encoder, stacked blocks, temporal mean pool, linear decoder."""

    def __init__(self, pairs, layers: int, m: int, num_classes: int, length: int,
                 dropout: float = 0.0):
        super().__init__()
        h = len(pairs)
        self.encoder = nn.Linear(1, h, dtype=torch.float64)
        self.blocks = nn.ModuleList(
            LsslBlock(pairs, m, length, dropout=dropout) for _ in range(layers)
        )
        self.decoder = nn.Linear(h, num_classes, dtype=torch.float64)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        u = self.encoder(x.unsqueeze(-1))
        for block in self.blocks:
            u = block(u)
        return self.decoder(u.mean(dim=1))


def build_model(
    bank_path,
    layers: int,
    h: int,
    m: int,
    num_classes: int,
    length: int,
    t_min: float = 10.0,
    t_max: float = 1000.0,
    dropout: float = 0.0,
    expected_n: int | None = None,
    seed: int = 0,
) -> LsslClassifier:
    """Construct a classifier whose dynamics are frozen to a bank's pairs.

    Timescales are spread log-uniformly over [t_min, t_max], one pair per
    input feature. ``expected_n`` guards against banks built at a different
    state size.
    """
    pairs, meta = container.load_bank(bank_path)
    if expected_n is not None and meta.get("n") != expected_n:
        raise ConfigError(f"bank {bank_path} has n={meta.get('n')}, expected {expected_n}")
    if t_max > meta.get("t_max", 0):
        raise ConfigError(
            f"bank {bank_path} covers timescales up to {meta.get('t_max')}, requested {t_max}"
        )
    selected = container.select_timescales(pairs, h, t_min, t_max)
    torch.manual_seed(seed)
    return LsslClassifier(selected, layers, m, num_classes, length, dropout=dropout)
