"""The projection-maintaining coefficient dynamics and their discretizations.

make_hippo builds the lower-triangular dynamics matrix A and input vector B
that keep a Legendre coefficient vector in sync with a growing signal window:
dc/dt = -(1/t) A c + (1/t) B f(t). discretize_hippo turns one continuous step
into a linear recurrence under four schemes (forward Euler, backward Euler,
trapezoidal, and the simplified trapezoidal variant used for layer
initialization banks).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import matfun

SCHEMES = ("forward", "backward", "trapezoidal", "trapezoidal_lssl")


@dataclass(frozen=True)
class HippoSystem:
    """Dynamics matrix ``a`` (n x n, lower triangular) and input vector ``b``."""

    n: int
    a: np.ndarray
    b: np.ndarray


def make_hippo(n: int) -> HippoSystem:
    """Build the coefficient dynamics for state size ``n``.

    a[i, j] = sqrt(2i+1)*sqrt(2j+1) below the diagonal, i+1 on it, 0 above;
    b[i] = sqrt(2i+1). These satisfy b b^T - a = a^T - I exactly.
    """
    if n < 1:
        raise ValueError(f"state size must be >= 1, got {n}")
    b = np.sqrt(2.0 * np.arange(n) + 1.0)
    a = np.tril(np.outer(b, b), k=-1) + np.diag(np.arange(n) + 1.0)
    return HippoSystem(n, a, b)


def hippo_rhs(sys: HippoSystem, t: float, c, f_t: float) -> np.ndarray:
    """Time derivative of the coefficient vector: -(1/t) A c + (1/t) B f(t)."""
    if not t > 0:
        raise ValueError(f"time must be positive, got {t}")
    c = np.asarray(c, dtype=np.float64)
    return (sys.b * f_t - sys.a @ c) / t


@dataclass(frozen=True)
class DiscretePair:
    """One discrete step c_{k+1} = a_bar c_k + b_bar_prev f(t_k) + b_bar f(t_k + dt).

    ``b_bar`` is the coefficient of the new observation f(t_k + dt); for the
    forward and trapezoidal schemes the step also taps the old observation
    f(t_k) through ``b_bar_prev`` (zero for the single-input schemes).
    """

    a_bar: np.ndarray
    b_bar: np.ndarray
    scheme: str
    t_k: float
    dt: float
    b_bar_prev: np.ndarray | None = field(default=None)

    def __post_init__(self):
        if self.b_bar_prev is None:
            object.__setattr__(self, "b_bar_prev", np.zeros_like(self.b_bar))

    def apply(self, c, f_next: float, f_prev: float = 0.0) -> np.ndarray:
        return self.a_bar @ c + self.b_bar * f_next + self.b_bar_prev * f_prev


def discretize_hippo(sys: HippoSystem, scheme: str, t_k: float, dt: float) -> DiscretePair:
    """Discretize one step of the continuous dynamics from t_k to t_k + dt.

    forward: a_bar = I - (dt/t_k) A, input tap (dt/t_k) B at f(t_k).
    backward: a_bar = (I + (dt/t') A)^-1, tap a_bar (dt/t') B at f(t'),
        t' = t_k + dt.
    trapezoidal: a_bar = M^-1 (I - dt/(2 t_k) A) with M = I + dt/(2 t') A and
        taps at both endpoints.
    trapezoidal_lssl: a_bar = M^-1 (I - dt/(2 t') A), tap M^-1 (dt/t') B at
        f(t'); the variant that treats the dynamics as constant over the step.
    """
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}, expected one of {SCHEMES}")
    if not t_k > 0:
        raise ValueError(f"step start time must be positive, got {t_k}")
    if not dt > 0:
        raise ValueError(f"step size must be positive, got {dt}")
    n = sys.n
    eye = np.eye(n)
    t_next = t_k + dt
    zero = np.zeros(n)
    if scheme == "forward":
        a_bar = eye - (dt / t_k) * sys.a
        b_prev = (dt / t_k) * sys.b
        return DiscretePair(a_bar, zero, scheme, t_k, dt, b_bar_prev=b_prev)
    if scheme == "backward":
        m = eye + (dt / t_next) * sys.a
        a_bar = matfun.solve(m, eye)
        b_bar = matfun.solve(m, (dt / t_next) * sys.b)
        return DiscretePair(a_bar, b_bar, scheme, t_k, dt, b_bar_prev=zero)
    if scheme == "trapezoidal":
        m = eye + (dt / (2.0 * t_next)) * sys.a
        a_bar = matfun.solve(m, eye - (dt / (2.0 * t_k)) * sys.a)
        b_prev = matfun.solve(m, (dt / (2.0 * t_k)) * sys.b)
        b_bar = matfun.solve(m, (dt / (2.0 * t_next)) * sys.b)
        return DiscretePair(a_bar, b_bar, scheme, t_k, dt, b_bar_prev=b_prev)
    # trapezoidal_lssl
    m = eye + (dt / (2.0 * t_next)) * sys.a
    a_bar = matfun.solve(m, eye - (dt / (2.0 * t_next)) * sys.a)
    b_bar = matfun.solve(m, (dt / t_next) * sys.b)
    return DiscretePair(a_bar, b_bar, scheme, t_k, dt, b_bar_prev=zero)


def init_pair(sys: HippoSystem, scheme: str, t: float, dt: float = 1.0):
    """Single-input (a_bar, b_bar) pair with the scheme formula evaluated at
    timescale ``t``.

    Initialization banks index pairs by the timescale alone, with the step
    size fixed (usually 1) and the formula's time variable set to ``t``; this
    matches how layer initializations sweep the timescale without reference
    to a concrete step start. The plain trapezoidal scheme taps two
    observations and cannot be folded into a single pair, so it is rejected
    here.
    """
    if not t > 0:
        raise ValueError(f"timescale must be positive, got {t}")
    if not dt > 0:
        raise ValueError(f"step size must be positive, got {dt}")
    n = sys.n
    eye = np.eye(n)
    r = dt / t
    if scheme == "forward":
        return eye - r * sys.a, r * sys.b
    if scheme == "backward":
        m = eye + r * sys.a
        return matfun.solve(m, eye), matfun.solve(m, r * sys.b)
    if scheme == "trapezoidal_lssl":
        m = eye + (r / 2.0) * sys.a
        return matfun.solve(m, eye - (r / 2.0) * sys.a), matfun.solve(m, r * sys.b)
    if scheme == "trapezoidal":
        raise ValueError(
            "the trapezoidal scheme taps two observations and has no single-pair form; "
            "use trapezoidal_lssl for initialization pairs"
        )
    raise ValueError(f"unknown scheme {scheme!r}, expected one of {SCHEMES}")
