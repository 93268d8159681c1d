"""Kalman filtering over the regularized latent dynamics.

The latent coefficient vector evolves with the regularized transition
matrices plus Gaussian process noise, and each signal value is a noisy
scalar observation of the reconstruction endpoint b^T c. Because the
posterior covariance never depends on the data, the whole predict/update
step collapses into a single data-independent pair

    m_k = (I - K_k b^T) A_bar_k m_{k-1} + K_k y_k,

the uncertainty-aware transition pair. build_init_bank precomputes these
pairs for every integer step, which is what layer initialization consumes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import matfun
from ._version import __version__
from .dynamics import RegularizedSystem, make_regularized, transition
from .errors import NumericError
from .hippo import init_pair, make_hippo

BANK_KINDS = ("hippo", "unhippo")

# Eigenvalues of a posterior covariance may dip this far below zero before
# the run is aborted; anything lower signals real cancellation damage.
PSD_TOLERANCE = -1e-8

# Process-noise scales below this destabilize the filter.
MIN_PROCESS_SCALE = 1e-6


@dataclass(frozen=True)
class NoiseConfig:
    """Observation-noise hyperparameter ``sigma2`` and the scalar multiple of
    the identity used as process-noise covariance.

    ``sigma2`` sets the filtering strength relative to the predicted
    observation variance; it is a hyperparameter, not the data's noise
    variance.
    """

    sigma2: float = 1e10
    process_scale: float = 1.0

    def __post_init__(self):
        if not self.sigma2 > 0:
            raise ValueError(f"sigma2 must be positive, got {self.sigma2}")
        if not self.process_scale > 0:
            raise ValueError(f"process_scale must be positive, got {self.process_scale}")
        if self.process_scale < MIN_PROCESS_SCALE:
            raise ValueError(
                f"process_scale {self.process_scale} below {MIN_PROCESS_SCALE}; "
                "very small process noise destabilizes the filter"
            )


@dataclass
class KalmanState:
    """Posterior after step ``k``: mean ``m`` and covariance ``p``."""

    k: int
    m: np.ndarray
    p: np.ndarray


def kalman_predict(state: KalmanState, a_bar: np.ndarray, sigma: np.ndarray):
    """Roll the dynamics forward one step: m- = A m, P- = A P A^T + Sigma."""
    m_minus = a_bar @ state.m
    p_minus = a_bar @ state.p @ a_bar.T + sigma
    return m_minus, p_minus


def kalman_update(
    m_minus: np.ndarray,
    p_minus: np.ndarray,
    y: float,
    b: np.ndarray,
    sigma2: float,
    k: int = 0,
) -> KalmanState:
    """Condition the predicted state on one scalar observation y = b^T c + noise.

    The posterior covariance is symmetrized after the rank-one downdate so it
    stays bitwise symmetric across steps.
    """
    if not sigma2 > 0:
        raise ValueError(f"sigma2 must be positive, got {sigma2}")
    v = y - b @ m_minus
    s = b @ p_minus @ b + sigma2
    if s <= 0:
        raise NumericError(f"innovation variance {s} is not positive at step {k}")
    gain = p_minus @ b / s
    m = m_minus + gain * v
    p = matfun.symmetrize(p_minus - s * np.outer(gain, gain))
    return KalmanState(k, m, p)


def extract_unhippo_pair(
    state_before: KalmanState,
    a_bar_k: np.ndarray,
    b: np.ndarray,
    noise: NoiseConfig,
):
    """Run the covariance-only part of one predict/update and regroup it.

    Returns (a_u, b_u, p_after) with a_u = (I - K b^T) a_bar_k and b_u = K,
    so that a_u @ m + b_u * y reproduces the predict-then-update posterior
    mean. The covariance recursion never sees an observation, which is what
    makes the pair data-independent.
    """
    n = b.size
    sigma = noise.process_scale * np.eye(n)
    p_minus = a_bar_k @ state_before.p @ a_bar_k.T + sigma
    s = b @ p_minus @ b + noise.sigma2
    if s <= 0:
        raise NumericError(f"innovation variance {s} is not positive")
    gain = p_minus @ b / s
    a_u = (np.eye(n) - np.outer(gain, b)) @ a_bar_k
    p_after = matfun.symmetrize(p_minus - s * np.outer(gain, gain))
    return a_u, gain, p_after


@dataclass
class InitBank:
    """Discrete transition pairs (a_bar_k, b_bar_k) for steps k = 1..t_max."""

    n: int
    t_max: int
    kind: str
    pairs: list
    meta: dict = field(default_factory=dict)


def _check_psd(p: np.ndarray, k: int) -> None:
    lowest = np.linalg.eigvalsh(p)[0]
    if lowest < PSD_TOLERANCE:
        raise NumericError(
            f"posterior covariance lost positive semi-definiteness at step {k}: "
            f"smallest eigenvalue {lowest:.3e}"
        )


def build_init_bank(
    n: int,
    t_max: int,
    kind: str,
    noise: NoiseConfig | None = None,
    scheme: str | None = None,
) -> InitBank:
    """Precompute transition pairs for every integer step 1..t_max.

    kind="unhippo" runs the covariance recursion from the standard Gaussian
    prior over observation times t_k = k (with t_0 = t_1, so the first
    transition is the identity) and records the uncertainty-aware pair at
    every step. kind="hippo" records the chosen discretization evaluated at
    timescale k with unit step. Everything is computed in float64; each
    posterior covariance is checked for positive semi-definiteness and the
    build aborts with the step index if the check fails.
    """
    if kind not in BANK_KINDS:
        raise ValueError(f"unknown bank kind {kind!r}, expected one of {BANK_KINDS}")
    if t_max < 1:
        raise ValueError(f"t_max must be >= 1, got {t_max}")
    noise = noise or NoiseConfig()
    sys = make_hippo(n)
    pairs = []
    if kind == "unhippo":
        scheme = scheme or "closed_form"
        reg = make_regularized(sys)
        state = KalmanState(0, np.zeros(n), np.eye(n))
        for k in range(1, t_max + 1):
            t_from = float(k - 1) if k > 1 else float(k)
            try:
                a_bar = transition(reg, t_from, float(k), scheme)
                a_u, b_u, p = extract_unhippo_pair(state, a_bar, sys.b, noise)
                _check_psd(p, k)
            except NumericError as exc:
                raise NumericError(f"bank construction failed at step {k}: {exc}") from exc
            if not (np.all(np.isfinite(a_u)) and np.all(np.isfinite(b_u))):
                raise NumericError(f"bank pair became non-finite at step {k}")
            pairs.append((a_u, b_u))
            state = KalmanState(k, state.m, p)
    else:
        scheme = scheme or "trapezoidal_lssl"
        for k in range(1, t_max + 1):
            a_bar, b_bar = init_pair(sys, scheme, float(k), 1.0)
            if not (np.all(np.isfinite(a_bar)) and np.all(np.isfinite(b_bar))):
                raise NumericError(f"bank pair became non-finite at step {k}")
            pairs.append((a_bar, b_bar))
    meta = {
        "kind": kind,
        "n": n,
        "t_max": t_max,
        "sigma2": noise.sigma2,
        "process_scale": noise.process_scale,
        "scheme": scheme,
        "tool": "unhippo",
        "tool_version": __version__,
    }
    return InitBank(n, t_max, kind, pairs, meta)


def select_timescales(bank: InitBank, h: int, t_min: float, t_max: float) -> list:
    """Pick ``h`` pairs at timescales log-uniformly spaced over [t_min, t_max].

    Timescale t maps to the bank pair at index floor(t). For h = 1 the t_min
    pair is returned.
    """
    if h < 1:
        raise ValueError(f"need at least one timescale, got {h}")
    if not 1 <= t_min <= t_max <= bank.t_max:
        raise ValueError(
            f"timescale range [{t_min}, {t_max}] must lie within [1, {bank.t_max}]"
        )
    if h == 1:
        ts = np.array([t_min], dtype=np.float64)
    else:
        ts = t_min * (t_max / t_min) ** (np.arange(h) / (h - 1))
    indices = np.floor(ts).astype(int)
    return [bank.pairs[i - 1] for i in indices]


def run_filter(
    reg: RegularizedSystem,
    times,
    ys,
    noise: NoiseConfig | None = None,
    scheme: str = "closed_form",
    collect_covariances: bool = False,
):
    """Filter a scalar observation sequence, returning posterior means per step.

    ``times`` are the (positive, strictly increasing) observation times; the
    first transition uses t_0 = t_1. Returns an (L, n) array of posterior
    means, or (means, covariances) when ``collect_covariances`` is set.
    """
    times = np.asarray(times, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if times.shape != ys.shape or times.ndim != 1:
        raise ValueError("times and observations must be 1-D and equally long")
    if times.size == 0:
        raise ValueError("need at least one observation")
    if not times[0] > 0 or np.any(np.diff(times) <= 0):
        raise ValueError("observation times must be positive and strictly increasing")
    noise = noise or NoiseConfig()
    n = reg.n
    sigma = noise.process_scale * np.eye(n)
    state = KalmanState(0, np.zeros(n), np.eye(n))
    means = np.empty((times.size, n))
    covs = [] if collect_covariances else None
    t_prev = times[0]
    for k, (t, y) in enumerate(zip(times, ys), start=1):
        a_bar = transition(reg, t_prev, t, scheme)
        m_minus, p_minus = kalman_predict(state, a_bar, sigma)
        state = kalman_update(m_minus, p_minus, y, reg.b, noise.sigma2, k)
        means[k - 1] = state.m
        if covs is not None:
            covs.append(state.p)
        t_prev = t
    if covs is not None:
        return means, covs
    return means
