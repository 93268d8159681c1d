"""Legendre polynomials and the scaled orthonormal basis on a window [0, t].

The basis functions are sqrt(2i+1) * P_i(2*tau/t - 1) for degrees i = 0..n-1,
orthonormal under the window inner product (1/t) * integral_0^t f*g. A signal
history is represented by its coefficient vector in this basis; projection
uses trapezoidal quadrature on the caller's sample grid, reconstruction is a
plain basis expansion.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_trapezoid = getattr(np, "trapezoid", None) or np.trapz


@dataclass(frozen=True)
class Basis:
    """Orthonormal polynomial basis of size ``n`` on the window [0, t]."""

    n: int
    t: float

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"basis size must be >= 1, got {self.n}")
        if not self.t > 0:
            raise ValueError(f"time horizon must be positive, got {self.t}")


def legendre_eval(i: int, x):
    """Evaluate the degree-``i`` Legendre polynomial at ``x``.

    Uses the three-term recurrence
    (k+1) P_{k+1}(x) = (2k+1) x P_k(x) - k P_{k-1}(x),
    which is exact for i in {0, 1} and stable for all real x, including
    outside [-1, 1] where P_i grows like x**i. Evaluation is supported up to
    degree 512; higher degrees work but carry no accuracy claim.
    """
    if i < 0:
        raise ValueError(f"degree must be nonnegative, got {i}")
    x = np.asarray(x, dtype=np.float64)
    scalar = x.ndim == 0
    p_prev = np.ones_like(x)
    if i == 0:
        return float(p_prev) if scalar else p_prev
    p = x.copy()
    for k in range(1, i):
        p, p_prev = ((2 * k + 1) * x * p - k * p_prev) / (k + 1), p
    return float(p) if scalar else p


def _all_degrees(n: int, x: np.ndarray) -> np.ndarray:
    """All P_0..P_{n-1} at the points ``x``, shape (n, len(x))."""
    out = np.empty((n, x.size))
    out[0] = 1.0
    if n > 1:
        out[1] = x
    for k in range(1, n - 1):
        out[k + 1] = ((2 * k + 1) * x * out[k] - k * out[k - 1]) / (k + 1)
    return out


def _scaled_basis(b: Basis, taus: np.ndarray) -> np.ndarray:
    """All basis functions at the points ``taus``, shape (n, len(taus))."""
    x = 2.0 * np.asarray(taus, dtype=np.float64) / b.t - 1.0
    scale = np.sqrt(2.0 * np.arange(b.n) + 1.0)
    return scale[:, None] * _all_degrees(b.n, np.atleast_1d(x))


def basis_eval(b: Basis, i: int, tau):
    """Evaluate basis function ``i`` at time ``tau``.

    ``tau`` may lie outside [0, t]; the basis polynomials then extrapolate
    (and diverge rapidly, which is occasionally what one wants to show).
    """
    if not 0 <= i < b.n:
        raise ValueError(f"basis index {i} out of range for n={b.n}")
    x = 2.0 * np.asarray(tau, dtype=np.float64) / b.t - 1.0
    return np.sqrt(2.0 * i + 1.0) * legendre_eval(i, x)


def project(b: Basis, taus, values) -> np.ndarray:
    """Project sampled signal values onto the basis.

    Approximates the window inner products (1/t) * integral f * g_i with
    composite trapezoidal quadrature over the given samples. Samples must be
    sorted by tau, contain at least two points, and lie within [0, t].
    """
    taus = np.asarray(taus, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    if taus.ndim != 1 or taus.shape != values.shape:
        raise ValueError(
            f"taus and values must be 1-D and equally long, got {taus.shape} and {values.shape}"
        )
    if taus.size < 2:
        raise ValueError(f"need at least 2 samples, got {taus.size}")
    if np.any(np.diff(taus) <= 0):
        raise ValueError("sample times must be strictly increasing")
    if taus[0] < 0 or taus[-1] > b.t:
        raise ValueError(f"sample times must lie within [0, {b.t}]")
    g = _scaled_basis(b, taus)
    return _trapezoid(values[None, :] * g, taus, axis=1) / b.t


def reconstruct(b: Basis, c, taus) -> np.ndarray:
    """Evaluate the basis expansion with coefficients ``c`` at times ``taus``.

    Times may exceed the window horizon t, in which case the polynomial
    extrapolates. At tau = t the result equals dot(sqrt(2i+1), c) exactly,
    because P_i(1) evaluates to exactly 1 under the recurrence.
    """
    c = np.asarray(c, dtype=np.float64)
    if c.shape != (b.n,):
        raise ValueError(f"coefficient vector must have shape ({b.n},), got {c.shape}")
    taus = np.atleast_1d(np.asarray(taus, dtype=np.float64))
    return c @ _scaled_basis(b, taus)
