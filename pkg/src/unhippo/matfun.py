"""Dense matrix functions: exponential, pseudo-inverse, solves, symmetrization.

All routines take and return float64 numpy arrays. Vectors are 1-D arrays,
matrices 2-D. Inputs must be finite; every function validates this so that
NaN/Inf surface where they are introduced instead of ten calls later.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .errors import NumericError


def check_finite(a: np.ndarray, name: str = "input") -> None:
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")


def as_square(a, name: str = "input") -> np.ndarray:
    """Convert to a finite float64 square matrix or raise ValueError."""
    out = np.asarray(a, dtype=np.float64)
    if out.ndim != 2 or out.shape[0] != out.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {out.shape}")
    check_finite(out, name)
    return out


def expm(a) -> np.ndarray:
    """Matrix exponential e^a via scaling-and-squaring with a Pade approximant.

    The result is finite for inputs whose exponential fits in double range,
    i.e. roughly ||a||_1 < 700. Overflow raises NumericError reporting the
    offending norm.
    """
    a = as_square(a, "expm input")
    with np.errstate(over="ignore", invalid="ignore"):
        out = scipy.linalg.expm(a)
    if not np.all(np.isfinite(out)):
        raise NumericError(
            f"matrix exponential overflowed to non-finite entries "
            f"(input 1-norm {np.linalg.norm(a, 1):.6e})"
        )
    return out


def pinv(a, rel_tol: float = 1e-12) -> np.ndarray:
    """Moore-Penrose pseudo-inverse via SVD.

    Singular values below ``rel_tol`` times the largest singular value are
    treated as zero.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError(f"pinv expects a 2-D matrix, got shape {a.shape}")
    check_finite(a, "pinv input")
    if rel_tol < 0:
        raise ValueError(f"rel_tol must be nonnegative, got {rel_tol}")
    try:
        return np.linalg.pinv(a, rcond=rel_tol)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"SVD did not converge in pinv: {exc}") from exc


def solve(a, b) -> np.ndarray:
    """Solve a x = b by LU with partial pivoting."""
    a = as_square(a, "solve matrix")
    try:
        return np.linalg.solve(a, b)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"singular linear system: {exc}") from exc


def symmetrize(p) -> np.ndarray:
    """Return (p + p^T)/2 with exact bitwise symmetry.

    The average is computed once and the lower triangle is copied to the
    upper, so ``out == out.T`` holds entrywise, not just within rounding.
    """
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 2 or p.shape[0] != p.shape[1]:
        raise ValueError(f"symmetrize needs a square matrix, got shape {p.shape}")
    out = (p + p.T) / 2.0
    iu = np.triu_indices(p.shape[0], k=1)
    out[iu] = out.T[iu]
    return out
