"""Data-free coefficient dynamics and their endpoint-slope regularization.

Substituting the model's own endpoint prediction for the signal removes the
data from the continuous dynamics, leaving dc/dt = (1/t) (A^T - I) c. That
matrix extends the represented polynomial unchanged onto a growing window,
which diverges badly; make_regularized constrains the extension to follow the
endpoint slope, solved in least squares, yielding a matrix whose closed-form
transitions exp(log(t'/t) A_R) are stable under repeated application.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import matfun
from .hippo import HippoSystem

TRANSITION_SCHEMES = ("closed_form", "forward", "backward", "trapezoidal")


@dataclass(frozen=True)
class RegularizedSystem:
    """Regularized dynamics matrix ``a_r`` with the endpoint-derivative
    vector ``q`` and the input/output vector ``b`` it was built from."""

    n: int
    a_r: np.ndarray
    q: np.ndarray
    b: np.ndarray


def data_free_matrix(sys: HippoSystem) -> np.ndarray:
    """Dynamics matrix A^T - I of the data-free coefficient evolution.

    Equals b b^T - a by the structure of the dynamics; the transposed form is
    cheaper and exact.
    """
    return sys.a.T - np.eye(sys.n)


def make_q(n: int) -> np.ndarray:
    """Endpoint-derivative vector: q_i = sqrt(2i+1) * i(i+1)/2.

    q_i is the derivative of the i-th scaled basis polynomial at the right
    end of the window, up to the 2/t chain-rule factor.
    """
    if n < 1:
        raise ValueError(f"state size must be >= 1, got {n}")
    i = np.arange(n, dtype=np.float64)
    return np.sqrt(2.0 * i + 1.0) * i * (i + 1.0) / 2.0


def make_regularized(sys: HippoSystem) -> RegularizedSystem:
    """Build the regularized dynamics matrix by least squares.

    Stacks the data-free dynamics with two endpoint-slope conditions (the
    reconstruction's endpoint follows its own slope, and that slope stays
    constant) into the overdetermined system

        [I; b^T; q^T] x = [a^T - I; 2 q^T; q^T]

    and solves for x = a_r with the pseudo-inverse of the (n+2) x n stack.
    The stack is coefficient-independent, so one pseudo-inverse serves all
    columns.
    """
    n = sys.n
    q = make_q(n)
    stack = np.vstack([np.eye(n), sys.b[None, :], q[None, :]])
    rhs = np.vstack([data_free_matrix(sys), 2.0 * q[None, :], q[None, :]])
    a_r = matfun.pinv(stack) @ rhs
    return RegularizedSystem(n, a_r, q, sys.b.copy())


def transition(
    sys_r: RegularizedSystem, t_from: float, t_to: float, scheme: str = "closed_form"
) -> np.ndarray:
    """Transition matrix of the regularized dynamics from t_from to t_to.

    closed_form evaluates the exact solution exp(log(t_to/t_from) * a_r) as a
    matrix exponential; the remaining schemes are the one-step approximations
    with dt = t_to - t_from:

    forward: I + (dt/t_from) a_r
    backward: (I - (dt/t_to) a_r)^-1
    trapezoidal: (I - dt/(2 t_to) a_r)^-1 (I + dt/(2 t_from) a_r)
    """
    if scheme not in TRANSITION_SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}, expected one of {TRANSITION_SCHEMES}")
    if not t_from > 0:
        raise ValueError(f"start time must be positive, got {t_from}")
    if t_to < t_from:
        raise ValueError(f"end time {t_to} precedes start time {t_from}")
    n = sys_r.n
    eye = np.eye(n)
    if scheme == "closed_form":
        return matfun.expm(math.log(t_to / t_from) * sys_r.a_r)
    dt = t_to - t_from
    if scheme == "forward":
        return eye + (dt / t_from) * sys_r.a_r
    if scheme == "backward":
        return matfun.solve(eye - (dt / t_to) * sys_r.a_r, eye)
    return matfun.solve(
        eye - (dt / (2.0 * t_to)) * sys_r.a_r,
        eye + (dt / (2.0 * t_from)) * sys_r.a_r,
    )
