"""Explicit time-stepping methods over a flat first-order state vector.

All four methods advance ``s' = f(s)`` by a fixed step ``h``.  The state
vector is a flat float64 array; for second-order mechanics it is laid out
per particle as ``[pos(dim), vel(dim)]`` blocks, so a particle's slots are
``s[2*dim*i : 2*dim*(i+1)]``.  Euler, midpoint, and RK4 are structure
agnostic; the half-step (leapfrog) method needs the pos/vel split and an
explicit carry value between calls.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

DerivFn = Callable[[np.ndarray], np.ndarray]


class IntegratorKind(enum.Enum):
    EXPLICIT_EULER = "euler"
    MIDPOINT = "midpoint"
    FEYNMAN = "feynman"
    RK4 = "rk4"


class NumericFault(Exception):
    """A step produced a non-finite entry; ``index`` is the first offender."""

    def __init__(self, index: int):
        self.index = index
        super().__init__(f"non-finite state entry at index {index}")


def _checked(s: np.ndarray) -> np.ndarray:
    if not np.all(np.isfinite(s)):
        raise NumericFault(int(np.argmin(np.isfinite(s))))
    return s


# Step arithmetic may overflow to inf/nan on an unstable system; _checked
# turns that into a NumericFault, so the warnings are suppressed.

def euler_step(s: np.ndarray, f: DerivFn, h: float) -> np.ndarray:
    """One explicit Euler step: s + h*f(s)."""
    with np.errstate(over="ignore", invalid="ignore"):
        return _checked(s + h * f(s))


def midpoint_step(s: np.ndarray, f: DerivFn, h: float) -> np.ndarray:
    """One midpoint step: s + h*f(s + (h/2)*f(s)).  Two evaluations."""
    with np.errstate(over="ignore", invalid="ignore"):
        mid = s + (0.5 * h) * f(s)
        return _checked(s + h * f(mid))


def rk4_step(s: np.ndarray, f: DerivFn, h: float) -> np.ndarray:
    """One classical Runge-Kutta 4 step.  Four evaluations."""
    with np.errstate(over="ignore", invalid="ignore"):
        k1 = f(s)
        k2 = f(s + (0.5 * h) * k1)
        k3 = f(s + (0.5 * h) * k2)
        k4 = f(s + h * k3)
        return _checked(s + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4))


@dataclass
class HalfStepCarry:
    """Leapfrog carry: velocity at the trailing half step plus the
    acceleration already evaluated at the current position (reused as the
    next kick, so steady-state cost is one evaluation per step)."""

    v_half: np.ndarray
    accel: np.ndarray


def _layout_masks(n: int, dim: int) -> tuple[np.ndarray, np.ndarray]:
    """Boolean masks selecting position and velocity slots for the
    ``[pos(dim), vel(dim)]`` per-particle layout."""
    if n % (2 * dim) != 0:
        raise ValueError(f"state length {n} does not fit 2*dim={2 * dim} blocks")
    phase = np.arange(n) % (2 * dim)
    pos = phase < dim
    return pos, ~pos


def feynman_step(
    s: np.ndarray,
    f: DerivFn,
    h: float,
    carry: Optional[HalfStepCarry],
    dim: int = 1,
) -> tuple[np.ndarray, HalfStepCarry]:
    """One half-step (leapfrog) step.

    Velocities live at half steps: v(t+h/2) = v(t-h/2) + h*a(x(t)), then
    x(t+h) = x(t) + h*v(t+h/2).  With no carry the kick is bootstrapped as
    v(h/2) = v(0) + (h/2)*a(x(0)).  The returned state reports the velocity
    synchronized to the new position, i.e. the average of the half-step
    velocities on either side of t+h; the acceleration evaluated for that
    average is kept in the carry, so every call after the first costs
    exactly one derivative evaluation.
    """
    pos_m, vel_m = _layout_masks(len(s), dim)
    x = s[pos_m]
    with np.errstate(over="ignore", invalid="ignore"):
        if carry is None:
            a0 = f(s)[vel_m]
            v_half = s[vel_m] + (0.5 * h) * a0
        else:
            if carry.v_half.shape != x.shape:
                raise ValueError("half-step carry does not match the state layout")
            v_half = carry.v_half + h * carry.accel
        x_new = x + h * v_half

        stage = np.empty_like(s)
        stage[pos_m] = x_new
        stage[vel_m] = v_half
        a_new = f(stage)[vel_m]

        out = np.empty_like(s)
        out[pos_m] = x_new
        out[vel_m] = v_half + (0.5 * h) * a_new
    return _checked(out), HalfStepCarry(v_half=v_half, accel=a_new)


def step_state(
    kind: IntegratorKind,
    s: np.ndarray,
    f: DerivFn,
    h: float,
    carry: Optional[HalfStepCarry] = None,
    dim: int = 1,
) -> tuple[np.ndarray, Optional[HalfStepCarry]]:
    """Dispatch one step of the named method.  ``carry`` is consumed and
    produced only by the half-step method; the others return None."""
    if h <= 0:
        raise ValueError("step size must be positive")
    if kind is IntegratorKind.EXPLICIT_EULER:
        return euler_step(s, f, h), None
    if kind is IntegratorKind.MIDPOINT:
        return midpoint_step(s, f, h), None
    if kind is IntegratorKind.RK4:
        return rk4_step(s, f, h), None
    if kind is IntegratorKind.FEYNMAN:
        return feynman_step(s, f, h, carry, dim=dim)
    raise ValueError(f"unknown integrator kind: {kind!r}")
