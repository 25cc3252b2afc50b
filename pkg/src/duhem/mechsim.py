"""Second-order mechanical system with Dahl friction.

State: displacement x1, velocity x2 and friction force x3 (the slope-1 Dahl
output driven by x1).  Dynamics:

    x1' = x2
    x2' = -(k x1 + d x2 + x3) / m
    x3' = rho (1 - x3/fc) max(x2, 0) + rho (1 + x3/fc) min(x2, 0)

The energy function V = k x1^2 / 2 + m x2^2 / 2 + H(x3), with H the
closed-form clockwise storage of the friction element, decays along
trajectories at rate at most -d x2^2; `lyapunov_check` certifies the sampled
version of that bound.  The "feedback" mode reinterprets the same vector
field with k = 0 as a mass under the applied force F = -d x2: the
trajectory is identical, only the power bookkeeping changes, which
`passivity_port_check` exercises.

The switching term in x3' is only piecewise smooth, so integration runs in
time with fixed-step RK4 and any step whose velocity changes sign is redone
once as two half steps to keep the local error near the switching plane in
check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import DomainExitError
from .report import VerificationReport
from .storage import storage_dahl_closed_form

__all__ = [
    "MechParams",
    "MechState",
    "MechSeries",
    "simulate_mech",
    "lyapunov_check",
    "passivity_port_check",
]


@dataclass(frozen=True)
class MechParams:
    """Mass-spring-damper parameters plus the Dahl friction pair."""

    m: float = 1.0
    d: float = 0.5
    k: float = 1.0
    rho: float = 1.5
    fc: float = 0.75
    mode: str = "free"

    def __post_init__(self):
        if self.m <= 0.0:
            raise ValueError(f"mass must be positive, got {self.m}")
        if self.d < 0.0:
            raise ValueError(f"damping must be nonnegative, got {self.d}")
        if self.k < 0.0:
            raise ValueError(f"stiffness must be nonnegative, got {self.k}")
        if self.rho <= 0.0 or self.fc <= 0.0:
            raise ValueError("rho and fc must be positive")
        if self.mode not in ("free", "feedback"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "feedback" and self.k != 0.0:
            raise ValueError("feedback mode models a pure mass; it requires k = 0")


@dataclass(frozen=True)
class MechState:
    """Initial condition (displacement, velocity, friction force)."""

    x1: float
    x2: float
    x3: float

    def __post_init__(self):
        for name in ("x1", "x2", "x3"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")


@dataclass(frozen=True, eq=False)
class MechSeries:
    """Sampled trajectory with the energy function evaluated per sample."""

    t: np.ndarray
    x1: np.ndarray
    x2: np.ndarray
    x3: np.ndarray
    v: np.ndarray
    params: MechParams

    def __post_init__(self):
        for name in ("t", "x1", "x2", "x3", "v"):
            a = np.asarray(getattr(self, name), dtype=float)
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        n = self.t.size
        if not all(getattr(self, name).size == n for name in ("x1", "x2", "x3", "v")):
            raise ValueError("inconsistent series lengths")

    def to_csv(self, path: str) -> None:
        data = np.column_stack([self.t, self.x1, self.x2, self.x3, self.v])
        np.savetxt(path, data, delimiter=",", header="t,x1,x2,x3,V",
                   comments="", fmt="%.17g")


def _rk4_mech(m, d, k, rho, fc, x1, x2, x3, h):
    """One RK4 step of the coupled system; pure floats throughout."""

    def deriv(a, b, c):
        db = -(k * a + d * b + c) / m
        if b >= 0.0:
            dc = rho * (1.0 - c / fc) * b
        else:
            dc = rho * (1.0 + c / fc) * b
        return b, db, dc

    k1 = deriv(x1, x2, x3)
    k2 = deriv(x1 + 0.5 * h * k1[0], x2 + 0.5 * h * k1[1], x3 + 0.5 * h * k1[2])
    k3 = deriv(x1 + 0.5 * h * k2[0], x2 + 0.5 * h * k2[1], x3 + 0.5 * h * k2[2])
    k4 = deriv(x1 + h * k3[0], x2 + h * k3[1], x3 + h * k3[2])
    s = h / 6.0
    return (
        x1 + s * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        x2 + s * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        x3 + s * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
    )


def simulate_mech(
    params: MechParams,
    init: MechState,
    horizon: float,
    step: float = 1e-3,
) -> MechSeries:
    """Fixed-step RK4 integration of the mechanical system over [0, horizon].

    A step whose velocity crosses zero is redone once as two half steps (the
    friction slope switches with the sign of x2, so the plain step would
    integrate through a kink).  Raises DomainExitError if the friction force
    reaches the boundary of its confinement band (-fc, fc).
    """
    if horizon <= 0.0:
        raise ValueError("horizon must be positive")
    if step <= 0.0:
        raise ValueError("step must be positive")
    fc = params.fc
    if abs(init.x3) >= fc:
        raise ValueError(f"|x3(0)| = {abs(init.x3)} must lie inside (-{fc}, {fc})")

    n = max(1, int(round(horizon / step)))
    h = horizon / n
    m, d, k, rho = params.m, params.d, params.k, params.rho

    t = np.linspace(0.0, horizon, n + 1)
    x1 = np.empty(n + 1)
    x2 = np.empty(n + 1)
    x3 = np.empty(n + 1)
    x1[0], x2[0], x3[0] = init.x1, init.x2, init.x3

    a, b, c = float(init.x1), float(init.x2), float(init.x3)
    for j in range(1, n + 1):
        na, nb, nc = _rk4_mech(m, d, k, rho, fc, a, b, c, h)
        if nb * b < 0.0:
            ha, hb, hc = _rk4_mech(m, d, k, rho, fc, a, b, c, 0.5 * h)
            na, nb, nc = _rk4_mech(m, d, k, rho, fc, ha, hb, hc, 0.5 * h)
        if abs(nc) >= fc:
            raise DomainExitError(
                t=float(t[j]), u=na, y=nc,
                message=f"friction force reached the band boundary at t={t[j]:.6g}",
            )
        a, b, c = na, nb, nc
        x1[j], x2[j], x3[j] = a, b, c

    v = 0.5 * k * x1**2 + 0.5 * m * x2**2 + storage_dahl_closed_form(x3, rho, fc)
    return MechSeries(t=t, x1=x1, x2=x2, x3=x3, v=v, params=params)


def lyapunov_check(
    series: MechSeries,
    params: MechParams,
    tol: float = 1e-4,
) -> VerificationReport:
    """Sampled decay certificate for the energy function.

    Checks the forward-difference rate bound dV/dt <= -d x2^2 + tol at
    every interior sample and, on top of it, that V never increases by more
    than tol * max(V) across a step.  worst_violation is the larger of the
    rate excess and the normalized monotonicity excess, both of which the
    same tol bounds.
    """
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    dt = np.diff(series.t)
    dv = np.diff(series.v)
    rate = dv / dt + params.d * series.x2[:-1] ** 2
    k_rate = int(np.argmax(rate))
    vmax = float(series.v.max())
    mono = dv / vmax if vmax > 0.0 else dv
    k_mono = int(np.argmax(mono))
    worst_rate = float(rate[k_rate])
    worst_mono = float(mono[k_mono])
    if worst_rate >= worst_mono:
        worst, k = worst_rate, k_rate
    else:
        worst, k = worst_mono, k_mono
    return VerificationReport.from_violation(
        name="lyapunov-decay",
        worst_violation=worst,
        worst_location=(float(series.t[k]), float(series.x2[k]), float(series.x3[k])),
        tolerance=float(tol),
        samples_checked=int(rate.size),
        details={
            "rate_violation": worst_rate,
            "monotonicity_violation": worst_mono,
            "v_initial": float(series.v[0]),
            "v_final": float(series.v[-1]),
            "mode": params.mode,
        },
    )


def passivity_port_check(
    series: MechSeries,
    params: MechParams,
    tol: float = 1e-4,
) -> VerificationReport:
    """Stored energy never exceeds the energy supplied through the force port.

    In feedback mode the applied force is F = -d x2, so the supplied energy
    is W(T) = int F x2 dt; passivity requires V(T) - V(0) <= W(T) + tol at
    every sample time T (trapezoid quadrature for W).
    """
    if params.mode != "feedback":
        raise ValueError("port bookkeeping is defined for feedback mode only")
    power = -params.d * series.x2**2
    w = np.concatenate(
        [[0.0], np.cumsum(0.5 * (power[:-1] + power[1:]) * np.diff(series.t))]
    )
    excess = (series.v - series.v[0]) - w
    k = int(np.argmax(excess))
    return VerificationReport.from_violation(
        name="passivity-port",
        worst_violation=float(excess[k]),
        worst_location=(float(series.t[k]), float(series.x2[k]), float(series.x3[k])),
        tolerance=float(tol),
        samples_checked=int(excess.size),
        details={
            "supplied_total": float(w[-1]),
            "stored_change": float(series.v[-1] - series.v[0]),
            "mode": params.mode,
        },
    )
