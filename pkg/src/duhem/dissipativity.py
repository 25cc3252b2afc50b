"""Dissipativity checks against the clockwise supply rate.

A counterclockwise-damping sign structure puts F = (f1 - f2)/2 on the side
of zero that makes hysteresis loops in the input-output plane run clockwise;
`check_assumption_A` certifies the sign structure on a grid.  The central
check, `verify_dissipation`, simulates the operator along an input, builds
the clockwise storage at every sample and tests the sampled dissipation
inequality

    dH/dt <= y * du/dt

one-sidedly: the forward variant compares forward differences of H with the
right input rate, the backward variant uses left rates.  `loop_orientation`
classifies the final closed input cycle by the sign of its signed loop area
(positive area means clockwise traversal), and `loop_areas` decomposes a
trajectory into the successive closed loops at its starting level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import DuhemModel, Trajectory, simulate
from .curves import anhysteresis_values
from .report import VerificationReport
from .signals import InputSignal
from .storage import storage_cw_batch

__all__ = [
    "SupplySeries",
    "LoopClassification",
    "check_assumption_A",
    "verify_dissipation",
    "verify_dissipation_pair",
    "cw_supply_integral",
    "loop_orientation",
    "loop_areas",
]


def check_assumption_A(
    model: DuhemModel,
    region: tuple[tuple[float, float], tuple[float, float]],
    grid: tuple[int, int] = (200, 200),
) -> VerificationReport:
    """Grid certificate of the damping sign structure.

    Requires F >= 0 at and below the anhysteresis curve and F <= 0 above it
    on the rectangle region = ((sigma_lo, sigma_hi), (xi_lo, xi_hi)).  The
    violation at a grid point is the amount F sticks out on the wrong side;
    a 1e-12 tolerance absorbs roundoff at points that sit exactly on the
    curve.
    """
    (s_lo, s_hi), (x_lo, x_hi) = region
    if not (s_lo < s_hi and x_lo < x_hi):
        raise ValueError("degenerate region")
    n_sig, n_xi = grid
    sig = np.linspace(s_lo, s_hi, n_sig)
    if not model.domain.contains(sig).all():
        raise ValueError("sigma range extends outside the model domain")
    xiv = np.linspace(x_lo, x_hi, n_xi)
    fan = anhysteresis_values(model, xiv)

    S = sig[:, None]
    X = np.broadcast_to(xiv[None, :], (n_sig, n_xi))
    F = np.asarray(model.F(S, X), dtype=float)
    upper = S > fan[None, :]

    viol = np.where(upper, F, -F)
    i, j = np.unravel_index(np.argmax(viol), viol.shape)
    return VerificationReport.from_violation(
        name="damping-sign-structure",
        worst_violation=float(viol[i, j]),
        worst_location=(float(sig[i]), float(xiv[j])),
        tolerance=1e-12,
        samples_checked=int(viol.size),
        details={
            "grid": [int(n_sig), int(n_xi)],
            "side": "above" if bool(upper[i, j]) else "below",
            "model": model.name,
        },
    )


def verify_dissipation_pair(
    model: DuhemModel,
    signal: InputSignal,
    y0: float,
    *,
    tol: float | None = None,
    step: float = 5e-3,
    ride_step: float | None = None,
) -> tuple[VerificationReport, VerificationReport]:
    """Forward and backward dissipation reports sharing one storage pass.

    The storage evaluation dominates the cost, so checking both one-sided
    variants together is twice as fast as two separate calls.
    """
    if tol is None:
        tol = 1e-6 + 10.0 * step
    traj = simulate(model, signal, y0, step=step)
    batch = storage_cw_batch(model, traj.y, traj.u, step=ride_step or step)
    H = batch.value
    dt = np.diff(traj.t)
    du = np.diff(traj.u)
    dH = np.diff(H)
    out = []
    for direction, supply in (
        ("forward", traj.y[:-1] * du),
        ("backward", traj.y[1:] * du),
    ):
        viol = (dH - supply) / dt
        k = int(np.argmax(viol))
        out.append(
            VerificationReport.from_violation(
                name=f"dissipation-{direction}",
                worst_violation=float(viol[k]),
                worst_location=(float(traj.t[k]), float(traj.u[k]), float(traj.y[k])),
                tolerance=float(tol),
                samples_checked=int(viol.size),
                details={
                    "model": model.name,
                    "step": float(step),
                    "ride_step": float(ride_step or step),
                    "y0": float(y0),
                    "max_storage": float(H.max()),
                },
            )
        )
    return out[0], out[1]


def verify_dissipation(
    model: DuhemModel,
    signal: InputSignal,
    y0: float,
    *,
    tol: float | None = None,
    step: float = 5e-3,
    ride_step: float | None = None,
    direction: str = "forward",
) -> VerificationReport:
    """Sampled dissipation inequality along one input.

    Simulates the operator, evaluates the clockwise storage at every sample
    and checks dH/dt <= y * du/dt between consecutive samples, with dH/dt a
    forward difference against the right input rate and the sample's own
    output (direction="forward"), or against the left rate and the next
    sample's output (direction="backward").  The default tolerance
    1e-6 + 10 * step covers the first-order sampling error of the
    difference quotients at unit input rate.
    """
    if direction not in ("forward", "backward"):
        raise ValueError(f"unknown direction {direction!r}")
    fwd, bwd = verify_dissipation_pair(
        model, signal, y0, tol=tol, step=step, ride_step=ride_step
    )
    return fwd if direction == "forward" else bwd


@dataclass(frozen=True, eq=False)
class SupplySeries:
    """Cumulative supply integral W(t) = int y du along a trajectory."""

    t: np.ndarray
    values: np.ndarray
    running_min: np.ndarray

    def __post_init__(self):
        for name in ("t", "values", "running_min"):
            a = np.asarray(getattr(self, name), dtype=float)
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        if not (self.t.size == self.values.size == self.running_min.size):
            raise ValueError("inconsistent series lengths")


def cw_supply_integral(traj: Trajectory) -> SupplySeries:
    """Trapezoid cumulative supply along a simulated trajectory."""
    inc = 0.5 * (traj.y[:-1] + traj.y[1:]) * np.diff(traj.u)
    w = np.concatenate([[0.0], np.cumsum(inc)])
    return SupplySeries(t=traj.t, values=w, running_min=np.minimum.accumulate(w))


@dataclass(frozen=True)
class LoopClassification:
    """Orientation of the final closed input cycle."""

    label: str
    area: float
    t_close: float


def _final_direction(u: np.ndarray) -> float:
    du = np.diff(u)
    nz = np.nonzero(du)[0]
    if nz.size == 0:
        raise ValueError("constant input carries no loop")
    return math.copysign(1.0, du[nz[-1]])


def loop_orientation(traj: Trajectory, *, area_tol: float = 1e-9) -> LoopClassification:
    """Classify the last closed cycle of the input by its signed loop area.

    Scans backward for the previous time the input crossed its final level
    moving in the same direction; the signed area of y du over that stretch
    is positive for clockwise loops.  Raises ValueError when the input never
    closes a cycle at its final level.
    """
    u, y, t = traj.u, traj.y, traj.t
    ue = float(u[-1])
    d_end = _final_direction(u)
    n = u.size

    def classify(area: float, t_star: float) -> LoopClassification:
        if area > area_tol:
            label = "clockwise"
        elif area < -area_tol:
            label = "counterclockwise"
        else:
            label = "degenerate"
        return LoopClassification(label=label, area=float(area), t_close=float(t_star))

    for j in range(n - 3, -1, -1):
        du_j = u[j + 1] - u[j]
        if du_j == 0.0 or math.copysign(1.0, du_j) != d_end:
            continue
        if (u[j] - ue) * (u[j + 1] - ue) > 0.0:
            continue
        frac = (ue - u[j]) / du_j
        y_star = y[j] + frac * (y[j + 1] - y[j])
        t_star = t[j] + frac * (t[j + 1] - t[j])
        area = 0.5 * (y_star + y[j + 1]) * (u[j + 1] - ue)
        area += float(
            np.sum(0.5 * (y[j + 1 : -1] + y[j + 2 :]) * np.diff(u[j + 1 :]))
        )
        return classify(area, t_star)
    # no interior same-direction crossing: the path itself may close a loop
    if u[0] == ue:
        area = float(np.sum(0.5 * (y[:-1] + y[1:]) * np.diff(u)))
        return classify(area, float(t[0]))
    raise ValueError("input never closes a cycle at its final level")


def loop_areas(traj: Trajectory, *, level: float | None = None):
    """Signed areas of the successive closed loops at a reference input level.

    The level defaults to the starting input value; a loop closes each time
    the input returns to the level moving in its original departure
    direction.  Returns (close_times, areas) as float arrays; both are empty
    when no loop closes.
    """
    u, y, t = traj.u, traj.y, traj.t
    lvl = float(u[0]) if level is None else float(level)
    du = np.diff(u)
    nz = np.nonzero(du)[0]
    if nz.size == 0:
        return np.zeros(0), np.zeros(0)
    d0 = math.copysign(1.0, du[nz[0]])

    times: list[float] = []
    areas: list[float] = []
    acc = 0.0
    # a half-open crossing convention (strictly from the approach side, onto
    # or past the level) counts each return exactly once even when samples
    # land on the level
    on_level = u[0] == lvl
    for j in range(u.size - 1):
        a, b = float(u[j]), float(u[j + 1])
        if a == b:
            continue
        crosses = (a < lvl <= b) if d0 > 0 else (a > lvl >= b)
        if crosses:
            frac = (lvl - a) / (b - a)
            y_star = y[j] + frac * (y[j + 1] - y[j])
            t_star = t[j] + frac * (t[j + 1] - t[j])
            if on_level:
                times.append(float(t_star))
                areas.append(acc + 0.5 * (y[j] + y_star) * (lvl - a))
            on_level = True
            acc = 0.5 * (y_star + y[j + 1]) * (b - lvl)
        else:
            acc += 0.5 * (y[j] + y[j + 1]) * (b - a)
    return np.asarray(times, dtype=float), np.asarray(areas, dtype=float)
