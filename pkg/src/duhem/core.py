"""Duhem hysteresis operators and rate-independent simulation.

A Duhem operator evolves its output y along an absolutely continuous input u
through

    dy/dt = f1(y, u) * max(0, du/dt) + f2(y, u) * min(0, du/dt),  y(0) = y0.

The response is rate independent: on any stretch where u moves monotonically,
y solves dy/du = f1(y, u) (u increasing) or dy/du = f2(y, u) (u decreasing),
and the traversed (u, y) path does not depend on the clock.  simulate()
therefore integrates in input arc length segment by segment, which makes the
fixed-step error budget a function of the u-resolution alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .integrate import rk4_step
from .report import VerificationReport
from .signals import InputSignal

__all__ = [
    "Domain",
    "WHOLE_PLANE",
    "DuhemModel",
    "Trajectory",
    "DomainExitError",
    "simulate",
    "check_existence_conditions",
    "smoothness_probe",
]


class DomainExitError(RuntimeError):
    """The integration left the model's validity region.

    Carries the first offending sample so callers can report where the
    state escaped.
    """

    def __init__(self, t: float, u: float, y: float, message: str | None = None):
        self.t = t
        self.u = u
        self.y = y
        super().__init__(
            message
            or f"state left the model domain at t={t:.6g} (u={u:.6g}, y={y:.6g})"
        )


@dataclass(frozen=True)
class Domain:
    """Open band sigma_min < y < sigma_max, unrestricted in the input.

    Covers the built-in catalog: the whole plane (default limits) and the
    open band (-Fc, Fc) x R used by Dahl-type friction models.
    """

    sigma_min: float = -math.inf
    sigma_max: float = math.inf

    def __post_init__(self):
        if not self.sigma_min < self.sigma_max:
            raise ValueError("domain requires sigma_min < sigma_max")

    def contains(self, sigma, xi=None):
        """Elementwise membership test; xi is accepted for interface symmetry."""
        return (np.asarray(sigma) > self.sigma_min) & (
            np.asarray(sigma) < self.sigma_max
        )

    @property
    def bounded(self) -> bool:
        return math.isfinite(self.sigma_min) or math.isfinite(self.sigma_max)


WHOLE_PLANE = Domain()


@dataclass(frozen=True, eq=False)
class DuhemModel:
    """Duhem operator defined by its two slope fields.

    f1 and f2 map (sigma, xi) to the output slope dy/du on increasing and
    decreasing input stretches; both must accept floats and numpy arrays
    elementwise.  f_an, when given, is the explicit anhysteresis function
    (the sigma solving f1(sigma, xi) = f2(sigma, xi)); models without a
    closed form leave it None and the curve operations solve for it.
    """

    name: str
    f1: Callable
    f2: Callable
    params: Mapping[str, float] = field(default_factory=dict)
    domain: Domain = WHOLE_PLANE
    f_an: Callable | None = None

    def __post_init__(self):
        if not callable(self.f1) or not callable(self.f2):
            raise ValueError("f1 and f2 must be callable")
        object.__setattr__(self, "params", dict(self.params))

    def F(self, sigma, xi):
        """Half-difference of the slope fields; zero exactly on the
        anhysteresis curve."""
        return 0.5 * (self.f1(sigma, xi) - self.f2(sigma, xi))

    def G(self, sigma, xi):
        """Half-sum of the slope fields (f1 = G + F and f2 = G - F)."""
        return 0.5 * (self.f1(sigma, xi) + self.f2(sigma, xi))


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Sampled response: arrays t, u, y of equal length plus run metadata."""

    t: np.ndarray
    u: np.ndarray
    y: np.ndarray
    model_name: str = ""
    y0: float = math.nan
    step: float = math.nan

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        u = np.asarray(self.u, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if not (t.size == u.size == y.size) or t.ndim != 1:
            raise ValueError("t, u, y must be 1-d arrays of equal length")
        if t.size > 1 and not (np.diff(t) > 0.0).all():
            raise ValueError("sample times must be strictly increasing")
        for a in (t, u, y):
            a.setflags(write=False)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "y", y)

    @property
    def n_samples(self) -> int:
        return int(self.t.size)

    def to_csv(self, path) -> None:
        """Write samples as CSV with header t,u,y at full float precision."""
        with open(path, "w", newline="") as fh:
            fh.write("t,u,y\n")
            for ti, ui, yi in zip(self.t, self.u, self.y):
                fh.write(f"{ti:.17g},{ui:.17g},{yi:.17g}\n")


def _segment_substeps(du: float, step: float | None) -> int:
    # default step: segment u-length / 1000, capped at 1e-3
    if step is None:
        step = min(abs(du) / 1000.0, 1e-3)
    if step <= 0.0:
        raise ValueError(f"step must be positive, got {step}")
    return max(1, int(math.ceil(abs(du) / step)))


def simulate(
    model: DuhemModel,
    signal: InputSignal,
    y0: float,
    step: float | None = None,
) -> Trajectory:
    """Drive the operator along a piecewise-linear input.

    Each monotone segment is integrated in u with fixed-substep RK4, substep
    at most `step` (default: segment u-length / 1000, capped at 1e-3).
    Samples are emitted at every breakpoint and every uniform substep, with
    sample times linearly interpolated inside segments.  Segments with zero
    u-change hold y exactly.  If a substep lands outside the model domain,
    a DomainExitError carrying the first exit point is raised; no clamping
    is applied.

    Parameters
    ----------
    model : DuhemModel
    signal : InputSignal
    y0 : float
        Initial output; (y0, u(0)) must lie inside the model domain.
    step : float, optional
        Maximum u-substep.

    Returns
    -------
    Trajectory
    """
    y0 = float(y0)
    if not np.isfinite(y0):
        raise ValueError(f"y0 must be finite, got {y0}")
    u_first = float(signal.values[0])
    if not bool(model.domain.contains(y0, u_first)):
        raise DomainExitError(0.0, u_first, y0, "initial state outside model domain")

    ts = [float(signal.times[0])]
    us = [u_first]
    ys = [y0]
    y = y0
    f1, f2 = model.f1, model.f2
    dom = model.domain
    guarded = dom.bounded

    for t0, t1, ua, ub in signal.segments():
        du = ub - ua
        if du == 0.0:
            ts.append(t1)
            us.append(ub)
            ys.append(y)
            continue
        n = _segment_substeps(du, step)
        h = du / n
        f = f1 if du > 0.0 else f2
        inv_rate = (t1 - t0) / du
        u = ua
        for k in range(1, n + 1):
            y = float(rk4_step(f, y, u, h))
            u = ua + k * h if k < n else ub
            t = t1 if k == n else t0 + (u - ua) * inv_rate
            if guarded and not (dom.sigma_min < y < dom.sigma_max):
                raise DomainExitError(t, u, y)
            ts.append(t)
            us.append(u)
            ys.append(y)

    eff_step = step if step is not None else math.nan
    return Trajectory(
        np.array(ts),
        np.array(us),
        np.array(ys),
        model_name=model.name,
        y0=y0,
        step=float(eff_step) if eff_step is not None else math.nan,
    )


def check_existence_conditions(
    model: DuhemModel,
    grid: tuple[np.ndarray, np.ndarray],
    lambda_bound: float,
) -> VerificationReport:
    """Grid test of the one-sided Lipschitz inequalities behind well-posedness.

    For every pair sigma1 != sigma2 at each xi the difference quotients

        q1 = (f1(sigma1, xi) - f1(sigma2, xi)) / (sigma1 - sigma2)
        q2 = (f2(sigma1, xi) - f2(sigma2, xi)) / (sigma1 - sigma2)

    must satisfy q1 <= lambda_bound and q2 >= -lambda_bound.  The report's
    worst_violation is the largest excess over the bound (negative when the
    inequalities hold with margin).

    Parameters
    ----------
    grid : (sigma_values, xi_values)
        Rectangular evaluation grid; every sigma must lie inside the model
        domain.
    lambda_bound : float
        Common nonnegative bound for both inequalities.
    """
    if lambda_bound < 0.0:
        raise ValueError("lambda_bound must be nonnegative")
    sig = np.asarray(grid[0], dtype=float)
    xiv = np.asarray(grid[1], dtype=float)
    if sig.size < 2 or xiv.size < 1:
        raise ValueError("grid needs at least two sigma values and one xi value")
    if not model.domain.contains(sig).all():
        raise ValueError("sigma grid extends outside the model domain")

    ds = sig[:, None] - sig[None, :]
    off = ~np.eye(sig.size, dtype=bool)
    worst = -math.inf
    worst_loc = (sig[0], sig[0], xiv[0])
    worst_kind = ""
    for xi in xiv:
        xi_col = np.full_like(sig, xi)
        v1 = np.asarray(model.f1(sig, xi_col), dtype=float)
        v2 = np.asarray(model.f2(sig, xi_col), dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            q1 = (v1[:, None] - v1[None, :]) / ds
            q2 = (v2[:, None] - v2[None, :]) / ds
        e1 = np.where(off, q1 - lambda_bound, -math.inf)
        e2 = np.where(off, -lambda_bound - q2, -math.inf)
        for kind, e in (("increasing-branch", e1), ("decreasing-branch", e2)):
            i, j = np.unravel_index(np.argmax(e), e.shape)
            if e[i, j] > worst:
                worst = float(e[i, j])
                worst_loc = (float(sig[i]), float(sig[j]), float(xi))
                worst_kind = kind
    return VerificationReport.from_violation(
        name="existence-conditions",
        worst_violation=worst,
        worst_location=worst_loc,
        tolerance=0.0,
        samples_checked=int(xiv.size * sig.size * (sig.size - 1)),
        details={
            "lambda_bound": float(lambda_bound),
            "worst_branch": worst_kind,
            "model": model.name,
        },
    )


def smoothness_probe(
    model: DuhemModel,
    points: np.ndarray,
    h: float = 1e-5,
) -> float:
    """Finite-difference regularity probe of f1 and f2 in the output variable.

    Compares central-difference slopes at spacings h and h/2 at each probe
    point; for continuously differentiable fields the two agree to O(h^2).
    Returns the worst absolute mismatch normalized by 1 + |slope|.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must have shape (n, 2) of (sigma, xi)")
    worst = 0.0
    for f in (model.f1, model.f2):
        for s, x in pts:
            d1 = (float(f(s + h, x)) - float(f(s - h, x))) / (2.0 * h)
            d2 = (float(f(s + 0.5 * h, x)) - float(f(s - 0.5 * h, x))) / h
            worst = max(worst, abs(d1 - d2) / (1.0 + abs(d2)))
    return worst
