"""Clockwise storage function and brute-force available storage.

The storage value at a phase point (sigma, xi) is built from the traversing
curve through the point: ride the curve to its anhysteresis intersection at
abscissa Lambda, then

    H(sigma, xi) = integral of f_an from 0 to Lambda
                 - integral of the traversing branch from xi to Lambda.

Both integrals are signed.  For models whose anhysteresis curve is
identically zero (Dahl, Bouc-Wen) the first term vanishes and H depends on
the output alone.

Two evaluation routes are provided on purpose.  `storage_cw` resamples the
ride into a C^1 table and integrates it with adaptive Simpson quadrature to
a requested tolerance; `storage_cw_batch` accumulates the exact integral of
the same cubic Hermite table segment by segment while many points ride in
lockstep.  Agreement between the routes is part of the test surface, so
neither should be rewritten in terms of the other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import DomainExitError, DuhemModel
from .curves import (
    CrossingSearchError,
    PhasePoint,
    TraversingCurve,
    _march_branch,
    anhysteresis,
    anhysteresis_values,
    ride_to_crossing,
)
from .integrate import adaptive_simpson
from .signals import InputSignal, random_piecewise_linear

__all__ = [
    "StorageEvaluation",
    "StorageBatch",
    "SignalFamily",
    "AvailableStorageResult",
    "storage_cw",
    "storage_cw_batch",
    "storage_dahl_closed_form",
    "lambda_dahl_closed_form",
    "available_storage_bruteforce",
]


@dataclass(frozen=True)
class StorageEvaluation:
    """Storage value at one phase point plus the pieces it was built from."""

    point: PhasePoint
    lambda_star: float
    anhysteresis_integral: float
    traverse_integral: float
    value: float

    def to_dict(self) -> dict:
        return {
            "sigma": self.point.sigma,
            "xi": self.point.xi,
            "lambda": self.lambda_star,
            "anhysteresis_integral": self.anhysteresis_integral,
            "traverse_integral": self.traverse_integral,
            "value": self.value,
        }


@dataclass(frozen=True, eq=False)
class StorageBatch:
    """Vectorized storage evaluation result."""

    lam: np.ndarray
    value: np.ndarray


def _anhysteresis_is_zero(model: DuhemModel, lo: float, hi: float) -> bool:
    """Probe whether f_an vanishes identically on [lo, hi]."""
    probe = np.linspace(lo, hi, 33)
    return bool(np.max(np.abs(anhysteresis_values(model, probe))) <= 1e-12)


def storage_cw(
    model: DuhemModel,
    p: PhasePoint,
    *,
    quad_tol: float = 1e-8,
    step: float = 1e-3,
) -> StorageEvaluation:
    """Clockwise storage at one phase point via adaptive quadrature.

    The traversing branch from xi to the anhysteresis intersection is
    resampled at fixed step into a cubic Hermite table and integrated with
    adaptive Simpson to quad_tol, as is the anhysteresis term from 0 to the
    intersection.  Raises CrossingSearchError when no intersection is found.
    """
    if not bool(model.domain.contains(p.sigma, p.xi)):
        raise ValueError(f"phase point {p} outside model domain")
    ride = ride_to_crossing(
        model, np.array([p.sigma]), np.array([p.xi]), step=step, refine_iters=80
    )
    lam = float(ride.lam[0])

    if lam == p.xi:
        traverse = 0.0
    else:
        branch = model.f2 if lam < p.xi else model.f1
        taus, ys, fs, truncated = _march_branch(model, branch, p.sigma, p.xi, lam, step)
        if truncated:
            raise CrossingSearchError(
                "traversing branch left the domain while resampling"
            )
        if lam < p.xi:
            taus, ys, fs = taus[::-1], ys[::-1], fs[::-1]
        curve = TraversingCurve(
            origin=p, tau=taus, y=ys, dydtau=fs, model_name=model.name
        )
        traverse = adaptive_simpson(curve, p.xi, lam, tol=quad_tol)

    span = (min(0.0, p.xi, lam), max(0.0, p.xi, lam))
    if _anhysteresis_is_zero(model, *span):
        fan_int = 0.0
    elif model.f_an is not None:
        fan_int = adaptive_simpson(
            lambda t: float(model.f_an(t)), 0.0, lam, tol=quad_tol
        )
    else:
        fan_int = adaptive_simpson(
            lambda t: anhysteresis(model, t), 0.0, lam, tol=quad_tol
        )
    return StorageEvaluation(
        point=p,
        lambda_star=lam,
        anhysteresis_integral=fan_int,
        traverse_integral=traverse,
        value=fan_int - traverse,
    )


_SIMPSON_PANELS = 64


def _anhysteresis_integrals(model: DuhemModel, lam: np.ndarray) -> np.ndarray:
    """Composite-Simpson integral of f_an from 0 to each lam."""
    if lam.size == 0:
        return np.zeros(0)
    lo = min(0.0, float(lam.min()))
    hi = max(0.0, float(lam.max()))
    if _anhysteresis_is_zero(model, lo, hi):
        return np.zeros_like(lam)
    n = _SIMPSON_PANELS
    s = np.linspace(0.0, 1.0, 2 * n + 1)
    nodes = lam[:, None] * s[None, :]
    fan = anhysteresis_values(model, nodes.ravel()).reshape(nodes.shape)
    w = np.full(2 * n + 1, 2.0)
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    h = lam / (2.0 * n)
    return (h / 3.0) * (fan @ w)


def storage_cw_batch(
    model: DuhemModel,
    sigma: np.ndarray,
    xi: np.ndarray,
    *,
    step: float = 2e-3,
    max_doublings: int = 60,
) -> StorageBatch:
    """Clockwise storage at many phase points via lockstep curve rides.

    Uses the exact integral of the ride's cubic Hermite table instead of
    adaptive quadrature; the scalar and batch routes agree to quadrature
    tolerance at matching step sizes.
    """
    sigma = np.atleast_1d(np.asarray(sigma, dtype=float))
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    ride = ride_to_crossing(
        model, sigma, xi, step=step, max_doublings=max_doublings
    )
    fan_int = _anhysteresis_integrals(model, ride.lam)
    return StorageBatch(lam=ride.lam, value=fan_int - ride.integral)


def storage_dahl_closed_form(y, rho: float = 1.5, fc: float = 0.75):
    """Closed-form clockwise storage of the slope-1 Dahl model.

    H(y) = (fc^2/rho) log(fc/(fc+|y|)) + (fc/rho)|y|, valid for |y| < fc;
    the value is even in y and independent of the input coordinate.
    """
    if rho <= 0.0 or fc <= 0.0:
        raise ValueError("rho and fc must be positive")
    y = np.asarray(y, dtype=float)
    a = np.abs(y)
    if (a >= fc).any():
        raise ValueError(f"output outside the open band (-{fc}, {fc})")
    out = (fc * fc / rho) * np.log(fc / (fc + a)) + (fc / rho) * a
    return float(out) if out.ndim == 0 else out


def lambda_dahl_closed_form(y, u, rho: float = 1.5, fc: float = 0.75):
    """Closed-form anhysteresis intersection abscissa of the slope-1 Dahl
    model: the traversing curve through (y, u) meets the axis y = 0 at

        Lambda = u + sign(y) (fc/rho) log(fc/(fc+|y|)).
    """
    if rho <= 0.0 or fc <= 0.0:
        raise ValueError("rho and fc must be positive")
    y = np.asarray(y, dtype=float)
    u = np.asarray(u, dtype=float)
    a = np.abs(y)
    if (a >= fc).any():
        raise ValueError(f"output outside the open band (-{fc}, {fc})")
    out = u + np.sign(y) * (fc / rho) * np.log(fc / (fc + a))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class SignalFamily:
    """Recipe for the random input family used by the brute-force search."""

    n_random: int = 200
    breakpoints: tuple[int, int] = (3, 10)
    span: float = 3.0
    seed: int = 0

    def __post_init__(self):
        if self.n_random < 0:
            raise ValueError("n_random must be nonnegative")
        lo, hi = self.breakpoints
        if not (2 <= lo <= hi):
            raise ValueError(f"bad breakpoint range {self.breakpoints}")
        if self.span <= 0.0:
            raise ValueError("span must be positive")


@dataclass(frozen=True, eq=False)
class AvailableStorageResult:
    """Outcome of the brute-force available-storage search."""

    value: float
    designed_value: float
    best_index: int
    per_signal: np.ndarray
    n_signals: int

    def __post_init__(self):
        a = np.asarray(self.per_signal, dtype=float)
        a.setflags(write=False)
        object.__setattr__(self, "per_signal", a)


def _clip_to_horizon(sig: InputSignal, horizon: float) -> InputSignal:
    if sig.end_time <= horizon:
        return sig
    keep = sig.times < horizon
    times = np.concatenate([sig.times[keep], [horizon]])
    values = np.concatenate([sig.values[keep], [sig.value(horizon)]])
    return InputSignal(times, values)


def _supply_running_min(
    model: DuhemModel,
    signals: Sequence[InputSignal],
    y0: float,
    step: float,
) -> np.ndarray:
    """Lockstep simulation of many inputs from output y0; returns the running
    minimum of the supply integral W(t) = int y du per signal."""
    m = len(signals)
    n_seg = max(s.n_breakpoints for s in signals) - 1
    U = np.empty((m, n_seg + 1))
    for i, s in enumerate(signals):
        v = s.values
        U[i, : v.size] = v
        U[i, v.size:] = v[-1]

    y = np.full(m, float(y0))
    W = np.zeros(m)
    minW = np.zeros(m)
    lo, hi = model.domain.sigma_min, model.domain.sigma_max
    guarded = model.domain.bounded
    f1, f2 = model.f1, model.f2

    def field(yv, uv, h):
        return np.where(
            h >= 0.0,
            np.asarray(f1(yv, uv), dtype=float),
            np.asarray(f2(yv, uv), dtype=float),
        )

    for j in range(n_seg):
        du = U[:, j + 1] - U[:, j]
        biggest = float(np.abs(du).max())
        if biggest == 0.0:
            continue
        n = max(1, int(math.ceil(biggest / step)))
        h = du / n
        u = U[:, j].copy()
        for _ in range(n):
            k1 = field(y, u, h)
            k2 = field(y + 0.5 * h * k1, u + 0.5 * h, h)
            k3 = field(y + 0.5 * h * k2, u + 0.5 * h, h)
            k4 = field(y + h * k3, u + h, h)
            y_new = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if guarded and not ((y_new > lo) & (y_new < hi)).all():
                bad = int(np.argmax(~((y_new > lo) & (y_new < hi))))
                raise DomainExitError(
                    t=math.nan,
                    u=float(u[bad] + h[bad]),
                    y=float(y_new[bad]),
                    message=f"signal {bad} drove the output out of the domain",
                )
            W = W + 0.5 * (y + y_new) * h
            minW = np.minimum(minW, W)
            y = y_new
            u = u + h
    return minW


def available_storage_bruteforce(
    model: DuhemModel,
    p: PhasePoint,
    family: SignalFamily = SignalFamily(),
    *,
    horizon: float = 10.0,
    step: float = 2e-3,
) -> AvailableStorageResult:
    """Lower estimate of the available storage at a phase point.

    Runs the operator from (p.sigma, p.xi) over one designed input (a unit
    rate ramp to the anhysteresis intersection, where extraction is known to
    stop) and family.n_random random piecewise-linear inputs starting at
    p.xi, all clipped to the horizon.  Each run tracks the running supply
    integral W(t) = int y du; the extractable energy of a run is
    max(0, -min_t W(t)) and the result is the best over the family.

    Only models with an identically zero anhysteresis curve are accepted:
    for those the supply bookkeeping below matches the storage construction
    exactly, so the estimate converges to the storage value from below.
    """
    if not bool(model.domain.contains(p.sigma, p.xi)):
        raise ValueError(f"phase point {p} outside model domain")
    lo = min(0.0, p.xi - family.span)
    hi = max(0.0, p.xi + family.span)
    if not _anhysteresis_is_zero(model, lo, hi):
        raise ValueError(
            "brute-force available storage requires an identically zero "
            "anhysteresis curve on the search range"
        )

    ride = ride_to_crossing(model, np.array([p.sigma]), np.array([p.xi]), step=step)
    lam = float(ride.lam[0])

    signals: list[InputSignal] = []
    if lam != p.xi:
        signals.append(
            InputSignal(np.array([0.0, abs(lam - p.xi)]), np.array([p.xi, lam]))
        )
    else:
        signals.append(InputSignal(np.array([0.0, 1.0]), np.array([p.xi, p.xi])))
    rng = np.random.default_rng(family.seed)
    for _ in range(family.n_random):
        sig = random_piecewise_linear(
            rng,
            u_start=p.xi,
            span=family.span,
            n_breakpoints=family.breakpoints,
        )
        signals.append(_clip_to_horizon(sig, horizon))

    minW = _supply_running_min(model, signals, p.sigma, step)
    per_signal = np.maximum(0.0, -minW)
    best = int(np.argmax(per_signal))
    return AvailableStorageResult(
        value=float(per_signal[best]),
        designed_value=float(per_signal[0]),
        best_index=best,
        per_signal=per_signal,
        n_signals=len(signals),
    )
