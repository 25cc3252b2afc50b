"""Shared numerical kernels: fixed-step RK4, cubic Hermite tools, adaptive
Simpson quadrature and bracketed bisection.

Everything here is a pure function of its arguments.  The RK4 and Hermite
routines accept either Python floats or numpy arrays and operate elementwise,
which lets the curve/storage machinery run one point or a whole batch of
points through the same code path.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

__all__ = [
    "QuadratureError",
    "BracketError",
    "rk4_step",
    "integrate_segment",
    "hermite_eval",
    "hermite_integral",
    "hermite_partial_integral",
    "adaptive_simpson",
    "bisect",
    "expand_bracket",
    "bisect_on_interval_vec",
]


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to converge within the depth budget."""


class BracketError(RuntimeError):
    """No sign change found within the bracket expansion budget."""


def rk4_step(f, y, x, h):
    """One classical 4th-order Runge-Kutta step for dy/dx = f(y, x).

    `h` may be negative (backward march) and, in batch use, an array with
    zero entries for frozen elements.
    """
    k1 = f(y, x)
    k2 = f(y + 0.5 * h * k1, x + 0.5 * h)
    k3 = f(y + 0.5 * h * k2, x + 0.5 * h)
    k4 = f(y + h * k3, x + h)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate_segment(
    f: Callable,
    y0: float,
    x0: float,
    x1: float,
    max_step: float,
):
    """March dy/dx = f(y, x) from x0 to x1 with uniform RK4 substeps.

    The substep is |x1 - x0| / n with n = ceil(|x1 - x0| / max_step), so the
    march lands on x1 exactly.  Works in either direction.

    Returns
    -------
    xs, ys, fs : ndarray
        Node locations (including both endpoints), solution values and the
        slope f(y, x) at each node.
    """
    if max_step <= 0.0:
        raise ValueError(f"max_step must be positive, got {max_step}")
    span = x1 - x0
    if span == 0.0:
        y0 = float(y0)
        return (
            np.array([x0]),
            np.array([y0]),
            np.array([float(f(y0, x0))]),
        )
    n = max(1, int(math.ceil(abs(span) / max_step)))
    h = span / n
    xs = x0 + h * np.arange(n + 1)
    xs[-1] = x1
    ys = np.empty(n + 1)
    fs = np.empty(n + 1)
    y = float(y0)
    for i in range(n):
        x = xs[i]
        k1 = float(f(y, x))
        ys[i] = y
        fs[i] = k1
        k2 = float(f(y + 0.5 * h * k1, x + 0.5 * h))
        k3 = float(f(y + 0.5 * h * k2, x + 0.5 * h))
        k4 = float(f(y + h * k3, x + h))
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    ys[n] = y
    fs[n] = float(f(y, xs[n]))
    return xs, ys, fs


# -- cubic Hermite pieces ---------------------------------------------------
#
# A node table (x_i, y_i, f_i) with f_i = y'(x_i) defines a C^1 piecewise
# cubic.  With s = (x - xL)/h in [0, 1] the basis is
#   h00 = 2s^3 - 3s^2 + 1,  h10 = s^3 - 2s^2 + s,
#   h01 = -2s^3 + 3s^2,     h11 = s^3 - s^2.


def hermite_eval(x, xL, xR, yL, yR, fL, fR):
    """Evaluate the cubic Hermite interpolant of one interval (elementwise)."""
    h = xR - xL
    s = (x - xL) / h
    s2 = s * s
    s3 = s2 * s
    h00 = 2.0 * s3 - 3.0 * s2 + 1.0
    h10 = s3 - 2.0 * s2 + s
    h01 = -2.0 * s3 + 3.0 * s2
    h11 = s3 - s2
    return yL * h00 + h * fL * h10 + yR * h01 + h * fR * h11


def hermite_integral(xL, xR, yL, yR, fL, fR):
    """Exact integral of the cubic Hermite interpolant over its interval.

    Equals the trapezoid rule plus the endpoint-slope correction
    h^2 (fL - fR) / 12; the correction makes the rule 4th-order accurate on
    smooth integrands, matching the RK4 node accuracy.
    """
    h = xR - xL
    return 0.5 * h * (yL + yR) + h * h * (fL - fR) / 12.0


def hermite_partial_integral(x, xL, xR, yL, yR, fL, fR):
    """Integral of the cubic Hermite interpolant from xL to x (elementwise)."""
    h = xR - xL
    s = (x - xL) / h
    s2 = s * s
    s3 = s2 * s
    s4 = s2 * s2
    i00 = 0.5 * s4 - s3 + s
    i10 = 0.25 * s4 - (2.0 / 3.0) * s3 + 0.5 * s2
    i01 = -0.5 * s4 + s3
    i11 = 0.25 * s4 - s3 / 3.0
    return h * (yL * i00 + h * fL * i10 + yR * i01 + h * fR * i11)


def adaptive_simpson(
    g: Callable[[float], float],
    a: float,
    b: float,
    tol: float,
    max_depth: int = 40,
) -> float:
    """Adaptive composite Simpson quadrature of g over [a, b].

    `tol` is an absolute tolerance on the whole interval; b < a is allowed
    and flips the sign.  Raises QuadratureError when the recursion depth
    budget is exhausted before the local error estimate falls below the
    local tolerance share.
    """
    if a == b:
        return 0.0
    sign = 1.0
    if b < a:
        a, b = b, a
        sign = -1.0

    def simpson(x0, x2, g0, g1, g2):
        return (x2 - x0) / 6.0 * (g0 + 4.0 * g1 + g2)

    def recurse(x0, x2, g0, g1, g2, whole, tol, depth):
        xm = 0.5 * (x0 + x2)
        xl = 0.5 * (x0 + xm)
        xr = 0.5 * (xm + x2)
        gl = float(g(xl))
        gr = float(g(xr))
        left = simpson(x0, xm, g0, gl, g1)
        right = simpson(xm, x2, g1, gr, g2)
        err = left + right - whole
        if abs(err) <= 15.0 * tol:
            return left + right + err / 15.0
        if depth >= max_depth:
            raise QuadratureError(
                f"adaptive Simpson did not converge on [{x0}, {x2}] "
                f"(error estimate {abs(err) / 15.0:.3e} > {tol:.3e})"
            )
        half = 0.5 * tol
        return recurse(x0, xm, g0, gl, g1, left, half, depth + 1) + recurse(
            xm, x2, g1, gr, g2, right, half, depth + 1
        )

    mid = 0.5 * (a + b)
    ga = float(g(a))
    gm = float(g(mid))
    gb = float(g(b))
    whole = simpson(a, b, ga, gm, gb)
    return sign * recurse(a, b, ga, gm, gb, whole, tol, 0)


def bisect(
    g: Callable[[float], float],
    a: float,
    b: float,
    *,
    ftol: float = 0.0,
    xtol: float = 0.0,
    max_iter: int = 200,
) -> float:
    """Bisection root of g on [a, b]; the endpoints must bracket a sign change.

    Stops as soon as |g(mid)| <= ftol or the interval width drops below xtol;
    with both zero it runs to floating-point interval collapse.
    """
    ga = float(g(a))
    gb = float(g(b))
    if ga == 0.0:
        return a
    if gb == 0.0:
        return b
    if ga * gb > 0.0:
        raise BracketError(f"no sign change on [{a}, {b}]: g(a)={ga}, g(b)={gb}")
    for _ in range(max_iter):
        mid = 0.5 * (a + b)
        gm = float(g(mid))
        if abs(gm) <= ftol or (b - a) <= xtol or mid == a or mid == b:
            return mid
        if ga * gm <= 0.0:
            b, gb = mid, gm
        else:
            a, ga = mid, gm
    return 0.5 * (a + b)


def expand_bracket(
    g: Callable[[float], float],
    center: float,
    width0: float,
    *,
    lo_limit: float = -math.inf,
    hi_limit: float = math.inf,
    max_doublings: int = 60,
):
    """Find [a, b] with a sign change of g by geometric expansion around center.

    The half-width starts at width0 and doubles up to max_doublings times,
    clipped to (lo_limit, hi_limit).  Returns the bracketing interval.
    """
    gc = float(g(center))
    if gc == 0.0:
        return center, center
    w = width0
    for _ in range(max_doublings + 1):
        a = max(center - w, lo_limit)
        b = min(center + w, hi_limit)
        if float(g(a)) * gc <= 0.0:
            return a, center
        if float(g(b)) * gc <= 0.0:
            return center, b
        if a == lo_limit and b == hi_limit:
            break
        w *= 2.0
    raise BracketError(
        f"no sign change within expansion budget around {center} "
        f"(final half-width {w / 2.0:.3e})"
    )


def bisect_on_interval_vec(g, a, b, iters: int = 80):
    """Vectorized bisection on per-element intervals [a_k, b_k].

    g maps an array of abscissas to an array of residuals; every interval
    must bracket a sign change (g(a) and g(b) of opposite sign, zeros
    allowed).  Returns the midpoint array after `iters` halvings.
    """
    a = np.asarray(a, dtype=float).copy()
    b = np.asarray(b, dtype=float).copy()
    ga = np.asarray(g(a), dtype=float)
    for _ in range(iters):
        mid = 0.5 * (a + b)
        gm = np.asarray(g(mid), dtype=float)
        left = ga * gm <= 0.0
        b = np.where(left, mid, b)
        keep_a = ~left
        a = np.where(keep_a, mid, a)
        ga = np.where(keep_a, gm, ga)
    return 0.5 * (a + b)
