"""Closed-form Dahl (r = 1) references used as test oracles.

Everything here is derived by hand from the affine branch fields

    f1(sigma) = rho * (1 - sigma / fc)      (input rising)
    f2(sigma) = rho * (1 + sigma / fc)      (input falling)

and kept deliberately independent of the package implementation: the
formulas below integrate the branch ODEs in closed form, so any agreement
with the numeric routines is evidence, not circularity.
"""

import math

import numpy as np


def traversing_exact(tau, sigma, xi, rho=1.5, fc=0.75):
    """Traversing curve through (sigma, xi) evaluated at tau.

    Right of xi the curve solves dy/dtau = f1(y), left of xi it solves
    dy/dtau = f2(y); both are linear ODEs with explicit exponential
    solutions.
    """
    tau = np.asarray(tau, dtype=float)
    k = rho / fc
    right = fc - (fc - sigma) * np.exp(-k * (tau - xi))
    left = -fc + (fc + sigma) * np.exp(k * (tau - xi))
    return np.where(tau >= xi, right, left)


def lambda_exact(sigma, xi, rho=1.5, fc=0.75):
    # abscissa where the traversing curve hits y = 0
    sigma = np.asarray(sigma, dtype=float)
    return xi + np.sign(sigma) * (fc / rho) * np.log(fc / (fc + np.abs(sigma)))


def storage_exact(sigma, rho=1.5, fc=0.75):
    # minus the branch integral from xi to lambda; u-independent
    sigma = np.asarray(sigma, dtype=float)
    a = np.abs(sigma)
    return (fc * fc / rho) * np.log(fc / (fc + a)) + (fc / rho) * a


def ramp_response_exact(u0, u1, y0, rho=1.5, fc=0.75):
    """Output after a single monotone ramp from u0 to u1 starting at y0."""
    k = rho / fc
    if u1 >= u0:
        return fc - (fc - y0) * math.exp(-k * (u1 - u0))
    return -fc + (fc + y0) * math.exp(k * (u1 - u0))


def simulate_exact(signal, y0, rho=1.5, fc=0.75):
    """Exact Dahl output at every breakpoint of a piecewise-linear input."""
    y = float(y0)
    out = [y]
    vals = signal.values
    for i in range(len(vals) - 1):
        y = ramp_response_exact(vals[i], vals[i + 1], y, rho, fc)
        out.append(y)
    return np.array(out)


BOUCWEN_FIXED_POINT = 0.5 ** (1.0 / 3.0)  # (alpha/(beta+zeta))^(1/n) at 1,1,1,3
