"""Built-in Duhem model catalog: Dahl, Bouc-Wen, and a smooth exponential
example operator.

All slope fields accept floats or numpy arrays elementwise.  Each factory
validates its parameters and declares the model's validity domain and, when
available in closed form, the anhysteresis function.
"""

from __future__ import annotations

import json
from typing import Any, Mapping

import numpy as np

from .core import Domain, DuhemModel, WHOLE_PLANE

__all__ = [
    "dahl",
    "boucwen",
    "exp_example",
    "BUILTIN_MODELS",
    "model_from_config",
    "model_from_json",
]


def dahl(rho: float = 1.5, fc: float = 0.75, r: float = 1.0) -> DuhemModel:
    """Dahl friction operator with stiffness rho, saturation fc, exponent r.

    Slopes on the open band |y| < fc:

        f1(sigma, xi) = rho * |1 - sigma/fc|^r * sgn(1 - sigma/fc)
        f2(sigma, xi) = rho * |1 + sigma/fc|^r * sgn(1 + sigma/fc)

    For r = 1 the fields are affine in sigma and the simulation admits
    closed-form cross-checks.  The anhysteresis curve is identically zero.
    """
    rho = float(rho)
    fc = float(fc)
    r = float(r)
    if rho <= 0.0:
        raise ValueError(f"rho must be positive, got {rho}")
    if fc <= 0.0:
        raise ValueError(f"fc must be positive, got {fc}")
    if r < 1.0:
        raise ValueError(f"exponent r must be >= 1, got {r}")

    if r == 1.0:
        def f1(sigma, xi):
            return rho * (1.0 - sigma / fc)

        def f2(sigma, xi):
            return rho * (1.0 + sigma / fc)
    else:
        def f1(sigma, xi):
            z = 1.0 - sigma / fc
            return rho * np.abs(z) ** r * np.sign(z)

        def f2(sigma, xi):
            z = 1.0 + sigma / fc
            return rho * np.abs(z) ** r * np.sign(z)

    return DuhemModel(
        name="dahl",
        f1=f1,
        f2=f2,
        params={"rho": rho, "fc": fc, "r": r},
        domain=Domain(-fc, fc),
        f_an=lambda xi: 0.0 * xi,
    )


def boucwen(
    alpha: float = 1.0,
    beta: float = 1.0,
    zeta: float = 1.0,
    n: float = 3.0,
) -> DuhemModel:
    """Bouc-Wen operator on the whole plane.

        f1(sigma, xi) = alpha - beta*|sigma|^n - zeta*sigma*|sigma|^(n-1)
        f2(sigma, xi) = alpha - beta*|sigma|^n + zeta*sigma*|sigma|^(n-1)

    zeta (often printed as gamma in the engineering literature) controls the
    loop shape; with zeta > 0 the anhysteresis curve is identically zero.
    """
    alpha = float(alpha)
    beta = float(beta)
    zeta = float(zeta)
    n = float(n)
    if n < 1.0:
        raise ValueError(f"exponent n must be >= 1, got {n}")

    def f1(sigma, xi):
        a = np.abs(sigma)
        return alpha - beta * a**n - zeta * sigma * a ** (n - 1.0)

    def f2(sigma, xi):
        a = np.abs(sigma)
        return alpha - beta * a**n + zeta * sigma * a ** (n - 1.0)

    f_an = (lambda xi: 0.0 * xi) if zeta != 0.0 else None
    return DuhemModel(
        name="boucwen",
        f1=f1,
        f2=f2,
        params={"alpha": alpha, "beta": beta, "zeta": zeta, "n": n},
        domain=WHOLE_PLANE,
        f_an=f_an,
    )


def exp_example() -> DuhemModel:
    """Smooth exponential operator with an input-dependent anhysteresis curve.

        f1(sigma, xi) = exp(0.5*(-1.2*sigma + xi)) + 0.83
        f2(sigma, xi) = exp(0.5*( 1.2*sigma - xi)) + 0.83

    f1 - f2 vanishes exactly on sigma = xi / 1.2, so the declared
    anhysteresis function is xi/1.2 (slope 5/6, not the 0.83 additive
    constant appearing in the slope fields).
    """

    def f1(sigma, xi):
        return np.exp(0.5 * (-1.2 * sigma + xi)) + 0.83

    def f2(sigma, xi):
        return np.exp(0.5 * (1.2 * sigma - xi)) + 0.83

    return DuhemModel(
        name="exp_example",
        f1=f1,
        f2=f2,
        params={},
        domain=WHOLE_PLANE,
        f_an=lambda xi: xi / 1.2,
    )


BUILTIN_MODELS = {
    "dahl": dahl,
    "boucwen": boucwen,
    "exp_example": exp_example,
}


def model_from_config(config: Mapping[str, Any]) -> DuhemModel:
    """Build a catalog model from {"model": name, "params": {...}}.

    Unknown model names and unknown parameter keys are rejected.
    """
    if not isinstance(config, Mapping):
        raise ValueError("model config must be a mapping")
    unknown = set(config) - {"model", "params"}
    if unknown:
        raise ValueError(f"unknown model config keys: {sorted(unknown)}")
    try:
        name = config["model"]
    except KeyError:
        raise ValueError("model config requires a 'model' key") from None
    if name not in BUILTIN_MODELS:
        raise ValueError(
            f"unknown model {name!r}; available: {sorted(BUILTIN_MODELS)}"
        )
    params = dict(config.get("params") or {})
    factory = BUILTIN_MODELS[name]
    try:
        return factory(**params)
    except TypeError:
        raise ValueError(
            f"invalid parameters for model {name!r}: {sorted(params)}"
        ) from None


def model_from_json(text: str) -> DuhemModel:
    """Parse a JSON model description (see model_from_config)."""
    return model_from_config(json.loads(text))
