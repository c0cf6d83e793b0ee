"""Built-in integrands selectable from the command line."""

from __future__ import annotations

import math

import numpy as np


def const1(x):
    return 1.0


def sinx2(x):
    """f(x) = sin(x_1^2), the smooth benchmark integrand."""
    return math.sin(float(x[0]) ** 2)


def make_linear(coeffs):
    """Linear integrand a . x + b from d slope coefficients plus offset b."""
    a = np.asarray(coeffs[:-1], dtype=float)
    b = float(coeffs[-1])

    def linear(x):
        return float(a @ x) + b

    return linear


def resolve(spec: str, dim: int):
    """Map a CLI spec like ``sinx2`` or ``linear:1,0,-2``  to a callable."""
    if spec == "const1":
        return const1
    if spec == "sinx2":
        return sinx2
    if spec.startswith("linear:"):
        coeffs = [float(tok) for tok in spec.split(":", 1)[1].split(",")]
        if len(coeffs) == dim:
            coeffs = coeffs + [0.0]
        if len(coeffs) != dim + 1:
            raise ValueError(
                f"linear needs {dim} slopes plus an optional offset, got {len(coeffs)}")
        return make_linear(coeffs)
    raise ValueError(f"unknown integrand {spec!r}")
