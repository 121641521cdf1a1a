"""Gamma function via the Lanczos approximation (g=7, 9 coefficients)."""

from __future__ import annotations

import math

_G = 7
_COEFFS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


class GammaPoleError(ValueError):
    """Raised when gamma is evaluated at a non-positive integer."""


def gamma(z: float) -> float:
    z = float(z)
    if z <= 0 and z == math.floor(z):
        raise GammaPoleError(f"gamma has a pole at {z:g}")
    if z < 0.5:
        # reflection formula
        return math.pi / (math.sin(math.pi * z) * gamma(1.0 - z))
    z -= 1.0
    x = _COEFFS[0]
    for i in range(1, _G + 2):
        x += _COEFFS[i] / (z + i)
    t = z + _G + 0.5
    return math.sqrt(2.0 * math.pi) * t ** (z + 0.5) * math.exp(-t) * x
