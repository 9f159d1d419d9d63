"""Closed-form detection probabilities for the three-path interferometer.

These are written out directly from the phase factors and the final
reflectivity; nothing here touches the state-propagation code, so agreement
with :mod:`wtrace.engine` is a genuine cross-check.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass


def _domain(eps: float, R: float = 1 / 3) -> None:
    if not 0.0 <= eps <= 1 / 3:
        raise ValueError(f"eps={eps!r} outside [0, 1/3]")
    if not 0.0 <= R <= 1.0:
        raise ValueError(f"R={R!r} outside [0, 1]")


def p_eq1(alpha: float, beta: float, gamma: float, eps: float) -> float:
    """Exit probability with symmetric 1/3 : 2/3 outer splitters."""
    _domain(eps)
    z = cmath.exp(1j * gamma) + cmath.exp(1j * beta) - cmath.exp(1j * alpha)
    return eps + (1 - 3 * eps) / 9 * abs(z) ** 2


def p_eq2(alpha: float, beta: float, gamma: float, eps: float, R: float) -> float:
    """Exit probability for a final splitter of reflectivity ``R``."""
    _domain(eps, R)
    T = 1 - R
    z = cmath.exp(1j * gamma) * math.sqrt(R) + (cmath.exp(1j * beta) - cmath.exp(1j * alpha)) * math.sqrt(T / 2)
    return eps + (1 - 3 * eps) / 3 * abs(z) ** 2


def p_balanced(eps: float, R: float) -> float:
    """Exit probability when the inner loop is balanced; no phase dependence left."""
    _domain(eps, R)
    return eps + (1 - 3 * eps) * R / 3


def p_eq4(alpha: float, beta: float, eps: float, R: float) -> float:
    """Exit probability with the C-arm phase equal to ``alpha``."""
    _domain(eps, R)
    T = 1 - R
    root = math.sqrt(2 * R * T)
    return eps + (1 - 3 * eps) / 3 * (1 - root + (root - T) * math.cos(alpha - beta))


@dataclass(frozen=True)
class FringeAnalysis:
    offset: float
    cos_coefficient: float
    R: float
    T: float
    eps: float


def fringe_coefficient(R: float, eps: float = 0.0) -> FringeAnalysis:
    """Offset and cos(alpha - beta) coefficient of :func:`p_eq4`.

    The coefficient vanishes exactly when ``2RT = T**2``, i.e. at R = 1/3 and R = 1.
    """
    _domain(eps, R)
    T = 1 - R
    root = math.sqrt(2 * R * T)
    scale = (1 - 3 * eps) / 3
    return FringeAnalysis(eps + scale * (1 - root), scale * (root - T), R, T, eps)
