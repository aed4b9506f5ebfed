"""Closed-form values: Cauchy mean chords, harmonic mean lengths, loop and inclusion formulas.

These are the oracle side of every statistical check; nothing here samples.
Area/perimeter arguments follow the 2D naming: ``F`` for area, ``L`` for
perimeter (or loop length).  The n-dimensional curve length measure is the
single formula ``mean_chord``/``harmonic_mean_length`` uses; deriving it
from the mean-curvature integrals of a curve gives the same expression, so
there is no second code path for it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

from scipy.special import gammaln

from .bodies import Body, convex_hull
from .bodies import unit_sphere_area as _unit_sphere_area
from .errors import RegimeViolation, UsageError

FORMULAS = (
    "cauchy_mean_chord",
    "harmonic_mean_length",
    "big_loop",
    "small_loop",
    "inclusion_2d",
    "inclusion_3d",
    "mean_arc",
    "mean_chi_loop",
    "mean_chi_open_loop",
    "ocd_mean_chord",
    "eta_n",
    "unit_sphere_area",
)


@dataclass(frozen=True)
class TheoryValue:
    value: float
    formula_id: str
    inputs: dict[str, Any] = field(default_factory=dict)

    def __float__(self) -> float:
        return self.value


def unit_sphere_area(m: int) -> TheoryValue:
    return TheoryValue(_unit_sphere_area(m), "unit_sphere_area", {"m": m})


def eta(n: int) -> TheoryValue:
    """Dimension constant of Cauchy's formula (pi in 2D, 4 in 3D)."""
    if n < 2:
        raise UsageError("eta_n needs n >= 2")
    val = math.sqrt(math.pi) * (n - 1) * math.exp(gammaln(0.5 * (n - 1)) - gammaln(0.5 * n))
    return TheoryValue(val, "eta_n", {"n": n})


def eta_from_sphere_areas(n: int) -> float:
    return 2.0 * math.pi * _unit_sphere_area(n - 1) / _unit_sphere_area(n)


def mean_chord(body: Body) -> TheoryValue:
    """Multiple-chord mean length eta_n V / S (every piece counted on its own)."""
    val = eta(body.dimension).value * body.volume / body.surface
    return TheoryValue(val, "cauchy_mean_chord", {"body": body.to_descriptor()})


def harmonic_mean_length(mean_curve_length: float, body: Body) -> TheoryValue:
    """Mean inside length of curves with mean length ``mean_curve_length``: 1/<L> = 1/<s> + 1/<sigma>.

    ``math.inf`` gives the Cauchy limit.
    """
    if not mean_curve_length > 0:
        raise UsageError("mean curve length must be positive")
    sigma = mean_chord(body).value
    if math.isinf(mean_curve_length):
        val = sigma
    else:
        val = 1.0 / (1.0 / mean_curve_length + 1.0 / sigma)
    return TheoryValue(val, "harmonic_mean_length", {"mean_length": mean_curve_length, "body": body.to_descriptor()})


def big_loop_mean_length(body: Body) -> TheoryValue:
    """Loops whose curvature radius exceeds the body's: inside length is the Cauchy value."""
    return TheoryValue(mean_chord(body).value, "big_loop", {"body": body.to_descriptor()})


def _loop_inputs(L1: float, F1: float, body: Body):
    if body.dimension != 2:
        raise UsageError("loop formulas are two-dimensional")
    if not (L1 > 0 and F1 > 0):
        raise UsageError("loops need positive length L1 and enclosed area F1")
    return body.volume, body.surface


def small_loop_mean_length(L1: float, F1: float, body: Body) -> TheoryValue:
    F0, L0 = _loop_inputs(L1, F1, body)
    val = 2 * math.pi * F0 * L1 / (2 * math.pi * (F0 + F1) + L0 * L1)
    return TheoryValue(val, "small_loop", {"L1": L1, "F1": F1, "body": body.to_descriptor()})


def _check_probability(p: float, what: str) -> float:
    if not -1e-12 <= p <= 1 + 1e-12:
        raise RegimeViolation(f"{what} = {p:.6g} lies outside [0, 1]; curvature-radius hypothesis violated")
    return min(max(p, 0.0), 1.0)


def inclusion_probability_2d(body: Body, loop_L1: float, loop_F1: float) -> TheoryValue:
    """P[loop entirely inside | loop hits], small-loop regime."""
    F0, L0 = _loop_inputs(loop_L1, loop_F1, body)
    a = 2 * math.pi * (F0 + loop_F1)
    b = L0 * loop_L1
    p = _check_probability((a - b) / (a + b), "inclusion probability")
    return TheoryValue(p, "inclusion_2d", {"L1": loop_L1, "F1": loop_F1, "body": body.to_descriptor()})


def inclusion_probability_3d(V0: float, F0: float, M0: float, V1: float, F1: float, M1: float) -> TheoryValue:
    """Inclusion probability of a smooth convex body in another, 3D."""
    num = 4 * math.pi * (V0 - V1) + F1 * M0 - F0 * M1
    den = 4 * math.pi * (V0 + V1) + F1 * M0 + F0 * M1
    p = _check_probability(num / den, "inclusion probability")
    return TheoryValue(p, "inclusion_3d", {"V0": V0, "F0": F0, "M0": M0, "V1": V1, "F1": F1, "M1": M1})


def sphere_measures(R: float) -> tuple[float, float, float]:
    """(volume, area, mean-curvature integral) of a 3D ball."""
    return 4 * math.pi * R**3 / 3, 4 * math.pi * R**2, 4 * math.pi * R


def can_contain_3d(V0, F0, M0, V1, F1, M1) -> bool:
    return 4 * math.pi * V0 + F1 * M0 > 4 * math.pi * V1 + F0 * M1


def mean_arc(L1: float, F1: float, L0: float) -> TheoryValue:
    """Mean inside length of a small loop given that it crosses the boundary."""
    return TheoryValue(L1 / 2 - math.pi * F1 / L0, "mean_arc", {"L1": L1, "F1": F1, "L0": L0})


def mean_chi_loop(L1: float, F1: float, body: Body) -> TheoryValue:
    F0, L0 = _loop_inputs(L1, F1, body)
    val = 2 * L0 * L1 / (2 * math.pi * (F0 + F1) + L0 * L1)
    return TheoryValue(val, "mean_chi_loop", {"L1": L1, "F1": F1, "body": body.to_descriptor()})


def mean_chi_open_loop(L1: float, F1: float, body: Body) -> TheoryValue:
    """Loop with one point removed (a fiber of the same length)."""
    F0, L0 = _loop_inputs(L1, F1, body)
    val = (2 * math.pi * F0 + 2 * L0 * L1) / (2 * math.pi * (F0 + F1) + L0 * L1)
    return TheoryValue(val, "mean_chi_open_loop", {"L1": L1, "F1": F1, "body": body.to_descriptor()})


def ocd_mean_chord(body: Body) -> TheoryValue:
    """One-chord mean length: all pieces of a line summed, eta_n V / S(hull)."""
    hull = convex_hull(body)
    val = eta(body.dimension).value * body.volume / hull.surface
    return TheoryValue(val, "ocd_mean_chord", {"body": body.to_descriptor()})


def circle_inclusion_2d(R0: float, R1: float) -> float:
    """Two circles: squared ratio form of the inclusion probability."""
    return ((R0 - R1) / (R0 + R1)) ** 2


def sphere_inclusion_3d(R0: float, R1: float) -> float:
    return ((R0 - R1) / (R0 + R1)) ** 3
