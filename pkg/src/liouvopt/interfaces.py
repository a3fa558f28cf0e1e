"""Scalar kernels for wave behavior at a speed interface.

Transmission/reflection split, the slowness maps that keep c|v| continuous
across a jump, and the hat/step functions that encode the branching flux
logic as matrix weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import DomainError


@dataclass(frozen=True)
class InterfaceCoeffs:
    """Reflection/transmission probabilities; alpha_R + alpha_T == 1 exactly."""

    alpha_R: float
    alpha_T: float

    def __post_init__(self):
        if not 0.0 <= self.alpha_R <= 1.0:
            raise DomainError(f"reflection coefficient {self.alpha_R} outside [0, 1]")


FULL_TRANSMISSION = InterfaceCoeffs(0.0, 1.0)


def full_transmission(c_minus: float, c_plus: float) -> InterfaceCoeffs:
    """Coefficient rule that ignores the jump: everything transmits.

    Used when reflection is deliberately switched off, e.g. to treat a small
    genuine jump as if the speed were continuous.
    """
    return FULL_TRANSMISSION


@dataclass(frozen=True)
class TransmitDecision2D:
    """Outcome of the 2D transmit test for one incident slowness.

    ``discriminant`` is r^2 xi^2 + (r^2 - 1) eta^2 with r the speed ratio;
    a positive value means partial transmission with normal slowness
    ``transmitted`` on the far side, anything else is total reflection.
    """

    discriminant: float
    transmitted: float | None

    @property
    def total_reflection(self) -> bool:
        return self.transmitted is None

    @property
    def branch(self) -> str:
        return "total-reflection" if self.total_reflection else "transmit-and-reflect"


def hat(z: float, dxi: float) -> float:
    """Piecewise-linear bump max(1 - |z|/dxi, 0); support width 2*dxi."""
    if dxi <= 0:
        raise DomainError(f"hat spacing must be positive, got {dxi}")
    return max(1.0 - abs(z) / dxi, 0.0)


def _as_exact(value: float) -> Fraction:
    # Read the value through its shortest round-tripping decimal, so a speed
    # written as 0.6 is treated as 3/5 rather than as the nearest binary
    # double.  Computed values keep their full 17 digits and are unaffected.
    return Fraction(repr(float(value)))


def coeffs_1d(c_minus: float, c_plus: float) -> InterfaceCoeffs:
    """Normal-incidence coefficients: alpha_R = ((c+ - c-)/(c+ + c-))^2.

    The ratio is formed in exact rational arithmetic and rounded once, so
    e.g. speeds (0.6, 0.2) give exactly (1/4, 3/4) instead of being off by
    an ulp from the intermediate roundings.
    """
    if c_minus <= 0 or c_plus <= 0:
        raise DomainError("wave speeds must be positive")
    a, b = _as_exact(c_minus), _as_exact(c_plus)
    q = float((b - a) / (b + a))
    r = q * q
    return InterfaceCoeffs(r, 1.0 - r)


def coeffs_2d(c_minus: float, c_plus: float,
              gamma_minus: float, gamma_plus: float) -> InterfaceCoeffs:
    """Oblique-incidence coefficients from the two normal cosines.

    gamma_minus is the cosine on the incident (-) side, gamma_plus on the
    transmitted (+) side; both must lie in (0, 1].
    """
    if c_minus <= 0 or c_plus <= 0:
        raise DomainError("wave speeds must be positive")
    if not (0.0 < gamma_minus <= 1.0) or not (0.0 < gamma_plus <= 1.0):
        raise DomainError(f"cosines must lie in (0, 1], got {gamma_minus}, {gamma_plus}")
    cp, cm = _as_exact(c_plus), _as_exact(c_minus)
    gm, gp = _as_exact(gamma_minus), _as_exact(gamma_plus)
    num = cp * gm - cm * gp
    den = cp * gm + cm * gp
    q = float(num / den)
    r = q * q
    return InterfaceCoeffs(r, 1.0 - r)


def transmitted_xi_1d(xi: float, c_from: float, c_to: float) -> float:
    """Slowness after crossing, preserving c|xi|: returns (c_from/c_to) xi."""
    if c_from <= 0 or c_to <= 0:
        raise DomainError("wave speeds must be positive")
    return (c_from / c_to) * xi


def transmit_test_2d(xi: float, eta: float, c_from: float, c_to: float) -> TransmitDecision2D:
    """Decide transmission across a line interface with normal along xi.

    The wave carries slowness (xi, eta) in the c_from medium, with xi the
    component normal to the interface and eta tangential.  Preserving c|v|
    and eta gives the transmitted normal slowness as sign(xi) sqrt(D) with

        D = (c_from/c_to)^2 xi^2 + ((c_from/c_to)^2 - 1) eta^2.

    D <= 0 means no real transmitted slowness exists: total reflection.
    """
    if c_from <= 0 or c_to <= 0:
        raise DomainError("wave speeds must be positive")
    if xi == 0:
        raise DomainError("normal slowness must be nonzero (grazing incidence)")
    r2 = (c_from / c_to) ** 2
    disc = r2 * xi * xi + (r2 - 1.0) * eta * eta
    if disc > 0.0:
        return TransmitDecision2D(disc, math.copysign(math.sqrt(disc), xi))
    return TransmitDecision2D(disc, None)


def beta_1d(c_minus: float, c_plus: float, xi_j: float, xi_k: float, dxi: float) -> float:
    """Interpolation weight tying post-interface slot xi_j to source slot xi_k.

    For xi_j > 0 the wave enters from the left, so its pre-interface slowness
    is (c+/c-) xi_j and the weight is the hat evaluated at the offset from
    xi_k; for xi_j < 0 the roles of the two sides swap.
    """
    if xi_j == 0:
        raise DomainError("slowness grid must not contain xi = 0")
    if xi_j > 0:
        source = transmitted_xi_1d(xi_j, c_plus, c_minus)
    else:
        source = transmitted_xi_1d(xi_j, c_minus, c_plus)
    return hat(source - xi_k, dxi)


def step_gates_2d(discriminant: float, coeffs: InterfaceCoeffs) -> tuple:
    """Gate pair (a_T, a_R): transmit share when D > 0, else pure reflection."""
    if discriminant > 0.0:
        return coeffs.alpha_T, coeffs.alpha_R
    return 0.0, 1.0
