"""Length-varying ALIP plant.

Planar point-mass pendulum on a massless leg of time-varying length.  The
state is the angle of the CoM about the stance contact point and the angular
momentum about that same point.  All angles are in radians, moments in
kg*m^2/s, torques in N*m.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import AlipDomainError

__all__ = [
    "AlipParams",
    "AlipState",
    "PlanarVec",
    "AlipDerivative",
    "com_angle",
    "pendulum_length",
    "nonlinear_dynamics",
    "linearized_dynamics",
    "wedge",
    "impact_transfer",
    "com_velocity_from_state",
]


@dataclass(frozen=True)
class AlipParams:
    """Total mass (kg) and gravitational acceleration (m/s^2)."""

    m: float
    g: float = 9.81

    def __post_init__(self):
        if not (self.m > 0 and math.isfinite(self.m)):
            raise AlipDomainError(f"mass must be positive, got {self.m}")
        if not (self.g > 0 and math.isfinite(self.g)):
            raise AlipDomainError(f"gravity must be positive, got {self.g}")


@dataclass(frozen=True)
class AlipState:
    """CoM angle about the stance contact (rad) and angular momentum (kg*m^2/s)."""

    theta_c: float
    L: float

    def __post_init__(self):
        if not (math.isfinite(self.theta_c) and math.isfinite(self.L)):
            raise AlipDomainError(
                f"state must be finite, got theta_c={self.theta_c}, L={self.L}"
            )


@dataclass(frozen=True)
class PlanarVec:
    """Sagittal-plane vector: x forward, z up."""

    x: float
    z: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.z)):
            raise AlipDomainError(f"vector must be finite, got ({self.x}, {self.z})")


@dataclass(frozen=True)
class AlipDerivative:
    """Time derivative of an AlipState."""

    dtheta_c: float
    dL: float


def com_angle(p: PlanarVec) -> float:
    """Angle of the CoM position about the contact point: arctan(x/z)."""
    if p.z <= 0:
        raise AlipDomainError(f"CoM must be above the contact point, got z={p.z}")
    return math.atan(p.x / p.z)


def pendulum_length(p: PlanarVec) -> float:
    """Euclidean distance from the contact point to the CoM."""
    r = math.hypot(p.x, p.z)
    if r == 0.0:
        raise AlipDomainError("CoM coincides with the contact point")
    return r


def _check_length(r_c: float) -> None:
    if not (r_c > 0 and math.isfinite(r_c)):
        raise AlipDomainError(f"pendulum length must be positive, got {r_c}")


def nonlinear_dynamics(
    s: AlipState, r_c: float, L_c: float, tau: float, p: AlipParams
) -> AlipDerivative:
    """Exact pendulum dynamics.

    dtheta_c = (L - L_c) / (m r_c^2)
    dL       = m g r_c sin(theta_c) + tau

    L_c is the angular momentum about the CoM itself; it is negligible for
    robots whose mass is concentrated near the CoM and defaults to 0
    throughout the closed loop.
    """
    _check_length(r_c)
    dtheta = (s.L - L_c) / (p.m * r_c * r_c)
    dL = p.m * p.g * r_c * math.sin(s.theta_c) + tau
    return AlipDerivative(dtheta, dL)


def linearized_dynamics(
    s: AlipState, r_c: float, tau: float, p: AlipParams
) -> AlipDerivative:
    """Small-angle dynamics with L_c dropped: sin(theta_c) ~ theta_c."""
    _check_length(r_c)
    dtheta = s.L / (p.m * r_c * r_c)
    dL = p.m * p.g * r_c * s.theta_c + tau
    return AlipDerivative(dtheta, dL)


def wedge(a: PlanarVec, b: PlanarVec) -> float:
    """Planar wedge product a ^ b = a.z * b.x - a.x * b.z.

    This is the y-component of the 3-D cross product of (a.x, 0, a.z) and
    (b.x, 0, b.z), signed so that L - L_c = m * wedge(position, velocity).
    """
    return a.z * b.x - a.x * b.z


def impact_transfer(
    L_minus: float, v_com: PlanarVec, step_vector: PlanarVec, p: AlipParams
) -> float:
    """Angular momentum about the new contact point after foot exchange.

    step_vector points from the old stance contact to the new one.  Momentum
    about a contact point is invariant to the impulsive force acting there,
    and the CoM velocity is continuous across the exchange, so

        L_plus = L_minus - m * wedge(step_vector, v_com).
    """
    return L_minus - p.m * wedge(step_vector, v_com)


def com_velocity_from_state(
    s: AlipState, r_c: float, dr_c: float, p: AlipParams
) -> PlanarVec:
    """Cartesian CoM velocity reconstructed from the polar state.

    Uses dtheta_c = L / (m r_c^2) (L_c neglected) together with the leg
    extension rate dr_c.  Inverse of the momentum identity: feeding the result
    back through m * wedge(position, velocity) reproduces L.
    """
    _check_length(r_c)
    dtheta = s.L / (p.m * r_c * r_c)
    sin_t = math.sin(s.theta_c)
    cos_t = math.cos(s.theta_c)
    vx = dr_c * sin_t + r_c * dtheta * cos_t
    vz = dr_c * cos_t - r_c * dtheta * sin_t
    return PlanarVec(vx, vz)
