"""Hydrodynamic parameters and the per-body force laws.

The functions here are the reference formulation of what the step kernels
compute in bulk; they are part of the public surface (and the tests
cross-check kernels against them).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..frames import Quat, Vec3

DEFAULT_FLUID_DENSITY = 1025.0  # kg/m^3, seawater


@dataclass(frozen=True)
class HydroParams:
    """Diagonal-coefficient hydrodynamic model in the body frame."""

    fluid_density: float = DEFAULT_FLUID_DENSITY
    displaced_volume: float = 0.0  # m^3
    center_of_buoyancy_offset: Vec3 = field(default_factory=Vec3)  # m, body frame
    added_mass_diag: Vec3 = field(default_factory=Vec3)  # kg
    linear_drag_diag: Vec3 = field(default_factory=Vec3)  # N*s/m
    quadratic_drag_diag: Vec3 = field(default_factory=Vec3)  # N*s^2/m^2
    angular_drag_diag: Vec3 = field(default_factory=Vec3)  # N*m*s/rad

    def validate(self) -> None:
        if not self.fluid_density > 0.0:
            raise ValueError(f"fluid_density must be > 0, got {self.fluid_density}")
        if self.displaced_volume < 0.0:
            raise ValueError("displaced_volume must be >= 0")
        for name in ("added_mass_diag", "linear_drag_diag", "quadratic_drag_diag", "angular_drag_diag"):
            v: Vec3 = getattr(self, name)
            if v.x < 0.0 or v.y < 0.0 or v.z < 0.0:
                raise ValueError(f"{name} components must be >= 0, got {v}")


def buoyancy_force(orientation: Quat, hydro: HydroParams, gravity: Vec3) -> tuple[Vec3, Vec3]:
    """Buoyant force -rho*V*g and its torque about the center of mass."""
    f = gravity * (-hydro.fluid_density * hydro.displaced_volume)
    r = orientation.rotate(hydro.center_of_buoyancy_offset)
    return f, r.cross(f)


def drag_force(orientation: Quat, velocity: Vec3, angular_velocity: Vec3,
               hydro: HydroParams, current: Vec3) -> tuple[Vec3, Vec3]:
    """Linear-plus-quadratic damping of the flow-relative velocity.

    Coefficients are diagonal in the body frame; the quadratic term scales
    with the full relative speed.
    """
    u = orientation.rotate_inverse(velocity - current)
    speed = u.norm()
    ld = hydro.linear_drag_diag
    qd = hydro.quadratic_drag_diag
    fb = Vec3(
        -ld.x * u.x - qd.x * speed * u.x,
        -ld.y * u.y - qd.y * speed * u.y,
        -ld.z * u.z - qd.z * speed * u.z,
    )
    wb = orientation.rotate_inverse(angular_velocity)
    ad = hydro.angular_drag_diag
    tb = Vec3(-ad.x * wb.x, -ad.y * wb.y, -ad.z * wb.z)
    return orientation.rotate(fb), orientation.rotate(tb)


def apply_added_mass(orientation: Quat, mass: float, hydro: HydroParams,
                     net_force: Vec3) -> Vec3:
    """Acceleration from a world-frame net force, per-axis added mass."""
    if not mass > 0.0:
        raise ValueError("mass must be > 0")
    fb = orientation.rotate_inverse(net_force)
    am = hydro.added_mass_diag
    ab = Vec3(fb.x / (mass + am.x), fb.y / (mass + am.y), fb.z / (mass + am.z))
    return orientation.rotate(ab)


@dataclass(frozen=True)
class CurrentField:
    """Uniform current, optionally modulated per axis by a sinusoid."""

    velocity: Vec3 = field(default_factory=Vec3)
    amplitude: Vec3 = field(default_factory=Vec3)
    period: float = 0.0  # s; 0 disables modulation

    def validate(self) -> None:
        if self.amplitude != Vec3.zero() and not self.period > 0.0:
            raise ValueError("current modulation requires period > 0")

    def at(self, t: float) -> Vec3:
        if self.period <= 0.0:
            return self.velocity
        s = math.sin(2.0 * math.pi * t / self.period)
        return self.velocity + self.amplitude * s
