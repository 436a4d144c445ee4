"""Vehicle propulsion: normalized commands, speed ramping, thrust mapping.

Propulsion is abstracted to a body-frame force (surge/sway/heave) plus a yaw
torque. Commanded setpoints pass through a first-order lag — the progressive
speed ramp — before being scaled by the thrust limits; the exact discrete
update ramped += (raw - ramped) * (1 - exp(-dt/tau)) makes the step response
hit 1 - 1/e at t = tau regardless of dt.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .frames import Quat, Vec3


def _clamp_unit(v: float) -> float:
    return -1.0 if v < -1.0 else (1.0 if v > 1.0 else v)


@dataclass(frozen=True)
class PropulsionCommand:
    surge: float = 0.0
    sway: float = 0.0
    heave: float = 0.0
    yaw_rate: float = 0.0

    def clamped(self) -> "PropulsionCommand":
        return PropulsionCommand(
            _clamp_unit(self.surge), _clamp_unit(self.sway),
            _clamp_unit(self.heave), _clamp_unit(self.yaw_rate))

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.surge, self.sway, self.heave, self.yaw_rate)


@dataclass(frozen=True)
class RampParams:
    time_constant: float = 1.5  # s
    max_thrust: Vec3 = Vec3(40.0, 25.0, 25.0)  # N per body axis
    max_yaw_torque: float = 10.0  # N*m

    def validate(self) -> None:
        if not self.time_constant > 0.0:
            raise ValueError("ramp time constant must be > 0")
        t = self.max_thrust
        if not (t.x > 0.0 and t.y > 0.0 and t.z > 0.0) or not self.max_yaw_torque > 0.0:
            raise ValueError("thrust limits must be > 0")


def ramp_command(ramped: PropulsionCommand, raw: PropulsionCommand,
                 dt: float, params: RampParams) -> PropulsionCommand:
    """One first-order-lag step of the ramped setpoint toward the raw command."""
    if not dt > 0.0:
        raise ValueError("dt must be > 0")
    raw = raw.clamped()
    alpha = 1.0 - math.exp(-dt / params.time_constant)
    return PropulsionCommand(
        ramped.surge + (raw.surge - ramped.surge) * alpha,
        ramped.sway + (raw.sway - ramped.sway) * alpha,
        ramped.heave + (raw.heave - ramped.heave) * alpha,
        ramped.yaw_rate + (raw.yaw_rate - ramped.yaw_rate) * alpha,
    )


def propulsion_wrench(ramped: PropulsionCommand, params: RampParams) -> tuple[Vec3, Vec3]:
    """Body-frame (force, torque) for a ramped command."""
    t = params.max_thrust
    force = Vec3(ramped.surge * t.x, ramped.sway * t.y, ramped.heave * t.z)
    torque = Vec3(0.0, 0.0, ramped.yaw_rate * params.max_yaw_torque)
    return force, torque


class VehicleController:
    """Holds the raw and ramped command state for the vehicle body."""

    def __init__(self, params: RampParams | None = None):
        self.params = params if params is not None else RampParams()
        self.params.validate()
        self.raw = PropulsionCommand()
        self.ramped = PropulsionCommand()

    def set_command(self, cmd: PropulsionCommand) -> None:
        self.raw = cmd.clamped()

    def step(self, dt: float) -> PropulsionCommand:
        self.ramped = ramp_command(self.ramped, self.raw, dt, self.params)
        return self.ramped

    def world_wrench(self, orientation: Quat) -> tuple[Vec3, Vec3]:
        fb, tb = propulsion_wrench(self.ramped, self.params)
        return orientation.rotate(fb), orientation.rotate(tb)
