"""Default configuration for the URSULA vehicle and its limbs.

Mass, lengths and buoyancy trim follow the published vehicle numbers (30 kg
dry, body under 1.2 m with a 0.25 m head, 600 mm limbs, trimmed slightly
positive). Drag and added-mass coefficients are engineering placeholders —
no measured values exist for the vehicle — and are expected to be tuned;
override them per scene file.
"""

from __future__ import annotations

import math

from .frames import Pose, Quat, Vec3
from .limb import LIMB_ORDER, LimbConfig

DEFAULT_DT = 0.02  # s; 50 Hz physics and publication base rate
DEFAULT_BIND = "127.0.0.1:9090"

VEHICLE_MASS = 30.0  # kg dry
# Displaced volume trimmed slightly above neutral (rho*V*g ~ 296.7 N vs
# m*g ~ 294.3 N) so the robot floats up slowly when idle.
VEHICLE_DISPLACED_VOLUME = 0.0295  # m^3
VEHICLE_HALF_EXTENTS = (0.55, 0.125, 0.125)  # m, body X forward

# Placeholder hydrodynamic coefficients (diagonal, body frame) — tune me.
VEHICLE_ADDED_MASS = (15.0, 25.0, 25.0)  # kg
VEHICLE_LINEAR_DRAG = (20.0, 40.0, 40.0)  # N*s/m
VEHICLE_QUADRATIC_DRAG = (60.0, 120.0, 120.0)  # N*s^2/m^2
VEHICLE_ANGULAR_DRAG = (5.0, 5.0, 4.0)  # N*m*s/rad

LIMB_MOUNT_FORWARD = 0.55  # m ahead of the vehicle center
LIMB_MOUNT_RADIUS = 0.09  # m off-axis around the head


def limb_mount_pose(index: int) -> Pose:
    """Mount of limb `index` on the head, pointing along body +X."""
    offsets = [
        Vec3(LIMB_MOUNT_FORWARD, LIMB_MOUNT_RADIUS, 0.0),
        Vec3(LIMB_MOUNT_FORWARD, -LIMB_MOUNT_RADIUS, 0.0),
        Vec3(LIMB_MOUNT_FORWARD, 0.0, LIMB_MOUNT_RADIUS),
        Vec3(LIMB_MOUNT_FORWARD, 0.0, -LIMB_MOUNT_RADIUS),
    ]
    # Limb frames run along +Z; rotate 90 degrees about Y to point them +X.
    orient = Quat.from_axis_angle(Vec3(0.0, 1.0, 0.0), math.pi / 2)
    return Pose(offsets[index], orient)


def default_vehicle_dict(position=(0.0, 0.0, 0.0)) -> dict:
    return {
        "id": "ursula",
        "shape": {"kind": "box", "half_extents": list(VEHICLE_HALF_EXTENTS)},
        "mass": VEHICLE_MASS,
        "pose": {"position": list(position)},
        "hydro": {
            "displaced_volume": VEHICLE_DISPLACED_VOLUME,
            "added_mass": list(VEHICLE_ADDED_MASS),
            "linear_drag": list(VEHICLE_LINEAR_DRAG),
            "quadratic_drag": list(VEHICLE_QUADRATIC_DRAG),
            "angular_drag": list(VEHICLE_ANGULAR_DRAG),
        },
        "ramp": {"time_constant": 1.5, "max_thrust": [40.0, 25.0, 25.0],
                 "max_yaw_torque": 10.0},
    }


def default_limbs_list() -> list[dict]:
    limbs = []
    for i, limb_id in enumerate(LIMB_ORDER):
        mount = limb_mount_pose(i)
        limbs.append({
            "limb_id": limb_id.value,
            "base_pose": {
                "position": list(mount.position.as_tuple()),
                "orientation": {"w": mount.orientation.w, "x": mount.orientation.x,
                                "y": mount.orientation.y, "z": mount.orientation.z},
            },
        })
    return limbs


def default_scene_dict() -> dict:
    """Idle scene: seabed at -2 m, the vehicle with four limbs, no objects."""
    return {
        "schema_version": 1,
        "name": "default",
        "gravity": [0.0, 0.0, -9.81],
        "fluid_density": 1025.0,
        "bodies": [
            {"id": "seabed", "shape": {"kind": "halfspace", "normal": [0, 0, 1], "offset": 0.0},
             "kinematic": True, "pose": {"position": [0.0, 0.0, -2.0]}},
        ],
        "vehicle": default_vehicle_dict(),
        "limbs": default_limbs_list(),
    }


def neutral_vehicle_dict(position=(0.0, 0.0, 0.0)) -> dict:
    """Vehicle trimmed exactly neutral; scenario fixtures use this so the
    platform holds station without station-keeping commands."""
    d = default_vehicle_dict(position)
    d["hydro"]["displaced_volume"] = VEHICLE_MASS / 1025.0
    return d


DEFAULT_LIMB = LimbConfig()
