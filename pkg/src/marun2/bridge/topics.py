"""The fixed topic table and inbound command validation.

Topics are direction-locked: clients publish only on inbound (cmd) topics, the
simulator publishes everything else. Pose payloads always use named fields so
quaternion component order is unambiguous on the wire.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..limb import LIMB_ORDER
from ..vehicle import PropulsionCommand

SIM_TO_CLIENTS = "sim_to_clients"
CLIENTS_TO_SIM = "clients_to_sim"

VEHICLE_CMD = "/ursula/vehicle/cmd"
VEHICLE_ODOM = "/ursula/vehicle/odom"
CONTACTS = "/ursula/contacts"
CLOCK = "/marun/clock"
SCENARIO_STATE = "/marun/scenario/state"


def limb_cmd_topic(i: int) -> str:
    return f"/ursula/limb/{i}/cmd"


def limb_segments_topic(i: int) -> str:
    return f"/ursula/limb/{i}/segments"


def limb_haptic_topic(i: int) -> str:
    return f"/ursula/limb/{i}/haptic"


@dataclass(frozen=True)
class TopicSpec:
    name: str
    msg_type: str
    direction: str
    rate_hz: float | None = None  # None: event-driven


def default_topic_table() -> dict[str, TopicSpec]:
    table: dict[str, TopicSpec] = {}

    def add(spec: TopicSpec) -> None:
        table[spec.name] = spec

    for i in range(len(LIMB_ORDER)):
        add(TopicSpec(limb_cmd_topic(i), "marun_msgs/LimbCommand", CLIENTS_TO_SIM))
        add(TopicSpec(limb_segments_topic(i), "marun_msgs/SegmentArray", SIM_TO_CLIENTS, 50.0))
    for i in range(2):  # force-sensing arm tips only
        add(TopicSpec(limb_haptic_topic(i), "marun_msgs/TipForce", SIM_TO_CLIENTS, 50.0))
    add(TopicSpec(VEHICLE_CMD, "marun_msgs/VehicleCommand", CLIENTS_TO_SIM))
    add(TopicSpec(VEHICLE_ODOM, "marun_msgs/Odometry", SIM_TO_CLIENTS, 20.0))
    add(TopicSpec(CONTACTS, "marun_msgs/ContactEvents", SIM_TO_CLIENTS, None))
    add(TopicSpec(CLOCK, "marun_msgs/Clock", SIM_TO_CLIENTS, 10.0))
    add(TopicSpec(SCENARIO_STATE, "marun_msgs/ScenarioState", SIM_TO_CLIENTS, None))
    return table


class CommandError(ValueError):
    """Schema-invalid inbound message; the message names the bad field."""


@dataclass(frozen=True)
class LimbAxesCommand:
    limb_index: int
    ax: float
    ay: float


@dataclass(frozen=True)
class VehicleCommand:
    propulsion: PropulsionCommand
    grip: bool = False


Command = LimbAxesCommand | VehicleCommand


def _num(msg: dict, key: str, default=None) -> float:
    if key not in msg:
        if default is None:
            raise CommandError(f"msg.{key}: required number missing")
        return default
    v = msg[key]
    if not isinstance(v, (int, float)) or isinstance(v, bool):
        raise CommandError(f"msg.{key}: expected a number, got {type(v).__name__}")
    return float(v)


def parse_command(topic: str, msg) -> Command:
    """Validate and normalize a clients->sim message into a command."""
    if not isinstance(msg, dict):
        raise CommandError("msg: expected an object")
    if topic == VEHICLE_CMD:
        grip = msg.get("grip", False)
        if not isinstance(grip, bool):
            raise CommandError("msg.grip: expected a boolean")
        return VehicleCommand(
            PropulsionCommand(
                _num(msg, "surge", 0.0), _num(msg, "sway", 0.0),
                _num(msg, "heave", 0.0), _num(msg, "yaw_rate", 0.0),
            ).clamped(),
            grip=grip,
        )
    for i in range(len(LIMB_ORDER)):
        if topic == limb_cmd_topic(i):
            axes = msg.get("axes")
            if (not isinstance(axes, (list, tuple)) or len(axes) != 2
                    or not all(isinstance(a, (int, float)) and not isinstance(a, bool) for a in axes)):
                raise CommandError("msg.axes: expected [ax, ay] numbers")
            return LimbAxesCommand(i, float(axes[0]), float(axes[1]))
    raise CommandError(f"topic {topic} does not accept commands")
