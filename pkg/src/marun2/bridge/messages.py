"""Outbound message builders: the one place sim poses become render poses.

Every message carries a per-topic monotonically increasing seq and the sim
time stamp. Pose payloads use named fields exclusively. All geometry is
converted to the render frame here and nowhere else.
"""

from __future__ import annotations

from ..frames import (
    Pose,
    Vec3,
    sim_to_render_angular,
    sim_to_render_pose,
    sim_to_render_position,
    sim_to_render_vector,
)
from ..physics.contacts import ContactEvent
from ..sim import Snapshot


def _vec_dict(v: Vec3) -> dict:
    return {"x": v.x, "y": v.y, "z": v.z}


def pose_to_wire(pose: Pose) -> dict:
    p = sim_to_render_pose(pose)
    return {
        "position": _vec_dict(p.position),
        "orientation": {"w": p.orientation.w, "x": p.orientation.x,
                        "y": p.orientation.y, "z": p.orientation.z},
    }


def vector_to_wire(v: Vec3) -> dict:
    return _vec_dict(sim_to_render_vector(v))


def angular_to_wire(v: Vec3) -> dict:
    return _vec_dict(sim_to_render_angular(v))


def segments_message(snap: Snapshot, limb_index: int, seq: int) -> dict:
    limb = snap.limbs[limb_index]
    return {
        "seq": seq,
        "stamp": snap.time,
        "frame": "render",
        "limb": limb_index,
        "limb_id": limb.limb_id,
        "poses": [pose_to_wire(p) for p in limb.segment_poses],
        "tip": _vec_dict(sim_to_render_position(limb.tip_position)),
    }


def haptic_message(snap: Snapshot, limb_index: int, seq: int) -> dict:
    limb = snap.limbs[limb_index]
    return {
        "seq": seq,
        "stamp": snap.time,
        "frame": "render",
        "limb": limb_index,
        "limb_id": limb.limb_id,
        "force": vector_to_wire(limb.tip_force),
        "magnitude": limb.tip_force.norm(),
    }


def odom_message(snap: Snapshot, seq: int) -> dict:
    return {
        "seq": seq,
        "stamp": snap.time,
        "frame": "render",
        "pose": pose_to_wire(snap.vehicle_pose),
        "twist": {
            "linear": vector_to_wire(snap.vehicle_velocity),
            "angular": angular_to_wire(snap.vehicle_angular_velocity),
        },
    }


def _event_dict(ev: ContactEvent) -> dict:
    return {
        "phase": ev.phase.value,
        "body_a": ev.body_a,
        "body_b": ev.body_b,
        "point": vector_to_wire(ev.point),
        "normal": vector_to_wire(ev.normal),
        "penetration": ev.penetration,
        "impulse": ev.impulse,
        "force": ev.estimated_force,
    }


def contacts_message(snap: Snapshot, seq: int) -> dict:
    return {
        "seq": seq,
        "stamp": snap.time,
        "frame": "render",
        "events": [_event_dict(ev) for ev in snap.events],
    }


def clock_message(snap: Snapshot, seq: int) -> dict:
    return {"seq": seq, "sim_time": snap.time, "step": snap.step}


def scenario_message(snap: Snapshot, seq: int) -> dict:
    msg = {
        "seq": seq,
        "stamp": snap.time,
        "frame": "render",
        "running": False,
        "kind": None,
        "elapsed": snap.time,
        "success": False,
        "time_limit": None,
        "path_length": None,
        "grip": snap.grip,
        "objects": [
            {"id": o.body_id, "shape": o.shape, "kinematic": o.kinematic,
             **pose_to_wire(o.pose)}
            for o in snap.objects
        ],
    }
    if snap.scenario is not None:
        msg.update(snap.scenario)
    return msg
