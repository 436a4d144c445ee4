"""The simulation session: one world, one vehicle, four limbs, one writer.

The session is stepped by exactly one thread. Commands arrive through a
thread-safe queue and are drained once per step (last writer wins per target
within a step); every consumed command is stamped with the step that consumed
it, which is what the record/replay machinery serializes.

Step order (fixed, documented for determinism):
  1. drain commands -> proxy mappers / vehicle raw command / grip flag
  2. solve limb shapes; impose segment poses + finite-difference twists
  3. advance scripted kinematic trajectories to t+dt
  4. ramp vehicle command; accumulate propulsion wrench
  5. physics step (forces, velocities, contacts, impulses, poses)
  6. kinematic-until-contact bodies hit for the first time become dynamic
  7. tip contact forces from this step's events
"""

from __future__ import annotations

import hashlib
import math
import struct
import threading
from collections import deque
from dataclasses import dataclass

from .bridge import topics as tp
from .frames import Pose, Quat, Vec3, pose_compose
from .limb import (
    LimbConfig,
    LimbState,
    OperatorInput,
    ProxyMapper,
    forward_limb_model,
    inverse_limb_model,
    limb_state_with_force,
    tip_contact_force,
)
from .physics import Capsule, ContactEvent, ContactPhase, GROUP_ROBOT, GROUP_SCENE, World
from .scene import Scene, BodySpec
from .vehicle import VehicleController


def segment_body_id(limb_index: int, seg_index: int) -> str:
    return f"limb/{limb_index}/seg/{seg_index}"


@dataclass(frozen=True)
class LimbSnapshot:
    limb_id: str
    index: int
    segment_poses: tuple[Pose, ...]  # world, sim frame
    tip_position: Vec3  # world, sim frame
    tip_force: Vec3
    bend_azimuth: float
    bend_magnitude: float


@dataclass(frozen=True)
class ObjectSnapshot:
    body_id: str
    shape: dict
    pose: Pose
    kinematic: bool


@dataclass(frozen=True)
class Snapshot:
    step: int
    time: float
    dt: float
    vehicle_pose: Pose | None
    vehicle_velocity: Vec3
    vehicle_angular_velocity: Vec3
    ramped: tuple[float, float, float, float]
    limbs: tuple[LimbSnapshot, ...]
    objects: tuple[ObjectSnapshot, ...]
    events: tuple[ContactEvent, ...]
    grip: bool
    scenario: dict | None = None


class SimSession:
    def __init__(self, scene: Scene, dt: float = 0.02):
        self.scene = scene
        self.dt = float(dt)
        self.world = World(dt=self.dt, gravity=scene.gravity, current=scene.current)
        self._queue: deque[tuple[str, object]] = deque()
        self._queue_lock = threading.Lock()
        self.grip_commanded = False
        self._pending_first_contact: set[str] = set()
        self._trajectories: dict[str, BodySpec] = {}
        self.extra_hash_providers: list = []

        from .scene import _shape_dict  # canonical shape serialization

        self._shape_dicts: dict[str, dict] = {}
        for b in scene.bodies:
            self.world.add_body(
                b.body_id, b.shape, mass=b.mass, inertia=b.inertia, pose=b.pose,
                velocity=b.velocity, kinematic=b.kinematic, hydro=b.hydro,
                restitution=b.restitution, friction=b.friction, group=GROUP_SCENE)
            self._shape_dicts[b.body_id] = _shape_dict(b.shape)
            if b.kinematic_until_contact:
                self._pending_first_contact.add(b.body_id)
            if b.trajectory is not None:
                self._trajectories[b.body_id] = b

        self.vehicle_id: str | None = None
        self.vehicle: VehicleController | None = None
        self.limb_configs: list[LimbConfig] = []
        self.proxies: list[ProxyMapper] = []
        self.limb_states: list[LimbState] = []
        self._limb_inputs: list[OperatorInput] = []
        if scene.vehicle is not None:
            v = scene.vehicle
            self.vehicle_id = v.body_id
            self.world.add_body(
                v.body_id, v.shape, mass=v.mass, inertia=v.inertia, pose=v.pose,
                hydro=v.hydro, restitution=v.restitution, friction=v.friction,
                group=GROUP_ROBOT)
            self.vehicle = VehicleController(v.ramp)
            for i, cfg in enumerate(scene.limbs):
                self.limb_configs.append(cfg)
                self.proxies.append(ProxyMapper(cfg))
                self._limb_inputs.append(OperatorInput())
                state = forward_limb_model(cfg, inverse_limb_model(
                    cfg, self.proxies[i].update(OperatorInput(), self.dt)).command)
                self.limb_states.append(state)
                mount = pose_compose(v.pose, cfg.base_pose)
                half = cfg.segment_length / 2.0
                cap = Capsule(half_length=max(half - cfg.segment_radius, half * 0.25),
                              radius=cfg.segment_radius)
                for j, seg in enumerate(state.segment_poses):
                    world_seg = pose_compose(mount, seg)
                    body_pose = Pose(
                        world_seg.position + world_seg.orientation.rotate(Vec3(0, 0, half)),
                        world_seg.orientation)
                    self.world.add_body(
                        segment_body_id(i, j), cap, mass=0.1, pose=body_pose,
                        kinematic=True, group=GROUP_ROBOT)
        self._events: list[ContactEvent] = []

    # --- commands -----------------------------------------------------------

    def ingest(self, topic: str, msg) -> None:
        """Queue a raw inbound message; validated when drained. Thread-safe."""
        with self._queue_lock:
            self._queue.append((topic, msg))

    def _drain_commands(self, recorder=None) -> None:
        with self._queue_lock:
            pending = list(self._queue)
            self._queue.clear()
        for topic, msg in pending:
            cmd = tp.parse_command(topic, msg)
            if recorder is not None:
                recorder.add(self.world.step_index, topic, msg)
            if isinstance(cmd, tp.VehicleCommand):
                if self.vehicle is not None:
                    self.vehicle.set_command(cmd.propulsion)
                self.grip_commanded = cmd.grip
            else:
                if cmd.limb_index < len(self._limb_inputs):
                    self._limb_inputs[cmd.limb_index] = OperatorInput(cmd.ax, cmd.ay)

    # --- stepping -----------------------------------------------------------

    def _impose_pose(self, body_id: str, new_pose: Pose) -> None:
        """Teleport a kinematic body, leaving a finite-difference twist."""
        old = self.world.body_state(body_id).pose
        vel = (new_pose.position - old.position) * (1.0 / self.dt)
        dq = new_pose.orientation * old.orientation.conjugate()
        if dq.w < 0.0:
            dq = Quat(-dq.w, -dq.x, -dq.y, -dq.z)
        v_norm = math.sqrt(dq.x * dq.x + dq.y * dq.y + dq.z * dq.z)
        if v_norm > 1e-12:
            angle = 2.0 * math.atan2(v_norm, dq.w)
            omega = Vec3(dq.x / v_norm, dq.y / v_norm, dq.z / v_norm) * (angle / self.dt)
        else:
            omega = Vec3.zero()
        self.world.set_pose(body_id, new_pose)
        self.world.set_velocity(body_id, vel, omega)

    def step(self, recorder=None) -> list[ContactEvent]:
        self._drain_commands(recorder)

        if self.vehicle is not None and self.vehicle_id is not None:
            vehicle_pose = self.world.body_state(self.vehicle_id).pose
            for i, cfg in enumerate(self.limb_configs):
                desired = self.proxies[i].update(self._limb_inputs[i], self.dt)
                inv = inverse_limb_model(cfg, desired)
                state = forward_limb_model(cfg, inv.command)
                self.limb_states[i] = state
                mount = pose_compose(vehicle_pose, cfg.base_pose)
                half = cfg.segment_length / 2.0
                for j, seg in enumerate(state.segment_poses):
                    world_seg = pose_compose(mount, seg)
                    body_pose = Pose(
                        world_seg.position + world_seg.orientation.rotate(Vec3(0, 0, half)),
                        world_seg.orientation)
                    self._impose_pose(segment_body_id(i, j), body_pose)

        t_next = (self.world.step_index + 1) * self.dt
        for body_id, spec in self._trajectories.items():
            if not self.world.is_kinematic(body_id):
                continue  # released to dynamics (first contact)
            new_pos = spec.trajectory.position_at(t_next)
            old = self.world.body_state(body_id).pose
            self._impose_pose(body_id, Pose(new_pos, old.orientation))

        if self.vehicle is not None and self.vehicle_id is not None:
            self.vehicle.step(self.dt)
            ori = self.world.body_state(self.vehicle_id).pose.orientation
            force, torque = self.vehicle.world_wrench(ori)
            self.world.apply_force(self.vehicle_id, force, torque)

        events = self.world.step()

        for ev in events:
            if ev.phase is not ContactPhase.ENTER:
                continue
            for bid in (ev.body_a, ev.body_b):
                if bid in self._pending_first_contact:
                    self._pending_first_contact.discard(bid)
                    self.world.set_kinematic(bid, False)

        for i, cfg in enumerate(self.limb_configs):
            distal = segment_body_id(i, cfg.segment_count - 1)
            force = tip_contact_force(distal, events)
            self.limb_states[i] = limb_state_with_force(self.limb_states[i], force)

        self._events = events
        return events

    # --- views ----------------------------------------------------------------

    @property
    def step_index(self) -> int:
        return self.world.step_index

    @property
    def time(self) -> float:
        return self.world.time

    def limb_tip_world(self, i: int) -> Vec3:
        state = self.limb_states[i]
        vehicle_pose = self.world.body_state(self.vehicle_id).pose
        mount = pose_compose(vehicle_pose, self.limb_configs[i].base_pose)
        return mount.transform_point(state.tip_position)

    def snapshot(self) -> Snapshot:
        limbs = []
        veh_pose = None
        vel = Vec3.zero()
        angvel = Vec3.zero()
        ramped = (0.0, 0.0, 0.0, 0.0)
        if self.vehicle_id is not None:
            vst = self.world.body_state(self.vehicle_id)
            veh_pose = vst.pose
            vel = vst.linear_velocity
            angvel = vst.angular_velocity
            ramped = self.vehicle.ramped.as_tuple()
            for i, cfg in enumerate(self.limb_configs):
                state = self.limb_states[i]
                mount = pose_compose(vst.pose, cfg.base_pose)
                world_poses = tuple(pose_compose(mount, seg) for seg in state.segment_poses)
                limbs.append(LimbSnapshot(
                    limb_id=cfg.limb_id.value,
                    index=i,
                    segment_poses=world_poses,
                    tip_position=mount.transform_point(state.tip_position),
                    tip_force=state.tip_contact_force,
                    bend_azimuth=self.proxies[i].bend_azimuth,
                    bend_magnitude=self.proxies[i].bend_magnitude,
                ))
        objects = []
        for b in self.scene.bodies:
            st = self.world.body_state(b.body_id)
            objects.append(ObjectSnapshot(
                body_id=b.body_id,
                shape=self._shape_dicts[b.body_id],
                pose=st.pose,
                kinematic=st.kinematic,
            ))
        return Snapshot(
            step=self.world.step_index,
            time=self.world.time,
            dt=self.dt,
            vehicle_pose=veh_pose,
            vehicle_velocity=vel,
            vehicle_angular_velocity=angvel,
            ramped=ramped,
            limbs=tuple(limbs),
            objects=tuple(objects),
            events=tuple(self._events),
            grip=self.grip_commanded,
        )

    def state_hash(self) -> str:
        """Hash of everything that influences future evolution, bit-exact."""
        h = hashlib.sha256()
        h.update(self.world.state_bytes())
        if self.vehicle is not None:
            h.update(struct.pack("<4d", *self.vehicle.ramped.as_tuple()))
            h.update(struct.pack("<4d", *self.vehicle.raw.as_tuple()))
        for p in self.proxies:
            h.update(struct.pack("<2d", p.bend_azimuth, p.bend_magnitude))
        for inp in self._limb_inputs:
            h.update(struct.pack("<2d", inp.ax, inp.ay))
        h.update(b"\x01" if self.grip_commanded else b"\x00")
        for provider in self.extra_hash_providers:
            h.update(provider())
        return h.hexdigest()
