"""Benchmark scenarios: contact, grasp-and-place, and flowing-water tasks.

A scenario wraps a scene with a success predicate, a time limit, and metric
recording. The driver owns the stepping loop; any command source (scripted
file, replay, or live bridge clients) can act as the controller, and scripted
runs are bit-deterministic.

Grasping is a kinematic attachment: when the grip command is held and both
arm tips are within grasp range of the object surface, the object is rigidly
attached to the frame spanned by the two tips until released. Success latches
when the object is released with its center inside the target zone.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

from .frames import Pose, Vec3, pose_compose, quat_from_basis
from .metrics import MetricsRecord, path_length
from .physics import ContactPhase
from .scene import Scene, SceneError, _number, _vec3, load_scene_file
from .sim import SimSession

SCHEMA_VERSION = 1

KIND_CONTACT = "ContactTask"
KIND_GRASP = "GraspTask"
KIND_FLOW = "FlowTask"
KINDS = (KIND_CONTACT, KIND_GRASP, KIND_FLOW)


class ScenarioError(ValueError):
    pass


class ControllerDisconnected(RuntimeError):
    """Raised by a controller whose command source went away mid-run."""


@dataclass(frozen=True)
class TargetZone:
    center: Vec3
    radius: float

    def contains(self, p: Vec3) -> bool:
        return (p - self.center).norm() <= self.radius


@dataclass(frozen=True)
class ScenarioSpec:
    kind: str
    scene_path: str
    time_limit: float
    contact_target: str | None = None
    settle_window: float = 1.0
    grasp_object: str | None = None
    target_zone: TargetZone | None = None
    grasp_distance: float = 0.05

    def to_dict(self) -> dict:
        d: dict = {"schema_version": SCHEMA_VERSION, "kind": self.kind,
                   "scene": self.scene_path, "time_limit": self.time_limit}
        if self.kind in (KIND_CONTACT, KIND_FLOW):
            d["contact_target"] = self.contact_target
            d["settle_window"] = self.settle_window
        else:
            d["grasp_object"] = self.grasp_object
            d["grasp_distance"] = self.grasp_distance
            d["target_zone"] = {"center": list(self.target_zone.center.as_tuple()),
                                "radius": self.target_zone.radius}
        return d


def parse_scenario(data: dict, name: str = "<scenario>") -> ScenarioSpec:
    if not isinstance(data, dict):
        raise ScenarioError(f"{name}: scenario must be a JSON object")
    if data.get("schema_version") != SCHEMA_VERSION:
        raise ScenarioError(f"{name}: unknown schema_version {data.get('schema_version')!r}")
    kind = data.get("kind")
    if kind not in KINDS:
        raise ScenarioError(f"{name}: kind must be one of {KINDS}, got {kind!r}")
    if "scene" not in data or not isinstance(data["scene"], str):
        raise ScenarioError(f"{name}: missing scene path")
    try:
        time_limit = _number(data["time_limit"], f"{name}.time_limit")
    except KeyError:
        raise ScenarioError(f"{name}: missing time_limit") from None
    except SceneError as exc:
        raise ScenarioError(str(exc)) from None
    if not time_limit > 0.0:
        raise ScenarioError(f"{name}.time_limit: must be > 0")

    if kind in (KIND_CONTACT, KIND_FLOW):
        target = data.get("contact_target")
        if not isinstance(target, str) or not target:
            raise ScenarioError(f"{name}: {kind} needs a contact_target body id")
        settle = float(data.get("settle_window", 1.0))
        if settle < 0.0:
            raise ScenarioError(f"{name}.settle_window: must be >= 0")
        return ScenarioSpec(kind=kind, scene_path=data["scene"], time_limit=time_limit,
                            contact_target=target, settle_window=settle)

    obj = data.get("grasp_object")
    if not isinstance(obj, str) or not obj:
        raise ScenarioError(f"{name}: GraspTask needs a grasp_object body id")
    tz = data.get("target_zone")
    if not isinstance(tz, dict) or "center" not in tz or "radius" not in tz:
        raise ScenarioError(f"{name}: GraspTask needs target_zone {{center, radius}}")
    try:
        center = _vec3(tz["center"], f"{name}.target_zone.center")
        radius = _number(tz["radius"], f"{name}.target_zone.radius")
    except SceneError as exc:
        raise ScenarioError(str(exc)) from None
    if not radius > 0.0:
        raise ScenarioError(f"{name}.target_zone.radius: must be > 0")
    grasp_distance = float(data.get("grasp_distance", 0.05))
    if not grasp_distance > 0.0:
        raise ScenarioError(f"{name}.grasp_distance: must be > 0")
    return ScenarioSpec(kind=kind, scene_path=data["scene"], time_limit=time_limit,
                        grasp_object=obj, target_zone=TargetZone(center, radius),
                        grasp_distance=grasp_distance)


def load_scenario_file(path: str | Path) -> ScenarioSpec:
    p = Path(path)
    if not p.exists():
        raise ScenarioError(f"scenario file not found: {p}")
    try:
        data = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{p}: invalid JSON: {exc}") from None
    spec = parse_scenario(data, name=str(p))
    # Scene paths are relative to the scenario file.
    scene_path = Path(spec.scene_path)
    if not scene_path.is_absolute():
        scene_path = p.parent / scene_path
    return ScenarioSpec(**{**spec.__dict__, "scene_path": str(scene_path)})


def load_scenario_scene(spec: ScenarioSpec) -> Scene:
    return load_scene_file(spec.scene_path)


# --- controllers ------------------------------------------------------------


class IdleController:
    """Never issues a command."""

    def poll(self, step: int) -> list[tuple[str, dict]]:
        return []


class ExternalController:
    """Commands arrive out-of-band (bridge clients ingest directly)."""

    def poll(self, step: int) -> list[tuple[str, dict]]:
        return []


class ScriptedController:
    """Replays a JSON-lines command stream: {"step": k, "topic": t, "msg": m}.

    Replay logs carry header/final bookkeeping lines, which are skipped, so a
    recorded run is directly usable as a scripted controller.
    """

    def __init__(self, path: str | Path):
        self.path = str(path)
        self._by_step: dict[int, list[tuple[str, dict]]] = {}
        p = Path(path)
        if not p.exists():
            raise ScenarioError(f"command stream not found: {p}")
        for ln, line in enumerate(p.read_text().splitlines(), 1):
            line = line.strip()
            if not line:
                continue
            try:
                entry = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ScenarioError(f"{p}:{ln}: invalid JSON: {exc}") from None
            if entry.get("type") in ("header", "final"):
                continue
            if "step" not in entry or "topic" not in entry or "msg" not in entry:
                raise ScenarioError(f"{p}:{ln}: command lines need step/topic/msg")
            self._by_step.setdefault(int(entry["step"]), []).append(
                (entry["topic"], entry["msg"]))

    def poll(self, step: int) -> list[tuple[str, dict]]:
        return self._by_step.get(step, [])


# --- grasping ---------------------------------------------------------------


@dataclass
class GraspState:
    attached_object: str | None = None
    grip_commanded: bool = False
    attach_offset: Pose = field(default_factory=Pose)
    _last_mid: Pose = field(default_factory=Pose)
    released_inside_zone: bool = False

    def hash_bytes(self) -> bytes:
        if self.attached_object is None:
            return b"grasp:none" + (b"\x01" if self.grip_commanded else b"\x00")
        off = self.attach_offset
        return (b"grasp:" + self.attached_object.encode()
                + struct.pack("<7d", *off.position.as_tuple(), *off.orientation.as_tuple())
                + (b"\x01" if self.grip_commanded else b"\x00"))


def _midpoint_frame(tip_a: Vec3, tip_b: Vec3, fallback: Pose) -> Pose:
    mid = (tip_a + tip_b) * 0.5
    span = tip_b - tip_a
    n = span.norm()
    if n < 1e-9:
        return Pose(mid, fallback.orientation)
    ex = span * (1.0 / n)
    up = Vec3(0.0, 0.0, 1.0)
    ez = up - ex * up.dot(ex)
    nz = ez.norm()
    if nz < 1e-9:
        up = Vec3(1.0, 0.0, 0.0)
        ez = up - ex * up.dot(ex)
        nz = ez.norm()
    ez = ez * (1.0 / nz)
    ey = ez.cross(ex)
    return Pose(mid, quat_from_basis(ex, ey, ez))


def grasp_update(grasp: GraspState, session: SimSession, spec: ScenarioSpec,
                 grip_commanded: bool) -> GraspState:
    """Attach/track/release logic, run once per step after physics."""
    world = session.world
    obj = spec.grasp_object
    grasp.grip_commanded = grip_commanded
    tip_a = session.limb_tip_world(0)
    tip_b = session.limb_tip_world(1)
    mid = _midpoint_frame(tip_a, tip_b, grasp._last_mid)
    grasp._last_mid = mid

    if grasp.attached_object is None:
        if grip_commanded and not grasp.released_inside_zone:
            da = world.surface_distance(obj, tip_a)
            db = world.surface_distance(obj, tip_b)
            if da <= spec.grasp_distance and db <= spec.grasp_distance:
                obj_pose = world.body_state(obj).pose
                grasp.attached_object = obj
                grasp.attach_offset = pose_compose(mid.inverse(), obj_pose)
                world.set_kinematic(obj, True)
        return grasp

    if grip_commanded:
        target = pose_compose(mid, grasp.attach_offset)
        session._impose_pose(obj, target)
        return grasp

    # Released.
    world.set_kinematic(obj, False)
    pos = world.body_state(obj).pose.position
    if spec.target_zone is not None and spec.target_zone.contains(pos):
        grasp.released_inside_zone = True
    grasp.attached_object = None
    return grasp


# --- the driver ---------------------------------------------------------------


def contact_task_check(events, target: str) -> bool:
    """First robot-limb Enter against the target body."""
    for ev in events:
        if ev.phase is not ContactPhase.ENTER:
            continue
        ids = (ev.body_a, ev.body_b)
        if target not in ids:
            continue
        other = ids[0] if ids[1] == target else ids[1]
        if other.startswith("limb/"):
            return True
    return False


class ScenarioRunner:
    def __init__(self, spec: ScenarioSpec, session: SimSession, controller,
                 recorder=None, command_log_ref: str | None = None):
        self.spec = spec
        self.session = session
        self.controller = controller
        self.recorder = recorder
        self.grasp = GraspState()
        session.extra_hash_providers.append(self.grasp.hash_bytes)
        self.done = False
        self.success = False
        self.aborted = False
        self.success_time: float | None = None
        self._impact_position: Vec3 | None = None
        self.impact_displacement: float | None = None
        self._samples: dict[str, list[tuple[float, float, float, float]]] = {}
        self._record_tips()
        self.command_log_ref = command_log_ref
        self.event_log = []  # every ContactEvent seen during the run

    def _record_tips(self) -> None:
        t = self.session.time
        for i, cfg in enumerate(self.session.limb_configs):
            tip = self.session.limb_tip_world(i)
            self._samples.setdefault(cfg.limb_id.value, []).append((t, tip.x, tip.y, tip.z))

    def tick(self) -> bool:
        """Run one step; returns False once the scenario is finished."""
        if self.done:
            return False
        try:
            for topic, msg in self.controller.poll(self.session.step_index):
                self.session.ingest(topic, msg)
        except ControllerDisconnected:
            self.aborted = True
            self.done = True
            return False
        events = self.session.step(self.recorder)
        self.event_log.extend(events)
        self._record_tips()

        if self.spec.kind in (KIND_CONTACT, KIND_FLOW):
            target = self.spec.contact_target
            if self.success_time is None and contact_task_check(events, target):
                self.success = True
                self.success_time = self.session.time
                self._impact_position = self.session.world.body_state(target).pose.position
            if self.success_time is not None:
                if self.session.time >= self.success_time + self.spec.settle_window:
                    pos = self.session.world.body_state(target).pose.position
                    self.impact_displacement = (pos - self._impact_position).norm()
                    self.done = True
            elif self.session.time >= self.spec.time_limit:
                self.done = True
        else:
            self.grasp = grasp_update(self.grasp, self.session, self.spec,
                                      self.session.grip_commanded)
            if self.grasp.released_inside_zone:
                self.success = True
                self.success_time = self.session.time
                self.done = True
            elif self.session.time >= self.spec.time_limit:
                self.done = True

        return not self.done

    def result(self) -> MetricsRecord:
        per_limb = {limb: path_length(rows) for limb, rows in self._samples.items()}
        record = MetricsRecord(
            scenario_kind=self.spec.kind,
            dt=self.session.dt,
            time_limit=self.spec.time_limit,
            success=self.success,
            aborted=self.aborted,
            time_to_completion=(self.success_time if self.success_time is not None
                                else self.spec.time_limit),
            path_length=sum(per_limb.values()),
            per_limb_path_length=per_limb,
            impact_displacement=self.impact_displacement,
            samples=self._samples,
            command_log_ref=self.command_log_ref,
        )
        return record


def run_scenario(spec: ScenarioSpec, controller, session: SimSession,
                 recorder=None, command_log_ref: str | None = None) -> MetricsRecord:
    runner = ScenarioRunner(spec, session, controller, recorder, command_log_ref)
    while runner.tick():
        pass
    return runner.result()
