"""Scene description files: JSON schema, validation, round-trip serialization.

A scene holds the static world (seabed, obstacles), interactive objects with
their hydrodynamic parameters, optional scripted trajectories for kinematic
bodies, the vehicle, and the limb configuration. Validation errors always name
the offending entry.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .frames import Pose, Quat, Vec3
from .limb import LimbConfig, LimbId
from .physics import shapes as shp
from .physics.hydro import DEFAULT_FLUID_DENSITY, CurrentField, HydroParams
from .vehicle import RampParams

SCHEMA_VERSION = 1


class SceneError(ValueError):
    pass


def _vec3(v, where: str) -> Vec3:
    if (not isinstance(v, (list, tuple)) or len(v) != 3
            or not all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in v)):
        raise SceneError(f"{where}: expected [x, y, z] numbers, got {v!r}")
    out = Vec3(float(v[0]), float(v[1]), float(v[2]))
    if not out.is_finite():
        raise SceneError(f"{where}: components must be finite")
    return out


def _number(v, where: str) -> float:
    if not isinstance(v, (int, float)) or isinstance(v, bool):
        raise SceneError(f"{where}: expected a number, got {v!r}")
    f = float(v)
    if not math.isfinite(f):
        raise SceneError(f"{where}: must be finite")
    return f


def _quat(v, where: str) -> Quat:
    if not isinstance(v, dict) or set(v) != {"w", "x", "y", "z"}:
        raise SceneError(f"{where}: expected {{w, x, y, z}}, got {v!r}")
    q = Quat(_number(v["w"], where), _number(v["x"], where),
             _number(v["y"], where), _number(v["z"], where))
    if not q.is_unit(1e-6):
        raise SceneError(f"{where}: quaternion must be unit-norm")
    return q


def _pose(v, where: str) -> Pose:
    if not isinstance(v, dict):
        raise SceneError(f"{where}: expected a pose object")
    pos = _vec3(v["position"], f"{where}.position") if "position" in v else Vec3.zero()
    ori = _quat(v["orientation"], f"{where}.orientation") if "orientation" in v else Quat.identity()
    return Pose(pos, ori)


def _pose_dict(p: Pose) -> dict:
    return {
        "position": list(p.position.as_tuple()),
        "orientation": {"w": p.orientation.w, "x": p.orientation.x,
                        "y": p.orientation.y, "z": p.orientation.z},
    }


def _shape(v, where: str) -> shp.Shape:
    if not isinstance(v, dict) or "kind" not in v:
        raise SceneError(f"{where}: expected a shape object with 'kind'")
    kind = v["kind"]
    try:
        if kind == "sphere":
            s: shp.Shape = shp.Sphere(_number(v["radius"], f"{where}.radius"))
        elif kind == "capsule":
            s = shp.Capsule(_number(v["half_length"], f"{where}.half_length"),
                            _number(v["radius"], f"{where}.radius"))
        elif kind == "box":
            s = shp.Box(_vec3(v["half_extents"], f"{where}.half_extents"))
        elif kind == "halfspace":
            s = shp.HalfSpace(_vec3(v.get("normal", [0, 0, 1]), f"{where}.normal"),
                              _number(v.get("offset", 0.0), f"{where}.offset"))
        else:
            raise SceneError(f"{where}: unknown shape kind {kind!r}")
        s.validate()
    except KeyError as exc:
        raise SceneError(f"{where}: missing shape field {exc}") from None
    except shp.ShapeError as exc:
        raise SceneError(f"{where}: {exc}") from None
    return s


def _shape_dict(s: shp.Shape) -> dict:
    if isinstance(s, shp.Sphere):
        return {"kind": "sphere", "radius": s.radius}
    if isinstance(s, shp.Capsule):
        return {"kind": "capsule", "half_length": s.half_length, "radius": s.radius}
    if isinstance(s, shp.Box):
        return {"kind": "box", "half_extents": list(s.half_extents.as_tuple())}
    return {"kind": "halfspace", "normal": list(s.normal.as_tuple()), "offset": s.offset}


def _hydro(v, where: str, fluid_density: float) -> HydroParams:
    if not isinstance(v, dict):
        raise SceneError(f"{where}: expected a hydro object")
    h = HydroParams(
        fluid_density=_number(v.get("fluid_density", fluid_density), f"{where}.fluid_density"),
        displaced_volume=_number(v.get("displaced_volume", 0.0), f"{where}.displaced_volume"),
        center_of_buoyancy_offset=_vec3(v.get("center_of_buoyancy_offset", [0, 0, 0]),
                                        f"{where}.center_of_buoyancy_offset"),
        added_mass_diag=_vec3(v.get("added_mass", [0, 0, 0]), f"{where}.added_mass"),
        linear_drag_diag=_vec3(v.get("linear_drag", [0, 0, 0]), f"{where}.linear_drag"),
        quadratic_drag_diag=_vec3(v.get("quadratic_drag", [0, 0, 0]), f"{where}.quadratic_drag"),
        angular_drag_diag=_vec3(v.get("angular_drag", [0, 0, 0]), f"{where}.angular_drag"),
    )
    try:
        h.validate()
    except ValueError as exc:
        raise SceneError(f"{where}: {exc}") from None
    return h


def _hydro_dict(h: HydroParams) -> dict:
    return {
        "fluid_density": h.fluid_density,
        "displaced_volume": h.displaced_volume,
        "center_of_buoyancy_offset": list(h.center_of_buoyancy_offset.as_tuple()),
        "added_mass": list(h.added_mass_diag.as_tuple()),
        "linear_drag": list(h.linear_drag_diag.as_tuple()),
        "quadratic_drag": list(h.quadratic_drag_diag.as_tuple()),
        "angular_drag": list(h.angular_drag_diag.as_tuple()),
    }


@dataclass(frozen=True)
class Trajectory:
    """Scripted pose-vs-time for a kinematic body."""

    kind: str  # "sinusoid" | "linear"
    center: Vec3 = field(default_factory=Vec3)
    amplitude: Vec3 = field(default_factory=Vec3)
    period: float = 1.0
    phase: Vec3 = field(default_factory=Vec3)
    velocity: Vec3 = field(default_factory=Vec3)

    def position_at(self, t: float) -> Vec3:
        if self.kind == "linear":
            return self.center + self.velocity * t
        w = 2.0 * math.pi / self.period
        return Vec3(
            self.center.x + self.amplitude.x * math.sin(w * t + self.phase.x),
            self.center.y + self.amplitude.y * math.sin(w * t + self.phase.y),
            self.center.z + self.amplitude.z * math.sin(w * t + self.phase.z),
        )


def _trajectory(v, where: str) -> Trajectory:
    if not isinstance(v, dict) or "kind" not in v:
        raise SceneError(f"{where}: expected a trajectory object with 'kind'")
    kind = v["kind"]
    if kind == "sinusoid":
        period = _number(v["period"], f"{where}.period")
        if not period > 0.0:
            raise SceneError(f"{where}.period: must be > 0")
        return Trajectory(
            kind="sinusoid",
            center=_vec3(v["center"], f"{where}.center"),
            amplitude=_vec3(v["amplitude"], f"{where}.amplitude"),
            period=period,
            phase=_vec3(v.get("phase", [0, 0, 0]), f"{where}.phase"),
        )
    if kind == "linear":
        return Trajectory(
            kind="linear",
            center=_vec3(v["start"], f"{where}.start"),
            velocity=_vec3(v["velocity"], f"{where}.velocity"),
        )
    raise SceneError(f"{where}: unknown trajectory kind {kind!r}")


def _trajectory_dict(t: Trajectory) -> dict:
    if t.kind == "linear":
        return {"kind": "linear", "start": list(t.center.as_tuple()),
                "velocity": list(t.velocity.as_tuple())}
    return {"kind": "sinusoid", "center": list(t.center.as_tuple()),
            "amplitude": list(t.amplitude.as_tuple()), "period": t.period,
            "phase": list(t.phase.as_tuple())}


@dataclass(frozen=True)
class BodySpec:
    body_id: str
    shape: shp.Shape
    mass: float = 1.0
    inertia: Vec3 | None = None
    pose: Pose = field(default_factory=Pose)
    velocity: Vec3 = field(default_factory=Vec3)
    kinematic: bool = False
    kinematic_until_contact: bool = False
    hydro: HydroParams = field(default_factory=HydroParams)
    restitution: float = 0.1
    friction: float = 0.5
    trajectory: Trajectory | None = None


@dataclass(frozen=True)
class VehicleSpec:
    body_id: str
    shape: shp.Shape
    mass: float
    inertia: Vec3 | None
    pose: Pose
    hydro: HydroParams
    ramp: RampParams
    restitution: float = 0.1
    friction: float = 0.5


@dataclass(frozen=True)
class Scene:
    name: str
    gravity: Vec3
    fluid_density: float
    current: CurrentField
    bodies: tuple[BodySpec, ...]
    vehicle: VehicleSpec | None
    limbs: tuple[LimbConfig, ...]

    def to_dict(self) -> dict:
        d: dict = {"schema_version": SCHEMA_VERSION, "name": self.name,
                   "gravity": list(self.gravity.as_tuple()),
                   "fluid_density": self.fluid_density}
        cur: dict = {"velocity": list(self.current.velocity.as_tuple())}
        if self.current.period > 0.0:
            cur["modulation"] = {"amplitude": list(self.current.amplitude.as_tuple()),
                                 "period": self.current.period}
        d["current"] = cur
        bodies = []
        for b in self.bodies:
            e: dict = {"id": b.body_id, "shape": _shape_dict(b.shape),
                       "mass": b.mass, "pose": _pose_dict(b.pose),
                       "kinematic": b.kinematic,
                       "restitution": b.restitution, "friction": b.friction,
                       "hydro": _hydro_dict(b.hydro)}
            if b.inertia is not None:
                e["inertia"] = list(b.inertia.as_tuple())
            if b.velocity != Vec3.zero():
                e["velocity"] = list(b.velocity.as_tuple())
            if b.kinematic_until_contact:
                e["kinematic_until_contact"] = True
            if b.trajectory is not None:
                e["trajectory"] = _trajectory_dict(b.trajectory)
            bodies.append(e)
        d["bodies"] = bodies
        if self.vehicle is not None:
            v = self.vehicle
            e = {"id": v.body_id, "shape": _shape_dict(v.shape), "mass": v.mass,
                 "pose": _pose_dict(v.pose), "hydro": _hydro_dict(v.hydro),
                 "restitution": v.restitution, "friction": v.friction,
                 "ramp": {"time_constant": v.ramp.time_constant,
                          "max_thrust": list(v.ramp.max_thrust.as_tuple()),
                          "max_yaw_torque": v.ramp.max_yaw_torque}}
            if v.inertia is not None:
                e["inertia"] = list(v.inertia.as_tuple())
            d["vehicle"] = e
        if self.limbs:
            d["limbs"] = [{
                "limb_id": c.limb_id.value,
                "segment_count": c.segment_count,
                "total_length": c.total_length,
                "segment_radius": c.segment_radius,
                "joint_stiffness": c.joint_stiffness,
                "joint_damping": c.joint_damping,
                "tendon_moment_arm": c.tendon_moment_arm,
                "max_tendon_tension": c.max_tendon_tension,
                "max_bend": c.max_bend,
                "base_pose": _pose_dict(c.base_pose),
            } for c in self.limbs]
        return d


def parse_scene(data: dict, name: str = "<scene>") -> Scene:
    if not isinstance(data, dict):
        raise SceneError(f"{name}: scene must be a JSON object")
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SceneError(f"{name}: unknown schema_version {version!r} (expected {SCHEMA_VERSION})")
    gravity = _vec3(data.get("gravity", [0.0, 0.0, -9.81]), f"{name}.gravity")
    fluid_density = _number(data.get("fluid_density", DEFAULT_FLUID_DENSITY),
                            f"{name}.fluid_density")
    if not fluid_density > 0.0:
        raise SceneError(f"{name}.fluid_density: must be > 0")

    current = CurrentField()
    if "current" in data:
        c = data["current"]
        if not isinstance(c, dict):
            raise SceneError(f"{name}.current: expected an object")
        vel = _vec3(c.get("velocity", [0, 0, 0]), f"{name}.current.velocity")
        if "modulation" in c:
            m = c["modulation"]
            period = _number(m.get("period", 0.0), f"{name}.current.modulation.period")
            if not period > 0.0:
                raise SceneError(f"{name}.current.modulation.period: must be > 0")
            current = CurrentField(vel, _vec3(m.get("amplitude", [0, 0, 0]),
                                              f"{name}.current.modulation.amplitude"), period)
        else:
            current = CurrentField(vel)

    bodies: list[BodySpec] = []
    seen: set[str] = set()
    for i, entry in enumerate(data.get("bodies", [])):
        where = f"{name}.bodies[{i}]"
        if not isinstance(entry, dict) or "id" not in entry or "shape" not in entry:
            raise SceneError(f"{where}: body entries need 'id' and 'shape'")
        bid = entry["id"]
        if not isinstance(bid, str) or not bid:
            raise SceneError(f"{where}: id must be a non-empty string")
        where = f"{name}.bodies[{i}] ('{bid}')"
        if bid in seen:
            raise SceneError(f"{where}: duplicate body id '{bid}'")
        seen.add(bid)
        shape = _shape(entry["shape"], f"{where}.shape")
        kinematic = bool(entry.get("kinematic", False))
        mass = _number(entry.get("mass", 1.0), f"{where}.mass")
        if not kinematic and not mass > 0.0:
            raise SceneError(f"{where}: mass must be > 0 for dynamic bodies")
        inertia = _vec3(entry["inertia"], f"{where}.inertia") if "inertia" in entry else None
        traj = _trajectory(entry["trajectory"], f"{where}.trajectory") if "trajectory" in entry else None
        if traj is not None and not kinematic and not entry.get("kinematic_until_contact"):
            raise SceneError(f"{where}: scripted trajectories require a kinematic body")
        bodies.append(BodySpec(
            body_id=bid,
            shape=shape,
            mass=mass,
            inertia=inertia,
            pose=_pose(entry.get("pose", {}), f"{where}.pose"),
            velocity=_vec3(entry.get("velocity", [0, 0, 0]), f"{where}.velocity"),
            kinematic=kinematic or bool(entry.get("kinematic_until_contact", False)),
            kinematic_until_contact=bool(entry.get("kinematic_until_contact", False)),
            hydro=_hydro(entry.get("hydro", {}), f"{where}.hydro", fluid_density),
            restitution=_number(entry.get("restitution", 0.1), f"{where}.restitution"),
            friction=_number(entry.get("friction", 0.5), f"{where}.friction"),
            trajectory=traj,
        ))

    vehicle = None
    if "vehicle" in data:
        entry = data["vehicle"]
        where = f"{name}.vehicle"
        if not isinstance(entry, dict) or "id" not in entry or "shape" not in entry:
            raise SceneError(f"{where}: vehicle needs 'id' and 'shape'")
        bid = entry["id"]
        if bid in seen:
            raise SceneError(f"{where}: duplicate body id '{bid}'")
        seen.add(bid)
        mass = _number(entry.get("mass", 30.0), f"{where}.mass")
        if not mass > 0.0:
            raise SceneError(f"{where}: mass must be > 0")
        ramp = RampParams()
        if "ramp" in entry:
            r = entry["ramp"]
            ramp = RampParams(
                time_constant=_number(r.get("time_constant", 1.5), f"{where}.ramp.time_constant"),
                max_thrust=_vec3(r.get("max_thrust", [40, 25, 25]), f"{where}.ramp.max_thrust"),
                max_yaw_torque=_number(r.get("max_yaw_torque", 10.0), f"{where}.ramp.max_yaw_torque"),
            )
            try:
                ramp.validate()
            except ValueError as exc:
                raise SceneError(f"{where}.ramp: {exc}") from None
        vehicle = VehicleSpec(
            body_id=bid,
            shape=_shape(entry["shape"], f"{where}.shape"),
            mass=mass,
            inertia=_vec3(entry["inertia"], f"{where}.inertia") if "inertia" in entry else None,
            pose=_pose(entry.get("pose", {}), f"{where}.pose"),
            hydro=_hydro(entry.get("hydro", {}), f"{where}.hydro", fluid_density),
            ramp=ramp,
            restitution=_number(entry.get("restitution", 0.1), f"{where}.restitution"),
            friction=_number(entry.get("friction", 0.5), f"{where}.friction"),
        )

    limbs: list[LimbConfig] = []
    if "limbs" in data:
        if vehicle is None:
            raise SceneError(f"{name}.limbs: limbs require a vehicle")
        ids_seen: set[str] = set()
        for i, entry in enumerate(data["limbs"]):
            where = f"{name}.limbs[{i}]"
            if not isinstance(entry, dict) or "limb_id" not in entry:
                raise SceneError(f"{where}: limb entries need 'limb_id'")
            raw = entry["limb_id"]
            try:
                limb_id = LimbId(raw)
            except ValueError:
                raise SceneError(f"{where}: unknown limb_id {raw!r}") from None
            if raw in ids_seen:
                raise SceneError(f"{where}: duplicate limb_id '{raw}'")
            ids_seen.add(raw)
            defaults = LimbConfig()
            cfg = LimbConfig(
                limb_id=limb_id,
                segment_count=int(_number(entry.get("segment_count", defaults.segment_count),
                                          f"{where}.segment_count")),
                total_length=_number(entry.get("total_length", defaults.total_length),
                                     f"{where}.total_length"),
                segment_radius=_number(entry.get("segment_radius", defaults.segment_radius),
                                       f"{where}.segment_radius"),
                joint_stiffness=_number(entry.get("joint_stiffness", defaults.joint_stiffness),
                                        f"{where}.joint_stiffness"),
                joint_damping=_number(entry.get("joint_damping", defaults.joint_damping),
                                      f"{where}.joint_damping"),
                tendon_moment_arm=_number(entry.get("tendon_moment_arm", defaults.tendon_moment_arm),
                                          f"{where}.tendon_moment_arm"),
                max_tendon_tension=_number(entry.get("max_tendon_tension", defaults.max_tendon_tension),
                                           f"{where}.max_tendon_tension"),
                max_bend=_number(entry.get("max_bend", defaults.max_bend), f"{where}.max_bend"),
                base_pose=_pose(entry.get("base_pose", {}), f"{where}.base_pose"),
            )
            try:
                cfg.validate()
            except ValueError as exc:
                raise SceneError(f"{where}: {exc}") from None
            limbs.append(cfg)

    return Scene(
        name=str(data.get("name", name)),
        gravity=gravity,
        fluid_density=fluid_density,
        current=current,
        bodies=tuple(bodies),
        vehicle=vehicle,
        limbs=tuple(limbs),
    )


def load_scene_file(path: str | Path) -> Scene:
    p = Path(path)
    if not p.exists():
        raise SceneError(f"scene file not found: {p}")
    try:
        data = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise SceneError(f"{p}: invalid JSON: {exc}") from None
    return parse_scene(data, name=str(p))


def dump_scene(scene: Scene) -> str:
    return json.dumps(scene.to_dict(), indent=2, sort_keys=True)
