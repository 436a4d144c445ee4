"""Fixed-timestep rigid-body world with hydrodynamics and contacts.

The world is stepped by exactly one writer. Body state lives in flat float64
arrays shared with the step kernels; per-body objects are views built on
demand. Stepping is deterministic: identical snapshots and command streams
produce bit-identical state sequences on either kernel backend.

Collision groups: bodies of the robot group (vehicle + limb segments) never
collide with each other; everything else pairs freely. A half-space against a
half-space has no meaningful contact and is rejected loudly at pair
construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import kernels
from ..frames import Pose, Quat, Vec3
from . import shapes as shp
from .contacts import ContactData, ContactEvent, contact_lifecycle
from .hydro import CurrentField, HydroParams

GROUP_SCENE = 0
GROUP_ROBOT = 1

DEFAULT_DT = 0.02  # s, 50 Hz
DEFAULT_GRAVITY = Vec3(0.0, 0.0, -9.81)

# Contact solver tuning. Positional correction is folded into the impulse as a
# Baumgarte bias, so the resting-contact correction shows up in the estimated
# contact force as specified. Restitution below the threshold closing speed is
# treated as zero to keep resting contacts from micro-bouncing.
SOLVER_ITERATIONS = 10
BAUMGARTE_BETA = 0.2
PENETRATION_SLOP = 0.001  # m
# Closing speeds below this bounce as e = 0; must exceed the one-step gravity
# approach speed g*dt or resting contacts never settle.
RESTITUTION_THRESHOLD = 0.2  # m/s


class WorldError(ValueError):
    pass


class UnsupportedShapePair(WorldError):
    pass


class SimulationFault(RuntimeError):
    """Non-finite state detected; carries the offending body and step."""

    def __init__(self, body_id: str, step_index: int):
        super().__init__(f"non-finite state in body '{body_id}' at step {step_index}")
        self.body_id = body_id
        self.step_index = step_index


@dataclass(frozen=True)
class RigidBodyState:
    body_id: str
    pose: Pose
    linear_velocity: Vec3
    angular_velocity: Vec3
    mass: float
    inertia_diag: Vec3
    kinematic: bool


@dataclass
class _BodyDef:
    body_id: str
    shape: shp.Shape
    mass: float
    inertia: Vec3
    pose: Pose
    velocity: Vec3
    angular_velocity: Vec3
    kinematic: bool
    hydro: HydroParams
    restitution: float
    friction: float
    group: int
    collides: bool = True


class World:
    def __init__(self, dt: float = DEFAULT_DT, gravity: Vec3 = DEFAULT_GRAVITY,
                 current: CurrentField | None = None, backend: str | None = None):
        if not dt > 0.0:
            raise WorldError(f"dt must be > 0, got {dt}")
        self.dt = float(dt)
        self.gravity = gravity
        self.current = current if current is not None else CurrentField()
        self.step_index = 0
        self.time = 0.0
        self._defs: list[_BodyDef] = []
        self._index: dict[str, int] = {}
        self._dirty = True
        self._prev_contacts: dict[tuple[str, str], ContactData] = {}
        self._pair_forces: dict[tuple[str, str], float] = {}
        self._kern = kernels.get_backend(backend) if backend else kernels.backend

    # --- construction ----------------------------------------------------

    def add_body(self, body_id: str, shape: shp.Shape, *,
                 mass: float = 1.0,
                 inertia: Vec3 | None = None,
                 pose: Pose = Pose(),
                 velocity: Vec3 = Vec3(),
                 angular_velocity: Vec3 = Vec3(),
                 kinematic: bool = False,
                 hydro: HydroParams | None = None,
                 restitution: float = 0.1,
                 friction: float = 0.5,
                 group: int = GROUP_SCENE,
                 collides: bool = True) -> int:
        if body_id in self._index:
            raise WorldError(f"duplicate body id '{body_id}'")
        shape.validate()
        if not kinematic and not mass > 0.0:
            raise WorldError(f"body '{body_id}': dynamic bodies need mass > 0, got {mass}")
        if not pose.orientation.is_unit(1e-6):
            raise WorldError(f"body '{body_id}': orientation must be unit-norm")
        if not (0.0 <= restitution <= 1.0):
            raise WorldError(f"body '{body_id}': restitution must be in [0, 1]")
        if friction < 0.0:
            raise WorldError(f"body '{body_id}': friction must be >= 0")
        if isinstance(shape, shp.HalfSpace) and not kinematic:
            raise WorldError(f"body '{body_id}': half-spaces must be kinematic")
        h = hydro if hydro is not None else HydroParams()
        h.validate()
        if inertia is None:
            inertia = shp.solid_inertia(shape, mass if mass > 0.0 else 1.0)
        if not (inertia.x > 0.0 and inertia.y > 0.0 and inertia.z > 0.0):
            raise WorldError(f"body '{body_id}': inertia components must be > 0")
        idx = len(self._defs)
        self._defs.append(_BodyDef(
            body_id, shape, float(mass), inertia, pose,
            velocity, angular_velocity, bool(kinematic), h,
            float(restitution), float(friction), int(group), bool(collides)))
        self._index[body_id] = idx
        self._dirty = True
        return idx

    def _build_arrays(self) -> None:
        n = len(self._defs)
        self.ids = [d.body_id for d in self._defs]
        self.pos = np.zeros((n, 3))
        self.quat = np.zeros((n, 4))
        self.vel = np.zeros((n, 3))
        self.angvel = np.zeros((n, 3))
        self.mass = np.zeros(n)
        self.inertia = np.zeros((n, 3))
        self.kinematic = np.zeros(n, dtype=np.uint8)
        self.restitution = np.zeros(n)
        self.friction = np.zeros(n)
        self.shape_type = np.zeros(n, dtype=np.int32)
        self.shape_params = np.zeros((n, 4))
        self.fluid_density = np.zeros(n)
        self.displaced_volume = np.zeros(n)
        self.cob_offset = np.zeros((n, 3))
        self.added_mass = np.zeros((n, 3))
        self.lin_drag = np.zeros((n, 3))
        self.quad_drag = np.zeros((n, 3))
        self.ang_drag = np.zeros((n, 3))
        self.ext_force = np.zeros((n, 3))
        self.ext_torque = np.zeros((n, 3))
        self._force = np.zeros((n, 3))
        self._torque = np.zeros((n, 3))
        self._aabb = np.zeros((n, 6))
        for i, d in enumerate(self._defs):
            self.pos[i] = d.pose.position.as_tuple()
            self.quat[i] = d.pose.orientation.as_tuple()
            self.vel[i] = d.velocity.as_tuple()
            self.angvel[i] = d.angular_velocity.as_tuple()
            self.mass[i] = d.mass
            self.inertia[i] = d.inertia.as_tuple()
            self.kinematic[i] = 1 if d.kinematic else 0
            self.restitution[i] = d.restitution
            self.friction[i] = d.friction
            self.shape_type[i] = shp.shape_code(d.shape)
            self.shape_params[i] = shp.pack_params(d.shape)
            self.fluid_density[i] = d.hydro.fluid_density
            self.displaced_volume[i] = d.hydro.displaced_volume
            self.cob_offset[i] = d.hydro.center_of_buoyancy_offset.as_tuple()
            self.added_mass[i] = d.hydro.added_mass_diag.as_tuple()
            self.lin_drag[i] = d.hydro.linear_drag_diag.as_tuple()
            self.quad_drag[i] = d.hydro.quadratic_drag_diag.as_tuple()
            self.ang_drag[i] = d.hydro.angular_drag_diag.as_tuple()
        self._build_pairs()
        m = self.pairs.shape[0]
        self._c_a = np.zeros(m, dtype=np.int32)
        self._c_b = np.zeros(m, dtype=np.int32)
        self._c_point = np.zeros((m, 3))
        self._c_normal = np.zeros((m, 3))
        self._c_depth = np.zeros(m)
        self._c_impulse = np.zeros(m)
        self._dirty = False

    def _build_pairs(self) -> None:
        pairs = []
        for i, a in enumerate(self._defs):
            for j in range(i + 1, len(self._defs)):
                b = self._defs[j]
                if not (a.collides and b.collides):
                    continue
                if a.group == GROUP_ROBOT and b.group == GROUP_ROBOT:
                    continue
                if isinstance(a.shape, shp.HalfSpace) and isinstance(b.shape, shp.HalfSpace):
                    raise UnsupportedShapePair(
                        f"no contact support for halfspace vs halfspace "
                        f"('{a.body_id}' vs '{b.body_id}')")
                pairs.append((i, j))
        self.pairs = np.array(pairs, dtype=np.int32).reshape(len(pairs), 2)

    # --- accessors --------------------------------------------------------

    def _ensure(self) -> None:
        if self._dirty:
            self._build_arrays()

    def index_of(self, body_id: str) -> int:
        try:
            return self._index[body_id]
        except KeyError:
            raise WorldError(f"unknown body id '{body_id}'") from None

    @property
    def body_ids(self) -> list[str]:
        return [d.body_id for d in self._defs]

    def body_state(self, body_id: str) -> RigidBodyState:
        self._ensure()
        i = self.index_of(body_id)
        return RigidBodyState(
            body_id=body_id,
            pose=Pose(Vec3(*self.pos[i]), Quat(*self.quat[i])),
            linear_velocity=Vec3(*self.vel[i]),
            angular_velocity=Vec3(*self.angvel[i]),
            mass=float(self.mass[i]),
            inertia_diag=Vec3(*self.inertia[i]),
            kinematic=bool(self.kinematic[i]),
        )

    def set_pose(self, body_id: str, pose: Pose) -> None:
        self._ensure()
        i = self.index_of(body_id)
        self.pos[i] = pose.position.as_tuple()
        self.quat[i] = pose.orientation.as_tuple()

    def set_velocity(self, body_id: str, velocity: Vec3,
                     angular_velocity: Vec3 | None = None) -> None:
        self._ensure()
        i = self.index_of(body_id)
        self.vel[i] = velocity.as_tuple()
        if angular_velocity is not None:
            self.angvel[i] = angular_velocity.as_tuple()

    def set_kinematic(self, body_id: str, kinematic: bool) -> None:
        self._ensure()
        self.kinematic[self.index_of(body_id)] = 1 if kinematic else 0

    def is_kinematic(self, body_id: str) -> bool:
        self._ensure()
        return bool(self.kinematic[self.index_of(body_id)])

    def apply_force(self, body_id: str, force: Vec3, torque: Vec3 = Vec3()) -> None:
        """Accumulate a world-frame wrench for the next step; cleared after."""
        self._ensure()
        i = self.index_of(body_id)
        self.ext_force[i, 0] += force.x
        self.ext_force[i, 1] += force.y
        self.ext_force[i, 2] += force.z
        self.ext_torque[i, 0] += torque.x
        self.ext_torque[i, 1] += torque.y
        self.ext_torque[i, 2] += torque.z

    def shape_of(self, body_id: str) -> shp.Shape:
        return self._defs[self.index_of(body_id)].shape

    def hydro_of(self, body_id: str) -> HydroParams:
        return self._defs[self.index_of(body_id)].hydro

    # --- queries ----------------------------------------------------------

    def detect_contacts(self) -> list[tuple[str, str, Vec3, Vec3, float]]:
        """Current intersecting pairs as (id_a, id_b, point, normal, penetration)."""
        self._ensure()
        n = self._run_detect()
        out = []
        for k in range(n):
            out.append((self.ids[int(self._c_a[k])], self.ids[int(self._c_b[k])],
                        Vec3(*self._c_point[k]), Vec3(*self._c_normal[k]),
                        float(self._c_depth[k])))
        return out

    def surface_distance(self, body_id: str, point: Vec3) -> float:
        """Signed distance from a world point to a body's surface (< 0 inside)."""
        self._ensure()
        d = self._defs[self.index_of(body_id)]
        st = self.body_state(body_id)
        local = st.pose.orientation.rotate_inverse(point - st.pose.position)
        s = d.shape
        if isinstance(s, shp.Sphere):
            return local.norm() - s.radius
        if isinstance(s, shp.Capsule):
            z = min(max(local.z, -s.half_length), s.half_length)
            return (local - Vec3(0.0, 0.0, z)).norm() - s.radius
        if isinstance(s, shp.Box):
            h = s.half_extents
            qx = max(abs(local.x) - h.x, 0.0)
            qy = max(abs(local.y) - h.y, 0.0)
            qz = max(abs(local.z) - h.z, 0.0)
            outside = math.sqrt(qx * qx + qy * qy + qz * qz)
            inside = min(h.x - abs(local.x), h.y - abs(local.y), h.z - abs(local.z))
            return outside if outside > 0.0 else -inside
        # Half-space: distance above the plane.
        n = s.normal.normalized()
        return local.dot(n) - s.offset

    def contact_force(self, body_a: str, body_b: str) -> float:
        """Estimated normal force (N) for a pair; 0 when not in contact."""
        f = self._pair_forces.get((body_a, body_b))
        if f is None:
            f = self._pair_forces.get((body_b, body_a), 0.0)
        return f

    def _run_detect(self) -> int:
        n = self._kern.detect_contacts(
            self.pos, self.quat, self.shape_type, self.shape_params, self.pairs,
            self._aabb, self._c_a, self._c_b, self._c_point, self._c_normal,
            self._c_depth)
        if n < 0:
            p = -n - 1
            i, j = int(self.pairs[p, 0]), int(self.pairs[p, 1])
            raise UnsupportedShapePair(
                f"no contact support for {shp.shape_name(int(self.shape_type[i]))} vs "
                f"{shp.shape_name(int(self.shape_type[j]))} "
                f"('{self.ids[i]}' vs '{self.ids[j]}')")
        return n

    # --- stepping ---------------------------------------------------------

    def step(self) -> list[ContactEvent]:
        """Advance one fixed step; returns this step's lifecycle events."""
        self._ensure()
        k = self._kern
        current = self.current.at(self.time)
        cur = np.array(current.as_tuple(), dtype=np.float64)
        grav = np.array(self.gravity.as_tuple(), dtype=np.float64)

        k.eval_forces(self.pos, self.quat, self.vel, self.angvel, self.mass,
                      self.kinematic, self.fluid_density, self.displaced_volume,
                      self.cob_offset, grav, self.ext_force, self.ext_torque,
                      self._force, self._torque)
        k.integrate_velocities(self.vel, self.angvel, self._force, self._torque,
                               self.quat, self.mass, self.added_mass, self.inertia,
                               self.kinematic, self.lin_drag, self.quad_drag,
                               self.ang_drag, cur, self.dt)
        ncon = self._run_detect()
        k.resolve_contacts(self.pos, self.quat, self.vel, self.angvel, self.mass,
                           self.inertia, self.kinematic, self.restitution,
                           self.friction, self._c_a, self._c_b, self._c_point,
                           self._c_normal, self._c_depth, ncon,
                           self.dt, SOLVER_ITERATIONS, BAUMGARTE_BETA,
                           PENETRATION_SLOP, RESTITUTION_THRESHOLD,
                           self._c_impulse)
        k.integrate_poses(self.pos, self.quat, self.vel, self.angvel,
                          self.kinematic, self.dt)

        self.ext_force[:] = 0.0
        self.ext_torque[:] = 0.0
        self._check_finite()

        current_contacts: dict[tuple[str, str], ContactData] = {}
        for c in range(ncon):
            ida = self.ids[int(self._c_a[c])]
            idb = self.ids[int(self._c_b[c])]
            current_contacts[(ida, idb)] = ContactData(
                point=Vec3(*self._c_point[c]),
                normal=Vec3(*self._c_normal[c]),
                penetration=float(self._c_depth[c]),
                impulse=float(self._c_impulse[c]),
            )
        events = contact_lifecycle(self._prev_contacts, current_contacts, self.dt)
        self._prev_contacts = current_contacts
        self._pair_forces = {key: d.impulse / self.dt for key, d in current_contacts.items()}

        self.step_index += 1
        self.time = self.step_index * self.dt
        return events

    def _check_finite(self) -> None:
        for arr in (self.pos, self.quat, self.vel, self.angvel):
            finite = np.isfinite(arr)
            if not finite.all():
                bad = int(np.nonzero(~finite.all(axis=1))[0][0])
                raise SimulationFault(self.ids[bad], self.step_index)

    # --- snapshot / hashing ------------------------------------------------

    def state_bytes(self) -> bytes:
        """Canonical byte serialization of the dynamic state (for hashing)."""
        self._ensure()
        parts = [np.int64(self.step_index).tobytes(), np.float64(self.time).tobytes()]
        for arr in (self.pos, self.quat, self.vel, self.angvel):
            parts.append(np.ascontiguousarray(arr).tobytes())
        parts.append(self.kinematic.tobytes())
        return b"".join(parts)

    def copy_state_arrays(self) -> dict[str, np.ndarray]:
        self._ensure()
        return {
            "pos": self.pos.copy(),
            "quat": self.quat.copy(),
            "vel": self.vel.copy(),
            "angvel": self.angvel.copy(),
        }

    def kinetic_energy(self, body_id: str) -> float:
        self._ensure()
        i = self.index_of(body_id)
        v2 = float(self.vel[i, 0] ** 2 + self.vel[i, 1] ** 2 + self.vel[i, 2] ** 2)
        q = Quat(*self.quat[i])
        wb = q.rotate_inverse(Vec3(*self.angvel[i]))
        rot = (self.inertia[i, 0] * wb.x ** 2 + self.inertia[i, 1] * wb.y ** 2
               + self.inertia[i, 2] * wb.z ** 2)
        return 0.5 * float(self.mass[i]) * v2 + 0.5 * float(rot)

    def momentum(self) -> Vec3:
        """Total linear momentum of the dynamic bodies."""
        self._ensure()
        px = py = pz = 0.0
        for i in range(len(self._defs)):
            if self.kinematic[i]:
                continue
            m = float(self.mass[i])
            px += m * float(self.vel[i, 0])
            py += m * float(self.vel[i, 1])
            pz += m * float(self.vel[i, 2])
        return Vec3(px, py, pz)
