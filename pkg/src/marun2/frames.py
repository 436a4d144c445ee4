"""Vectors, quaternions, poses, and the sim/render frame mapping.

Physics and every internal computation run in SIM_FRAME: right-handed, Z-up,
X-forward. Protocol clients render in RENDER_FRAME: left-handed, Y-up,
Z-forward (the usual game-engine convention). The axis mapping is pinned here
once,

    (x, y, z)_sim  ->  (-y, z, x)_render

and is applied only by the bridge message builders; nothing else converts.

Quaternions are Hamilton, scalar-first (w, x, y, z). Rotation conjugation by
the (improper, det = -1) axis map sends a rotation about axis u by angle t to
a rotation about M(u) by -t, which in components is (w, x, y, z) ->
(w, y, -z, -x). Angular velocities are pseudovectors and pick up the same
extra sign: omega -> (oy, -oz, -ox).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

UNIT_TOL = 1e-9


class FrameError(ValueError):
    """Non-finite or non-unit input at a frame-conversion boundary."""


@dataclass(frozen=True)
class Vec3:
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    def __add__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x + other.x, self.y + other.y, self.z + other.z)

    def __sub__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x - other.x, self.y - other.y, self.z - other.z)

    def __neg__(self) -> "Vec3":
        return Vec3(-self.x, -self.y, -self.z)

    def __mul__(self, s: float) -> "Vec3":
        return Vec3(self.x * s, self.y * s, self.z * s)

    __rmul__ = __mul__

    def dot(self, other: "Vec3") -> float:
        return self.x * other.x + self.y * other.y + self.z * other.z

    def cross(self, other: "Vec3") -> "Vec3":
        return Vec3(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )

    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)

    def normalized(self) -> "Vec3":
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalize a zero vector")
        return Vec3(self.x / n, self.y / n, self.z / n)

    def is_finite(self) -> bool:
        return math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.z)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)

    @staticmethod
    def zero() -> "Vec3":
        return Vec3(0.0, 0.0, 0.0)


@dataclass(frozen=True)
class Quat:
    """Unit quaternion (w, x, y, z), Hamilton convention."""

    w: float = 1.0
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    @staticmethod
    def identity() -> "Quat":
        return Quat(1.0, 0.0, 0.0, 0.0)

    @staticmethod
    def from_axis_angle(axis: Vec3, angle: float) -> "Quat":
        n = axis.norm()
        if n == 0.0:
            raise ValueError("rotation axis must be nonzero")
        half = 0.5 * angle
        s = math.sin(half) / n
        return Quat(math.cos(half), axis.x * s, axis.y * s, axis.z * s)

    def norm(self) -> float:
        return math.sqrt(self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z)

    def is_unit(self, tol: float = UNIT_TOL) -> bool:
        return abs(self.norm() - 1.0) <= tol

    def normalized(self) -> "Quat":
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalize a zero quaternion")
        return Quat(self.w / n, self.x / n, self.y / n, self.z / n)

    def conjugate(self) -> "Quat":
        return Quat(self.w, -self.x, -self.y, -self.z)

    def __mul__(self, other: "Quat") -> "Quat":
        w1, x1, y1, z1 = self.w, self.x, self.y, self.z
        w2, x2, y2, z2 = other.w, other.x, other.y, other.z
        return Quat(
            w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
            w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
            w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
            w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
        )

    def rotate(self, v: Vec3) -> Vec3:
        # v' = v + w*t + qv x t with t = 2 qv x v (avoids two full products)
        qv = Vec3(self.x, self.y, self.z)
        t = qv.cross(v) * 2.0
        return v + t * self.w + qv.cross(t)

    def rotate_inverse(self, v: Vec3) -> Vec3:
        return self.conjugate().rotate(v)

    def angle_to(self, other: "Quat") -> float:
        """Absolute rotation angle between two unit quaternions."""
        d = abs(self.w * other.w + self.x * other.x + self.y * other.y + self.z * other.z)
        return 2.0 * math.acos(min(1.0, d))

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.w, self.x, self.y, self.z)


@dataclass(frozen=True)
class Pose:
    position: Vec3 = Vec3()
    orientation: Quat = Quat()

    @staticmethod
    def identity() -> "Pose":
        return Pose(Vec3.zero(), Quat.identity())

    def transform_point(self, p: Vec3) -> Vec3:
        return self.position + self.orientation.rotate(p)

    def inverse(self) -> "Pose":
        qi = self.orientation.conjugate()
        return Pose(qi.rotate(-self.position), qi)


def pose_compose(a: Pose, b: Pose) -> Pose:
    """Rigid transform composition a∘b (apply b, then a)."""
    q = (a.orientation * b.orientation).normalized()
    return Pose(a.position + a.orientation.rotate(b.position), q)


def quat_from_basis(ex: Vec3, ey: Vec3, ez: Vec3) -> Quat:
    """Quaternion of the rotation whose columns are the given orthonormal basis."""
    m00, m01, m02 = ex.x, ey.x, ez.x
    m10, m11, m12 = ex.y, ey.y, ez.y
    m20, m21, m22 = ex.z, ey.z, ez.z
    tr = m00 + m11 + m22
    if tr > 0.0:
        s = math.sqrt(tr + 1.0) * 2.0
        q = Quat(0.25 * s, (m21 - m12) / s, (m02 - m20) / s, (m10 - m01) / s)
    elif m00 > m11 and m00 > m22:
        s = math.sqrt(1.0 + m00 - m11 - m22) * 2.0
        q = Quat((m21 - m12) / s, 0.25 * s, (m01 + m10) / s, (m02 + m20) / s)
    elif m11 > m22:
        s = math.sqrt(1.0 + m11 - m00 - m22) * 2.0
        q = Quat((m02 - m20) / s, (m01 + m10) / s, 0.25 * s, (m12 + m21) / s)
    else:
        s = math.sqrt(1.0 + m22 - m00 - m11) * 2.0
        q = Quat((m10 - m01) / s, (m02 + m20) / s, (m12 + m21) / s, 0.25 * s)
    return q.normalized()


# --- sim <-> render conversion (the bridge boundary) ---------------------

def _require_finite(v: Vec3) -> None:
    if not v.is_finite():
        raise FrameError(f"non-finite vector {v}")


def _require_unit(q: Quat) -> None:
    if not (math.isfinite(q.w) and math.isfinite(q.x) and math.isfinite(q.y) and math.isfinite(q.z)):
        raise FrameError(f"non-finite quaternion {q}")
    if not q.is_unit(1e-6):
        raise FrameError(f"non-unit quaternion (norm {q.norm():.9f})")


def sim_to_render_position(p: Vec3) -> Vec3:
    _require_finite(p)
    return Vec3(-p.y, p.z, p.x)


def render_to_sim_position(p: Vec3) -> Vec3:
    _require_finite(p)
    return Vec3(p.z, -p.x, p.y)


# Linear velocities, forces and other polar vectors convert like positions.
sim_to_render_vector = sim_to_render_position
render_to_sim_vector = render_to_sim_position


def sim_to_render_orientation(q: Quat) -> Quat:
    _require_unit(q)
    return Quat(q.w, q.y, -q.z, -q.x)


def render_to_sim_orientation(q: Quat) -> Quat:
    _require_unit(q)
    return Quat(q.w, -q.z, q.x, -q.y)


def sim_to_render_angular(v: Vec3) -> Vec3:
    _require_finite(v)
    return Vec3(v.y, -v.z, -v.x)


def render_to_sim_angular(v: Vec3) -> Vec3:
    _require_finite(v)
    return Vec3(-v.z, v.x, -v.y)


def sim_to_render_pose(p: Pose) -> Pose:
    return Pose(sim_to_render_position(p.position), sim_to_render_orientation(p.orientation))


def render_to_sim_pose(p: Pose) -> Pose:
    return Pose(render_to_sim_position(p.position), render_to_sim_orientation(p.orientation))
