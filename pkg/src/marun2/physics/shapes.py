"""Analytic collider primitives.

Narrow-phase collision works on four primitives: sphere, capsule (axis along
the body-frame Z), box, and half-space (infinite solid below a plane). Shape
data is packed into a flat (type, params[4]) layout shared with the step
kernels.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..frames import Vec3

SPHERE = 0
CAPSULE = 1
BOX = 2
HALFSPACE = 3

_NAMES = {SPHERE: "sphere", CAPSULE: "capsule", BOX: "box", HALFSPACE: "halfspace"}


class ShapeError(ValueError):
    pass


@dataclass(frozen=True)
class Sphere:
    radius: float

    def validate(self) -> None:
        if not self.radius > 0.0:
            raise ShapeError(f"sphere radius must be > 0, got {self.radius}")


@dataclass(frozen=True)
class Capsule:
    """Capsule along body-frame Z; total length 2*half_length + 2*radius."""

    half_length: float
    radius: float

    def validate(self) -> None:
        if not self.half_length > 0.0 or not self.radius > 0.0:
            raise ShapeError(f"capsule dimensions must be > 0, got {self}")


@dataclass(frozen=True)
class Box:
    half_extents: Vec3

    def validate(self) -> None:
        h = self.half_extents
        if not (h.x > 0.0 and h.y > 0.0 and h.z > 0.0):
            raise ShapeError(f"box half extents must be > 0, got {h}")


@dataclass(frozen=True)
class HalfSpace:
    """Solid region below the plane through pose.position + normal*offset."""

    normal: Vec3 = Vec3(0.0, 0.0, 1.0)
    offset: float = 0.0

    def validate(self) -> None:
        if self.normal.norm() == 0.0:
            raise ShapeError("halfspace normal must be nonzero")


Shape = Sphere | Capsule | Box | HalfSpace


def shape_code(shape: Shape) -> int:
    if isinstance(shape, Sphere):
        return SPHERE
    if isinstance(shape, Capsule):
        return CAPSULE
    if isinstance(shape, Box):
        return BOX
    if isinstance(shape, HalfSpace):
        return HALFSPACE
    raise ShapeError(f"unknown shape {shape!r}")


def shape_name(code: int) -> str:
    return _NAMES.get(code, f"shape#{code}")


def pack_params(shape: Shape) -> tuple[float, float, float, float]:
    shape.validate()
    if isinstance(shape, Sphere):
        return (shape.radius, 0.0, 0.0, 0.0)
    if isinstance(shape, Capsule):
        return (shape.half_length, shape.radius, 0.0, 0.0)
    if isinstance(shape, Box):
        h = shape.half_extents
        return (h.x, h.y, h.z, 0.0)
    n = shape.normal.normalized()
    return (n.x, n.y, n.z, shape.offset)


def solid_inertia(shape: Shape, mass: float) -> Vec3:
    """Diagonal inertia of the uniform solid, in body frame."""
    if isinstance(shape, Sphere):
        i = 0.4 * mass * shape.radius**2
        return Vec3(i, i, i)
    if isinstance(shape, Box):
        h = shape.half_extents
        return Vec3(
            mass * (h.y**2 + h.z**2) / 3.0,
            mass * (h.x**2 + h.z**2) / 3.0,
            mass * (h.x**2 + h.y**2) / 3.0,
        )
    if isinstance(shape, Capsule):
        # Cylinder of length 2h plus two hemispherical caps, uniform density.
        r, h = shape.radius, shape.half_length
        l_cyl = 2.0 * h
        v_cyl = 3.141592653589793 * r * r * l_cyl
        v_cap = (4.0 / 3.0) * 3.141592653589793 * r**3
        m_cyl = mass * v_cyl / (v_cyl + v_cap)
        m_cap = mass - m_cyl
        iz = 0.5 * m_cyl * r * r + 0.4 * m_cap * r * r
        ix = (
            m_cyl * (l_cyl * l_cyl / 12.0 + r * r / 4.0)
            + m_cap * (0.4 * r * r + h * h + 0.75 * h * r)
        )
        return Vec3(ix, ix, iz)
    # Half-spaces are always kinematic; inertia is a placeholder.
    return Vec3(1.0, 1.0, 1.0)


def shape_volume(shape: Shape) -> float:
    pi = 3.141592653589793
    if isinstance(shape, Sphere):
        return (4.0 / 3.0) * pi * shape.radius**3
    if isinstance(shape, Capsule):
        return pi * shape.radius**2 * (2.0 * shape.half_length) + (4.0 / 3.0) * pi * shape.radius**3
    if isinstance(shape, Box):
        h = shape.half_extents
        return 8.0 * h.x * h.y * h.z
    return 0.0
