from .contacts import ContactData, ContactEvent, ContactPhase, contact_lifecycle
from .hydro import CurrentField, HydroParams, apply_added_mass, buoyancy_force, drag_force
from .shapes import Box, Capsule, HalfSpace, Shape, ShapeError, Sphere
from .world import (
    DEFAULT_DT,
    DEFAULT_GRAVITY,
    GROUP_ROBOT,
    GROUP_SCENE,
    RigidBodyState,
    SimulationFault,
    UnsupportedShapePair,
    World,
    WorldError,
)

__all__ = [
    "Box", "Capsule", "ContactData", "ContactEvent", "ContactPhase",
    "CurrentField", "DEFAULT_DT", "DEFAULT_GRAVITY", "GROUP_ROBOT",
    "GROUP_SCENE", "HalfSpace", "HydroParams", "RigidBodyState", "Shape",
    "ShapeError", "SimulationFault", "Sphere", "UnsupportedShapePair",
    "World", "WorldError", "apply_added_mass", "buoyancy_force",
    "contact_lifecycle", "drag_force",
]
