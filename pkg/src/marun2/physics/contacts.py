"""Contact events and the Enter/Stay/Exit lifecycle.

Each contact pair follows the grammar `Enter Stay* Exit` across steps: a pair
that intersects for the first time emits Enter, intersecting again emits Stay,
and the step after it stops intersecting emits Exit with force tracking reset
to zero.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Mapping

from ..frames import Vec3

PairKey = tuple[str, str]


class ContactPhase(enum.Enum):
    ENTER = "enter"
    STAY = "stay"
    EXIT = "exit"


@dataclass(frozen=True)
class ContactData:
    """Geometry and solver output for one pair at one step."""

    point: Vec3
    normal: Vec3  # unit, from body_a to body_b
    penetration: float
    impulse: float  # accumulated normal impulse this step, N*s


@dataclass(frozen=True)
class ContactEvent:
    phase: ContactPhase
    body_a: str
    body_b: str
    point: Vec3
    normal: Vec3
    penetration: float
    impulse: float  # N*s; zero on Exit
    estimated_force: float  # N = impulse/dt; zero on Exit


def contact_lifecycle(previous: Mapping[PairKey, ContactData],
                      current: Mapping[PairKey, ContactData],
                      dt: float) -> list[ContactEvent]:
    """Diff two consecutive steps' contact sets into lifecycle events.

    Exit events reuse the pair's last-seen geometry and carry zero impulse and
    zero force. Events are ordered by pair key for determinism.
    """
    events: list[ContactEvent] = []
    keys = sorted(set(previous) | set(current))
    for key in keys:
        now = current.get(key)
        before = previous.get(key)
        if now is not None:
            phase = ContactPhase.STAY if before is not None else ContactPhase.ENTER
            events.append(ContactEvent(
                phase=phase,
                body_a=key[0],
                body_b=key[1],
                point=now.point,
                normal=now.normal,
                penetration=now.penetration,
                impulse=now.impulse,
                estimated_force=now.impulse / dt,
            ))
        elif before is not None:
            events.append(ContactEvent(
                phase=ContactPhase.EXIT,
                body_a=key[0],
                body_b=key[1],
                point=before.point,
                normal=before.normal,
                penetration=0.0,
                impulse=0.0,
                estimated_force=0.0,
            ))
    return events
