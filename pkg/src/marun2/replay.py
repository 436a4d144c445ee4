"""Run recording and bit-exact replay.

A replay file is JSON-lines: a header (config fingerprint plus the embedded
scene/scenario), one line per consumed command stamped with its consuming
step, and a final line with the end-of-run state hash. Replaying re-executes
the embedded configuration and command stream and must reproduce the recorded
hash bit-exactly on the same build; a fingerprint mismatch (e.g. a different
dt) refuses to run rather than silently diverging.

The seed is carried in the fingerprint for forward compatibility (future
noise models); current physics is seed-independent.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path


class ReplayError(ValueError):
    pass


class ReplayMismatch(RuntimeError):
    """Replayed run did not reproduce the recorded state hash."""


def _canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def config_fingerprint(dt: float, seed: int, scene_dict: dict,
                       scenario_dict: dict | None) -> dict:
    return {
        "schema_version": 1,
        "dt": dt,
        "seed": seed,
        "scene_sha256": hashlib.sha256(_canonical(scene_dict).encode()).hexdigest(),
        "scenario_sha256": (hashlib.sha256(_canonical(scenario_dict).encode()).hexdigest()
                            if scenario_dict is not None else None),
    }


class RecordWriter:
    """Streams a replay file; call finalize() with the end-of-run hash."""

    def __init__(self, path: str | Path, dt: float, seed: int,
                 scene_dict: dict, scenario_dict: dict | None):
        self.path = Path(path)
        self._fh = self.path.open("w")
        self.fingerprint = config_fingerprint(dt, seed, scene_dict, scenario_dict)
        header = {"type": "header", "fingerprint": self.fingerprint,
                  "scene": scene_dict, "scenario": scenario_dict}
        self._fh.write(_canonical(header) + "\n")
        self._count = 0

    def add(self, step: int, topic: str, msg) -> None:
        self._fh.write(_canonical({"step": step, "topic": topic, "msg": msg}) + "\n")
        self._count += 1

    def finalize(self, state_hash: str, steps: int) -> None:
        self._fh.write(_canonical({"type": "final", "state_hash": state_hash,
                                   "steps": steps, "commands": self._count}) + "\n")
        self._fh.close()


@dataclass(frozen=True)
class ReplayFile:
    fingerprint: dict
    scene: dict
    scenario: dict | None
    commands: list[tuple[int, str, dict]]
    state_hash: str
    steps: int


def load_replay(path: str | Path) -> ReplayFile:
    p = Path(path)
    if not p.exists():
        raise ReplayError(f"replay file not found: {p}")
    header = None
    final = None
    commands: list[tuple[int, str, dict]] = []
    for ln, line in enumerate(p.read_text().splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        try:
            entry = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ReplayError(f"{p}:{ln}: invalid JSON: {exc}") from None
        kind = entry.get("type")
        if kind == "header":
            header = entry
        elif kind == "final":
            final = entry
        else:
            commands.append((int(entry["step"]), entry["topic"], entry["msg"]))
    if header is None:
        raise ReplayError(f"{p}: missing header line")
    if final is None:
        raise ReplayError(f"{p}: missing final line (incomplete recording)")
    return ReplayFile(
        fingerprint=header["fingerprint"],
        scene=header["scene"],
        scenario=header.get("scenario"),
        commands=commands,
        state_hash=final["state_hash"],
        steps=int(final["steps"]),
    )


def verify_fingerprint(replay: ReplayFile, dt: float, seed: int) -> None:
    expect = config_fingerprint(dt, seed, replay.scene, replay.scenario)
    got = replay.fingerprint
    for key in ("schema_version", "dt", "seed", "scene_sha256", "scenario_sha256"):
        if expect.get(key) != got.get(key):
            raise ReplayError(
                f"config fingerprint mismatch on '{key}': recorded {got.get(key)!r}, "
                f"requested {expect.get(key)!r}")


class ReplayController:
    """Feeds a recorded command stream back in, keyed by consuming step."""

    def __init__(self, replay: ReplayFile):
        self._by_step: dict[int, list[tuple[str, dict]]] = {}
        for step, topic, msg in replay.commands:
            self._by_step.setdefault(step, []).append((topic, msg))

    def poll(self, step: int) -> list[tuple[str, dict]]:
        return self._by_step.get(step, [])
