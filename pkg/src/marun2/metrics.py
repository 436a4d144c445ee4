"""Scenario metrics: trajectory samples, path length, CSV/JSON export.

Path length is the polyline length of the recorded tip trajectory; the two
summary metrics (path length, time to completion) are the quantitative
yardsticks of the benchmark tasks. Exports round-trip exactly: floats are
serialized at full precision in both formats.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .frames import Vec3

Sample = tuple[float, float, float, float]  # (t, x, y, z)


class MetricsError(ValueError):
    pass


def path_length(samples: Sequence) -> float:
    """Sum of straight-line distances between consecutive samples.

    Accepts (t, Vec3) pairs, bare Vec3s, or (t, x, y, z) tuples. A single
    sample has zero length; an empty list is rejected.
    """
    if len(samples) == 0:
        raise MetricsError("path_length needs at least one sample")
    pts: list[tuple[float, float, float]] = []
    for s in samples:
        if isinstance(s, Vec3):
            pts.append(s.as_tuple())
        elif len(s) == 2 and isinstance(s[1], Vec3):
            pts.append(s[1].as_tuple())
        elif len(s) == 4:
            pts.append((float(s[1]), float(s[2]), float(s[3])))
        else:
            raise MetricsError(f"unrecognized sample {s!r}")
    total = 0.0
    for i in range(1, len(pts)):
        dx = pts[i][0] - pts[i - 1][0]
        dy = pts[i][1] - pts[i - 1][1]
        dz = pts[i][2] - pts[i - 1][2]
        total += math.sqrt(dx * dx + dy * dy + dz * dz)
    return total


@dataclass
class MetricsRecord:
    scenario_kind: str
    dt: float
    time_limit: float
    success: bool = False
    aborted: bool = False
    time_to_completion: float = 0.0
    path_length: float = 0.0
    per_limb_path_length: dict[str, float] = field(default_factory=dict)
    impact_displacement: float | None = None
    samples: dict[str, list[Sample]] = field(default_factory=dict)
    command_log_ref: str | None = None

    def to_dict(self) -> dict:
        return {
            "scenario_kind": self.scenario_kind,
            "dt": self.dt,
            "time_limit": self.time_limit,
            "success": self.success,
            "aborted": self.aborted,
            "time_to_completion": self.time_to_completion,
            "path_length": self.path_length,
            "per_limb_path_length": self.per_limb_path_length,
            "impact_displacement": self.impact_displacement,
            "samples": {limb: [list(s) for s in rows] for limb, rows in self.samples.items()},
            "command_log_ref": self.command_log_ref,
        }

    @staticmethod
    def from_dict(d: dict) -> "MetricsRecord":
        return MetricsRecord(
            scenario_kind=d["scenario_kind"],
            dt=d["dt"],
            time_limit=d["time_limit"],
            success=d["success"],
            aborted=d["aborted"],
            time_to_completion=d["time_to_completion"],
            path_length=d["path_length"],
            per_limb_path_length=dict(d["per_limb_path_length"]),
            impact_displacement=d["impact_displacement"],
            samples={limb: [tuple(s) for s in rows] for limb, rows in d["samples"].items()},
            command_log_ref=d["command_log_ref"],
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _fmt(x: float) -> str:
    return repr(float(x))


def export_metrics(record: MetricsRecord, path: str | Path, fmt: str = "json") -> None:
    p = Path(path)
    if fmt == "json":
        p.write_text(record.to_json())
        return
    if fmt != "csv":
        raise MetricsError(f"unknown metrics format {fmt!r}")
    lines = [
        "# marun2 metrics v1",
        f"# scenario_kind,{record.scenario_kind}",
        f"# dt,{_fmt(record.dt)}",
        f"# time_limit,{_fmt(record.time_limit)}",
        f"# success,{'true' if record.success else 'false'}",
        f"# aborted,{'true' if record.aborted else 'false'}",
        f"# time_to_completion,{_fmt(record.time_to_completion)}",
        f"# path_length,{_fmt(record.path_length)}",
        f"# impact_displacement,{'' if record.impact_displacement is None else _fmt(record.impact_displacement)}",
        f"# command_log_ref,{'' if record.command_log_ref is None else record.command_log_ref}",
    ]
    for limb in sorted(record.per_limb_path_length):
        lines.append(f"# per_limb,{limb},{_fmt(record.per_limb_path_length[limb])}")
    lines.append("t,limb,x,y,z")
    for limb in sorted(record.samples):
        for (t, x, y, z) in record.samples[limb]:
            lines.append(f"{_fmt(t)},{limb},{_fmt(x)},{_fmt(y)},{_fmt(z)}")
    p.write_text("\n".join(lines) + "\n")


def import_metrics(path: str | Path, fmt: str = "json") -> MetricsRecord:
    p = Path(path)
    if fmt == "json":
        return MetricsRecord.from_dict(json.loads(p.read_text()))
    if fmt != "csv":
        raise MetricsError(f"unknown metrics format {fmt!r}")
    meta: dict[str, str] = {}
    per_limb: dict[str, float] = {}
    samples: dict[str, list[Sample]] = {}
    header_seen = False
    for line in p.read_text().splitlines():
        if not line:
            continue
        if line.startswith("# "):
            body = line[2:]
            if body == "marun2 metrics v1":
                continue
            key, _, value = body.partition(",")
            if key == "per_limb":
                limb, _, v = value.partition(",")
                per_limb[limb] = float(v)
            else:
                meta[key] = value
            continue
        if line == "t,limb,x,y,z":
            header_seen = True
            continue
        if not header_seen:
            raise MetricsError(f"{p}: malformed metrics CSV")
        t, limb, x, y, z = line.split(",")
        samples.setdefault(limb, []).append((float(t), float(x), float(y), float(z)))
    return MetricsRecord(
        scenario_kind=meta["scenario_kind"],
        dt=float(meta["dt"]),
        time_limit=float(meta["time_limit"]),
        success=meta["success"] == "true",
        aborted=meta["aborted"] == "true",
        time_to_completion=float(meta["time_to_completion"]),
        path_length=float(meta["path_length"]),
        per_limb_path_length=per_limb,
        impact_displacement=None if meta["impact_displacement"] == "" else float(meta["impact_displacement"]),
        samples=samples,
        command_log_ref=None if meta["command_log_ref"] == "" else meta["command_log_ref"],
    )
