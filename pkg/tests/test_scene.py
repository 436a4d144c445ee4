"""Scene file loading, validation, and round-trip serialization."""

import json
from pathlib import Path

import pytest

from marun2.config import default_scene_dict
from marun2.physics import HalfSpace
from marun2.scene import SceneError, dump_scene, load_scene_file, parse_scene
from marun2.sim import SimSession

FIXTURES = Path(__file__).parent.parent / "scenarios"


def minimal_scene(**extra) -> dict:
    d = {
        "schema_version": 1,
        "name": "seabed-only",
        "bodies": [
            {"id": "seabed", "shape": {"kind": "halfspace", "normal": [0, 0, 1], "offset": 0.0},
             "kinematic": True, "pose": {"position": [0, 0, -2.0]}},
        ],
    }
    d.update(extra)
    return d


class TestParsing:
    def test_empty_scene_seabed_only(self):
        scene = parse_scene(minimal_scene())
        assert len(scene.bodies) == 1
        assert isinstance(scene.bodies[0].shape, HalfSpace)
        assert scene.vehicle is None
        session = SimSession(scene)
        assert session.world.body_ids == ["seabed"]

    def test_unknown_schema_version(self):
        with pytest.raises(SceneError) as err:
            parse_scene(minimal_scene(schema_version=99))
        assert "schema_version" in str(err.value)

    def test_duplicate_id_names_offender(self):
        d = minimal_scene()
        d["bodies"].append(dict(d["bodies"][0]))
        with pytest.raises(SceneError) as err:
            parse_scene(d)
        assert "duplicate body id 'seabed'" in str(err.value)

    def test_malformed_entry_names_entry(self):
        d = minimal_scene()
        d["bodies"].append({"id": "rock", "shape": {"kind": "sphere", "radius": -1.0}})
        with pytest.raises(SceneError) as err:
            parse_scene(d)
        assert "rock" in str(err.value)
        assert "radius" in str(err.value)

    def test_negative_mass_rejected(self):
        d = minimal_scene()
        d["bodies"].append({"id": "rock", "shape": {"kind": "sphere", "radius": 0.1},
                            "mass": -2.0})
        with pytest.raises(SceneError) as err:
            parse_scene(d)
        assert "mass" in str(err.value)

    def test_trajectory_requires_kinematic(self):
        d = minimal_scene()
        d["bodies"].append({
            "id": "s", "shape": {"kind": "sphere", "radius": 0.1},
            "trajectory": {"kind": "linear", "start": [0, 0, 0], "velocity": [1, 0, 0]},
        })
        with pytest.raises(SceneError) as err:
            parse_scene(d)
        assert "kinematic" in str(err.value)

    def test_default_scene_parses(self):
        scene = parse_scene(default_scene_dict())
        assert scene.vehicle is not None
        assert len(scene.limbs) == 4


class TestRoundTrip:
    def test_load_serialize_load_identical(self, tmp_path):
        d = default_scene_dict()
        d["bodies"].append({
            "id": "ball", "shape": {"kind": "sphere", "radius": 0.07},
            "mass": 1.25, "pose": {"position": [1.0, 0.25, 0.0]},
            "hydro": {"displaced_volume": 0.00122},
            "kinematic_until_contact": True,
            "trajectory": {"kind": "sinusoid", "center": [1.0, 0.25, 0.0],
                           "amplitude": [0, 0, 0.1], "period": 6.0,
                           "phase": [0, 0, 1.5707963267948966]},
        })
        p = tmp_path / "scene.json"
        p.write_text(json.dumps(d))
        scene1 = load_scene_file(p)
        p2 = tmp_path / "scene2.json"
        p2.write_text(dump_scene(scene1))
        scene2 = load_scene_file(p2)
        assert scene1.to_dict() == scene2.to_dict()
        assert scene1 == scene2

    def test_fixture_scenes_round_trip(self):
        for path in sorted(FIXTURES.glob("*.scene.json")):
            scene1 = load_scene_file(path)
            again = parse_scene(scene1.to_dict(), name=str(path))
            assert scene1.to_dict() == again.to_dict()

    def test_missing_file(self):
        with pytest.raises(SceneError) as err:
            load_scene_file("/nonexistent/scene.json")
        assert "not found" in str(err.value)
