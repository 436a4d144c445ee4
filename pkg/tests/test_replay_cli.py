"""Record/replay reproducibility and the CLI surface."""

import json
from pathlib import Path

import pytest

from marun2.cli import main
from marun2.replay import (
    RecordWriter,
    ReplayController,
    ReplayError,
    load_replay,
    verify_fingerprint,
)
from marun2.scenario import ScriptedController, load_scenario_file, load_scenario_scene, run_scenario
from marun2.sim import SimSession

ROOT = Path(__file__).parent.parent
SCN = ROOT / "scenarios"
SOL = SCN / "solutions"


def record_fixture(tmp_path, scenario="test1_contact.json", solution="test1.jsonl"):
    spec = load_scenario_file(SCN / scenario)
    scene_dict = json.loads(Path(spec.scene_path).read_text())
    scenario_dict = json.loads((SCN / scenario).read_text())
    session = SimSession(load_scenario_scene(spec), dt=0.02)
    out = tmp_path / "run.jsonl"
    recorder = RecordWriter(out, 0.02, 0, scene_dict, scenario_dict)
    run_scenario(spec, ScriptedController(SOL / solution), session, recorder=recorder)
    recorder.finalize(session.state_hash(), session.step_index)
    return out, session


class TestRecordReplay:
    @pytest.mark.parametrize("scenario,solution", [
        ("test1_contact.json", "test1.jsonl"),
        ("test2_grasp.json", "test2.jsonl"),
        ("test3_flow.json", "test1.jsonl"),
    ])
    def test_record_replay_hash_match(self, tmp_path, scenario, solution):
        out, session = record_fixture(tmp_path, scenario, solution)
        replay = load_replay(out)
        assert replay.steps == session.step_index
        # Re-execute from the embedded config and command stream.
        from marun2.scenario import parse_scenario, ScenarioRunner
        from marun2.scene import parse_scene
        spec = parse_scenario(replay.scenario, name="replayed")
        session2 = SimSession(parse_scene(replay.scene, "replayed"), dt=replay.fingerprint["dt"])
        runner = ScenarioRunner(spec, session2, ReplayController(replay))
        while runner.tick() and session2.step_index < replay.steps:
            pass
        assert session2.state_hash() == replay.state_hash

    def test_empty_command_stream_hashes_unperturbed_run(self, tmp_path):
        spec = load_scenario_file(SCN / "test1_contact.json")
        scene_dict = json.loads(Path(spec.scene_path).read_text())
        session = SimSession(load_scenario_scene(spec), dt=0.02)
        out = tmp_path / "idle.jsonl"
        rec = RecordWriter(out, 0.02, 0, scene_dict, None)
        for _ in range(100):
            session.step(rec)
        rec.finalize(session.state_hash(), session.step_index)
        replay = load_replay(out)
        assert replay.commands == []
        session2 = SimSession(load_scenario_scene(spec), dt=0.02)
        for _ in range(100):
            session2.step()
        assert session2.state_hash() == replay.state_hash

    def test_mismatched_dt_refused(self, tmp_path):
        out, _ = record_fixture(tmp_path)
        replay = load_replay(out)
        with pytest.raises(ReplayError) as err:
            verify_fingerprint(replay, dt=0.01, seed=0)
        assert "fingerprint" in str(err.value)
        verify_fingerprint(replay, dt=0.02, seed=0)  # matching dt is fine

    def test_incomplete_file_rejected(self, tmp_path):
        p = tmp_path / "cut.jsonl"
        p.write_text('{"type":"header","fingerprint":{},"scene":{},"scenario":null}\n')
        with pytest.raises(ReplayError) as err:
            load_replay(p)
        assert "final" in str(err.value)


class TestCLI:
    def test_run_scenario_success_exit_0(self, tmp_path, capsys):
        metrics = tmp_path / "m.json"
        code = main(["--mode", "run-scenario",
                     "--scenario", str(SCN / "test1_contact.json"),
                     "--controller", f"scripted:{SOL / 'test1.jsonl'}",
                     "--metrics-out", str(metrics)])
        assert code == 0
        assert metrics.exists()
        data = json.loads(metrics.read_text())
        assert data["success"] is True

    def test_missing_scene_exit_3(self, tmp_path, capsys):
        bad = tmp_path / "bad_scenario.json"
        bad.write_text(json.dumps({
            "schema_version": 1, "kind": "ContactTask",
            "scene": "does_not_exist.json", "time_limit": 10,
            "contact_target": "x"}))
        code = main(["--mode", "run-scenario", "--scenario", str(bad),
                     "--controller", f"scripted:{SOL / 'test1.jsonl'}"])
        assert code == 3
        err = capsys.readouterr().err
        assert "does_not_exist.json" in err

    def test_scenario_failure_exit_2(self, tmp_path):
        short = tmp_path / "short.json"
        base = json.loads((SCN / "test1_contact.json").read_text())
        base["time_limit"] = 0.5
        base["scene"] = str(SCN / "test1_contact.scene.json")
        short.write_text(json.dumps(base))
        empty = tmp_path / "noop.jsonl"
        empty.write_text("")
        code = main(["--mode", "run-scenario", "--scenario", str(short),
                     "--controller", f"scripted:{empty}"])
        assert code == 2

    def test_record_then_replay_exit_0(self, tmp_path, capsys):
        rec = tmp_path / "run.jsonl"
        code = main(["--mode", "run-scenario",
                     "--scenario", str(SCN / "test1_contact.json"),
                     "--controller", f"scripted:{SOL / 'test1.jsonl'}",
                     "--record-out", str(rec)])
        assert code == 0
        code = main(["--mode", "replay", "--controller", f"replay:{rec}"])
        assert code == 0
        out = capsys.readouterr().out
        assert "state hash verified" in out

    def test_replay_with_wrong_dt_exit_3(self, tmp_path):
        rec = tmp_path / "run.jsonl"
        assert main(["--mode", "run-scenario",
                     "--scenario", str(SCN / "test1_contact.json"),
                     "--controller", f"scripted:{SOL / 'test1.jsonl'}",
                     "--record-out", str(rec)]) == 0
        assert main(["--mode", "replay", "--controller", f"replay:{rec}",
                     "--dt", "0.01"]) == 3

    def test_tampered_replay_exit_4(self, tmp_path):
        rec = tmp_path / "run.jsonl"
        assert main(["--mode", "run-scenario",
                     "--scenario", str(SCN / "test1_contact.json"),
                     "--controller", f"scripted:{SOL / 'test1.jsonl'}",
                     "--record-out", str(rec)]) == 0
        lines = rec.read_text().splitlines()
        final = json.loads(lines[-1])
        final["state_hash"] = "0" * 64
        lines[-1] = json.dumps(final)
        rec.write_text("\n".join(lines) + "\n")
        assert main(["--mode", "replay", "--controller", f"replay:{rec}"]) == 4

    def test_nan_fault_exit_4(self, tmp_path):
        # A scene engineered to overflow: enormous quadratic drag on a tiny
        # mass at huge velocity produces non-finite state immediately.
        scene = {
            "schema_version": 1, "name": "nan",
            "bodies": [
                {"id": "bad", "shape": {"kind": "sphere", "radius": 0.1},
                 "mass": 1e-300, "velocity": [1e300, 0, 0],
                 "hydro": {"quadratic_drag": [1e300, 0, 0]}},
                {"id": "probe", "shape": {"kind": "sphere", "radius": 0.1},
                 "mass": 1.0, "pose": {"position": [5, 0, 0]}},
            ],
        }
        scene_path = tmp_path / "nan_scene.json"
        scene_path.write_text(json.dumps(scene))
        scenario = {
            "schema_version": 1, "kind": "ContactTask",
            "scene": str(scene_path), "time_limit": 5.0,
            "contact_target": "probe"}
        sc = tmp_path / "nan_scenario.json"
        sc.write_text(json.dumps(scenario))
        empty = tmp_path / "noop.jsonl"
        empty.write_text("")
        code = main(["--mode", "run-scenario", "--scenario", str(sc),
                     "--controller", f"scripted:{empty}"])
        assert code == 4
