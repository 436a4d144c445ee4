"""Process entry point: serve interactively, run scenarios headless, replay.

Exit codes: 0 success (including scenario success), 2 scenario failure
(time limit), 3 configuration error, 4 runtime fault (non-finite state or
replay hash mismatch). Log level comes from the MARUN_LOG environment
variable.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import signal
import sys
from pathlib import Path

from .config import DEFAULT_BIND, DEFAULT_DT, default_scene_dict
from .metrics import export_metrics, path_length
from .physics import SimulationFault
from .replay import (
    ReplayError,
    ReplayController,
    RecordWriter,
    load_replay,
    verify_fingerprint,
)
from .scenario import (
    ExternalController,
    IdleController,
    ScenarioError,
    ScenarioRunner,
    ScriptedController,
    load_scenario_file,
    parse_scenario,
)
from .scene import SceneError, load_scene_file, parse_scene
from .sim import SimSession

EXIT_OK = 0
EXIT_SCENARIO_FAILED = 2
EXIT_CONFIG = 3
EXIT_FAULT = 4

log = logging.getLogger("marun2")


class ConfigError(ValueError):
    pass


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="marun2",
        description="Headless underwater teleoperation simulator for the URSULA robot")
    p.add_argument("--mode", choices=("serve", "run-scenario", "replay"), required=True)
    p.add_argument("--scene", help="scene JSON (default: built-in idle scene; "
                                   "run-scenario takes it from the scenario file)")
    p.add_argument("--scenario", help="scenario JSON (run-scenario)")
    p.add_argument("--controller", default=None,
                   help="bridge | scripted:<cmds.jsonl> | replay:<run.jsonl>")
    p.add_argument("--dt", type=float, default=None, help=f"fixed step (default {DEFAULT_DT})")
    p.add_argument("--seed", type=int, default=0,
                   help="carried in replay fingerprints; physics is seed-independent")
    p.add_argument("--bind", default=DEFAULT_BIND, help="bridge bind host:port")
    p.add_argument("--metrics-out", help="write the metrics record here")
    p.add_argument("--metrics-format", choices=("json", "csv"), default=None,
                   help="default: by file extension, else json")
    p.add_argument("--record-out", help="record the run as a replay file")
    return p


def _setup_logging() -> None:
    level = os.environ.get("MARUN_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(asctime)s %(name)s %(levelname)s %(message)s")


def _load_scene(args) -> tuple[dict, object]:
    if args.scene:
        scene = load_scene_file(args.scene)
        return json.loads(Path(args.scene).read_text()), scene
    scene_dict = default_scene_dict()
    return scene_dict, parse_scene(scene_dict, name="<default>")


def _make_controller(spec: str | None):
    if spec is None or spec == "bridge":
        return ("bridge", ExternalController())
    if spec.startswith("scripted:"):
        return ("scripted", ScriptedController(spec.split(":", 1)[1]))
    if spec.startswith("replay:"):
        replay = load_replay(spec.split(":", 1)[1])
        return ("replay", ReplayController(replay))
    if spec == "idle":
        return ("idle", IdleController())
    raise ConfigError(f"unknown controller {spec!r}")


def _metrics_format(args) -> str:
    if args.metrics_format:
        return args.metrics_format
    if args.metrics_out and args.metrics_out.endswith(".csv"):
        return "csv"
    return "json"


def _run_scenario_mode(args) -> int:
    if not args.scenario:
        raise ConfigError("run-scenario requires --scenario")
    spec = load_scenario_file(args.scenario)
    scenario_dict = json.loads(Path(args.scenario).read_text())
    scene_path = args.scene or spec.scene_path
    scene_dict = json.loads(Path(scene_path).read_text()) if Path(scene_path).exists() else None
    if scene_dict is None:
        raise SceneError(f"scene file not found: {scene_path}")
    scene = load_scene_file(scene_path)
    dt = args.dt if args.dt is not None else DEFAULT_DT

    kind, controller = _make_controller(args.controller)
    session = SimSession(scene, dt=dt)
    recorder = None
    if args.record_out:
        recorder = RecordWriter(args.record_out, dt, args.seed, scene_dict, scenario_dict)
    runner = ScenarioRunner(spec, session, controller, recorder,
                            command_log_ref=args.record_out)

    if kind == "bridge":
        from .bridge.server import BridgeServer
        from .runtime import run_paced

        server = BridgeServer(session.ingest, bind=args.bind)
        server.start()
        log.warning("scenario under bridge control at %s", server.url)
        stop = {"flag": False}
        signal.signal(signal.SIGINT, lambda *a: stop.update(flag=True))
        try:
            run_paced(dt, runner.tick,
                      publish=lambda: server.publish_snapshot(_scenario_snapshot(session, runner)),
                      should_stop=lambda: stop["flag"])
        finally:
            server.stop()
    else:
        while runner.tick():
            pass

    record = runner.result()
    if recorder is not None:
        recorder.finalize(session.state_hash(), session.step_index)
    if args.metrics_out:
        export_metrics(record, args.metrics_out, _metrics_format(args))
        log.warning("metrics written to %s", args.metrics_out)
    print(f"scenario {spec.kind}: success={record.success} "
          f"t={record.time_to_completion:.2f}s path={record.path_length:.3f}m")
    return EXIT_OK if record.success else EXIT_SCENARIO_FAILED


def _scenario_snapshot(session: SimSession, runner: ScenarioRunner):
    snap = session.snapshot()
    scenario_state = {
        "running": not runner.done,
        "kind": runner.spec.kind,
        "elapsed": session.time,
        "success": runner.success,
        "time_limit": runner.spec.time_limit,
        "path_length": sum(path_length(rows) for rows in runner._samples.values()),
    }
    return dataclasses.replace(snap, scenario=scenario_state)


def _replay_mode(args) -> int:
    if not args.controller or not args.controller.startswith("replay:"):
        raise ConfigError("replay mode requires --controller replay:<file>")
    path = args.controller.split(":", 1)[1]
    replay = load_replay(path)
    dt = args.dt if args.dt is not None else replay.fingerprint["dt"]
    verify_fingerprint(replay, dt, args.seed if args.seed is not None else 0)
    scene = parse_scene(replay.scene, name=f"{path}#scene")
    session = SimSession(scene, dt=dt)
    controller = ReplayController(replay)
    if replay.scenario is not None:
        spec = parse_scenario(replay.scenario, name=f"{path}#scenario")
        runner = ScenarioRunner(spec, session, controller)
        while runner.tick() and session.step_index < replay.steps:
            pass
        while session.step_index < replay.steps:
            session.step()
    else:
        while session.step_index < replay.steps:
            for topic, msg in controller.poll(session.step_index):
                session.ingest(topic, msg)
            session.step()
    got = session.state_hash()
    if got != replay.state_hash:
        print(f"replay hash mismatch: recorded {replay.state_hash[:16]}…, "
              f"replayed {got[:16]}…", file=sys.stderr)
        return EXIT_FAULT
    print(f"replay ok: {session.step_index} steps, state hash verified")
    return EXIT_OK


def _serve_mode(args) -> int:
    from .bridge.server import BridgeServer
    from .runtime import run_paced

    scene_dict, scene = _load_scene(args)
    dt = args.dt if args.dt is not None else DEFAULT_DT
    session = SimSession(scene, dt=dt)
    recorder = None
    if args.record_out:
        recorder = RecordWriter(args.record_out, dt, args.seed, scene_dict, None)
    server = BridgeServer(session.ingest, bind=args.bind)
    server.start()
    print(f"serving {scene.name} at {server.url} (dt={dt}s); Ctrl-C to stop")
    stop = {"flag": False}
    signal.signal(signal.SIGINT, lambda *a: stop.update(flag=True))
    try:
        def tick() -> bool:
            session.step(recorder)
            return True

        run_paced(dt, tick,
                  publish=lambda: server.publish_snapshot(session.snapshot()),
                  should_stop=lambda: stop["flag"])
    finally:
        server.stop()
        if recorder is not None:
            recorder.finalize(session.state_hash(), session.step_index)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        if args.mode == "serve":
            return _serve_mode(args)
        if args.mode == "run-scenario":
            return _run_scenario_mode(args)
        return _replay_mode(args)
    except (ConfigError, SceneError, ScenarioError, ReplayError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SimulationFault as exc:
        print(f"runtime fault: {exc}", file=sys.stderr)
        return EXIT_FAULT


if __name__ == "__main__":
    sys.exit(main())
