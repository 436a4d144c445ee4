"""Envelope parsing/serialization and per-session protocol handling.

One UTF-8 JSON envelope per WebSocket text frame. Five client ops are
supported: advertise, unadvertise, subscribe, unsubscribe, publish. The
simulator answers problems with status frames; valid traffic gets no
acknowledgement. Serialization is canonical (sorted keys, compact separators)
so responses are byte-stable, and the golden-frame conformance corpus pins
them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable

from .topics import CLIENTS_TO_SIM, SIM_TO_CLIENTS, CommandError, TopicSpec, parse_command

CLIENT_OPS = ("advertise", "unadvertise", "subscribe", "unsubscribe", "publish")


class ProtocolError(ValueError):
    pass


@dataclass(frozen=True)
class Envelope:
    op: str
    topic: str | None = None
    type: str | None = None
    msg: dict | None = None
    id: str | None = None


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def parse_envelope(text: str) -> Envelope:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProtocolError(f"parse error: {exc.msg} at char {exc.pos}") from None
    if not isinstance(data, dict):
        raise ProtocolError("invalid envelope: expected a JSON object")
    if "op" not in data:
        raise ProtocolError("invalid envelope: missing op")
    op = data["op"]
    if not isinstance(op, str):
        raise ProtocolError("invalid envelope: op must be a string")
    if op not in CLIENT_OPS:
        raise ProtocolError(f"unknown op: {op}")
    env_id = data.get("id")
    if env_id is not None and not isinstance(env_id, str):
        raise ProtocolError("invalid envelope: id must be a string")
    topic = data.get("topic")
    if topic is None:
        raise ProtocolError("invalid envelope: missing topic")
    if not isinstance(topic, str) or not topic:
        raise ProtocolError("invalid envelope: topic must be a non-empty string")
    if not topic.startswith("/"):
        raise ProtocolError("invalid envelope: topic must start with '/'")
    msg_type = data.get("type")
    if msg_type is not None and not isinstance(msg_type, str):
        raise ProtocolError("invalid envelope: type must be a string")
    msg = data.get("msg")
    if op == "publish":
        if not isinstance(msg, dict):
            raise ProtocolError("invalid envelope: publish requires a msg object")
    elif msg is not None and not isinstance(msg, dict):
        raise ProtocolError("invalid envelope: msg must be an object")
    return Envelope(op=op, topic=topic, type=msg_type, msg=msg, id=env_id)


def serialize_envelope(env: Envelope) -> str:
    data: dict = {"op": env.op}
    if env.topic is not None:
        data["topic"] = env.topic
    if env.type is not None:
        data["type"] = env.type
    if env.msg is not None:
        data["msg"] = env.msg
    if env.id is not None:
        data["id"] = env.id
    return canonical_json(data)


def status_frame(level: str, msg: str, env_id: str | None = None) -> str:
    data: dict = {"op": "status", "level": level, "msg": msg}
    if env_id is not None:
        data["id"] = env_id
    return canonical_json(data)


def publish_frame(topic: str, msg: dict) -> str:
    return canonical_json({"op": "publish", "topic": topic, "msg": msg})


class ProtocolSession:
    """Protocol state machine for one client, transport-independent.

    handle_text() returns the status frames to send back (empty for valid
    traffic); accepted commands go to the sink.
    """

    def __init__(self, registry: dict[str, TopicSpec],
                 sink: Callable[[str, dict], None]):
        self.registry = registry
        self.sink = sink
        self.subscriptions: set[str] = set()
        self.advertised: set[str] = set()
        self.received = 0

    def handle_text(self, text: str) -> list[str]:
        self.received += 1
        try:
            env = parse_envelope(text)
        except ProtocolError as exc:
            return [status_frame("error", str(exc))]
        err = self._apply(env)
        if err is not None:
            return [status_frame("error", err, env.id)]
        return []

    def _apply(self, env: Envelope) -> str | None:
        spec = self.registry.get(env.topic)
        if spec is None:
            return f"unknown topic: {env.topic}"
        if env.op == "subscribe":
            if spec.direction != SIM_TO_CLIENTS:
                return f"direction error: cannot subscribe to inbound topic {env.topic}"
            if env.type is not None and env.type != spec.msg_type:
                return f"type mismatch: topic {env.topic} is {spec.msg_type}"
            self.subscriptions.add(env.topic)
            return None
        if env.op == "unsubscribe":
            self.subscriptions.discard(env.topic)
            return None
        if env.op == "advertise":
            if spec.direction != CLIENTS_TO_SIM:
                return f"direction error: cannot advertise outbound topic {env.topic}"
            if env.type is not None and env.type != spec.msg_type:
                return f"type mismatch: topic {env.topic} is {spec.msg_type}"
            self.advertised.add(env.topic)
            return None
        if env.op == "unadvertise":
            self.advertised.discard(env.topic)
            return None
        # publish
        if spec.direction != CLIENTS_TO_SIM:
            return f"direction error: cannot publish on outbound topic {env.topic}"
        try:
            parse_command(env.topic, env.msg)
        except CommandError as exc:
            return f"schema error: {exc}"
        self.sink(env.topic, env.msg)
        return None
