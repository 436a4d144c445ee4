from .protocol import (
    Envelope,
    ProtocolError,
    ProtocolSession,
    parse_envelope,
    publish_frame,
    serialize_envelope,
    status_frame,
)
from .topics import CommandError, TopicSpec, default_topic_table, parse_command

# BridgeServer lives in marun2.bridge.server; importing it here would create
# an import cycle through the simulation session.

__all__ = [
    "CommandError", "Envelope", "ProtocolError", "ProtocolSession",
    "TopicSpec", "default_topic_table", "parse_command", "parse_envelope",
    "publish_frame", "serialize_envelope", "status_frame",
]
