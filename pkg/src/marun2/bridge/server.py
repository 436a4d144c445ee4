"""JSON-over-WebSocket pub-sub server.

The asyncio machinery lives in its own thread; the simulation loop hands
snapshots over with one call_soon_threadsafe and never waits on clients.
Outbound frames are built once per topic per tick and fanned out to
subscriber queues:

  * state topics (segments, odom, haptic, clock) are latest-wins — a slow
    client keeps only the newest unsent frame per topic, and replaced frames
    are counted as drops;
  * event topics (contacts, scenario state) use a bounded FIFO that drops
    oldest on overflow;
  * status replies are never dropped.

One misbehaving or stalled client affects only its own queues.
"""

from __future__ import annotations

import asyncio
import logging
import threading
import time
from collections import deque

from websockets.asyncio.server import serve
from websockets.exceptions import ConnectionClosed

from ..sim import Snapshot
from . import messages as msgs
from .protocol import ProtocolSession, publish_frame, status_frame
from .topics import (
    CLOCK,
    CONTACTS,
    SCENARIO_STATE,
    VEHICLE_ODOM,
    default_topic_table,
    limb_haptic_topic,
    limb_segments_topic,
)

log = logging.getLogger("marun2.bridge")

EVENT_TOPICS = (CONTACTS, SCENARIO_STATE)
SCENARIO_STATE_MAX_RATE = 20.0  # Hz cap for change-driven publishes


class _Client:
    _next_id = 0

    def __init__(self, conn, proto: ProtocolSession, event_limit: int):
        _Client._next_id += 1
        self.client_id = _Client._next_id
        self.conn = conn
        self.proto = proto
        self.event_limit = event_limit
        self.control: deque[str] = deque()
        self.events: deque[str] = deque()
        self.state: dict[str, str] = {}
        self.dropped: dict[str, int] = {}
        self.sent = 0
        self.connected_at = time.time()
        self.wake = asyncio.Event()

    def enqueue_status(self, frame: str) -> None:
        self.control.append(frame)
        self.wake.set()

    def enqueue_topic(self, topic: str, frame: str) -> None:
        if topic in EVENT_TOPICS:
            if len(self.events) >= self.event_limit:
                self.events.popleft()
                self.dropped[topic] = self.dropped.get(topic, 0) + 1
            self.events.append(frame)
        else:
            if topic in self.state:
                self.dropped[topic] = self.dropped.get(topic, 0) + 1
            self.state[topic] = frame
        self.wake.set()

    async def send_loop(self) -> None:
        try:
            while True:
                await self.wake.wait()
                self.wake.clear()
                while self.control:
                    await self.conn.send(self.control.popleft())
                    self.sent += 1
                while self.events:
                    await self.conn.send(self.events.popleft())
                    self.sent += 1
                while self.state:
                    topic = min(self.state)
                    frame = self.state.pop(topic)
                    await self.conn.send(frame)
                    self.sent += 1
        except (ConnectionClosed, asyncio.CancelledError):
            pass

    def info(self) -> dict:
        return {
            "client_id": self.client_id,
            "subscriptions": sorted(self.proto.subscriptions),
            "received": self.proto.received,
            "sent": self.sent,
            "dropped": dict(self.dropped),
            "connected_at": self.connected_at,
        }


class BridgeServer:
    def __init__(self, ingest, bind: str = "127.0.0.1:9090", *,
                 event_queue_limit: int = 256, record_timings: bool = False):
        host, _, port = bind.rpartition(":")
        if not host or not port.isdigit():
            raise ValueError(f"bind must be host:port, got {bind!r}")
        self.host = host
        self.port = int(port)
        self._ingest = ingest
        self.registry = default_topic_table()
        self.event_queue_limit = event_queue_limit
        self.record_timings = record_timings
        self.publish_monotonic: dict[int, float] = {}
        self._clients: set[_Client] = set()
        self._seq: dict[str, int] = {}
        self._next_pub: dict[str, float] = {}
        self._last_scenario_payload: str | None = None
        self._loop: asyncio.AbstractEventLoop | None = None
        self._thread: threading.Thread | None = None
        self._stop: asyncio.Future | None = None
        self._bound = threading.Event()
        self._server = None

    # --- lifecycle -----------------------------------------------------------

    def start(self) -> None:
        self._loop = asyncio.new_event_loop()
        self._thread = threading.Thread(target=self._run, name="marun2-bridge", daemon=True)
        self._thread.start()
        if not self._bound.wait(timeout=10.0):
            raise RuntimeError("bridge server failed to start")

    def _run(self) -> None:
        asyncio.set_event_loop(self._loop)
        try:
            self._loop.run_until_complete(self._main())
        finally:
            self._loop.close()

    async def _main(self) -> None:
        self._stop = asyncio.get_running_loop().create_future()
        try:
            async with serve(self._handler, self.host, self.port,
                             compression=None, ping_interval=None) as server:
                self._server = server
                self.port = server.sockets[0].getsockname()[1]
                self._bound.set()
                await self._stop
        except OSError as exc:
            self._bind_error = exc
            self._bound.set()
            raise

    def stop(self) -> None:
        if self._loop is None:
            return
        if self._stop is not None and not self._stop.done():
            self._loop.call_soon_threadsafe(
                lambda: self._stop.set_result(None) if not self._stop.done() else None)
        if self._thread is not None:
            self._thread.join(timeout=10.0)

    @property
    def url(self) -> str:
        return f"ws://{self.host}:{self.port}"

    # --- client handling -------------------------------------------------------

    async def _handler(self, conn) -> None:
        client = _Client(conn, ProtocolSession(self.registry, self._ingest),
                         self.event_queue_limit)
        self._clients.add(client)
        sender = asyncio.create_task(client.send_loop())
        log.info("client %d connected", client.client_id)
        try:
            async for raw in conn:
                if isinstance(raw, (bytes, bytearray)):
                    client.enqueue_status(status_frame(
                        "error", "invalid envelope: binary frames unsupported"))
                    continue
                for resp in client.proto.handle_text(raw):
                    client.enqueue_status(resp)
        except ConnectionClosed:
            pass
        finally:
            self._clients.discard(client)
            sender.cancel()
            log.info("client %d disconnected", client.client_id)

    def sessions_info(self) -> list[dict]:
        return [c.info() for c in list(self._clients)]

    # --- publication -----------------------------------------------------------

    def publish_snapshot(self, snap: Snapshot) -> None:
        """Hand a snapshot to the server; wait-free for the simulation loop."""
        if self.record_timings:
            self.publish_monotonic[snap.step] = time.monotonic()
            if len(self.publish_monotonic) > 512:
                for k in sorted(self.publish_monotonic)[:-256]:
                    del self.publish_monotonic[k]
        loop = self._loop
        if loop is not None and loop.is_running():
            loop.call_soon_threadsafe(self._distribute, snap)

    def _due(self, topic: str, now: float) -> bool:
        spec = self.registry[topic]
        if spec.rate_hz is None:
            return True
        nxt = self._next_pub.get(topic, 0.0)
        if now + 1e-9 < nxt:
            return False
        interval = 1.0 / spec.rate_hz
        nxt += interval
        if nxt < now - interval:
            nxt = now + interval
        self._next_pub[topic] = nxt
        return True

    def _fanout(self, topic: str, payload: dict) -> None:
        frame = publish_frame(topic, payload)
        for client in self._clients:
            if topic in client.proto.subscriptions:
                client.enqueue_topic(topic, frame)

    def _next_seq(self, topic: str) -> int:
        seq = self._seq.get(topic, 0) + 1
        self._seq[topic] = seq
        return seq

    def _distribute(self, snap: Snapshot) -> None:
        now = snap.time
        for i in range(len(snap.limbs)):
            topic = limb_segments_topic(i)
            if self._anyone(topic) and self._due(topic, now):
                self._fanout(topic, msgs.segments_message(snap, i, self._next_seq(topic)))
        for i in range(min(2, len(snap.limbs))):
            topic = limb_haptic_topic(i)
            if self._anyone(topic) and self._due(topic, now):
                self._fanout(topic, msgs.haptic_message(snap, i, self._next_seq(topic)))
        if snap.vehicle_pose is not None and self._anyone(VEHICLE_ODOM) and self._due(VEHICLE_ODOM, now):
            self._fanout(VEHICLE_ODOM, msgs.odom_message(snap, self._next_seq(VEHICLE_ODOM)))
        if self._anyone(CLOCK) and self._due(CLOCK, now):
            self._fanout(CLOCK, msgs.clock_message(snap, self._next_seq(CLOCK)))
        if snap.events and self._anyone(CONTACTS):
            self._fanout(CONTACTS, msgs.contacts_message(snap, self._next_seq(CONTACTS)))
        if self._anyone(SCENARIO_STATE):
            payload = msgs.scenario_message(snap, 0)
            content = {k: v for k, v in payload.items() if k != "seq"}
            key = repr(sorted(content.items(), key=lambda kv: kv[0]))
            nxt = self._next_pub.get(SCENARIO_STATE, 0.0)
            if key != self._last_scenario_payload and now + 1e-9 >= nxt:
                self._last_scenario_payload = key
                self._next_pub[SCENARIO_STATE] = now + 1.0 / SCENARIO_STATE_MAX_RATE
                payload["seq"] = self._next_seq(SCENARIO_STATE)
                self._fanout(SCENARIO_STATE, payload)

    def _anyone(self, topic: str) -> bool:
        for client in self._clients:
            if topic in client.proto.subscriptions:
                return True
        return False
