"""Wire conformance: golden frames, envelope round-trips, boundary conversion."""

import json
import math
from pathlib import Path

import pytest
from hypothesis import given, strategies as st

from marun2.bridge.protocol import (
    Envelope,
    ProtocolError,
    ProtocolSession,
    parse_envelope,
    publish_frame,
    serialize_envelope,
    status_frame,
)
from marun2.bridge.topics import default_topic_table
from marun2.bridge import messages as msgs
from marun2.frames import (
    sim_to_render_angular,
    sim_to_render_orientation,
    sim_to_render_position,
)
from marun2.scene import parse_scene
from marun2.config import default_scene_dict
from marun2.sim import SimSession

GOLDEN = Path(__file__).parent / "data" / "golden_frames.json"


def fresh_session(sink=None):
    collected = []
    return ProtocolSession(default_topic_table(),
                           sink if sink is not None else (lambda t, m: collected.append((t, m)))), collected


class TestGoldenCorpus:
    corpus = json.loads(GOLDEN.read_text())

    def test_corpus_size(self):
        assert len(self.corpus["valid"]) >= 30
        assert len(self.corpus["invalid"]) >= 20

    @pytest.mark.parametrize("case", corpus["valid"], ids=lambda c: c["name"])
    def test_valid_frames_byte_exact(self, case):
        session, _ = fresh_session()
        responses = session.handle_text(case["send"])
        assert [r.encode() for r in responses] == [e.encode() for e in case["expect"]]

    @pytest.mark.parametrize("case", corpus["invalid"], ids=lambda c: c["name"])
    def test_invalid_frames_byte_exact(self, case):
        session, _ = fresh_session()
        responses = session.handle_text(case["send"])
        assert [r.encode() for r in responses] == [e.encode() for e in case["expect"]]

    def test_session_survives_entire_corpus(self):
        session, commands = fresh_session()
        for case in self.corpus["valid"] + self.corpus["invalid"]:
            session.handle_text(case["send"])
        # Still functional afterwards.
        assert session.handle_text(
            '{"op":"subscribe","topic":"/marun/clock"}') == []
        assert "/marun/clock" in session.subscriptions


envelope_ops = st.sampled_from(["advertise", "unadvertise", "subscribe", "unsubscribe", "publish"])
topic_names = st.text(alphabet="abcdefgh/_0123456789", min_size=1, max_size=20).map(lambda s: "/" + s)
json_values = st.recursive(
    st.one_of(st.none(), st.booleans(),
              st.floats(allow_nan=False, allow_infinity=False), st.text(max_size=8)),
    lambda children: st.one_of(st.lists(children, max_size=3),
                               st.dictionaries(st.text(max_size=5), children, max_size=3)),
    max_leaves=8)
msg_objects = st.dictionaries(st.text(min_size=1, max_size=6), json_values, max_size=4)


class TestEnvelopeRoundtrip:
    @given(op=envelope_ops, topic=topic_names, msg=msg_objects,
           env_id=st.one_of(st.none(), st.text(max_size=10)),
           msg_type=st.one_of(st.none(), st.text(min_size=1, max_size=12)))
    def test_parse_serialize_roundtrip(self, op, topic, msg, env_id, msg_type):
        env = Envelope(op=op, topic=topic,
                       msg=msg if op == "publish" else None,
                       id=env_id, type=msg_type)
        back = parse_envelope(serialize_envelope(env))
        assert back == env

    def test_parse_rejects_junk(self):
        for junk in ("", "nope", "[1,2]", '{"op":"publish","topic":"/t"}'):
            with pytest.raises(ProtocolError):
                parse_envelope(junk)

    def test_status_frame_shape(self):
        s = status_frame("error", "boom", "id1")
        assert json.loads(s) == {"op": "status", "level": "error", "msg": "boom", "id": "id1"}
        # canonical ordering
        assert s == '{"id":"id1","level":"error","msg":"boom","op":"status"}'


class TestBoundaryConversion:
    """Published poses must equal the core frame conversion of internal state."""

    @staticmethod
    def snapshot():
        session = SimSession(parse_scene(default_scene_dict(), "<default>"), dt=0.02)
        session.ingest("/ursula/limb/0/cmd", {"axes": [0.4, 0.3]})
        session.ingest("/ursula/vehicle/cmd", {"surge": 0.5, "yaw_rate": 0.2})
        for _ in range(25):
            session.step()
        return session.snapshot()

    def test_segments_message_matches_conversion(self):
        snap = self.snapshot()
        m = msgs.segments_message(snap, 0, seq=7)
        assert m["seq"] == 7 and m["frame"] == "render"
        assert len(m["poses"]) == len(snap.limbs[0].segment_poses)
        for wire, pose in zip(m["poses"], snap.limbs[0].segment_poses):
            expect_p = sim_to_render_position(pose.position)
            expect_q = sim_to_render_orientation(pose.orientation)
            assert wire["position"] == {"x": expect_p.x, "y": expect_p.y, "z": expect_p.z}
            assert wire["orientation"] == {"w": expect_q.w, "x": expect_q.x,
                                           "y": expect_q.y, "z": expect_q.z}

    def test_odom_twist_conversion(self):
        snap = self.snapshot()
        m = msgs.odom_message(snap, seq=1)
        lin = sim_to_render_position(snap.vehicle_velocity)
        ang = sim_to_render_angular(snap.vehicle_angular_velocity)
        assert m["twist"]["linear"] == {"x": lin.x, "y": lin.y, "z": lin.z}
        assert m["twist"]["angular"] == {"x": ang.x, "y": ang.y, "z": ang.z}

    def test_wire_values_survive_json(self):
        # JSON round-trip preserves the converted floats exactly (repr-based).
        snap = self.snapshot()
        m = msgs.segments_message(snap, 0, seq=1)
        again = json.loads(json.dumps(m))
        assert again == m

    def test_haptic_magnitude_consistent(self):
        snap = self.snapshot()
        m = msgs.haptic_message(snap, 0, seq=3)
        f = m["force"]
        assert math.isclose(m["magnitude"],
                            math.sqrt(f["x"] ** 2 + f["y"] ** 2 + f["z"] ** 2),
                            rel_tol=1e-12, abs_tol=1e-300)


class TestPublishFrame:
    def test_canonical_compact(self):
        s = publish_frame("/marun/clock", {"b": 1, "a": 2})
        assert s == '{"msg":{"a":2,"b":1},"op":"publish","topic":"/marun/clock"}'
