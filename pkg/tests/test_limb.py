"""Limb forward/inverse models against closed-form arc oracles."""

import math
import random


from marun2.frames import Pose, Quat, Vec3
from marun2.limb import (
    DesiredShape,
    FrameConvention,
    LimbConfig,
    OperatorInput,
    ProxyMapper,
    TendonCommand,
    bend_from_tensions,
    discretize_limb,
    forward_limb_model,
    inverse_limb_model,
    tip_contact_force,
)
from marun2.physics import ContactEvent, ContactPhase

TEST_CFG = LimbConfig(segment_count=12, total_length=0.6, joint_stiffness=0.05,
                      tendon_moment_arm=0.015, max_tendon_tension=20.0,
                      max_bend=12 * 0.7)


def arc_chain_tip(n: int, ell: float, theta: float) -> tuple[float, float, float]:
    """Independent oracle: planar tip of a uniform chain by direct trig sum."""
    x = ell * sum(math.sin(j * theta) for j in range(1, n + 1))
    z = ell * sum(math.cos(j * theta) for j in range(1, n + 1))
    return (x, 0.0, z)


class TestForwardModel:
    def test_zero_tension_straight(self):
        st = forward_limb_model(TEST_CFG, TendonCommand((0, 0, 0, 0)))
        for k, pose in enumerate(st.segment_poses):
            expect = Vec3(0, 0, k * TEST_CFG.segment_length)
            assert (pose.position - expect).norm() == 0.0
            assert pose.orientation == Quat.identity()
        assert (st.tip_position - Vec3(0, 0, 0.6)).norm() == 0.0

    def test_equal_tensions_cancel(self):
        st = forward_limb_model(TEST_CFG, TendonCommand((7.5, 7.5, 7.5, 7.5)))
        assert (st.tip_position - Vec3(0, 0, 0.6)).norm() == 0.0

    def test_single_tendon_closed_form(self):
        # T0 = 2 N, r = 0.015, k = 0.05 -> theta = 0.6 rad per joint, bending
        # in the tendon-0 (local +X) plane.
        st = forward_limb_model(TEST_CFG, TendonCommand((2.0, 0, 0, 0)))
        azimuth, theta = bend_from_tensions(TEST_CFG, st.tendon_command)
        assert abs(theta - 0.6) < 1e-15
        assert azimuth == 0.0
        oracle = arc_chain_tip(12, 0.05, 0.6)
        tip = st.tip_position
        assert abs(tip.x - oracle[0]) < 1e-9
        assert abs(tip.y - oracle[1]) < 1e-9
        assert abs(tip.z - oracle[2]) < 1e-9

    def test_chain_closure_exact(self):
        st = forward_limb_model(TEST_CFG, TendonCommand((3.0, 1.0, 0.0, 0.5)))
        pts = [p.position for p in st.segment_poses] + [st.tip_position]
        for i in range(len(pts) - 1):
            gap = (pts[i + 1] - pts[i]).norm()
            assert abs(gap - TEST_CFG.segment_length) < 1e-15

    def test_mirror_symmetry(self):
        # Swapping the antagonist pair mirrors the shape through the base plane.
        st1 = forward_limb_model(TEST_CFG, TendonCommand((4.0, 0, 1.0, 0)))
        st2 = forward_limb_model(TEST_CFG, TendonCommand((1.0, 0, 4.0, 0)))
        for p1, p2 in zip(st1.segment_poses, st2.segment_poses):
            assert abs(p1.position.x + p2.position.x) < 1e-12
            assert abs(p1.position.y - p2.position.y) < 1e-12
            assert abs(p1.position.z - p2.position.z) < 1e-12

    def test_monotone_bend_in_tension(self):
        prev = -1.0
        for t0 in (0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0):
            _, theta = bend_from_tensions(TEST_CFG, TendonCommand((t0, 0, 0, 0)))
            assert theta >= prev
            prev = theta

    def test_tension_clamping(self):
        st = forward_limb_model(TEST_CFG, TendonCommand((1e6, -5.0, 0, 0)))
        assert st.tendon_command.tensions[0] == TEST_CFG.max_tendon_tension
        assert st.tendon_command.tensions[1] == 0.0


class TestInverseModel:
    def test_straight_zero_differentials(self):
        inv = inverse_limb_model(TEST_CFG, DesiredShape(bend_azimuth=0.7, bend_magnitude=0.0))
        t = inv.command.tensions
        assert t[0] - t[2] == 0.0 and t[1] - t[3] == 0.0
        assert not inv.unreachable

    def test_roundtrip_recovers_differential(self):
        target = forward_limb_model(TEST_CFG, TendonCommand((2.0, 0, 0, 0)))
        azimuth, theta = bend_from_tensions(TEST_CFG, target.tendon_command)
        inv = inverse_limb_model(TEST_CFG, DesiredShape(bend_azimuth=azimuth,
                                                        bend_magnitude=theta * 12))
        t = inv.command.tensions
        assert abs((t[0] - t[2]) - 2.0) / 2.0 < 0.01
        assert abs(t[1] - t[3]) < 1e-9

    def test_roundtrip_200_random_shapes(self):
        rng = random.Random(99)
        cfg = LimbConfig()
        for _ in range(200):
            desired = DesiredShape(bend_azimuth=rng.uniform(-math.pi, math.pi),
                                   bend_magnitude=rng.uniform(0.0, cfg.max_bend))
            inv = inverse_limb_model(cfg, desired)
            assert not inv.unreachable
            st = forward_limb_model(cfg, inv.command)
            azimuth, theta = bend_from_tensions(cfg, st.tendon_command)
            bend = theta * cfg.segment_count
            assert abs(bend - desired.bend_magnitude) <= 0.01 * max(desired.bend_magnitude, 1e-9)

    def test_tip_target_roundtrip(self):
        cfg = LimbConfig()
        rng = random.Random(5)
        for _ in range(50):
            bend = rng.uniform(0.05, cfg.max_bend * 0.98)
            azim = rng.uniform(-math.pi, math.pi)
            goal = forward_limb_model(
                cfg, inverse_limb_model(cfg, DesiredShape(azim, bend)).command).tip_position
            inv = inverse_limb_model(cfg, DesiredShape(tip_target=goal))
            st = forward_limb_model(cfg, inv.command)
            assert (st.tip_position - goal).norm() < 0.01 * cfg.total_length
            assert not inv.unreachable

    def test_unreachable_far_target(self):
        cfg = LimbConfig()
        target = Vec3(2 * cfg.total_length, 0.0, 0.0)
        inv = inverse_limb_model(cfg, DesiredShape(tip_target=target))
        assert inv.unreachable
        assert inv.residual > 0.1
        # Best effort still bends toward the target's azimuth (+X here).
        azimuth, theta = bend_from_tensions(cfg, inv.command)
        assert abs(azimuth) < 1e-9
        assert theta > 0.0


class TestProxyMapping:
    def test_zero_input_straight(self):
        pm = ProxyMapper(TEST_CFG)
        d = pm.update(OperatorInput(0, 0), 0.02)
        assert d.bend_magnitude == 0.0

    def test_slew_ramp_oracle(self):
        # Held full deflection: magnitude(t) = min(max_bend, slew_rate * t).
        cfg = LimbConfig()  # max_bend = pi
        pm = ProxyMapper(cfg, slew_rate=math.pi / 2)
        dt = 0.02
        for k in range(1, 500):
            d = pm.update(OperatorInput(1.0, 0.0), dt)
            expect = min(cfg.max_bend, math.pi / 2 * k * dt)
            assert abs(d.bend_magnitude - expect) < 1e-12
            assert d.bend_azimuth == 0.0

    def test_outside_unit_disc_clamped(self):
        cfg = LimbConfig()
        pm = ProxyMapper(cfg, slew_rate=1e9)  # effectively no slew for this test
        d = pm.update(OperatorInput(3.0, 4.0), 0.02)
        assert abs(d.bend_magnitude - cfg.max_bend) < 1e-12
        assert abs(d.bend_azimuth - math.atan2(4.0, 3.0)) < 1e-12

    def test_release_slews_home(self):
        pm = ProxyMapper(LimbConfig(), slew_rate=math.pi / 2)
        for _ in range(200):
            pm.update(OperatorInput(0.0, 1.0), 0.02)
        up = pm.bend_magnitude
        assert up > 0.5
        for _ in range(400):
            d = pm.update(OperatorInput(0.0, 0.0), 0.02)
        assert d.bend_magnitude == 0.0


class TestDiscretize:
    def test_straight_collinear_even(self):
        st = forward_limb_model(TEST_CFG, TendonCommand())
        poses = discretize_limb(st, Pose(Vec3(1, 2, 3)), FrameConvention.SIM_FRAME)
        assert len(poses) == TEST_CFG.segment_count
        for k, p in enumerate(poses):
            expect = Vec3(1, 2, 3 + k * TEST_CFG.segment_length)
            assert (p.position - expect).norm() < 1e-12

    def test_pose_count_always_n(self):
        for cmd in (TendonCommand(), TendonCommand((5, 0, 0, 0)), TendonCommand((1, 2, 3, 4))):
            st = forward_limb_model(TEST_CFG, cmd)
            assert len(discretize_limb(st, Pose.identity())) == TEST_CFG.segment_count

    def test_quarter_circle_sagitta(self):
        # Quarter circle: total bend pi/2 over 12 segments. The chain vertices
        # are chords of their circumscribed circle; the worst deviation of the
        # interpolating arc from the polyline is the sagitta, which matches
        # the L^2 k/(8 N^2) bound to second order in the joint angle.
        cfg = LimbConfig()
        n = cfg.segment_count
        theta = (math.pi / 2) / n
        cmd = inverse_limb_model(cfg, DesiredShape(0.0, math.pi / 2)).command
        st = forward_limb_model(cfg, cmd)
        ell = cfg.segment_length

        pts = [p.position for p in st.segment_poses] + [st.tip_position]
        # Geometric oracle: circumcenter of the first three vertices (planar
        # chain in the X-Z plane), then verify every vertex sits on that
        # circle and measure the arc/chord sagitta directly.
        ax, az = pts[0].x, pts[0].z
        bx, bz = pts[1].x, pts[1].z
        cx, cz = pts[2].x, pts[2].z
        d = 2.0 * (ax * (bz - cz) + bx * (cz - az) + cx * (az - bz))
        ux = ((ax * ax + az * az) * (bz - cz) + (bx * bx + bz * bz) * (cz - az)
              + (cx * cx + cz * cz) * (az - bz)) / d
        uz = ((ax * ax + az * az) * (cx - bx) + (bx * bx + bz * bz) * (ax - cx)
              + (cx * cx + cz * cz) * (bx - ax)) / d
        center = Vec3(ux, 0.0, uz)
        radius = (pts[0] - center).norm()
        for p in pts:
            assert abs((p - center).norm() - radius) < 1e-9

        measured = 0.0
        for a, b in zip(pts, pts[1:]):
            assert abs((b - a).norm() - ell) < 1e-15
            mid = (a + b) * 0.5
            arc_point = center + (mid - center) * (radius / (mid - center).norm())
            measured = max(measured, (arc_point - mid).norm())

        kappa = 1.0 / radius
        bound = ell * ell * kappa / 8.0
        exact_sagitta = radius * (1.0 - math.cos(theta / 2.0))
        assert abs(measured - exact_sagitta) < 1e-12
        # Exact sagitta exceeds the leading-order bound by 2/(1+cos(t/2)).
        ratio = measured / bound
        assert 1.0 <= ratio < 1.0 + theta * theta
        assert measured < 2e-3  # under 2 mm at quarter-circle, N=12

    def test_render_frame_conversion_applied(self):
        st = forward_limb_model(TEST_CFG, TendonCommand())
        sim = discretize_limb(st, Pose.identity(), FrameConvention.SIM_FRAME)
        ren = discretize_limb(st, Pose.identity(), FrameConvention.RENDER_FRAME)
        from marun2.frames import sim_to_render_position
        for ps, pr in zip(sim, ren):
            assert (sim_to_render_position(ps.position) - pr.position).norm() < 1e-15


class TestTipForce:
    @staticmethod
    def event(body_a, body_b, force=2.0, phase=ContactPhase.STAY):
        return ContactEvent(phase=phase, body_a=body_a, body_b=body_b,
                            point=Vec3(0, 0, 0), normal=Vec3(0, 0, 1),
                            penetration=0.001, impulse=force * 0.02,
                            estimated_force=force)

    def test_no_contacts_zero(self):
        assert tip_contact_force("limb/0/seg/11", []) == Vec3(0, 0, 0)

    def test_passthrough_sum(self):
        evs = [self.event("limb/0/seg/11", "rock", 2.0),
               self.event("other", "limb/0/seg/11", 3.0)]
        f = tip_contact_force("limb/0/seg/11", evs)
        # First event: tip is body_a -> force along -normal; second: +normal.
        assert abs(f.z - (3.0 - 2.0)) < 1e-12

    def test_non_distal_excluded(self):
        evs = [self.event("limb/0/seg/5", "rock", 2.0)]
        assert tip_contact_force("limb/0/seg/11", evs) == Vec3(0, 0, 0)

    def test_exit_events_excluded(self):
        evs = [self.event("limb/0/seg/11", "rock", 0.0, phase=ContactPhase.EXIT)]
        assert tip_contact_force("limb/0/seg/11", evs) == Vec3(0, 0, 0)
