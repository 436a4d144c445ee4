"""Tendon-driven soft limbs: forward and inverse shape models.

Each limb is a chain of N rigid segments joined by identical torsion-spring
joints. Four tendons run the length of the limb at 0/90/180/270 degrees
around the cross-section with moment arm r. Differential tension loads every
joint with the same bending moment

    mx = r*(T0 - T2),   my = r*(T1 - T3)

which a joint of stiffness k balances at angle theta = |m|/k toward azimuth
atan2(my, mx); uniform joint angles make the chain a discretized
constant-curvature arc. Equal co-tension on all four tendons is a null space:
it changes internal loading, never shape, so the inverse model returns
minimum-norm tensions (one tendon of each antagonist pair at zero).

The limb frame has the backbone along +Z with tendon 0 on +X. Shapes are
quasi-static; rate limiting happens in the operator proxy mapping, and the
solved segment poses are imposed on kinematic collider bodies in the world.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

from scipy.optimize import minimize_scalar

from .frames import Pose, Quat, Vec3, pose_compose, sim_to_render_pose
from .physics.contacts import ContactEvent, ContactPhase

TENDON_COUNT = 4


class FrameConvention(enum.Enum):
    SIM_FRAME = "sim"
    RENDER_FRAME = "render"


class LimbId(enum.Enum):
    ARM_1 = "Arm1"
    ARM_2 = "Arm2"
    TENTACLE_CAM = "TentacleCam"
    TENTACLE_LIGHT = "TentacleLight"


LIMB_ORDER = [LimbId.ARM_1, LimbId.ARM_2, LimbId.TENTACLE_CAM, LimbId.TENTACLE_LIGHT]
ARM_LIMBS = (LimbId.ARM_1, LimbId.ARM_2)  # force-sensing tips


@dataclass(frozen=True)
class LimbConfig:
    limb_id: LimbId = LimbId.ARM_1
    segment_count: int = 12
    total_length: float = 0.600  # m
    segment_radius: float = 0.02  # m
    # Default stiffness puts the limb at ~pi total bend under one fully
    # tensioned tendon: k = T_max * r * N / pi.
    joint_stiffness: float = 1.1459155902616465  # N*m/rad per joint
    joint_damping: float = 0.0  # N*m*s/rad, reserved for a dynamic limb mode
    tendon_moment_arm: float = 0.015  # m
    max_tendon_tension: float = 20.0  # N
    max_bend: float = math.pi  # rad, workspace bound on total bend
    base_pose: Pose = field(default_factory=Pose)  # mount on the head, vehicle frame

    def validate(self) -> None:
        if self.segment_count < 3:
            raise ValueError(f"segment_count must be >= 3, got {self.segment_count}")
        if not self.total_length > 0.0 or not self.segment_radius > 0.0:
            raise ValueError("limb dimensions must be > 0")
        if not self.joint_stiffness > 0.0:
            raise ValueError("joint_stiffness must be > 0")
        if not self.tendon_moment_arm > 0.0 or not self.max_tendon_tension > 0.0:
            raise ValueError("tendon parameters must be > 0")

    @property
    def segment_length(self) -> float:
        return self.total_length / self.segment_count


@dataclass(frozen=True)
class TendonCommand:
    """Four tendon tensions (N), indexed 0/90/180/270 degrees."""

    tensions: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)

    def clamped(self, max_tension: float) -> "TendonCommand":
        return TendonCommand(tuple(
            0.0 if t < 0.0 else (max_tension if t > max_tension else t)
            for t in self.tensions))


@dataclass(frozen=True)
class DesiredShape:
    bend_azimuth: float = 0.0  # rad, direction of the bending plane
    bend_magnitude: float = 0.0  # rad, total bend over the limb
    tip_target: Vec3 | None = None  # m, limb-base frame


@dataclass(frozen=True)
class LimbState:
    config: LimbConfig
    tendon_command: TendonCommand
    segment_poses: tuple[Pose, ...]  # limb-base frame, origin at each proximal end
    tip_position: Vec3  # limb-base frame, distal end of the last segment
    tip_contact_force: Vec3 = field(default_factory=Vec3)


@dataclass(frozen=True)
class InverseResult:
    command: TendonCommand
    unreachable: bool = False
    residual: float = 0.0  # m, tip distance left when unreachable


def bend_from_tensions(config: LimbConfig, cmd: TendonCommand) -> tuple[float, float]:
    """Per-joint bending (azimuth, joint angle) for a tendon command."""
    t = cmd.clamped(config.max_tendon_tension).tensions
    r = config.tendon_moment_arm
    mx = r * (t[0] - t[2])
    my = r * (t[1] - t[3])
    m = math.hypot(mx, my)
    if m == 0.0:
        return 0.0, 0.0
    return math.atan2(my, mx), m / config.joint_stiffness


def forward_limb_model(config: LimbConfig, cmd: TendonCommand) -> LimbState:
    """Quasi-static equilibrium shape of the limb under tendon tensions."""
    config.validate()
    cmd = cmd.clamped(config.max_tendon_tension)
    azimuth, theta = bend_from_tensions(config, cmd)
    return _chain_from_bend(config, cmd, azimuth, theta)


def _chain_from_bend(config: LimbConfig, cmd: TendonCommand,
                     azimuth: float, theta: float) -> LimbState:
    n = config.segment_count
    ell = config.segment_length
    step = Vec3(0.0, 0.0, ell)
    if theta == 0.0:
        joint = Quat.identity()
    else:
        axis = Vec3(-math.sin(azimuth), math.cos(azimuth), 0.0)
        joint = Quat.from_axis_angle(axis, theta)
    poses = []
    frame = Pose.identity()
    for _ in range(n):
        seg = Pose(frame.position, (frame.orientation * joint).normalized())
        poses.append(seg)
        frame = Pose(seg.position + seg.orientation.rotate(step), seg.orientation)
    return LimbState(
        config=config,
        tendon_command=cmd,
        segment_poses=tuple(poses),
        tip_position=frame.position,
    )


def _planar_tip(config: LimbConfig, bend: float) -> tuple[float, float]:
    """(radial, axial) tip coordinates in the bending plane for total bend."""
    n = config.segment_count
    ell = config.segment_length
    theta = bend / n
    rho = 0.0
    z = 0.0
    for j in range(1, n + 1):
        rho += math.sin(j * theta)
        z += math.cos(j * theta)
    return ell * rho, ell * z


def _tensions_for_bend(config: LimbConfig, azimuth: float, bend: float) -> tuple[TendonCommand, float]:
    """Minimum-norm tensions for a bend; returns the bend actually achieved."""
    theta = bend / config.segment_count
    m = config.joint_stiffness * theta
    d = m / config.tendon_moment_arm  # required differential per plane
    dx = d * math.cos(azimuth)
    dy = d * math.sin(azimuth)
    tmax = config.max_tendon_tension
    t0 = max(dx, 0.0)
    t2 = max(-dx, 0.0)
    t1 = max(dy, 0.0)
    t3 = max(-dy, 0.0)
    scale = 1.0
    peak = max(t0, t1, t2, t3)
    if peak > tmax:
        scale = tmax / peak
    cmd = TendonCommand((t0 * scale, t1 * scale, t2 * scale, t3 * scale))
    return cmd, bend * scale


def inverse_limb_model(config: LimbConfig, desired: DesiredShape) -> InverseResult:
    """Tendon tensions reproducing a desired shape (deterministic solver).

    With a tip target the bending plane is fixed by the target's azimuth and
    the total bend is found by a bounded 1-D minimization over the
    constant-curvature tip curve. Unreachable targets return the best-effort
    command with the residual distance flagged.
    """
    config.validate()
    if desired.tip_target is None:
        bend = min(max(desired.bend_magnitude, 0.0), config.max_bend)
        cmd, achieved = _tensions_for_bend(config, desired.bend_azimuth, bend)
        if achieved < bend:
            want = _planar_tip(config, bend)
            got = _planar_tip(config, achieved)
            residual = math.hypot(want[0] - got[0], want[1] - got[1])
            return InverseResult(cmd, unreachable=True, residual=residual)
        return InverseResult(cmd)

    target = desired.tip_target
    azimuth = math.atan2(target.y, target.x)
    rho_t = math.hypot(target.x, target.y)
    z_t = target.z

    def miss(bend: float) -> float:
        rho, z = _planar_tip(config, bend)
        return (rho - rho_t) ** 2 + (z - z_t) ** 2

    # Coarse scan pins the basin; Brent refines inside it.
    samples = 128
    best_i = 0
    best_v = math.inf
    for i in range(samples + 1):
        v = miss(config.max_bend * i / samples)
        if v < best_v:
            best_v = v
            best_i = i
    lo = config.max_bend * max(best_i - 1, 0) / samples
    hi = config.max_bend * min(best_i + 1, samples) / samples
    res = minimize_scalar(miss, bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-12})
    bend = float(res.x)
    residual = math.sqrt(miss(bend))
    cmd, achieved = _tensions_for_bend(config, azimuth, bend)
    unreachable = residual > 0.005 * config.total_length or achieved < bend
    return InverseResult(cmd, unreachable=unreachable, residual=residual)


@dataclass(frozen=True)
class OperatorInput:
    """Raw 2-axis operator command for one limb, each in [-1, 1]."""

    ax: float = 0.0
    ay: float = 0.0


class ProxyMapper:
    """Maps operator axes to a desired shape with slew-limited bend.

    Axes outside the unit disc are clamped to it; bend magnitude tracks
    max_bend * |axes| at no more than slew_rate rad/s.
    """

    def __init__(self, config: LimbConfig, slew_rate: float = math.pi / 2):
        if not slew_rate > 0.0:
            raise ValueError("slew_rate must be > 0")
        self.config = config
        self.slew_rate = slew_rate
        self.bend_magnitude = 0.0
        self.bend_azimuth = 0.0

    def update(self, operator_input: OperatorInput, dt: float) -> DesiredShape:
        ax = operator_input.ax
        ay = operator_input.ay
        mag = math.hypot(ax, ay)
        if mag > 1.0:
            ax /= mag
            ay /= mag
            mag = 1.0
        target = self.config.max_bend * mag
        if mag > 0.0:
            self.bend_azimuth = math.atan2(ay, ax)
        limit = self.slew_rate * dt
        delta = target - self.bend_magnitude
        if delta > limit:
            delta = limit
        elif delta < -limit:
            delta = -limit
        self.bend_magnitude += delta
        return DesiredShape(bend_azimuth=self.bend_azimuth,
                            bend_magnitude=self.bend_magnitude)


def discretize_limb(state: LimbState, mount_pose: Pose,
                    frame: FrameConvention = FrameConvention.SIM_FRAME) -> list[Pose]:
    """Segment poses in the world frame, optionally converted for publication.

    mount_pose is the limb base in the world (vehicle pose composed with the
    configured base pose). The chord error of the polyline against the
    continuous constant-curvature arc is bounded by L^2*kappa/(8 N^2) per
    segment (to second order in the per-joint angle).
    """
    world = [pose_compose(mount_pose, seg) for seg in state.segment_poses]
    if frame is FrameConvention.RENDER_FRAME:
        return [sim_to_render_pose(p) for p in world]
    return world


def tip_contact_force(distal_body_id: str, events: list[ContactEvent]) -> Vec3:
    """Net estimated contact force on a limb's distal segment."""
    total = Vec3.zero()
    for ev in events:
        if ev.phase is ContactPhase.EXIT:
            continue
        if ev.body_a == distal_body_id:
            total = total - ev.normal * ev.estimated_force
        elif ev.body_b == distal_body_id:
            total = total + ev.normal * ev.estimated_force
    return total


def limb_state_with_force(state: LimbState, force: Vec3) -> LimbState:
    return replace(state, tip_contact_force=force)
