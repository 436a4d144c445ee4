"""Compiled and pure kernels must produce bit-identical trajectories."""

import random

import numpy as np
import pytest

from marun2 import kernels
from marun2.frames import Pose, Quat, Vec3
from marun2.physics import Box, Capsule, HalfSpace, HydroParams, Sphere, World

needs_native = pytest.mark.skipif(
    "native" not in kernels.available_backends(),
    reason="compiled kernels not built")


def messy_world(backend: str) -> World:
    """A mixed-shape world with contacts, drag, currents, and spin."""
    rng = random.Random(7)
    from marun2.physics.hydro import CurrentField
    w = World(dt=0.02, current=CurrentField(Vec3(0.1, -0.05, 0.02),
                                            Vec3(0.03, 0.02, 0.01), 4.0),
              backend=backend)
    w.add_body("seabed", HalfSpace(), kinematic=True, pose=Pose(Vec3(0, 0, -1.0)))
    shapes = [Sphere(0.1), Capsule(0.15, 0.05), Box(Vec3(0.1, 0.08, 0.12)),
              Sphere(0.07), Box(Vec3(0.15, 0.15, 0.05)), Capsule(0.1, 0.04)]
    for k, shape in enumerate(shapes):
        axis = Vec3(rng.gauss(0, 1), rng.gauss(0, 1), rng.gauss(0, 1))
        q = Quat.from_axis_angle(axis, rng.uniform(-2, 2)) if axis.norm() > 1e-6 else Quat.identity()
        mass = rng.uniform(0.5, 5.0)
        w.add_body(
            f"b{k}", shape, mass=mass,
            pose=Pose(Vec3(0.35 * k - 0.8, 0.2 * ((-1) ** k), rng.uniform(-0.6, 0.2)), q),
            velocity=Vec3(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)),
            angular_velocity=Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)),
            hydro=HydroParams(displaced_volume=mass / 1500.0,
                              added_mass_diag=Vec3(0.3, 0.3, 0.3),
                              linear_drag_diag=Vec3(1, 1, 1),
                              quadratic_drag_diag=Vec3(2, 2, 2),
                              angular_drag_diag=Vec3(0.1, 0.1, 0.1)),
            restitution=rng.uniform(0.0, 0.8),
            friction=rng.uniform(0.1, 0.9),
        )
    return w


@needs_native
class TestBitExactness:
    def test_trajectories_bit_identical_over_500_steps(self):
        wp = messy_world("pure")
        wn = messy_world("native")
        for step in range(500):
            wp.step()
            wn.step()
            if step % 50 == 0 or step == 499:
                assert wp.state_bytes() == wn.state_bytes(), f"diverged at step {step}"

    def test_detect_contacts_identical(self):
        wp = messy_world("pure")
        wn = messy_world("native")
        for _ in range(30):
            wp.step()
            wn.step()
        cp = wp.detect_contacts()
        cn = wn.detect_contacts()
        assert len(cp) == len(cn)
        for a, b in zip(cp, cn):
            assert a[0] == b[0] and a[1] == b[1]
            assert a[2] == b[2]  # exact Vec3 equality
            assert a[3] == b[3]
            assert a[4] == b[4]

    def test_forces_identical_single_call(self):
        wp = messy_world("pure")
        wn = messy_world("native")
        wp._ensure()
        wn._ensure()
        grav = np.array(wp.gravity.as_tuple(), dtype=np.float64)
        for w in (wp, wn):
            w._kern.eval_forces(w.pos, w.quat, w.vel, w.angvel, w.mass,
                                w.kinematic, w.fluid_density, w.displaced_volume,
                                w.cob_offset, grav, w.ext_force, w.ext_torque,
                                w._force, w._torque)
        assert wp._force.tobytes() == wn._force.tobytes()
        assert wp._torque.tobytes() == wn._torque.tobytes()

    def test_capsule_box_interior_search_identical(self):
        # The golden-section interior branch is iteration-count pinned; both
        # backends must agree bitwise even there.
        def build(backend):
            w = World(dt=0.01, gravity=Vec3(0, 0, 0), backend=backend)
            w.add_body("box", Box(Vec3(0.2, 0.2, 0.2)), kinematic=True)
            # capsule core passing through the box interior
            w.add_body("cap", Capsule(0.3, 0.05), mass=1.0,
                       pose=Pose(Vec3(0.05, 0.02, 0.0),
                                 Quat.from_axis_angle(Vec3(0, 1, 0), 1.0)),
                       velocity=Vec3(0.1, 0, 0))
            return w

        wp, wn = build("pure"), build("native")
        for _ in range(20):
            wp.step()
            wn.step()
        assert wp.state_bytes() == wn.state_bytes()


@needs_native
class TestBackendSelection:
    def test_env_override(self, monkeypatch):
        assert kernels.get_backend("pure").BACKEND_NAME == "pure"
        assert kernels.get_backend("native").BACKEND_NAME == "native"
        with pytest.raises(ValueError):
            kernels.get_backend("turbo")

    def test_auto_prefers_native_when_built(self):
        assert kernels.get_backend("auto").BACKEND_NAME == "native"
