"""Impulse solver: conservation laws, restitution limits, force estimation."""

import random
import time

from marun2.frames import Pose, Vec3
from marun2.physics import ContactPhase, HalfSpace, HydroParams, Sphere, World


def two_sphere_world(pa, va, ma, ra, pb, vb, mb, rb, e=0.1, mu=0.5,
                     kin_a=False, kin_b=False):
    w = World(dt=0.005, gravity=Vec3(0, 0, 0))
    w.add_body("a", Sphere(ra), mass=ma, pose=Pose(pa), velocity=va,
               restitution=e, friction=mu, kinematic=kin_a)
    w.add_body("b", Sphere(rb), mass=mb, pose=Pose(pb), velocity=vb,
               restitution=e, friction=mu, kinematic=kin_b)
    return w


def total_ke(w):
    return w.kinetic_energy("a") + w.kinetic_energy("b")


class TestImpulseLaw:
    def test_equal_mass_headon_elastic_exchange(self):
        w = two_sphere_world(Vec3(-0.21, 0, 0), Vec3(1.0, 0, 0), 2.0, 0.1,
                             Vec3(0.0, 0, 0), Vec3(-1.0, 0, 0), 2.0, 0.1, e=1.0)
        for _ in range(10):
            w.step()
        va = w.body_state("a").linear_velocity
        vb = w.body_state("b").linear_velocity
        assert abs(va.x + 1.0) < 1e-12 and abs(vb.x - 1.0) < 1e-12
        assert abs(va.y) < 1e-15 and abs(va.z) < 1e-15

    def test_perfectly_inelastic_kills_normal_velocity(self):
        # e = 0: post-impact relative normal velocity is zero (to 1e-9).
        w = two_sphere_world(Vec3(-0.1995, 0, 0), Vec3(1.5, 0, 0), 3.0, 0.1,
                             Vec3(0.0, 0, 0), Vec3(0.0, 0, 0), 1.0, 0.1, e=0.0)
        w.step()
        va = w.body_state("a").linear_velocity
        vb = w.body_state("b").linear_velocity
        assert abs(vb.x - va.x) < 1e-9

    def test_both_kinematic_zero_impulse_event_emitted(self):
        w = two_sphere_world(Vec3(0, 0, 0), Vec3(0, 0, 0), 1.0, 0.1,
                             Vec3(0.15, 0, 0), Vec3(0, 0, 0), 1.0, 0.1,
                             kin_a=True, kin_b=True)
        events = w.step()
        assert len(events) == 1
        assert events[0].phase is ContactPhase.ENTER
        assert events[0].impulse == 0.0

    def test_momentum_and_energy_1000_random_impacts(self):
        # Momentum is conserved to 1e-9 absolute and kinetic energy never
        # grows for e <= 1. Spawn overlaps stay below the solver slop so the
        # positional bias is inert and the impulse law alone is exercised.
        rng = random.Random(2024)
        t0 = time.monotonic()
        for trial in range(1000):
            ra = rng.uniform(0.05, 0.2)
            rb = rng.uniform(0.05, 0.2)
            ma = rng.uniform(0.2, 10.0)
            mb = rng.uniform(0.2, 10.0)
            e = rng.uniform(0.0, 1.0)
            mu = rng.uniform(0.0, 1.0)
            # Random contact direction; small spawn overlap; closing velocity.
            d = Vec3(rng.gauss(0, 1), rng.gauss(0, 1), rng.gauss(0, 1))
            while d.norm() < 1e-3:
                d = Vec3(rng.gauss(0, 1), rng.gauss(0, 1), rng.gauss(0, 1))
            d = d.normalized()
            overlap = rng.uniform(0.1e-3, 0.9e-3)
            pb = d * (ra + rb - overlap)
            va = d * rng.uniform(0.3, 3.0) + Vec3(rng.gauss(0, 0.5), rng.gauss(0, 0.5), rng.gauss(0, 0.5))
            vb = -d * rng.uniform(0.0, 2.0) + Vec3(rng.gauss(0, 0.5), rng.gauss(0, 0.5), rng.gauss(0, 0.5))
            w = two_sphere_world(Vec3(0, 0, 0), va, ma, ra, pb, vb, mb, rb, e=e, mu=mu)
            p0 = w.momentum()
            ke0 = total_ke(w)
            w.step()
            p1 = w.momentum()
            ke1 = total_ke(w)
            assert (p1 - p0).norm() < 1e-9, f"momentum broke at trial {trial}"
            assert ke1 <= ke0 + 1e-9, f"energy grew at trial {trial}"
        assert time.monotonic() - t0 < 10.0

    def test_friction_drags_tangentially_under_normal_load(self):
        # An oblique impact: the normal impulse gives friction headroom, so
        # some tangential momentum transfers to the struck sphere.
        w = two_sphere_world(Vec3(0, 0, 0), Vec3(0.8, 1.0, 0), 1.0, 0.1,
                             Vec3(0.1995, 0, 0), Vec3(0, 0, 0), 1.0, 0.1,
                             e=0.0, mu=0.8)
        w.step()
        va = w.body_state("a").linear_velocity
        vb = w.body_state("b").linear_velocity
        assert vb.y > 0.0  # friction dragged b along
        assert va.y < 1.0


class TestRestingContact:
    @staticmethod
    def resting_world(mass=5.0, radius=0.1, volume=0.001):
        w = World(dt=0.02)
        w.add_body("seabed", HalfSpace(), kinematic=True)
        w.add_body("rock", Sphere(radius), mass=mass, pose=Pose(Vec3(0, 0, 0.25)),
                   hydro=HydroParams(displaced_volume=volume,
                                     linear_drag_diag=Vec3(5, 5, 5)))
        return w

    def test_force_estimate_matches_submerged_weight(self):
        mass, volume = 5.0, 0.001
        w = self.resting_world(mass=mass, volume=volume)
        for _ in range(500):
            w.step()
        submerged_weight = mass * 9.81 - 1025.0 * volume * 9.81
        force = w.contact_force("seabed", "rock")
        assert abs(force - submerged_weight) / submerged_weight < 0.05

    def test_force_resets_to_zero_on_exit(self):
        w = self.resting_world()
        for _ in range(500):
            w.step()
        assert w.contact_force("seabed", "rock") > 0.0
        # Yank the rock off the bottom.
        w.set_velocity("rock", Vec3(0, 0, 2.0))
        exit_seen = False
        for _ in range(10):
            events = w.step()
            for ev in events:
                if ev.phase is ContactPhase.EXIT:
                    exit_seen = True
                    assert ev.estimated_force == 0.0 and ev.impulse == 0.0
        assert exit_seen
        assert w.contact_force("seabed", "rock") == 0.0

    def test_penetration_monotone_during_settling(self):
        # After the bounce dies out, positional correction only shrinks the
        # penetration of a persisting pair.
        w = self.resting_world()
        depths = []
        for _ in range(500):
            events = w.step()
            for ev in events:
                if ev.phase in (ContactPhase.ENTER, ContactPhase.STAY):
                    depths.append(ev.penetration)
        tail = depths[-100:]
        assert all(b <= a + 1e-12 for a, b in zip(tail, tail[1:]))
        # And it settles at (or below) the configured slop.
        assert tail[-1] <= 0.001 + 1e-9

    def test_no_contact_zero_force(self):
        w = self.resting_world()
        w.step()
        assert w.contact_force("rock", "nothing") == 0.0
