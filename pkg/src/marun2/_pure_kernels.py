"""Pure-Python step kernels: forces, integration, narrow phase, impulses.

This module is the fallback twin of the compiled extension
``marun2._native_kernels``. Both implement the same five entry points with
identical arithmetic (same operations, same order, IEEE-754 doubles), so a
simulation produces bit-identical state trajectories on either backend; the
replay state-hash machinery depends on that. Keep every expression in sync
with the .pyx file when editing.

All kernels operate on the world's flat arrays:

    pos (N,3), quat (N,4 wxyz), vel (N,3), angvel (N,3) float64
    mass (N,), inertia (N,3) float64, kinematic (N,) uint8
    shape_type (N,) int32, shape_params (N,4) float64
    pairs (P,2) int32 candidate pairs, contact buffers sized P

Angular state is stored in the world frame; drag/added-mass coefficients are
diagonal in the body frame.
"""

from __future__ import annotations

import math

BACKEND_NAME = "pure"

_EPS = 1e-12


def _rotate(qw, qx, qy, qz, vx, vy, vz):
    # v' = v + 2 w (qv x v) + 2 qv x (qv x v)
    tx = 2.0 * (qy * vz - qz * vy)
    ty = 2.0 * (qz * vx - qx * vz)
    tz = 2.0 * (qx * vy - qy * vx)
    rx = vx + qw * tx + (qy * tz - qz * ty)
    ry = vy + qw * ty + (qz * tx - qx * tz)
    rz = vz + qw * tz + (qx * ty - qy * tx)
    return rx, ry, rz


def _rotate_inv(qw, qx, qy, qz, vx, vy, vz):
    return _rotate(qw, -qx, -qy, -qz, vx, vy, vz)


def eval_forces(
    pos, quat, vel, angvel, mass, kinematic,
    fluid_density, displaced_volume, cob_offset,
    gravity, ext_force, ext_torque,
    force, torque,
):
    """Gravity + buoyancy + externally applied wrenches (drag is integrated
    separately, inside integrate_velocities, for stiffness stability)."""
    n = pos.shape[0]
    gx = float(gravity[0]); gy = float(gravity[1]); gz = float(gravity[2])
    for i in range(n):
        if kinematic[i]:
            force[i, 0] = 0.0; force[i, 1] = 0.0; force[i, 2] = 0.0
            torque[i, 0] = 0.0; torque[i, 1] = 0.0; torque[i, 2] = 0.0
            continue
        m = float(mass[i])
        qw = float(quat[i, 0]); qx = float(quat[i, 1])
        qy = float(quat[i, 2]); qz = float(quat[i, 3])

        fx = m * gx + float(ext_force[i, 0])
        fy = m * gy + float(ext_force[i, 1])
        fz = m * gz + float(ext_force[i, 2])
        tx = float(ext_torque[i, 0])
        ty = float(ext_torque[i, 1])
        tz = float(ext_torque[i, 2])

        # Buoyancy: -rho * V * g, applied at the center of buoyancy.
        rho_v = float(fluid_density[i]) * float(displaced_volume[i])
        bfx = -rho_v * gx; bfy = -rho_v * gy; bfz = -rho_v * gz
        fx += bfx; fy += bfy; fz += bfz
        rbx, rby, rbz = _rotate(qw, qx, qy, qz,
                                float(cob_offset[i, 0]), float(cob_offset[i, 1]), float(cob_offset[i, 2]))
        tx += rby * bfz - rbz * bfy
        ty += rbz * bfx - rbx * bfz
        tz += rbx * bfy - rby * bfx

        force[i, 0] = fx; force[i, 1] = fy; force[i, 2] = fz
        torque[i, 0] = tx; torque[i, 1] = ty; torque[i, 2] = tz


def integrate_velocities(vel, angvel, force, torque, quat, mass, added_mass,
                         inertia, kinematic, lin_drag, quad_drag, ang_drag,
                         current, dt):
    """Velocity update: explicit forces, then body-frame drag.

    The linear terms (-L∘u and the angular analogue) are integrated exactly
    as exponential decays of the flow-relative velocity, which is
    unconditionally stable however stiff the coefficients; a forward-Euler
    step would demand L*dt/m < 2. The quadratic term -Q∘(|u| u) is explicit
    but saturated so one step can never push a component of u past zero.
    """
    n = vel.shape[0]
    cx = float(current[0]); cy = float(current[1]); cz = float(current[2])
    for i in range(n):
        if kinematic[i]:
            continue
        qw = float(quat[i, 0]); qx = float(quat[i, 1])
        qy = float(quat[i, 2]); qz = float(quat[i, 3])
        m = float(mass[i])
        ma0 = m + float(added_mass[i, 0])
        ma1 = m + float(added_mass[i, 1])
        ma2 = m + float(added_mass[i, 2])

        fbx, fby, fbz = _rotate_inv(qw, qx, qy, qz,
                                    float(force[i, 0]), float(force[i, 1]), float(force[i, 2]))
        abx = fbx / ma0
        aby = fby / ma1
        abz = fbz / ma2
        awx, awy, awz = _rotate(qw, qx, qy, qz, abx, aby, abz)
        vx = float(vel[i, 0]) + awx * dt
        vy = float(vel[i, 1]) + awy * dt
        vz = float(vel[i, 2]) + awz * dt

        # Drag acts on the flow-relative velocity, per body-frame axis.
        ubx, uby, ubz = _rotate_inv(qw, qx, qy, qz, vx - cx, vy - cy, vz - cz)
        ubx *= math.exp(-float(lin_drag[i, 0]) * dt / ma0)
        uby *= math.exp(-float(lin_drag[i, 1]) * dt / ma1)
        ubz *= math.exp(-float(lin_drag[i, 2]) * dt / ma2)
        speed = math.sqrt(ubx * ubx + uby * uby + ubz * ubz)
        if speed > 0.0:
            dqx = -float(quad_drag[i, 0]) * speed * ubx * dt / ma0
            dqy = -float(quad_drag[i, 1]) * speed * uby * dt / ma1
            dqz = -float(quad_drag[i, 2]) * speed * ubz * dt / ma2
            ubx = 0.0 if (dqx if dqx >= 0.0 else -dqx) >= (ubx if ubx >= 0.0 else -ubx) else ubx + dqx
            uby = 0.0 if (dqy if dqy >= 0.0 else -dqy) >= (uby if uby >= 0.0 else -uby) else uby + dqy
            ubz = 0.0 if (dqz if dqz >= 0.0 else -dqz) >= (ubz if ubz >= 0.0 else -ubz) else ubz + dqz
        uwx, uwy, uwz = _rotate(qw, qx, qy, qz, ubx, uby, ubz)
        vel[i, 0] = cx + uwx
        vel[i, 1] = cy + uwy
        vel[i, 2] = cz + uwz

        tbx, tby, tbz = _rotate_inv(qw, qx, qy, qz,
                                    float(torque[i, 0]), float(torque[i, 1]), float(torque[i, 2]))
        i0 = float(inertia[i, 0]); i1 = float(inertia[i, 1]); i2 = float(inertia[i, 2])
        wbx, wby, wbz = _rotate_inv(qw, qx, qy, qz,
                                    float(angvel[i, 0]), float(angvel[i, 1]), float(angvel[i, 2]))
        wbx = wbx + (tbx / i0) * dt
        wby = wby + (tby / i1) * dt
        wbz = wbz + (tbz / i2) * dt
        wbx *= math.exp(-float(ang_drag[i, 0]) * dt / i0)
        wby *= math.exp(-float(ang_drag[i, 1]) * dt / i1)
        wbz *= math.exp(-float(ang_drag[i, 2]) * dt / i2)
        wwx, wwy, wwz = _rotate(qw, qx, qy, qz, wbx, wby, wbz)
        angvel[i, 0] = wwx
        angvel[i, 1] = wwy
        angvel[i, 2] = wwz


def integrate_poses(pos, quat, vel, angvel, kinematic, dt):
    """Position and attitude update; kinematic bodies have imposed poses."""
    n = pos.shape[0]
    for i in range(n):
        if kinematic[i]:
            continue
        pos[i, 0] = float(pos[i, 0]) + float(vel[i, 0]) * dt
        pos[i, 1] = float(pos[i, 1]) + float(vel[i, 1]) * dt
        pos[i, 2] = float(pos[i, 2]) + float(vel[i, 2]) * dt

        qw = float(quat[i, 0]); qx = float(quat[i, 1])
        qy = float(quat[i, 2]); qz = float(quat[i, 3])
        wx = float(angvel[i, 0]); wy = float(angvel[i, 1]); wz = float(angvel[i, 2])
        # qdot = 0.5 * (0, w) ⊗ q
        h = 0.5 * dt
        nw = qw - h * (wx * qx + wy * qy + wz * qz)
        nx = qx + h * (qw * wx + (wy * qz - wz * qy))
        ny = qy + h * (qw * wy + (wz * qx - wx * qz))
        nz = qz + h * (qw * wz + (wx * qy - wy * qx))
        norm = math.sqrt(nw * nw + nx * nx + ny * ny + nz * nz)
        quat[i, 0] = nw / norm
        quat[i, 1] = nx / norm
        quat[i, 2] = ny / norm
        quat[i, 3] = nz / norm


# --- narrow phase ---------------------------------------------------------

_SPHERE = 0
_CAPSULE = 1
_BOX = 2
_HALFSPACE = 3


def _capsule_segment(px, py, pz, qw, qx, qy, qz, half_len):
    ax, ay, az = _rotate(qw, qx, qy, qz, 0.0, 0.0, half_len)
    return px - ax, py - ay, pz - az, px + ax, py + ay, pz + az


def _sphere_sphere(ax, ay, az, ra, bx, by, bz, rb):
    dx = bx - ax; dy = by - ay; dz = bz - az
    rsum = ra + rb
    d2 = dx * dx + dy * dy + dz * dz
    if d2 >= rsum * rsum:
        return None
    d = math.sqrt(d2)
    if d > _EPS:
        nx = dx / d; ny = dy / d; nz = dz / d
    else:
        nx = 0.0; ny = 0.0; nz = 1.0
    depth = rsum - d
    t = ra - 0.5 * depth
    return (ax + nx * t, ay + ny * t, az + nz * t, nx, ny, nz, depth)


def _closest_on_segment(px, py, pz, ax, ay, az, bx, by, bz):
    dx = bx - ax; dy = by - ay; dz = bz - az
    dd = dx * dx + dy * dy + dz * dz
    if dd <= _EPS:
        return ax, ay, az
    t = ((px - ax) * dx + (py - ay) * dy + (pz - az) * dz) / dd
    if t < 0.0:
        t = 0.0
    elif t > 1.0:
        t = 1.0
    return ax + dx * t, ay + dy * t, az + dz * t


def _closest_segment_segment(p1x, p1y, p1z, q1x, q1y, q1z,
                             p2x, p2y, p2z, q2x, q2y, q2z):
    # Ericson, Real-Time Collision Detection, 5.1.9 (clamped line segments).
    d1x = q1x - p1x; d1y = q1y - p1y; d1z = q1z - p1z
    d2x = q2x - p2x; d2y = q2y - p2y; d2z = q2z - p2z
    rx = p1x - p2x; ry = p1y - p2y; rz = p1z - p2z
    a = d1x * d1x + d1y * d1y + d1z * d1z
    e = d2x * d2x + d2y * d2y + d2z * d2z
    f = d2x * rx + d2y * ry + d2z * rz
    if a <= _EPS and e <= _EPS:
        s = 0.0; t = 0.0
    elif a <= _EPS:
        s = 0.0
        t = f / e
        t = 0.0 if t < 0.0 else (1.0 if t > 1.0 else t)
    else:
        c = d1x * rx + d1y * ry + d1z * rz
        if e <= _EPS:
            t = 0.0
            s = -c / a
            s = 0.0 if s < 0.0 else (1.0 if s > 1.0 else s)
        else:
            b = d1x * d2x + d1y * d2y + d1z * d2z
            denom = a * e - b * b
            if denom != 0.0:
                s = (b * f - c * e) / denom
                s = 0.0 if s < 0.0 else (1.0 if s > 1.0 else s)
            else:
                s = 0.0
            t = (b * s + f) / e
            if t < 0.0:
                t = 0.0
                s = -c / a
                s = 0.0 if s < 0.0 else (1.0 if s > 1.0 else s)
            elif t > 1.0:
                t = 1.0
                s = (b - c) / a
                s = 0.0 if s < 0.0 else (1.0 if s > 1.0 else s)
    return (p1x + d1x * s, p1y + d1y * s, p1z + d1z * s,
            p2x + d2x * t, p2y + d2y * t, p2z + d2z * t)


def _sphere_box(cx, cy, cz, r, bx, by, bz, bqw, bqx, bqy, bqz, hx, hy, hz):
    lx, ly, lz = _rotate_inv(bqw, bqx, bqy, bqz, cx - bx, cy - by, cz - bz)
    px = -hx if lx < -hx else (hx if lx > hx else lx)
    py = -hy if ly < -hy else (hy if ly > hy else ly)
    pz = -hz if lz < -hz else (hz if lz > hz else lz)
    dx = lx - px; dy = ly - py; dz = lz - pz
    d2 = dx * dx + dy * dy + dz * dz
    if d2 > _EPS:
        if d2 >= r * r:
            return None
        d = math.sqrt(d2)
        ox = dx / d; oy = dy / d; oz = dz / d  # outward from box surface
        depth = r - d
        wx, wy, wz = _rotate(bqw, bqx, bqy, bqz, px, py, pz)
        nwx, nwy, nwz = _rotate(bqw, bqx, bqy, bqz, ox, oy, oz)
        return (bx + wx, by + wy, bz + wz, -nwx, -nwy, -nwz, depth)
    # Sphere center inside the box: push out through the nearest face.
    mx = hx - (lx if lx >= 0.0 else -lx)
    my = hy - (ly if ly >= 0.0 else -ly)
    mz = hz - (lz if lz >= 0.0 else -lz)
    if mx <= my and mx <= mz:
        sx = 1.0 if lx >= 0.0 else -1.0
        ox = sx; oy = 0.0; oz = 0.0
        depth = r + mx
    elif my <= mz:
        sy = 1.0 if ly >= 0.0 else -1.0
        ox = 0.0; oy = sy; oz = 0.0
        depth = r + my
    else:
        sz = 1.0 if lz >= 0.0 else -1.0
        ox = 0.0; oy = 0.0; oz = sz
        depth = r + mz
    nwx, nwy, nwz = _rotate(bqw, bqx, bqy, bqz, ox, oy, oz)
    return (cx, cy, cz, -nwx, -nwy, -nwz, depth)


def _plane_world(px, py, pz, qw, qx, qy, qz, nx, ny, nz, offset):
    mwx, mwy, mwz = _rotate(qw, qx, qy, qz, nx, ny, nz)
    p0x = px + mwx * offset
    p0y = py + mwy * offset
    p0z = pz + mwz * offset
    return mwx, mwy, mwz, p0x, p0y, p0z


def _segment_box_closest(ax, ay, az, bx, by, bz, hx, hy, hz):
    """Exact closest parameter of segment a->b to a centered box (local frame).

    The squared distance is piecewise quadratic in t with breakpoints where a
    segment coordinate crosses a face plane; each piece is minimized in closed
    form.
    """
    dx = bx - ax; dy = by - ay; dz = bz - az
    ts = [0.0, 1.0]
    for (a0, d0, h0) in ((ax, dx, hx), (ay, dy, hy), (az, dz, hz)):
        if d0 != 0.0:
            for lim in (-h0, h0):
                t = (lim - a0) / d0
                if 0.0 < t < 1.0:
                    ts.append(t)
    ts.sort()
    best_t = 0.0
    best_d2 = math.inf
    for k in range(len(ts) - 1):
        t0 = ts[k]; t1 = ts[k + 1]
        if t1 - t0 <= 1e-15:
            continue
        tm = 0.5 * (t0 + t1)
        # Quadratic A t^2 + B t + C over this interval.
        qa = 0.0; qb = 0.0; qc = 0.0
        for (a0, d0, h0) in ((ax, dx, hx), (ay, dy, hy), (az, dz, hz)):
            pm = a0 + d0 * tm
            if pm > h0:
                r0 = a0 - h0
            elif pm < -h0:
                r0 = a0 + h0
            else:
                continue
            qa += d0 * d0
            qb += 2.0 * r0 * d0
            qc += r0 * r0
        if qa > 0.0:
            tstar = -qb / (2.0 * qa)
            if tstar < t0:
                tstar = t0
            elif tstar > t1:
                tstar = t1
        else:
            tstar = t0
        for tc in (t0, tstar, t1):
            d2 = qa * tc * tc + qb * tc + qc
            if d2 < best_d2:
                best_d2 = d2
                best_t = tc
    return best_t, best_d2


def _capsule_box(c_px, c_py, c_pz, c_qw, c_qx, c_qy, c_qz, c_h, c_r,
                 b_px, b_py, b_pz, b_qw, b_qx, b_qy, b_qz, hx, hy, hz):
    e1x, e1y, e1z, e2x, e2y, e2z = _capsule_segment(c_px, c_py, c_pz, c_qw, c_qx, c_qy, c_qz, c_h)
    a1x, a1y, a1z = _rotate_inv(b_qw, b_qx, b_qy, b_qz, e1x - b_px, e1y - b_py, e1z - b_pz)
    a2x, a2y, a2z = _rotate_inv(b_qw, b_qx, b_qy, b_qz, e2x - b_px, e2y - b_py, e2z - b_pz)
    t, d2 = _segment_box_closest(a1x, a1y, a1z, a2x, a2y, a2z, hx, hy, hz)
    px = a1x + (a2x - a1x) * t
    py = a1y + (a2y - a1y) * t
    pz = a1z + (a2z - a1z) * t
    if d2 > _EPS:
        if d2 >= c_r * c_r:
            return None
        qx = -hx if px < -hx else (hx if px > hx else px)
        qy = -hy if py < -hy else (hy if py > hy else py)
        qz = -hz if pz < -hz else (hz if pz > hz else pz)
        d = math.sqrt(d2)
        ox = (px - qx) / d; oy = (py - qy) / d; oz = (pz - qz) / d
        depth = c_r - d
        wx, wy, wz = _rotate(b_qw, b_qx, b_qy, b_qz, qx, qy, qz)
        nwx, nwy, nwz = _rotate(b_qw, b_qx, b_qy, b_qz, ox, oy, oz)
        return (b_px + wx, b_py + wy, b_pz + wz, -nwx, -nwy, -nwz, depth)
    # Segment core intersects the box: maximize interior depth along the
    # segment with a fixed-count golden-section search (the depth profile is
    # concave piecewise-linear).
    inv_phi = 0.6180339887498949
    lo = 0.0; hi = 1.0
    dseg_x = a2x - a1x; dseg_y = a2y - a1y; dseg_z = a2z - a1z

    def interior(tc):
        ix = a1x + dseg_x * tc
        iy = a1y + dseg_y * tc
        iz = a1z + dseg_z * tc
        gx = hx - (ix if ix >= 0.0 else -ix)
        gy = hy - (iy if iy >= 0.0 else -iy)
        gz = hz - (iz if iz >= 0.0 else -iz)
        g = gx if gx < gy else gy
        return g if g < gz else gz

    c1 = hi - inv_phi * (hi - lo)
    c2 = lo + inv_phi * (hi - lo)
    f1 = interior(c1)
    f2 = interior(c2)
    for _ in range(80):
        if f1 < f2:
            lo = c1
            c1 = c2; f1 = f2
            c2 = lo + inv_phi * (hi - lo)
            f2 = interior(c2)
        else:
            hi = c2
            c2 = c1; f2 = f1
            c1 = hi - inv_phi * (hi - lo)
            f1 = interior(c1)
    tbest = c1 if f1 >= f2 else c2
    ix = a1x + dseg_x * tbest
    iy = a1y + dseg_y * tbest
    iz = a1z + dseg_z * tbest
    gx = hx - (ix if ix >= 0.0 else -ix)
    gy = hy - (iy if iy >= 0.0 else -iy)
    gz = hz - (iz if iz >= 0.0 else -iz)
    if gx <= gy and gx <= gz:
        ox = 1.0 if ix >= 0.0 else -1.0; oy = 0.0; oz = 0.0
        depth = c_r + gx
    elif gy <= gz:
        oy = 1.0 if iy >= 0.0 else -1.0; ox = 0.0; oz = 0.0
        depth = c_r + gy
    else:
        oz = 1.0 if iz >= 0.0 else -1.0; ox = 0.0; oy = 0.0
        depth = c_r + gz
    wx, wy, wz = _rotate(b_qw, b_qx, b_qy, b_qz, ix, iy, iz)
    nwx, nwy, nwz = _rotate(b_qw, b_qx, b_qy, b_qz, ox, oy, oz)
    return (b_px + wx, b_py + wy, b_pz + wz, -nwx, -nwy, -nwz, depth)


def _quat_to_mat(qw, qx, qy, qz):
    r00 = 1.0 - 2.0 * (qy * qy + qz * qz)
    r01 = 2.0 * (qx * qy - qw * qz)
    r02 = 2.0 * (qx * qz + qw * qy)
    r10 = 2.0 * (qx * qy + qw * qz)
    r11 = 1.0 - 2.0 * (qx * qx + qz * qz)
    r12 = 2.0 * (qy * qz - qw * qx)
    r20 = 2.0 * (qx * qz - qw * qy)
    r21 = 2.0 * (qy * qz + qw * qx)
    r22 = 1.0 - 2.0 * (qx * qx + qy * qy)
    return (r00, r01, r02, r10, r11, r12, r20, r21, r22)


def _box_box(apx, apy, apz, aqw, aqx, aqy, aqz, ahx, ahy, ahz,
             bpx, bpy, bpz, bqw, bqx, bqy, bqz, bhx, bhy, bhz):
    # SAT over the 15 candidate axes; single deepest-point manifold.
    A = _quat_to_mat(aqw, aqx, aqy, aqz)
    B = _quat_to_mat(bqw, bqx, bqy, bqz)
    ah = (ahx, ahy, ahz)
    bh = (bhx, bhy, bhz)
    # R[i][j] = a_i . b_j ; t expressed in A's frame.
    R = [[0.0] * 3 for _ in range(3)]
    for i in range(3):
        for j in range(3):
            R[i][j] = A[i] * B[j] + A[3 + i] * B[3 + j] + A[6 + i] * B[6 + j]
    dx = bpx - apx; dy = bpy - apy; dz = bpz - apz
    t = [A[0] * dx + A[3] * dy + A[6] * dz,
         A[1] * dx + A[4] * dy + A[7] * dz,
         A[2] * dx + A[5] * dy + A[8] * dz]
    absR = [[abs(R[i][j]) + 1e-12 for j in range(3)] for i in range(3)]

    best_depth = math.inf
    best_kind = -1  # 0..2 face of A, 3..5 face of B, 6..14 edge-edge
    best_sign = 1.0
    # Faces of A.
    for i in range(3):
        ra = ah[i]
        rb = bh[0] * absR[i][0] + bh[1] * absR[i][1] + bh[2] * absR[i][2]
        overlap = ra + rb - abs(t[i])
        if overlap <= 0.0:
            return None
        if overlap < best_depth:
            best_depth = overlap
            best_kind = i
            best_sign = 1.0 if t[i] >= 0.0 else -1.0
    # Faces of B.
    for j in range(3):
        ra = ah[0] * absR[0][j] + ah[1] * absR[1][j] + ah[2] * absR[2][j]
        rb = bh[j]
        tb = t[0] * R[0][j] + t[1] * R[1][j] + t[2] * R[2][j]
        overlap = ra + rb - abs(tb)
        if overlap <= 0.0:
            return None
        if overlap < best_depth:
            best_depth = overlap
            best_kind = 3 + j
            best_sign = 1.0 if tb >= 0.0 else -1.0
    # Edge cross products a_i x b_j.
    for i in range(3):
        for j in range(3):
            i1 = (i + 1) % 3; i2 = (i + 2) % 3
            j1 = (j + 1) % 3; j2 = (j + 2) % 3
            ra = ah[i1] * absR[i2][j] + ah[i2] * absR[i1][j]
            rb = bh[j1] * absR[i][j2] + bh[j2] * absR[i][j1]
            tl = t[i2] * R[i1][j] - t[i1] * R[i2][j]
            length2 = 1.0 - R[i][j] * R[i][j]
            if length2 < 1e-9:
                continue  # near-parallel edges; face axes cover this
            length = math.sqrt(length2)
            overlap = (ra + rb - abs(tl)) / length
            if overlap <= 0.0:
                return None
            if overlap < best_depth:
                best_depth = overlap
                best_kind = 6 + 3 * i + j
                best_sign = 1.0 if tl >= 0.0 else -1.0

    ax_cols = ((A[0], A[3], A[6]), (A[1], A[4], A[7]), (A[2], A[5], A[8]))
    bx_cols = ((B[0], B[3], B[6]), (B[1], B[4], B[7]), (B[2], B[5], B[8]))

    if best_kind < 3:
        nx, ny, nz = ax_cols[best_kind]
        nx *= best_sign; ny *= best_sign; nz *= best_sign
        # Deepest vertex of B along -n.
        px = bpx; py = bpy; pz = bpz
        for j in range(3):
            cjx, cjy, cjz = bx_cols[j]
            s = -1.0 if (nx * cjx + ny * cjy + nz * cjz) >= 0.0 else 1.0
            px += s * bh[j] * cjx; py += s * bh[j] * cjy; pz += s * bh[j] * cjz
        return (px, py, pz, nx, ny, nz, best_depth)
    if best_kind < 6:
        j = best_kind - 3
        nx, ny, nz = bx_cols[j]
        nx *= best_sign; ny *= best_sign; nz *= best_sign
        # Deepest vertex of A along +n.
        px = apx; py = apy; pz = apz
        for i in range(3):
            cix, ciy, ciz = ax_cols[i]
            s = 1.0 if (nx * cix + ny * ciy + nz * ciz) >= 0.0 else -1.0
            px += s * ah[i] * cix; py += s * ah[i] * ciy; pz += s * ah[i] * ciz
        return (px, py, pz, nx, ny, nz, best_depth)

    # Edge-edge: contact at the midpoint of the closest points of the edges.
    k = best_kind - 6
    i = k // 3
    j = k % 3
    aix, aiy, aiz = ax_cols[i]
    bjx, bjy, bjz = bx_cols[j]
    nx = aiy * bjz - aiz * bjy
    ny = aiz * bjx - aix * bjz
    nz = aix * bjy - aiy * bjx
    nl = math.sqrt(nx * nx + ny * ny + nz * nz)
    nx /= nl; ny /= nl; nz /= nl
    nx *= best_sign; ny *= best_sign; nz *= best_sign
    # Support corners, then closest points of the two edge lines.
    pax = apx; pay = apy; paz = apz
    for ii in range(3):
        if ii == i:
            continue
        cix, ciy, ciz = ax_cols[ii]
        s = 1.0 if (nx * cix + ny * ciy + nz * ciz) >= 0.0 else -1.0
        pax += s * ah[ii] * cix; pay += s * ah[ii] * ciy; paz += s * ah[ii] * ciz
    pbx = bpx; pby = bpy; pbz = bpz
    for jj in range(3):
        if jj == j:
            continue
        cjx, cjy, cjz = bx_cols[jj]
        s = -1.0 if (nx * cjx + ny * cjy + nz * cjz) >= 0.0 else 1.0
        pbx += s * bh[jj] * cjx; pby += s * bh[jj] * cjy; pbz += s * bh[jj] * cjz
    qa1x = pax - ah[i] * aix; qa1y = pay - ah[i] * aiy; qa1z = paz - ah[i] * aiz
    qa2x = pax + ah[i] * aix; qa2y = pay + ah[i] * aiy; qa2z = paz + ah[i] * aiz
    qb1x = pbx - bh[j] * bjx; qb1y = pby - bh[j] * bjy; qb1z = pbz - bh[j] * bjz
    qb2x = pbx + bh[j] * bjx; qb2y = pby + bh[j] * bjy; qb2z = pbz + bh[j] * bjz
    c1x, c1y, c1z, c2x, c2y, c2z = _closest_segment_segment(
        qa1x, qa1y, qa1z, qa2x, qa2y, qa2z, qb1x, qb1y, qb1z, qb2x, qb2y, qb2z)
    return (0.5 * (c1x + c2x), 0.5 * (c1y + c2y), 0.5 * (c1z + c2z),
            nx, ny, nz, best_depth)


def _body_aabb(i, pos, quat, shape_type, shape_params, aabb):
    st = shape_type[i]
    px = float(pos[i, 0]); py = float(pos[i, 1]); pz = float(pos[i, 2])
    if st == _SPHERE:
        r = float(shape_params[i, 0])
        aabb[i, 0] = px - r; aabb[i, 1] = py - r; aabb[i, 2] = pz - r
        aabb[i, 3] = px + r; aabb[i, 4] = py + r; aabb[i, 5] = pz + r
    elif st == _CAPSULE:
        h = float(shape_params[i, 0]); r = float(shape_params[i, 1])
        qw = float(quat[i, 0]); qx = float(quat[i, 1]); qy = float(quat[i, 2]); qz = float(quat[i, 3])
        e1x, e1y, e1z, e2x, e2y, e2z = _capsule_segment(px, py, pz, qw, qx, qy, qz, h)
        aabb[i, 0] = (e1x if e1x < e2x else e2x) - r
        aabb[i, 1] = (e1y if e1y < e2y else e2y) - r
        aabb[i, 2] = (e1z if e1z < e2z else e2z) - r
        aabb[i, 3] = (e1x if e1x > e2x else e2x) + r
        aabb[i, 4] = (e1y if e1y > e2y else e2y) + r
        aabb[i, 5] = (e1z if e1z > e2z else e2z) + r
    elif st == _BOX:
        hx = float(shape_params[i, 0]); hy = float(shape_params[i, 1]); hz = float(shape_params[i, 2])
        qw = float(quat[i, 0]); qx = float(quat[i, 1]); qy = float(quat[i, 2]); qz = float(quat[i, 3])
        m = _quat_to_mat(qw, qx, qy, qz)
        ex = abs(m[0]) * hx + abs(m[1]) * hy + abs(m[2]) * hz
        ey = abs(m[3]) * hx + abs(m[4]) * hy + abs(m[5]) * hz
        ez = abs(m[6]) * hx + abs(m[7]) * hy + abs(m[8]) * hz
        aabb[i, 0] = px - ex; aabb[i, 1] = py - ey; aabb[i, 2] = pz - ez
        aabb[i, 3] = px + ex; aabb[i, 4] = py + ey; aabb[i, 5] = pz + ez
    else:
        aabb[i, 0] = -1e30; aabb[i, 1] = -1e30; aabb[i, 2] = -1e30
        aabb[i, 3] = 1e30; aabb[i, 4] = 1e30; aabb[i, 5] = 1e30


def detect_contacts(pos, quat, shape_type, shape_params, pairs,
                    aabb, c_a, c_b, c_point, c_normal, c_depth):
    """Single deepest-point contact per intersecting candidate pair.

    Returns the number of contacts written. Normals point from the first body
    of the pair to the second. Returns -(pair_index + 1) for an unsupported
    shape combination.
    """
    n = pos.shape[0]
    np_ = pairs.shape[0]
    for i in range(n):
        _body_aabb(i, pos, quat, shape_type, shape_params, aabb)
    count = 0
    for p in range(np_):
        i = int(pairs[p, 0]); j = int(pairs[p, 1])
        if (aabb[i, 3] < aabb[j, 0] or aabb[j, 3] < aabb[i, 0]
                or aabb[i, 4] < aabb[j, 1] or aabb[j, 4] < aabb[i, 1]
                or aabb[i, 5] < aabb[j, 2] or aabb[j, 5] < aabb[i, 2]):
            continue
        ti = int(shape_type[i]); tj = int(shape_type[j])
        if ti <= tj:
            a, b = i, j
            flip = False
        else:
            a, b = j, i
            flip = True
        ta = int(shape_type[a]); tb = int(shape_type[b])
        apx = float(pos[a, 0]); apy = float(pos[a, 1]); apz = float(pos[a, 2])
        bpx = float(pos[b, 0]); bpy = float(pos[b, 1]); bpz = float(pos[b, 2])
        aqw = float(quat[a, 0]); aqx = float(quat[a, 1]); aqy = float(quat[a, 2]); aqz = float(quat[a, 3])
        bqw = float(quat[b, 0]); bqx = float(quat[b, 1]); bqy = float(quat[b, 2]); bqz = float(quat[b, 3])

        res = None
        if ta == _SPHERE and tb == _SPHERE:
            res = _sphere_sphere(apx, apy, apz, float(shape_params[a, 0]),
                                 bpx, bpy, bpz, float(shape_params[b, 0]))
        elif ta == _SPHERE and tb == _CAPSULE:
            h = float(shape_params[b, 0]); r = float(shape_params[b, 1])
            e1x, e1y, e1z, e2x, e2y, e2z = _capsule_segment(bpx, bpy, bpz, bqw, bqx, bqy, bqz, h)
            cx, cy, cz = _closest_on_segment(apx, apy, apz, e1x, e1y, e1z, e2x, e2y, e2z)
            res = _sphere_sphere(apx, apy, apz, float(shape_params[a, 0]), cx, cy, cz, r)
        elif ta == _SPHERE and tb == _BOX:
            res = _sphere_box(apx, apy, apz, float(shape_params[a, 0]),
                              bpx, bpy, bpz, bqw, bqx, bqy, bqz,
                              float(shape_params[b, 0]), float(shape_params[b, 1]), float(shape_params[b, 2]))
        elif ta == _SPHERE and tb == _HALFSPACE:
            mx, my, mz, p0x, p0y, p0z = _plane_world(
                bpx, bpy, bpz, bqw, bqx, bqy, bqz,
                float(shape_params[b, 0]), float(shape_params[b, 1]), float(shape_params[b, 2]),
                float(shape_params[b, 3]))
            r = float(shape_params[a, 0])
            s = (apx - p0x) * mx + (apy - p0y) * my + (apz - p0z) * mz
            depth = r - s
            if depth > 0.0:
                res = (apx - mx * r, apy - my * r, apz - mz * r, -mx, -my, -mz, depth)
        elif ta == _CAPSULE and tb == _CAPSULE:
            ha = float(shape_params[a, 0]); ra = float(shape_params[a, 1])
            hb = float(shape_params[b, 0]); rb = float(shape_params[b, 1])
            a1x, a1y, a1z, a2x, a2y, a2z = _capsule_segment(apx, apy, apz, aqw, aqx, aqy, aqz, ha)
            b1x, b1y, b1z, b2x, b2y, b2z = _capsule_segment(bpx, bpy, bpz, bqw, bqx, bqy, bqz, hb)
            c1x, c1y, c1z, c2x, c2y, c2z = _closest_segment_segment(
                a1x, a1y, a1z, a2x, a2y, a2z, b1x, b1y, b1z, b2x, b2y, b2z)
            res = _sphere_sphere(c1x, c1y, c1z, ra, c2x, c2y, c2z, rb)
        elif ta == _CAPSULE and tb == _BOX:
            res = _capsule_box(apx, apy, apz, aqw, aqx, aqy, aqz,
                               float(shape_params[a, 0]), float(shape_params[a, 1]),
                               bpx, bpy, bpz, bqw, bqx, bqy, bqz,
                               float(shape_params[b, 0]), float(shape_params[b, 1]), float(shape_params[b, 2]))
        elif ta == _CAPSULE and tb == _HALFSPACE:
            mx, my, mz, p0x, p0y, p0z = _plane_world(
                bpx, bpy, bpz, bqw, bqx, bqy, bqz,
                float(shape_params[b, 0]), float(shape_params[b, 1]), float(shape_params[b, 2]),
                float(shape_params[b, 3]))
            h = float(shape_params[a, 0]); r = float(shape_params[a, 1])
            e1x, e1y, e1z, e2x, e2y, e2z = _capsule_segment(apx, apy, apz, aqw, aqx, aqy, aqz, h)
            s1 = (e1x - p0x) * mx + (e1y - p0y) * my + (e1z - p0z) * mz
            s2 = (e2x - p0x) * mx + (e2y - p0y) * my + (e2z - p0z) * mz
            ds = s1 - s2
            if (ds if ds >= 0.0 else -ds) <= 1e-12:
                cx = 0.5 * (e1x + e2x); cy = 0.5 * (e1y + e2y); cz = 0.5 * (e1z + e2z)
                s = 0.5 * (s1 + s2)
            elif s1 < s2:
                cx = e1x; cy = e1y; cz = e1z; s = s1
            else:
                cx = e2x; cy = e2y; cz = e2z; s = s2
            depth = r - s
            if depth > 0.0:
                res = (cx - mx * r, cy - my * r, cz - mz * r, -mx, -my, -mz, depth)
        elif ta == _BOX and tb == _BOX:
            res = _box_box(apx, apy, apz, aqw, aqx, aqy, aqz,
                           float(shape_params[a, 0]), float(shape_params[a, 1]), float(shape_params[a, 2]),
                           bpx, bpy, bpz, bqw, bqx, bqy, bqz,
                           float(shape_params[b, 0]), float(shape_params[b, 1]), float(shape_params[b, 2]))
        elif ta == _BOX and tb == _HALFSPACE:
            mx, my, mz, p0x, p0y, p0z = _plane_world(
                bpx, bpy, bpz, bqw, bqx, bqy, bqz,
                float(shape_params[b, 0]), float(shape_params[b, 1]), float(shape_params[b, 2]),
                float(shape_params[b, 3]))
            hx = float(shape_params[a, 0]); hy = float(shape_params[a, 1]); hz = float(shape_params[a, 2])
            m = _quat_to_mat(aqw, aqx, aqy, aqz)
            smin = math.inf
            for sx in (-1.0, 1.0):
                for sy in (-1.0, 1.0):
                    for sz in (-1.0, 1.0):
                        vx = apx + m[0] * sx * hx + m[1] * sy * hy + m[2] * sz * hz
                        vy = apy + m[3] * sx * hx + m[4] * sy * hy + m[5] * sz * hz
                        vz = apz + m[6] * sx * hx + m[7] * sy * hy + m[8] * sz * hz
                        s = (vx - p0x) * mx + (vy - p0y) * my + (vz - p0z) * mz
                        if s < smin:
                            smin = s
            if smin < 0.0:
                # Contact at the centroid of all deepest vertices (stable flat rest).
                cxx = 0.0; cyy = 0.0; czz = 0.0
                cnt = 0
                for sx in (-1.0, 1.0):
                    for sy in (-1.0, 1.0):
                        for sz in (-1.0, 1.0):
                            vx = apx + m[0] * sx * hx + m[1] * sy * hy + m[2] * sz * hz
                            vy = apy + m[3] * sx * hx + m[4] * sy * hy + m[5] * sz * hz
                            vz = apz + m[6] * sx * hx + m[7] * sy * hy + m[8] * sz * hz
                            s = (vx - p0x) * mx + (vy - p0y) * my + (vz - p0z) * mz
                            if s <= smin + 1e-9:
                                cxx += vx; cyy += vy; czz += vz
                                cnt += 1
                cxx /= cnt; cyy /= cnt; czz /= cnt
                res = (cxx, cyy, czz, -mx, -my, -mz, -smin)
        else:
            return -(p + 1)

        if res is None:
            continue
        px, py, pz, nx, ny, nz, depth = res
        if flip:
            nx = -nx; ny = -ny; nz = -nz
        c_a[count] = i
        c_b[count] = j
        c_point[count, 0] = px; c_point[count, 1] = py; c_point[count, 2] = pz
        c_normal[count, 0] = nx; c_normal[count, 1] = ny; c_normal[count, 2] = nz
        c_depth[count] = depth
        count += 1
    return count


def resolve_contacts(pos, quat, vel, angvel, mass, inertia, kinematic,
                     restitution, friction,
                     c_a, c_b, c_point, c_normal, c_depth, n_contacts,
                     dt, iterations, baumgarte, slop, rest_threshold,
                     impulse_out):
    """Sequential-impulse solver with Coulomb friction and Baumgarte bias.

    Accumulated normal impulses (bias included) are written to impulse_out;
    body velocities are updated in place. Kinematic bodies act as infinite
    mass/inertia.
    """
    if n_contacts == 0:
        return
    pre = []
    for k in range(n_contacts):
        ia = int(c_a[k]); ib = int(c_b[k])
        nx = float(c_normal[k, 0]); ny = float(c_normal[k, 1]); nz = float(c_normal[k, 2])
        px = float(c_point[k, 0]); py = float(c_point[k, 1]); pz = float(c_point[k, 2])
        rax = px - float(pos[ia, 0]); ray = py - float(pos[ia, 1]); raz = pz - float(pos[ia, 2])
        rbx = px - float(pos[ib, 0]); rby = py - float(pos[ib, 1]); rbz = pz - float(pos[ib, 2])
        if kinematic[ia]:
            inv_ma = 0.0
            ia_ix = 0.0; ia_iy = 0.0; ia_iz = 0.0
        else:
            inv_ma = 1.0 / float(mass[ia])
            ia_ix = 1.0 / float(inertia[ia, 0])
            ia_iy = 1.0 / float(inertia[ia, 1])
            ia_iz = 1.0 / float(inertia[ia, 2])
        if kinematic[ib]:
            inv_mb = 0.0
            ib_ix = 0.0; ib_iy = 0.0; ib_iz = 0.0
        else:
            inv_mb = 1.0 / float(mass[ib])
            ib_ix = 1.0 / float(inertia[ib, 0])
            ib_iy = 1.0 / float(inertia[ib, 1])
            ib_iz = 1.0 / float(inertia[ib, 2])
        qa = (float(quat[ia, 0]), float(quat[ia, 1]), float(quat[ia, 2]), float(quat[ia, 3]))
        qb = (float(quat[ib, 0]), float(quat[ib, 1]), float(quat[ib, 2]), float(quat[ib, 3]))

        def ia_world(vx, vy, vz, q=qa, di=(0.0, 0.0, 0.0)):
            bx, by, bz = _rotate_inv(q[0], q[1], q[2], q[3], vx, vy, vz)
            bx *= di[0]; by *= di[1]; bz *= di[2]
            return _rotate(q[0], q[1], q[2], q[3], bx, by, bz)

        # Tangent basis, deterministic from the normal.
        if (nx if nx >= 0.0 else -nx) < 0.9:
            t1x = 0.0; t1y = nz; t1z = -ny  # n x (1,0,0)
        else:
            t1x = -nz; t1y = 0.0; t1z = nx  # n x (0,1,0)
        tl = math.sqrt(t1x * t1x + t1y * t1y + t1z * t1z)
        t1x /= tl; t1y /= tl; t1z /= tl
        t2x = ny * t1z - nz * t1y
        t2y = nz * t1x - nx * t1z
        t2z = nx * t1y - ny * t1x

        def eff_mass(dx, dy, dz):
            # K along direction d: 1/ma + 1/mb + d.[(Ia^-1 (ra x d)) x ra + (Ib^-1 (rb x d)) x rb]
            cax = ray * dz - raz * dy
            cay = raz * dx - rax * dz
            caz = rax * dy - ray * dx
            wax, way, waz = ia_world(cax, cay, caz, qa, (ia_ix, ia_iy, ia_iz))
            gax = way * raz - waz * ray
            gay = waz * rax - wax * raz
            gaz = wax * ray - way * rax
            cbx = rby * dz - rbz * dy
            cby = rbz * dx - rbx * dz
            cbz = rbx * dy - rby * dx
            wbx, wby, wbz = ia_world(cbx, cby, cbz, qb, (ib_ix, ib_iy, ib_iz))
            gbx = wby * rbz - wbz * rby
            gby = wbz * rbx - wbx * rbz
            gbz = wbx * rby - wby * rbx
            return inv_ma + inv_mb + dx * (gax + gbx) + dy * (gay + gby) + dz * (gaz + gbz)

        kn = eff_mass(nx, ny, nz)
        kt1 = eff_mass(t1x, t1y, t1z)
        kt2 = eff_mass(t2x, t2y, t2z)

        # Pre-solve closing speed sets the restitution target.
        vrx = (float(vel[ib, 0]) + float(angvel[ib, 1]) * rbz - float(angvel[ib, 2]) * rby) \
            - (float(vel[ia, 0]) + float(angvel[ia, 1]) * raz - float(angvel[ia, 2]) * ray)
        vry = (float(vel[ib, 1]) + float(angvel[ib, 2]) * rbx - float(angvel[ib, 0]) * rbz) \
            - (float(vel[ia, 1]) + float(angvel[ia, 2]) * rax - float(angvel[ia, 0]) * raz)
        vrz = (float(vel[ib, 2]) + float(angvel[ib, 0]) * rby - float(angvel[ib, 1]) * rbx) \
            - (float(vel[ia, 2]) + float(angvel[ia, 0]) * ray - float(angvel[ia, 1]) * rax)
        s0 = vrx * nx + vry * ny + vrz * nz
        ea = float(restitution[ia]); eb = float(restitution[ib])
        e = ea if ea > eb else eb
        rest_target = -e * s0 if s0 < -rest_threshold else 0.0
        d = float(c_depth[k]) - slop
        bias = baumgarte * (d if d > 0.0 else 0.0) / dt
        target = rest_target if rest_target > bias else bias
        mu = math.sqrt(float(friction[ia]) * float(friction[ib]))
        pre.append((ia, ib, nx, ny, nz, rax, ray, raz, rbx, rby, rbz,
                    inv_ma, inv_mb, (ia_ix, ia_iy, ia_iz), (ib_ix, ib_iy, ib_iz),
                    qa, qb, kn, kt1, kt2, t1x, t1y, t1z, t2x, t2y, t2z, target, mu))
        impulse_out[k] = 0.0

    jt1 = [0.0] * n_contacts
    jt2 = [0.0] * n_contacts

    for _ in range(iterations):
        for k in range(n_contacts):
            (ia, ib, nx, ny, nz, rax, ray, raz, rbx, rby, rbz,
             inv_ma, inv_mb, dia, dib, qa, qb, kn, kt1, kt2,
             t1x, t1y, t1z, t2x, t2y, t2z, target, mu) = pre[k]
            if kn <= _EPS:
                continue

            def apply(pxi, pyi, pzi):
                vel[ia, 0] = float(vel[ia, 0]) - pxi * inv_ma
                vel[ia, 1] = float(vel[ia, 1]) - pyi * inv_ma
                vel[ia, 2] = float(vel[ia, 2]) - pzi * inv_ma
                cx = ray * pzi - raz * pyi
                cy = raz * pxi - rax * pzi
                cz = rax * pyi - ray * pxi
                bx, by, bz = _rotate_inv(qa[0], qa[1], qa[2], qa[3], cx, cy, cz)
                bx *= dia[0]; by *= dia[1]; bz *= dia[2]
                wx, wy, wz = _rotate(qa[0], qa[1], qa[2], qa[3], bx, by, bz)
                angvel[ia, 0] = float(angvel[ia, 0]) - wx
                angvel[ia, 1] = float(angvel[ia, 1]) - wy
                angvel[ia, 2] = float(angvel[ia, 2]) - wz
                vel[ib, 0] = float(vel[ib, 0]) + pxi * inv_mb
                vel[ib, 1] = float(vel[ib, 1]) + pyi * inv_mb
                vel[ib, 2] = float(vel[ib, 2]) + pzi * inv_mb
                cx = rby * pzi - rbz * pyi
                cy = rbz * pxi - rbx * pzi
                cz = rbx * pyi - rby * pxi
                bx, by, bz = _rotate_inv(qb[0], qb[1], qb[2], qb[3], cx, cy, cz)
                bx *= dib[0]; by *= dib[1]; bz *= dib[2]
                wx, wy, wz = _rotate(qb[0], qb[1], qb[2], qb[3], bx, by, bz)
                angvel[ib, 0] = float(angvel[ib, 0]) + wx
                angvel[ib, 1] = float(angvel[ib, 1]) + wy
                angvel[ib, 2] = float(angvel[ib, 2]) + wz

            vrx = (float(vel[ib, 0]) + float(angvel[ib, 1]) * rbz - float(angvel[ib, 2]) * rby) \
                - (float(vel[ia, 0]) + float(angvel[ia, 1]) * raz - float(angvel[ia, 2]) * ray)
            vry = (float(vel[ib, 1]) + float(angvel[ib, 2]) * rbx - float(angvel[ib, 0]) * rbz) \
                - (float(vel[ia, 1]) + float(angvel[ia, 2]) * rax - float(angvel[ia, 0]) * raz)
            vrz = (float(vel[ib, 2]) + float(angvel[ib, 0]) * rby - float(angvel[ib, 1]) * rbx) \
                - (float(vel[ia, 2]) + float(angvel[ia, 0]) * ray - float(angvel[ia, 1]) * rax)
            s = vrx * nx + vry * ny + vrz * nz
            dj = (target - s) / kn
            jn_old = float(impulse_out[k])
            jn_new = jn_old + dj
            if jn_new < 0.0:
                jn_new = 0.0
            dj = jn_new - jn_old
            impulse_out[k] = jn_new
            if dj != 0.0:
                apply(dj * nx, dj * ny, dj * nz)

            if mu <= 0.0 or jn_new <= 0.0:
                continue
            maxf = mu * jn_new
            # Tangent 1
            vrx = (float(vel[ib, 0]) + float(angvel[ib, 1]) * rbz - float(angvel[ib, 2]) * rby) \
                - (float(vel[ia, 0]) + float(angvel[ia, 1]) * raz - float(angvel[ia, 2]) * ray)
            vry = (float(vel[ib, 1]) + float(angvel[ib, 2]) * rbx - float(angvel[ib, 0]) * rbz) \
                - (float(vel[ia, 1]) + float(angvel[ia, 2]) * rax - float(angvel[ia, 0]) * raz)
            vrz = (float(vel[ib, 2]) + float(angvel[ib, 0]) * rby - float(angvel[ib, 1]) * rbx) \
                - (float(vel[ia, 2]) + float(angvel[ia, 0]) * ray - float(angvel[ia, 1]) * rax)
            st = vrx * t1x + vry * t1y + vrz * t1z
            djt = -st / kt1
            jt_old = jt1[k]
            jt_new = jt_old + djt
            if jt_new < -maxf:
                jt_new = -maxf
            elif jt_new > maxf:
                jt_new = maxf
            djt = jt_new - jt_old
            jt1[k] = jt_new
            if djt != 0.0:
                apply(djt * t1x, djt * t1y, djt * t1z)
            # Tangent 2
            vrx = (float(vel[ib, 0]) + float(angvel[ib, 1]) * rbz - float(angvel[ib, 2]) * rby) \
                - (float(vel[ia, 0]) + float(angvel[ia, 1]) * raz - float(angvel[ia, 2]) * ray)
            vry = (float(vel[ib, 1]) + float(angvel[ib, 2]) * rbx - float(angvel[ib, 0]) * rbz) \
                - (float(vel[ia, 1]) + float(angvel[ia, 2]) * rax - float(angvel[ia, 0]) * raz)
            vrz = (float(vel[ib, 2]) + float(angvel[ib, 0]) * rby - float(angvel[ib, 1]) * rbx) \
                - (float(vel[ia, 2]) + float(angvel[ia, 0]) * ray - float(angvel[ia, 1]) * rax)
            st = vrx * t2x + vry * t2y + vrz * t2z
            djt = -st / kt2
            jt_old = jt2[k]
            jt_new = jt_old + djt
            if jt_new < -maxf:
                jt_new = -maxf
            elif jt_new > maxf:
                jt_new = maxf
            djt = jt_new - jt_old
            jt2[k] = jt_new
            if djt != 0.0:
                apply(djt * t2x, djt * t2y, djt * t2z)
