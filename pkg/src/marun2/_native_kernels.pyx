# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled step kernels: the hot twin of marun2._pure_kernels.

Every expression mirrors the pure-Python module operation-for-operation so
both backends produce bit-identical trajectories (build uses
-ffp-contract=off to keep FMA contraction from changing roundings). Keep in
sync when editing either file.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, exp, sqrt
from libc.stdlib cimport free, malloc

BACKEND_NAME = "native"

cdef double _EPS = 1e-12

cdef int _SPHERE = 0
cdef int _CAPSULE = 1
cdef int _BOX = 2
cdef int _HALFSPACE = 3


cdef inline void _rotate(double qw, double qx, double qy, double qz,
                         double vx, double vy, double vz,
                         double* ox, double* oy, double* oz) nogil:
    cdef double tx = 2.0 * (qy * vz - qz * vy)
    cdef double ty = 2.0 * (qz * vx - qx * vz)
    cdef double tz = 2.0 * (qx * vy - qy * vx)
    ox[0] = vx + qw * tx + (qy * tz - qz * ty)
    oy[0] = vy + qw * ty + (qz * tx - qx * tz)
    oz[0] = vz + qw * tz + (qx * ty - qy * tx)


cdef inline void _rotate_inv(double qw, double qx, double qy, double qz,
                             double vx, double vy, double vz,
                             double* ox, double* oy, double* oz) nogil:
    _rotate(qw, -qx, -qy, -qz, vx, vy, vz, ox, oy, oz)


def eval_forces(double[:, ::1] pos, double[:, ::1] quat, double[:, ::1] vel,
                double[:, ::1] angvel, double[::1] mass, cnp.uint8_t[::1] kinematic,
                double[::1] fluid_density, double[::1] displaced_volume,
                double[:, ::1] cob_offset, double[::1] gravity,
                double[:, ::1] ext_force, double[:, ::1] ext_torque,
                double[:, ::1] force, double[:, ::1] torque):
    cdef Py_ssize_t n = pos.shape[0]
    cdef double gx = gravity[0], gy = gravity[1], gz = gravity[2]
    cdef Py_ssize_t i
    cdef double m, qw, qx, qy, qz, fx, fy, fz, tx, ty, tz
    cdef double rho_v, bfx, bfy, bfz, rbx, rby, rbz
    for i in range(n):
        if kinematic[i]:
            force[i, 0] = 0.0; force[i, 1] = 0.0; force[i, 2] = 0.0
            torque[i, 0] = 0.0; torque[i, 1] = 0.0; torque[i, 2] = 0.0
            continue
        m = mass[i]
        qw = quat[i, 0]; qx = quat[i, 1]; qy = quat[i, 2]; qz = quat[i, 3]

        fx = m * gx + ext_force[i, 0]
        fy = m * gy + ext_force[i, 1]
        fz = m * gz + ext_force[i, 2]
        tx = ext_torque[i, 0]
        ty = ext_torque[i, 1]
        tz = ext_torque[i, 2]

        rho_v = fluid_density[i] * displaced_volume[i]
        bfx = -rho_v * gx; bfy = -rho_v * gy; bfz = -rho_v * gz
        fx += bfx; fy += bfy; fz += bfz
        _rotate(qw, qx, qy, qz, cob_offset[i, 0], cob_offset[i, 1], cob_offset[i, 2],
                &rbx, &rby, &rbz)
        tx += rby * bfz - rbz * bfy
        ty += rbz * bfx - rbx * bfz
        tz += rbx * bfy - rby * bfx

        force[i, 0] = fx; force[i, 1] = fy; force[i, 2] = fz
        torque[i, 0] = tx; torque[i, 1] = ty; torque[i, 2] = tz


def integrate_velocities(double[:, ::1] vel, double[:, ::1] angvel,
                         double[:, ::1] force, double[:, ::1] torque,
                         double[:, ::1] quat, double[::1] mass,
                         double[:, ::1] added_mass, double[:, ::1] inertia,
                         cnp.uint8_t[::1] kinematic, double[:, ::1] lin_drag,
                         double[:, ::1] quad_drag, double[:, ::1] ang_drag,
                         double[::1] current, double dt):
    # Linear drag terms integrate as exact exponential decays (stable for any
    # stiffness); the quadratic term is explicit but saturated at zero.
    cdef Py_ssize_t n = vel.shape[0]
    cdef double cx = current[0], cy = current[1], cz = current[2]
    cdef Py_ssize_t i
    cdef double qw, qx, qy, qz, m, ma0, ma1, ma2
    cdef double fbx, fby, fbz, abx, aby, abz, awx, awy, awz
    cdef double vx, vy, vz, ubx, uby, ubz, speed
    cdef double dqx, dqy, dqz, uwx, uwy, uwz
    cdef double tbx, tby, tbz, i0, i1, i2, wbx, wby, wbz, wwx, wwy, wwz
    for i in range(n):
        if kinematic[i]:
            continue
        qw = quat[i, 0]; qx = quat[i, 1]; qy = quat[i, 2]; qz = quat[i, 3]
        m = mass[i]
        ma0 = m + added_mass[i, 0]
        ma1 = m + added_mass[i, 1]
        ma2 = m + added_mass[i, 2]

        _rotate_inv(qw, qx, qy, qz, force[i, 0], force[i, 1], force[i, 2],
                    &fbx, &fby, &fbz)
        abx = fbx / ma0
        aby = fby / ma1
        abz = fbz / ma2
        _rotate(qw, qx, qy, qz, abx, aby, abz, &awx, &awy, &awz)
        vx = vel[i, 0] + awx * dt
        vy = vel[i, 1] + awy * dt
        vz = vel[i, 2] + awz * dt

        _rotate_inv(qw, qx, qy, qz, vx - cx, vy - cy, vz - cz, &ubx, &uby, &ubz)
        ubx *= exp(-lin_drag[i, 0] * dt / ma0)
        uby *= exp(-lin_drag[i, 1] * dt / ma1)
        ubz *= exp(-lin_drag[i, 2] * dt / ma2)
        speed = sqrt(ubx * ubx + uby * uby + ubz * ubz)
        if speed > 0.0:
            dqx = -quad_drag[i, 0] * speed * ubx * dt / ma0
            dqy = -quad_drag[i, 1] * speed * uby * dt / ma1
            dqz = -quad_drag[i, 2] * speed * ubz * dt / ma2
            ubx = 0.0 if (dqx if dqx >= 0.0 else -dqx) >= (ubx if ubx >= 0.0 else -ubx) else ubx + dqx
            uby = 0.0 if (dqy if dqy >= 0.0 else -dqy) >= (uby if uby >= 0.0 else -uby) else uby + dqy
            ubz = 0.0 if (dqz if dqz >= 0.0 else -dqz) >= (ubz if ubz >= 0.0 else -ubz) else ubz + dqz
        _rotate(qw, qx, qy, qz, ubx, uby, ubz, &uwx, &uwy, &uwz)
        vel[i, 0] = cx + uwx
        vel[i, 1] = cy + uwy
        vel[i, 2] = cz + uwz

        _rotate_inv(qw, qx, qy, qz, torque[i, 0], torque[i, 1], torque[i, 2],
                    &tbx, &tby, &tbz)
        i0 = inertia[i, 0]; i1 = inertia[i, 1]; i2 = inertia[i, 2]
        _rotate_inv(qw, qx, qy, qz, angvel[i, 0], angvel[i, 1], angvel[i, 2],
                    &wbx, &wby, &wbz)
        wbx = wbx + (tbx / i0) * dt
        wby = wby + (tby / i1) * dt
        wbz = wbz + (tbz / i2) * dt
        wbx *= exp(-ang_drag[i, 0] * dt / i0)
        wby *= exp(-ang_drag[i, 1] * dt / i1)
        wbz *= exp(-ang_drag[i, 2] * dt / i2)
        _rotate(qw, qx, qy, qz, wbx, wby, wbz, &wwx, &wwy, &wwz)
        angvel[i, 0] = wwx
        angvel[i, 1] = wwy
        angvel[i, 2] = wwz


def integrate_poses(double[:, ::1] pos, double[:, ::1] quat, double[:, ::1] vel,
                    double[:, ::1] angvel, cnp.uint8_t[::1] kinematic, double dt):
    cdef Py_ssize_t n = pos.shape[0]
    cdef Py_ssize_t i
    cdef double qw, qx, qy, qz, wx, wy, wz, h, nw, nx, ny, nz, norm
    for i in range(n):
        if kinematic[i]:
            continue
        pos[i, 0] = pos[i, 0] + vel[i, 0] * dt
        pos[i, 1] = pos[i, 1] + vel[i, 1] * dt
        pos[i, 2] = pos[i, 2] + vel[i, 2] * dt

        qw = quat[i, 0]; qx = quat[i, 1]; qy = quat[i, 2]; qz = quat[i, 3]
        wx = angvel[i, 0]; wy = angvel[i, 1]; wz = angvel[i, 2]
        h = 0.5 * dt
        nw = qw - h * (wx * qx + wy * qy + wz * qz)
        nx = qx + h * (qw * wx + (wy * qz - wz * qy))
        ny = qy + h * (qw * wy + (wz * qx - wx * qz))
        nz = qz + h * (qw * wz + (wx * qy - wy * qx))
        norm = sqrt(nw * nw + nx * nx + ny * ny + nz * nz)
        quat[i, 0] = nw / norm
        quat[i, 1] = nx / norm
        quat[i, 2] = ny / norm
        quat[i, 3] = nz / norm


# --- narrow phase -----------------------------------------------------------

cdef struct Hit:
    int ok
    double px, py, pz
    double nx, ny, nz
    double depth


cdef inline void _capsule_segment(double px, double py, double pz,
                                  double qw, double qx, double qy, double qz,
                                  double half_len,
                                  double* e1x, double* e1y, double* e1z,
                                  double* e2x, double* e2y, double* e2z) nogil:
    cdef double ax, ay, az
    _rotate(qw, qx, qy, qz, 0.0, 0.0, half_len, &ax, &ay, &az)
    e1x[0] = px - ax; e1y[0] = py - ay; e1z[0] = pz - az
    e2x[0] = px + ax; e2y[0] = py + ay; e2z[0] = pz + az


cdef inline Hit _sphere_sphere(double ax, double ay, double az, double ra,
                               double bx, double by, double bz, double rb) nogil:
    cdef Hit h
    h.ok = 0
    cdef double dx = bx - ax, dy = by - ay, dz = bz - az
    cdef double rsum = ra + rb
    cdef double d2 = dx * dx + dy * dy + dz * dz
    if d2 >= rsum * rsum:
        return h
    cdef double d = sqrt(d2)
    cdef double nx, ny, nz
    if d > _EPS:
        nx = dx / d; ny = dy / d; nz = dz / d
    else:
        nx = 0.0; ny = 0.0; nz = 1.0
    cdef double depth = rsum - d
    cdef double t = ra - 0.5 * depth
    h.ok = 1
    h.px = ax + nx * t; h.py = ay + ny * t; h.pz = az + nz * t
    h.nx = nx; h.ny = ny; h.nz = nz
    h.depth = depth
    return h


cdef inline void _closest_on_segment(double px, double py, double pz,
                                     double ax, double ay, double az,
                                     double bx, double by, double bz,
                                     double* ox, double* oy, double* oz) nogil:
    cdef double dx = bx - ax, dy = by - ay, dz = bz - az
    cdef double dd = dx * dx + dy * dy + dz * dz
    cdef double t
    if dd <= _EPS:
        ox[0] = ax; oy[0] = ay; oz[0] = az
        return
    t = ((px - ax) * dx + (py - ay) * dy + (pz - az) * dz) / dd
    if t < 0.0:
        t = 0.0
    elif t > 1.0:
        t = 1.0
    ox[0] = ax + dx * t; oy[0] = ay + dy * t; oz[0] = az + dz * t


cdef inline void _closest_segment_segment(double p1x, double p1y, double p1z,
                                          double q1x, double q1y, double q1z,
                                          double p2x, double p2y, double p2z,
                                          double q2x, double q2y, double q2z,
                                          double* c1x, double* c1y, double* c1z,
                                          double* c2x, double* c2y, double* c2z) nogil:
    cdef double d1x = q1x - p1x, d1y = q1y - p1y, d1z = q1z - p1z
    cdef double d2x = q2x - p2x, d2y = q2y - p2y, d2z = q2z - p2z
    cdef double rx = p1x - p2x, ry = p1y - p2y, rz = p1z - p2z
    cdef double a = d1x * d1x + d1y * d1y + d1z * d1z
    cdef double e = d2x * d2x + d2y * d2y + d2z * d2z
    cdef double f = d2x * rx + d2y * ry + d2z * rz
    cdef double s, t, c, b, denom
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
    c1x[0] = p1x + d1x * s; c1y[0] = p1y + d1y * s; c1z[0] = p1z + d1z * s
    c2x[0] = p2x + d2x * t; c2y[0] = p2y + d2y * t; c2z[0] = p2z + d2z * t


cdef inline Hit _sphere_box(double cx, double cy, double cz, double r,
                            double bx, double by, double bz,
                            double bqw, double bqx, double bqy, double bqz,
                            double hx, double hy, double hz) nogil:
    cdef Hit h
    h.ok = 0
    cdef double lx, ly, lz
    _rotate_inv(bqw, bqx, bqy, bqz, cx - bx, cy - by, cz - bz, &lx, &ly, &lz)
    cdef double px = -hx if lx < -hx else (hx if lx > hx else lx)
    cdef double py = -hy if ly < -hy else (hy if ly > hy else ly)
    cdef double pz = -hz if lz < -hz else (hz if lz > hz else lz)
    cdef double dx = lx - px, dy = ly - py, dz = lz - pz
    cdef double d2 = dx * dx + dy * dy + dz * dz
    cdef double d, ox, oy, oz, depth, wx, wy, wz, nwx, nwy, nwz
    cdef double mx, my, mz, sx, sy, sz
    if d2 > _EPS:
        if d2 >= r * r:
            return h
        d = sqrt(d2)
        ox = dx / d; oy = dy / d; oz = dz / d
        depth = r - d
        _rotate(bqw, bqx, bqy, bqz, px, py, pz, &wx, &wy, &wz)
        _rotate(bqw, bqx, bqy, bqz, ox, oy, oz, &nwx, &nwy, &nwz)
        h.ok = 1
        h.px = bx + wx; h.py = by + wy; h.pz = bz + wz
        h.nx = -nwx; h.ny = -nwy; h.nz = -nwz
        h.depth = depth
        return h
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
    _rotate(bqw, bqx, bqy, bqz, ox, oy, oz, &nwx, &nwy, &nwz)
    h.ok = 1
    h.px = cx; h.py = cy; h.pz = cz
    h.nx = -nwx; h.ny = -nwy; h.nz = -nwz
    h.depth = depth
    return h


cdef inline void _plane_world(double px, double py, double pz,
                              double qw, double qx, double qy, double qz,
                              double nx, double ny, double nz, double offset,
                              double* mx, double* my, double* mz,
                              double* p0x, double* p0y, double* p0z) nogil:
    _rotate(qw, qx, qy, qz, nx, ny, nz, mx, my, mz)
    p0x[0] = px + mx[0] * offset
    p0y[0] = py + my[0] * offset
    p0z[0] = pz + mz[0] * offset


cdef void _segment_box_closest(double ax, double ay, double az,
                               double bx, double by, double bz,
                               double hx, double hy, double hz,
                               double* best_t_out, double* best_d2_out) nogil:
    cdef double dx = bx - ax, dy = by - ay, dz = bz - az
    cdef double ts[8]
    cdef int nts = 0
    cdef double a0[3]
    cdef double d0[3]
    cdef double h0[3]
    a0[0] = ax; a0[1] = ay; a0[2] = az
    d0[0] = dx; d0[1] = dy; d0[2] = dz
    h0[0] = hx; h0[1] = hy; h0[2] = hz
    ts[nts] = 0.0; nts += 1
    ts[nts] = 1.0; nts += 1
    cdef int axk, sgn
    cdef double lim, t
    for axk in range(3):
        if d0[axk] != 0.0:
            for sgn in range(2):
                lim = -h0[axk] if sgn == 0 else h0[axk]
                t = (lim - a0[axk]) / d0[axk]
                if 0.0 < t < 1.0:
                    ts[nts] = t
                    nts += 1
    # insertion sort (tiny array)
    cdef int i, j
    cdef double key
    for i in range(1, nts):
        key = ts[i]
        j = i - 1
        while j >= 0 and ts[j] > key:
            ts[j + 1] = ts[j]
            j -= 1
        ts[j + 1] = key

    cdef double best_t = 0.0
    cdef double best_d2 = INFINITY
    cdef double t0, t1, tm, qa, qb, qc, pm, r0, tstar, d2, tc
    cdef int k, which
    for k in range(nts - 1):
        t0 = ts[k]; t1 = ts[k + 1]
        if t1 - t0 <= 1e-15:
            continue
        tm = 0.5 * (t0 + t1)
        qa = 0.0; qb = 0.0; qc = 0.0
        for axk in range(3):
            pm = a0[axk] + d0[axk] * tm
            if pm > h0[axk]:
                r0 = a0[axk] - h0[axk]
            elif pm < -h0[axk]:
                r0 = a0[axk] + h0[axk]
            else:
                continue
            qa += d0[axk] * d0[axk]
            qb += 2.0 * r0 * d0[axk]
            qc += r0 * r0
        if qa > 0.0:
            tstar = -qb / (2.0 * qa)
            if tstar < t0:
                tstar = t0
            elif tstar > t1:
                tstar = t1
        else:
            tstar = t0
        for which in range(3):
            tc = t0 if which == 0 else (tstar if which == 1 else t1)
            d2 = qa * tc * tc + qb * tc + qc
            if d2 < best_d2:
                best_d2 = d2
                best_t = tc
    best_t_out[0] = best_t
    best_d2_out[0] = best_d2


cdef inline double _interior_depth(double a1x, double a1y, double a1z,
                                   double dsx, double dsy, double dsz,
                                   double hx, double hy, double hz, double tc) nogil:
    cdef double ix = a1x + dsx * tc
    cdef double iy = a1y + dsy * tc
    cdef double iz = a1z + dsz * tc
    cdef double gx = hx - (ix if ix >= 0.0 else -ix)
    cdef double gy = hy - (iy if iy >= 0.0 else -iy)
    cdef double gz = hz - (iz if iz >= 0.0 else -iz)
    cdef double g = gx if gx < gy else gy
    return g if g < gz else gz


cdef Hit _capsule_box(double c_px, double c_py, double c_pz,
                      double c_qw, double c_qx, double c_qy, double c_qz,
                      double c_h, double c_r,
                      double b_px, double b_py, double b_pz,
                      double b_qw, double b_qx, double b_qy, double b_qz,
                      double hx, double hy, double hz) nogil:
    cdef Hit h
    h.ok = 0
    cdef double e1x, e1y, e1z, e2x, e2y, e2z
    _capsule_segment(c_px, c_py, c_pz, c_qw, c_qx, c_qy, c_qz, c_h,
                     &e1x, &e1y, &e1z, &e2x, &e2y, &e2z)
    cdef double a1x, a1y, a1z, a2x, a2y, a2z
    _rotate_inv(b_qw, b_qx, b_qy, b_qz, e1x - b_px, e1y - b_py, e1z - b_pz,
                &a1x, &a1y, &a1z)
    _rotate_inv(b_qw, b_qx, b_qy, b_qz, e2x - b_px, e2y - b_py, e2z - b_pz,
                &a2x, &a2y, &a2z)
    cdef double t, d2
    _segment_box_closest(a1x, a1y, a1z, a2x, a2y, a2z, hx, hy, hz, &t, &d2)
    cdef double px = a1x + (a2x - a1x) * t
    cdef double py = a1y + (a2y - a1y) * t
    cdef double pz = a1z + (a2z - a1z) * t
    cdef double qx, qy, qz, d, ox, oy, oz, depth, wx, wy, wz, nwx, nwy, nwz
    if d2 > _EPS:
        if d2 >= c_r * c_r:
            return h
        qx = -hx if px < -hx else (hx if px > hx else px)
        qy = -hy if py < -hy else (hy if py > hy else py)
        qz = -hz if pz < -hz else (hz if pz > hz else pz)
        d = sqrt(d2)
        ox = (px - qx) / d; oy = (py - qy) / d; oz = (pz - qz) / d
        depth = c_r - d
        _rotate(b_qw, b_qx, b_qy, b_qz, qx, qy, qz, &wx, &wy, &wz)
        _rotate(b_qw, b_qx, b_qy, b_qz, ox, oy, oz, &nwx, &nwy, &nwz)
        h.ok = 1
        h.px = b_px + wx; h.py = b_py + wy; h.pz = b_pz + wz
        h.nx = -nwx; h.ny = -nwy; h.nz = -nwz
        h.depth = depth
        return h
    # Interior: fixed-count golden-section maximization of the concave
    # piecewise-linear interior depth along the segment.
    cdef double inv_phi = 0.6180339887498949
    cdef double lo = 0.0, hi = 1.0
    cdef double dsx = a2x - a1x, dsy = a2y - a1y, dsz = a2z - a1z
    cdef double c1 = hi - inv_phi * (hi - lo)
    cdef double c2 = lo + inv_phi * (hi - lo)
    cdef double f1 = _interior_depth(a1x, a1y, a1z, dsx, dsy, dsz, hx, hy, hz, c1)
    cdef double f2 = _interior_depth(a1x, a1y, a1z, dsx, dsy, dsz, hx, hy, hz, c2)
    cdef int it
    for it in range(80):
        if f1 < f2:
            lo = c1
            c1 = c2; f1 = f2
            c2 = lo + inv_phi * (hi - lo)
            f2 = _interior_depth(a1x, a1y, a1z, dsx, dsy, dsz, hx, hy, hz, c2)
        else:
            hi = c2
            c2 = c1; f2 = f1
            c1 = hi - inv_phi * (hi - lo)
            f1 = _interior_depth(a1x, a1y, a1z, dsx, dsy, dsz, hx, hy, hz, c1)
    cdef double tbest = c1 if f1 >= f2 else c2
    cdef double ix = a1x + dsx * tbest
    cdef double iy = a1y + dsy * tbest
    cdef double iz = a1z + dsz * tbest
    cdef double gx = hx - (ix if ix >= 0.0 else -ix)
    cdef double gy = hy - (iy if iy >= 0.0 else -iy)
    cdef double gz = hz - (iz if iz >= 0.0 else -iz)
    if gx <= gy and gx <= gz:
        ox = 1.0 if ix >= 0.0 else -1.0; oy = 0.0; oz = 0.0
        depth = c_r + gx
    elif gy <= gz:
        oy = 1.0 if iy >= 0.0 else -1.0; ox = 0.0; oz = 0.0
        depth = c_r + gy
    else:
        oz = 1.0 if iz >= 0.0 else -1.0; ox = 0.0; oy = 0.0
        depth = c_r + gz
    _rotate(b_qw, b_qx, b_qy, b_qz, ix, iy, iz, &wx, &wy, &wz)
    _rotate(b_qw, b_qx, b_qy, b_qz, ox, oy, oz, &nwx, &nwy, &nwz)
    h.ok = 1
    h.px = b_px + wx; h.py = b_py + wy; h.pz = b_pz + wz
    h.nx = -nwx; h.ny = -nwy; h.nz = -nwz
    h.depth = depth
    return h


cdef inline void _quat_to_mat(double qw, double qx, double qy, double qz,
                              double* m) nogil:
    m[0] = 1.0 - 2.0 * (qy * qy + qz * qz)
    m[1] = 2.0 * (qx * qy - qw * qz)
    m[2] = 2.0 * (qx * qz + qw * qy)
    m[3] = 2.0 * (qx * qy + qw * qz)
    m[4] = 1.0 - 2.0 * (qx * qx + qz * qz)
    m[5] = 2.0 * (qy * qz - qw * qx)
    m[6] = 2.0 * (qx * qz - qw * qy)
    m[7] = 2.0 * (qy * qz + qw * qx)
    m[8] = 1.0 - 2.0 * (qx * qx + qy * qy)


cdef Hit _box_box(double apx, double apy, double apz,
                  double aqw, double aqx, double aqy, double aqz,
                  double ahx, double ahy, double ahz,
                  double bpx, double bpy, double bpz,
                  double bqw, double bqx, double bqy, double bqz,
                  double bhx, double bhy, double bhz) nogil:
    cdef Hit hh
    hh.ok = 0
    cdef double A[9]
    cdef double B[9]
    _quat_to_mat(aqw, aqx, aqy, aqz, A)
    _quat_to_mat(bqw, bqx, bqy, bqz, B)
    cdef double ah[3]
    cdef double bh[3]
    ah[0] = ahx; ah[1] = ahy; ah[2] = ahz
    bh[0] = bhx; bh[1] = bhy; bh[2] = bhz
    cdef double R[3][3]
    cdef double absR[3][3]
    cdef int i, j
    for i in range(3):
        for j in range(3):
            R[i][j] = A[i] * B[j] + A[3 + i] * B[3 + j] + A[6 + i] * B[6 + j]
    cdef double dx = bpx - apx, dy = bpy - apy, dz = bpz - apz
    cdef double t[3]
    t[0] = A[0] * dx + A[3] * dy + A[6] * dz
    t[1] = A[1] * dx + A[4] * dy + A[7] * dz
    t[2] = A[2] * dx + A[5] * dy + A[8] * dz
    for i in range(3):
        for j in range(3):
            absR[i][j] = (R[i][j] if R[i][j] >= 0.0 else -R[i][j]) + 1e-12

    cdef double best_depth = INFINITY
    cdef int best_kind = -1
    cdef double best_sign = 1.0
    cdef double ra, rb, overlap, tb, tl, length2, length
    cdef double at
    for i in range(3):
        ra = ah[i]
        rb = bh[0] * absR[i][0] + bh[1] * absR[i][1] + bh[2] * absR[i][2]
        at = t[i] if t[i] >= 0.0 else -t[i]
        overlap = ra + rb - at
        if overlap <= 0.0:
            return hh
        if overlap < best_depth:
            best_depth = overlap
            best_kind = i
            best_sign = 1.0 if t[i] >= 0.0 else -1.0
    for j in range(3):
        ra = ah[0] * absR[0][j] + ah[1] * absR[1][j] + ah[2] * absR[2][j]
        rb = bh[j]
        tb = t[0] * R[0][j] + t[1] * R[1][j] + t[2] * R[2][j]
        at = tb if tb >= 0.0 else -tb
        overlap = ra + rb - at
        if overlap <= 0.0:
            return hh
        if overlap < best_depth:
            best_depth = overlap
            best_kind = 3 + j
            best_sign = 1.0 if tb >= 0.0 else -1.0
    cdef int i1, i2, j1, j2
    for i in range(3):
        for j in range(3):
            i1 = (i + 1) % 3; i2 = (i + 2) % 3
            j1 = (j + 1) % 3; j2 = (j + 2) % 3
            ra = ah[i1] * absR[i2][j] + ah[i2] * absR[i1][j]
            rb = bh[j1] * absR[i][j2] + bh[j2] * absR[i][j1]
            tl = t[i2] * R[i1][j] - t[i1] * R[i2][j]
            length2 = 1.0 - R[i][j] * R[i][j]
            if length2 < 1e-9:
                continue
            length = sqrt(length2)
            at = tl if tl >= 0.0 else -tl
            overlap = (ra + rb - at) / length
            if overlap <= 0.0:
                return hh
            if overlap < best_depth:
                best_depth = overlap
                best_kind = 6 + 3 * i + j
                best_sign = 1.0 if tl >= 0.0 else -1.0

    cdef double nx, ny, nz, px, py, pz, s
    cdef double cjx, cjy, cjz, cix, ciy, ciz
    cdef int k
    if best_kind < 3:
        nx = A[best_kind]; ny = A[3 + best_kind]; nz = A[6 + best_kind]
        nx *= best_sign; ny *= best_sign; nz *= best_sign
        px = bpx; py = bpy; pz = bpz
        for j in range(3):
            cjx = B[j]; cjy = B[3 + j]; cjz = B[6 + j]
            s = -1.0 if (nx * cjx + ny * cjy + nz * cjz) >= 0.0 else 1.0
            px += s * bh[j] * cjx; py += s * bh[j] * cjy; pz += s * bh[j] * cjz
        hh.ok = 1
        hh.px = px; hh.py = py; hh.pz = pz
        hh.nx = nx; hh.ny = ny; hh.nz = nz
        hh.depth = best_depth
        return hh
    if best_kind < 6:
        j = best_kind - 3
        nx = B[j]; ny = B[3 + j]; nz = B[6 + j]
        nx *= best_sign; ny *= best_sign; nz *= best_sign
        px = apx; py = apy; pz = apz
        for i in range(3):
            cix = A[i]; ciy = A[3 + i]; ciz = A[6 + i]
            s = 1.0 if (nx * cix + ny * ciy + nz * ciz) >= 0.0 else -1.0
            px += s * ah[i] * cix; py += s * ah[i] * ciy; pz += s * ah[i] * ciz
        hh.ok = 1
        hh.px = px; hh.py = py; hh.pz = pz
        hh.nx = nx; hh.ny = ny; hh.nz = nz
        hh.depth = best_depth
        return hh

    k = best_kind - 6
    i = k // 3
    j = k % 3
    cdef double aix = A[i], aiy = A[3 + i], aiz = A[6 + i]
    cdef double bjx = B[j], bjy = B[3 + j], bjz = B[6 + j]
    nx = aiy * bjz - aiz * bjy
    ny = aiz * bjx - aix * bjz
    nz = aix * bjy - aiy * bjx
    cdef double nl = sqrt(nx * nx + ny * ny + nz * nz)
    nx /= nl; ny /= nl; nz /= nl
    nx *= best_sign; ny *= best_sign; nz *= best_sign
    cdef double pax = apx, pay = apy, paz = apz
    cdef int ii, jj
    for ii in range(3):
        if ii == i:
            continue
        cix = A[ii]; ciy = A[3 + ii]; ciz = A[6 + ii]
        s = 1.0 if (nx * cix + ny * ciy + nz * ciz) >= 0.0 else -1.0
        pax += s * ah[ii] * cix; pay += s * ah[ii] * ciy; paz += s * ah[ii] * ciz
    cdef double pbx = bpx, pby = bpy, pbz = bpz
    for jj in range(3):
        if jj == j:
            continue
        cjx = B[jj]; cjy = B[3 + jj]; cjz = B[6 + jj]
        s = -1.0 if (nx * cjx + ny * cjy + nz * cjz) >= 0.0 else 1.0
        pbx += s * bh[jj] * cjx; pby += s * bh[jj] * cjy; pbz += s * bh[jj] * cjz
    cdef double qa1x = pax - ah[i] * aix, qa1y = pay - ah[i] * aiy, qa1z = paz - ah[i] * aiz
    cdef double qa2x = pax + ah[i] * aix, qa2y = pay + ah[i] * aiy, qa2z = paz + ah[i] * aiz
    cdef double qb1x = pbx - bh[j] * bjx, qb1y = pby - bh[j] * bjy, qb1z = pbz - bh[j] * bjz
    cdef double qb2x = pbx + bh[j] * bjx, qb2y = pby + bh[j] * bjy, qb2z = pbz + bh[j] * bjz
    cdef double c1x, c1y, c1z, c2x, c2y, c2z
    _closest_segment_segment(qa1x, qa1y, qa1z, qa2x, qa2y, qa2z,
                             qb1x, qb1y, qb1z, qb2x, qb2y, qb2z,
                             &c1x, &c1y, &c1z, &c2x, &c2y, &c2z)
    hh.ok = 1
    hh.px = 0.5 * (c1x + c2x); hh.py = 0.5 * (c1y + c2y); hh.pz = 0.5 * (c1z + c2z)
    hh.nx = nx; hh.ny = ny; hh.nz = nz
    hh.depth = best_depth
    return hh


cdef void _body_aabb(Py_ssize_t i, double[:, ::1] pos, double[:, ::1] quat,
                     cnp.int32_t[::1] shape_type, double[:, ::1] shape_params,
                     double[:, ::1] aabb) nogil:
    cdef int st = shape_type[i]
    cdef double px = pos[i, 0], py = pos[i, 1], pz = pos[i, 2]
    cdef double r, hcap, qw, qx, qy, qz
    cdef double e1x, e1y, e1z, e2x, e2y, e2z
    cdef double hx, hy, hz, ex, ey, ez
    cdef double m[9]
    if st == _SPHERE:
        r = shape_params[i, 0]
        aabb[i, 0] = px - r; aabb[i, 1] = py - r; aabb[i, 2] = pz - r
        aabb[i, 3] = px + r; aabb[i, 4] = py + r; aabb[i, 5] = pz + r
    elif st == _CAPSULE:
        hcap = shape_params[i, 0]; r = shape_params[i, 1]
        qw = quat[i, 0]; qx = quat[i, 1]; qy = quat[i, 2]; qz = quat[i, 3]
        _capsule_segment(px, py, pz, qw, qx, qy, qz, hcap,
                         &e1x, &e1y, &e1z, &e2x, &e2y, &e2z)
        aabb[i, 0] = (e1x if e1x < e2x else e2x) - r
        aabb[i, 1] = (e1y if e1y < e2y else e2y) - r
        aabb[i, 2] = (e1z if e1z < e2z else e2z) - r
        aabb[i, 3] = (e1x if e1x > e2x else e2x) + r
        aabb[i, 4] = (e1y if e1y > e2y else e2y) + r
        aabb[i, 5] = (e1z if e1z > e2z else e2z) + r
    elif st == _BOX:
        hx = shape_params[i, 0]; hy = shape_params[i, 1]; hz = shape_params[i, 2]
        qw = quat[i, 0]; qx = quat[i, 1]; qy = quat[i, 2]; qz = quat[i, 3]
        _quat_to_mat(qw, qx, qy, qz, m)
        ex = (m[0] if m[0] >= 0 else -m[0]) * hx + (m[1] if m[1] >= 0 else -m[1]) * hy + (m[2] if m[2] >= 0 else -m[2]) * hz
        ey = (m[3] if m[3] >= 0 else -m[3]) * hx + (m[4] if m[4] >= 0 else -m[4]) * hy + (m[5] if m[5] >= 0 else -m[5]) * hz
        ez = (m[6] if m[6] >= 0 else -m[6]) * hx + (m[7] if m[7] >= 0 else -m[7]) * hy + (m[8] if m[8] >= 0 else -m[8]) * hz
        aabb[i, 0] = px - ex; aabb[i, 1] = py - ey; aabb[i, 2] = pz - ez
        aabb[i, 3] = px + ex; aabb[i, 4] = py + ey; aabb[i, 5] = pz + ez
    else:
        aabb[i, 0] = -1e30; aabb[i, 1] = -1e30; aabb[i, 2] = -1e30
        aabb[i, 3] = 1e30; aabb[i, 4] = 1e30; aabb[i, 5] = 1e30


def detect_contacts(double[:, ::1] pos, double[:, ::1] quat,
                    cnp.int32_t[::1] shape_type, double[:, ::1] shape_params,
                    cnp.int32_t[:, ::1] pairs, double[:, ::1] aabb,
                    cnp.int32_t[::1] c_a, cnp.int32_t[::1] c_b,
                    double[:, ::1] c_point, double[:, ::1] c_normal,
                    double[::1] c_depth):
    cdef Py_ssize_t n = pos.shape[0]
    cdef Py_ssize_t np_ = pairs.shape[0]
    cdef Py_ssize_t i
    for i in range(n):
        _body_aabb(i, pos, quat, shape_type, shape_params, aabb)
    cdef Py_ssize_t count = 0
    cdef Py_ssize_t p
    cdef int bi, bj, a, b, ta, tb, flip
    cdef double apx, apy, apz, bpx, bpy, bpz
    cdef double aqw, aqx, aqy, aqz, bqw, bqx, bqy, bqz
    cdef Hit h
    cdef double mx, my, mz, p0x, p0y, p0z, r, s, depth
    cdef double e1x, e1y, e1z, e2x, e2y, e2z
    cdef double cxp, cyp, czp
    cdef double b1x, b1y, b1z, b2x, b2y, b2z
    cdef double c1x, c1y, c1z, c2x, c2y, c2z
    cdef double s1, s2, ds
    cdef double hx, hy, hz
    cdef double m[9]
    cdef double smin, vx, vy, vz, cxx, cyy, czz
    cdef int cnt, sxi, syi, szi
    cdef double sxv, syv, szv

    for p in range(np_):
        bi = pairs[p, 0]; bj = pairs[p, 1]
        if (aabb[bi, 3] < aabb[bj, 0] or aabb[bj, 3] < aabb[bi, 0]
                or aabb[bi, 4] < aabb[bj, 1] or aabb[bj, 4] < aabb[bi, 1]
                or aabb[bi, 5] < aabb[bj, 2] or aabb[bj, 5] < aabb[bi, 2]):
            continue
        if shape_type[bi] <= shape_type[bj]:
            a = bi; b = bj
            flip = 0
        else:
            a = bj; b = bi
            flip = 1
        ta = shape_type[a]; tb = shape_type[b]
        apx = pos[a, 0]; apy = pos[a, 1]; apz = pos[a, 2]
        bpx = pos[b, 0]; bpy = pos[b, 1]; bpz = pos[b, 2]
        aqw = quat[a, 0]; aqx = quat[a, 1]; aqy = quat[a, 2]; aqz = quat[a, 3]
        bqw = quat[b, 0]; bqx = quat[b, 1]; bqy = quat[b, 2]; bqz = quat[b, 3]

        h.ok = 0
        if ta == _SPHERE and tb == _SPHERE:
            h = _sphere_sphere(apx, apy, apz, shape_params[a, 0],
                               bpx, bpy, bpz, shape_params[b, 0])
        elif ta == _SPHERE and tb == _CAPSULE:
            _capsule_segment(bpx, bpy, bpz, bqw, bqx, bqy, bqz, shape_params[b, 0],
                             &e1x, &e1y, &e1z, &e2x, &e2y, &e2z)
            _closest_on_segment(apx, apy, apz, e1x, e1y, e1z, e2x, e2y, e2z,
                                &cxp, &cyp, &czp)
            h = _sphere_sphere(apx, apy, apz, shape_params[a, 0],
                               cxp, cyp, czp, shape_params[b, 1])
        elif ta == _SPHERE and tb == _BOX:
            h = _sphere_box(apx, apy, apz, shape_params[a, 0],
                            bpx, bpy, bpz, bqw, bqx, bqy, bqz,
                            shape_params[b, 0], shape_params[b, 1], shape_params[b, 2])
        elif ta == _SPHERE and tb == _HALFSPACE:
            _plane_world(bpx, bpy, bpz, bqw, bqx, bqy, bqz,
                         shape_params[b, 0], shape_params[b, 1], shape_params[b, 2],
                         shape_params[b, 3], &mx, &my, &mz, &p0x, &p0y, &p0z)
            r = shape_params[a, 0]
            s = (apx - p0x) * mx + (apy - p0y) * my + (apz - p0z) * mz
            depth = r - s
            if depth > 0.0:
                h.ok = 1
                h.px = apx - mx * r; h.py = apy - my * r; h.pz = apz - mz * r
                h.nx = -mx; h.ny = -my; h.nz = -mz
                h.depth = depth
        elif ta == _CAPSULE and tb == _CAPSULE:
            _capsule_segment(apx, apy, apz, aqw, aqx, aqy, aqz, shape_params[a, 0],
                             &e1x, &e1y, &e1z, &e2x, &e2y, &e2z)
            _capsule_segment(bpx, bpy, bpz, bqw, bqx, bqy, bqz, shape_params[b, 0],
                             &b1x, &b1y, &b1z, &b2x, &b2y, &b2z)
            _closest_segment_segment(e1x, e1y, e1z, e2x, e2y, e2z,
                                     b1x, b1y, b1z, b2x, b2y, b2z,
                                     &c1x, &c1y, &c1z, &c2x, &c2y, &c2z)
            h = _sphere_sphere(c1x, c1y, c1z, shape_params[a, 1],
                               c2x, c2y, c2z, shape_params[b, 1])
        elif ta == _CAPSULE and tb == _BOX:
            h = _capsule_box(apx, apy, apz, aqw, aqx, aqy, aqz,
                             shape_params[a, 0], shape_params[a, 1],
                             bpx, bpy, bpz, bqw, bqx, bqy, bqz,
                             shape_params[b, 0], shape_params[b, 1], shape_params[b, 2])
        elif ta == _CAPSULE and tb == _HALFSPACE:
            _plane_world(bpx, bpy, bpz, bqw, bqx, bqy, bqz,
                         shape_params[b, 0], shape_params[b, 1], shape_params[b, 2],
                         shape_params[b, 3], &mx, &my, &mz, &p0x, &p0y, &p0z)
            r = shape_params[a, 1]
            _capsule_segment(apx, apy, apz, aqw, aqx, aqy, aqz, shape_params[a, 0],
                             &e1x, &e1y, &e1z, &e2x, &e2y, &e2z)
            s1 = (e1x - p0x) * mx + (e1y - p0y) * my + (e1z - p0z) * mz
            s2 = (e2x - p0x) * mx + (e2y - p0y) * my + (e2z - p0z) * mz
            ds = s1 - s2
            if (ds if ds >= 0.0 else -ds) <= 1e-12:
                cxp = 0.5 * (e1x + e2x); cyp = 0.5 * (e1y + e2y); czp = 0.5 * (e1z + e2z)
                s = 0.5 * (s1 + s2)
            elif s1 < s2:
                cxp = e1x; cyp = e1y; czp = e1z; s = s1
            else:
                cxp = e2x; cyp = e2y; czp = e2z; s = s2
            depth = r - s
            if depth > 0.0:
                h.ok = 1
                h.px = cxp - mx * r; h.py = cyp - my * r; h.pz = czp - mz * r
                h.nx = -mx; h.ny = -my; h.nz = -mz
                h.depth = depth
        elif ta == _BOX and tb == _BOX:
            h = _box_box(apx, apy, apz, aqw, aqx, aqy, aqz,
                         shape_params[a, 0], shape_params[a, 1], shape_params[a, 2],
                         bpx, bpy, bpz, bqw, bqx, bqy, bqz,
                         shape_params[b, 0], shape_params[b, 1], shape_params[b, 2])
        elif ta == _BOX and tb == _HALFSPACE:
            _plane_world(bpx, bpy, bpz, bqw, bqx, bqy, bqz,
                         shape_params[b, 0], shape_params[b, 1], shape_params[b, 2],
                         shape_params[b, 3], &mx, &my, &mz, &p0x, &p0y, &p0z)
            hx = shape_params[a, 0]; hy = shape_params[a, 1]; hz = shape_params[a, 2]
            _quat_to_mat(aqw, aqx, aqy, aqz, m)
            smin = INFINITY
            for sxi in range(2):
                sxv = -1.0 if sxi == 0 else 1.0
                for syi in range(2):
                    syv = -1.0 if syi == 0 else 1.0
                    for szi in range(2):
                        szv = -1.0 if szi == 0 else 1.0
                        vx = apx + m[0] * sxv * hx + m[1] * syv * hy + m[2] * szv * hz
                        vy = apy + m[3] * sxv * hx + m[4] * syv * hy + m[5] * szv * hz
                        vz = apz + m[6] * sxv * hx + m[7] * syv * hy + m[8] * szv * hz
                        s = (vx - p0x) * mx + (vy - p0y) * my + (vz - p0z) * mz
                        if s < smin:
                            smin = s
            if smin < 0.0:
                cxx = 0.0; cyy = 0.0; czz = 0.0
                cnt = 0
                for sxi in range(2):
                    sxv = -1.0 if sxi == 0 else 1.0
                    for syi in range(2):
                        syv = -1.0 if syi == 0 else 1.0
                        for szi in range(2):
                            szv = -1.0 if szi == 0 else 1.0
                            vx = apx + m[0] * sxv * hx + m[1] * syv * hy + m[2] * szv * hz
                            vy = apy + m[3] * sxv * hx + m[4] * syv * hy + m[5] * szv * hz
                            vz = apz + m[6] * sxv * hx + m[7] * syv * hy + m[8] * szv * hz
                            s = (vx - p0x) * mx + (vy - p0y) * my + (vz - p0z) * mz
                            if s <= smin + 1e-9:
                                cxx += vx; cyy += vy; czz += vz
                                cnt += 1
                cxx /= cnt; cyy /= cnt; czz /= cnt
                h.ok = 1
                h.px = cxx; h.py = cyy; h.pz = czz
                h.nx = -mx; h.ny = -my; h.nz = -mz
                h.depth = -smin
        else:
            return -(p + 1)

        if not h.ok:
            continue
        if flip:
            h.nx = -h.nx; h.ny = -h.ny; h.nz = -h.nz
        c_a[count] = bi
        c_b[count] = bj
        c_point[count, 0] = h.px; c_point[count, 1] = h.py; c_point[count, 2] = h.pz
        c_normal[count, 0] = h.nx; c_normal[count, 1] = h.ny; c_normal[count, 2] = h.nz
        c_depth[count] = h.depth
        count += 1
    return count


# --- impulse solver -----------------------------------------------------------

cdef inline void _iworld(double qw, double qx, double qy, double qz,
                         double dx, double dy, double dz,
                         double vx, double vy, double vz,
                         double* ox, double* oy, double* oz) nogil:
    # I^-1_world v = R (d o (R^T v)) with d the diagonal inverse inertia.
    cdef double bx, by, bz
    _rotate_inv(qw, qx, qy, qz, vx, vy, vz, &bx, &by, &bz)
    bx *= dx; by *= dy; bz *= dz
    _rotate(qw, qx, qy, qz, bx, by, bz, ox, oy, oz)


def resolve_contacts(double[:, ::1] pos, double[:, ::1] quat, double[:, ::1] vel,
                     double[:, ::1] angvel, double[::1] mass, double[:, ::1] inertia,
                     cnp.uint8_t[::1] kinematic, double[::1] restitution,
                     double[::1] friction,
                     cnp.int32_t[::1] c_a, cnp.int32_t[::1] c_b,
                     double[:, ::1] c_point, double[:, ::1] c_normal,
                     double[::1] c_depth, Py_ssize_t n_contacts,
                     double dt, int iterations, double baumgarte, double slop,
                     double rest_threshold, double[::1] impulse_out):
    if n_contacts == 0:
        return
    # Per-contact scratch: 34 doubles each.
    cdef double* S = <double*> malloc(n_contacts * 34 * sizeof(double))
    cdef double* jt1 = <double*> malloc(n_contacts * sizeof(double))
    cdef double* jt2 = <double*> malloc(n_contacts * sizeof(double))
    if S == NULL or jt1 == NULL or jt2 == NULL:
        if S != NULL:
            free(S)
        if jt1 != NULL:
            free(jt1)
        if jt2 != NULL:
            free(jt2)
        raise MemoryError()
    cdef Py_ssize_t k
    cdef int ia, ib
    cdef double nx, ny, nz, px, py, pz
    cdef double rax, ray, raz, rbx, rby, rbz
    cdef double inv_ma, inv_mb
    cdef double dax, day, daz, dbx, dby, dbz
    cdef double qaw, qax, qay, qaz, qbw, qbx, qby, qbz
    cdef double t1x, t1y, t1z, t2x, t2y, t2z, tl
    cdef double kn, kt1, kt2
    cdef double vrx, vry, vrz, s0, e, ea, eb, rest_target, d, bias, target, mu
    cdef double cax, cay, caz, wax, way, waz, gax, gay, gaz
    cdef double cbx, cby, cbz, wbx, wby, wbz, gbx, gby, gbz
    cdef double* row

    for k in range(n_contacts):
        row = S + k * 34
        ia = c_a[k]; ib = c_b[k]
        nx = c_normal[k, 0]; ny = c_normal[k, 1]; nz = c_normal[k, 2]
        px = c_point[k, 0]; py = c_point[k, 1]; pz = c_point[k, 2]
        rax = px - pos[ia, 0]; ray = py - pos[ia, 1]; raz = pz - pos[ia, 2]
        rbx = px - pos[ib, 0]; rby = py - pos[ib, 1]; rbz = pz - pos[ib, 2]
        if kinematic[ia]:
            inv_ma = 0.0
            dax = 0.0; day = 0.0; daz = 0.0
        else:
            inv_ma = 1.0 / mass[ia]
            dax = 1.0 / inertia[ia, 0]
            day = 1.0 / inertia[ia, 1]
            daz = 1.0 / inertia[ia, 2]
        if kinematic[ib]:
            inv_mb = 0.0
            dbx = 0.0; dby = 0.0; dbz = 0.0
        else:
            inv_mb = 1.0 / mass[ib]
            dbx = 1.0 / inertia[ib, 0]
            dby = 1.0 / inertia[ib, 1]
            dbz = 1.0 / inertia[ib, 2]
        qaw = quat[ia, 0]; qax = quat[ia, 1]; qay = quat[ia, 2]; qaz = quat[ia, 3]
        qbw = quat[ib, 0]; qbx = quat[ib, 1]; qby = quat[ib, 2]; qbz = quat[ib, 3]

        if (nx if nx >= 0.0 else -nx) < 0.9:
            t1x = 0.0; t1y = nz; t1z = -ny
        else:
            t1x = -nz; t1y = 0.0; t1z = nx
        tl = sqrt(t1x * t1x + t1y * t1y + t1z * t1z)
        t1x /= tl; t1y /= tl; t1z /= tl
        t2x = ny * t1z - nz * t1y
        t2y = nz * t1x - nx * t1z
        t2z = nx * t1y - ny * t1x

        # Effective mass along n, t1, t2 (same formula as the pure twin).
        cax = ray * nz - raz * ny
        cay = raz * nx - rax * nz
        caz = rax * ny - ray * nx
        _iworld(qaw, qax, qay, qaz, dax, day, daz, cax, cay, caz, &wax, &way, &waz)
        gax = way * raz - waz * ray
        gay = waz * rax - wax * raz
        gaz = wax * ray - way * rax
        cbx = rby * nz - rbz * ny
        cby = rbz * nx - rbx * nz
        cbz = rbx * ny - rby * nx
        _iworld(qbw, qbx, qby, qbz, dbx, dby, dbz, cbx, cby, cbz, &wbx, &wby, &wbz)
        gbx = wby * rbz - wbz * rby
        gby = wbz * rbx - wbx * rbz
        gbz = wbx * rby - wby * rbx
        kn = inv_ma + inv_mb + nx * (gax + gbx) + ny * (gay + gby) + nz * (gaz + gbz)

        cax = ray * t1z - raz * t1y
        cay = raz * t1x - rax * t1z
        caz = rax * t1y - ray * t1x
        _iworld(qaw, qax, qay, qaz, dax, day, daz, cax, cay, caz, &wax, &way, &waz)
        gax = way * raz - waz * ray
        gay = waz * rax - wax * raz
        gaz = wax * ray - way * rax
        cbx = rby * t1z - rbz * t1y
        cby = rbz * t1x - rbx * t1z
        cbz = rbx * t1y - rby * t1x
        _iworld(qbw, qbx, qby, qbz, dbx, dby, dbz, cbx, cby, cbz, &wbx, &wby, &wbz)
        gbx = wby * rbz - wbz * rby
        gby = wbz * rbx - wbx * rbz
        gbz = wbx * rby - wby * rbx
        kt1 = inv_ma + inv_mb + t1x * (gax + gbx) + t1y * (gay + gby) + t1z * (gaz + gbz)

        cax = ray * t2z - raz * t2y
        cay = raz * t2x - rax * t2z
        caz = rax * t2y - ray * t2x
        _iworld(qaw, qax, qay, qaz, dax, day, daz, cax, cay, caz, &wax, &way, &waz)
        gax = way * raz - waz * ray
        gay = waz * rax - wax * raz
        gaz = wax * ray - way * rax
        cbx = rby * t2z - rbz * t2y
        cby = rbz * t2x - rbx * t2z
        cbz = rbx * t2y - rby * t2x
        _iworld(qbw, qbx, qby, qbz, dbx, dby, dbz, cbx, cby, cbz, &wbx, &wby, &wbz)
        gbx = wby * rbz - wbz * rby
        gby = wbz * rbx - wbx * rbz
        gbz = wbx * rby - wby * rbx
        kt2 = inv_ma + inv_mb + t2x * (gax + gbx) + t2y * (gay + gby) + t2z * (gaz + gbz)

        vrx = (vel[ib, 0] + angvel[ib, 1] * rbz - angvel[ib, 2] * rby) \
            - (vel[ia, 0] + angvel[ia, 1] * raz - angvel[ia, 2] * ray)
        vry = (vel[ib, 1] + angvel[ib, 2] * rbx - angvel[ib, 0] * rbz) \
            - (vel[ia, 1] + angvel[ia, 2] * rax - angvel[ia, 0] * raz)
        vrz = (vel[ib, 2] + angvel[ib, 0] * rby - angvel[ib, 1] * rbx) \
            - (vel[ia, 2] + angvel[ia, 0] * ray - angvel[ia, 1] * rax)
        s0 = vrx * nx + vry * ny + vrz * nz
        ea = restitution[ia]; eb = restitution[ib]
        e = ea if ea > eb else eb
        rest_target = -e * s0 if s0 < -rest_threshold else 0.0
        d = c_depth[k] - slop
        bias = baumgarte * (d if d > 0.0 else 0.0) / dt
        target = rest_target if rest_target > bias else bias
        mu = sqrt(friction[ia] * friction[ib])

        row[0] = ia; row[1] = ib
        row[2] = nx; row[3] = ny; row[4] = nz
        row[5] = rax; row[6] = ray; row[7] = raz
        row[8] = rbx; row[9] = rby; row[10] = rbz
        row[11] = inv_ma; row[12] = inv_mb
        row[13] = dax; row[14] = day; row[15] = daz
        row[16] = dbx; row[17] = dby; row[18] = dbz
        row[19] = kn; row[20] = kt1; row[21] = kt2
        row[22] = t1x; row[23] = t1y; row[24] = t1z
        row[25] = t2x; row[26] = t2y; row[27] = t2z
        row[28] = target; row[29] = mu
        impulse_out[k] = 0.0
        jt1[k] = 0.0
        jt2[k] = 0.0

    cdef int it
    cdef double dj, jn_old, jn_new, maxf, st, djt, jt_old, jt_new
    cdef double pxi, pyi, pzi
    cdef double bx2, by2, bz2, wx2, wy2, wz2
    for it in range(iterations):
        for k in range(n_contacts):
            row = S + k * 34
            ia = <int> row[0]; ib = <int> row[1]
            nx = row[2]; ny = row[3]; nz = row[4]
            rax = row[5]; ray = row[6]; raz = row[7]
            rbx = row[8]; rby = row[9]; rbz = row[10]
            inv_ma = row[11]; inv_mb = row[12]
            dax = row[13]; day = row[14]; daz = row[15]
            dbx = row[16]; dby = row[17]; dbz = row[18]
            kn = row[19]; kt1 = row[20]; kt2 = row[21]
            t1x = row[22]; t1y = row[23]; t1z = row[24]
            t2x = row[25]; t2y = row[26]; t2z = row[27]
            target = row[28]; mu = row[29]
            if kn <= _EPS:
                continue
            qaw = quat[ia, 0]; qax = quat[ia, 1]; qay = quat[ia, 2]; qaz = quat[ia, 3]
            qbw = quat[ib, 0]; qbx = quat[ib, 1]; qby = quat[ib, 2]; qbz = quat[ib, 3]

            vrx = (vel[ib, 0] + angvel[ib, 1] * rbz - angvel[ib, 2] * rby) \
                - (vel[ia, 0] + angvel[ia, 1] * raz - angvel[ia, 2] * ray)
            vry = (vel[ib, 1] + angvel[ib, 2] * rbx - angvel[ib, 0] * rbz) \
                - (vel[ia, 1] + angvel[ia, 2] * rax - angvel[ia, 0] * raz)
            vrz = (vel[ib, 2] + angvel[ib, 0] * rby - angvel[ib, 1] * rbx) \
                - (vel[ia, 2] + angvel[ia, 0] * ray - angvel[ia, 1] * rax)
            st = vrx * nx + vry * ny + vrz * nz
            dj = (target - st) / kn
            jn_old = impulse_out[k]
            jn_new = jn_old + dj
            if jn_new < 0.0:
                jn_new = 0.0
            dj = jn_new - jn_old
            impulse_out[k] = jn_new
            if dj != 0.0:
                pxi = dj * nx; pyi = dj * ny; pzi = dj * nz
                vel[ia, 0] = vel[ia, 0] - pxi * inv_ma
                vel[ia, 1] = vel[ia, 1] - pyi * inv_ma
                vel[ia, 2] = vel[ia, 2] - pzi * inv_ma
                cax = ray * pzi - raz * pyi
                cay = raz * pxi - rax * pzi
                caz = rax * pyi - ray * pxi
                _rotate_inv(qaw, qax, qay, qaz, cax, cay, caz, &bx2, &by2, &bz2)
                bx2 *= dax; by2 *= day; bz2 *= daz
                _rotate(qaw, qax, qay, qaz, bx2, by2, bz2, &wx2, &wy2, &wz2)
                angvel[ia, 0] = angvel[ia, 0] - wx2
                angvel[ia, 1] = angvel[ia, 1] - wy2
                angvel[ia, 2] = angvel[ia, 2] - wz2
                vel[ib, 0] = vel[ib, 0] + pxi * inv_mb
                vel[ib, 1] = vel[ib, 1] + pyi * inv_mb
                vel[ib, 2] = vel[ib, 2] + pzi * inv_mb
                cbx = rby * pzi - rbz * pyi
                cby = rbz * pxi - rbx * pzi
                cbz = rbx * pyi - rby * pxi
                _rotate_inv(qbw, qbx, qby, qbz, cbx, cby, cbz, &bx2, &by2, &bz2)
                bx2 *= dbx; by2 *= dby; bz2 *= dbz
                _rotate(qbw, qbx, qby, qbz, bx2, by2, bz2, &wx2, &wy2, &wz2)
                angvel[ib, 0] = angvel[ib, 0] + wx2
                angvel[ib, 1] = angvel[ib, 1] + wy2
                angvel[ib, 2] = angvel[ib, 2] + wz2

            if mu <= 0.0 or jn_new <= 0.0:
                continue
            maxf = mu * jn_new
            # Tangent 1
            vrx = (vel[ib, 0] + angvel[ib, 1] * rbz - angvel[ib, 2] * rby) \
                - (vel[ia, 0] + angvel[ia, 1] * raz - angvel[ia, 2] * ray)
            vry = (vel[ib, 1] + angvel[ib, 2] * rbx - angvel[ib, 0] * rbz) \
                - (vel[ia, 1] + angvel[ia, 2] * rax - angvel[ia, 0] * raz)
            vrz = (vel[ib, 2] + angvel[ib, 0] * rby - angvel[ib, 1] * rbx) \
                - (vel[ia, 2] + angvel[ia, 0] * ray - angvel[ia, 1] * rax)
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
                pxi = djt * t1x; pyi = djt * t1y; pzi = djt * t1z
                vel[ia, 0] = vel[ia, 0] - pxi * inv_ma
                vel[ia, 1] = vel[ia, 1] - pyi * inv_ma
                vel[ia, 2] = vel[ia, 2] - pzi * inv_ma
                cax = ray * pzi - raz * pyi
                cay = raz * pxi - rax * pzi
                caz = rax * pyi - ray * pxi
                _rotate_inv(qaw, qax, qay, qaz, cax, cay, caz, &bx2, &by2, &bz2)
                bx2 *= dax; by2 *= day; bz2 *= daz
                _rotate(qaw, qax, qay, qaz, bx2, by2, bz2, &wx2, &wy2, &wz2)
                angvel[ia, 0] = angvel[ia, 0] - wx2
                angvel[ia, 1] = angvel[ia, 1] - wy2
                angvel[ia, 2] = angvel[ia, 2] - wz2
                vel[ib, 0] = vel[ib, 0] + pxi * inv_mb
                vel[ib, 1] = vel[ib, 1] + pyi * inv_mb
                vel[ib, 2] = vel[ib, 2] + pzi * inv_mb
                cbx = rby * pzi - rbz * pyi
                cby = rbz * pxi - rbx * pzi
                cbz = rbx * pyi - rby * pxi
                _rotate_inv(qbw, qbx, qby, qbz, cbx, cby, cbz, &bx2, &by2, &bz2)
                bx2 *= dbx; by2 *= dby; bz2 *= dbz
                _rotate(qbw, qbx, qby, qbz, bx2, by2, bz2, &wx2, &wy2, &wz2)
                angvel[ib, 0] = angvel[ib, 0] + wx2
                angvel[ib, 1] = angvel[ib, 1] + wy2
                angvel[ib, 2] = angvel[ib, 2] + wz2
            # Tangent 2
            vrx = (vel[ib, 0] + angvel[ib, 1] * rbz - angvel[ib, 2] * rby) \
                - (vel[ia, 0] + angvel[ia, 1] * raz - angvel[ia, 2] * ray)
            vry = (vel[ib, 1] + angvel[ib, 2] * rbx - angvel[ib, 0] * rbz) \
                - (vel[ia, 1] + angvel[ia, 2] * rax - angvel[ia, 0] * raz)
            vrz = (vel[ib, 2] + angvel[ib, 0] * rby - angvel[ib, 1] * rbx) \
                - (vel[ia, 2] + angvel[ia, 0] * ray - angvel[ia, 1] * rax)
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
                pxi = djt * t2x; pyi = djt * t2y; pzi = djt * t2z
                vel[ia, 0] = vel[ia, 0] - pxi * inv_ma
                vel[ia, 1] = vel[ia, 1] - pyi * inv_ma
                vel[ia, 2] = vel[ia, 2] - pzi * inv_ma
                cax = ray * pzi - raz * pyi
                cay = raz * pxi - rax * pzi
                caz = rax * pyi - ray * pxi
                _rotate_inv(qaw, qax, qay, qaz, cax, cay, caz, &bx2, &by2, &bz2)
                bx2 *= dax; by2 *= day; bz2 *= daz
                _rotate(qaw, qax, qay, qaz, bx2, by2, bz2, &wx2, &wy2, &wz2)
                angvel[ia, 0] = angvel[ia, 0] - wx2
                angvel[ia, 1] = angvel[ia, 1] - wy2
                angvel[ia, 2] = angvel[ia, 2] - wz2
                vel[ib, 0] = vel[ib, 0] + pxi * inv_mb
                vel[ib, 1] = vel[ib, 1] + pyi * inv_mb
                vel[ib, 2] = vel[ib, 2] + pzi * inv_mb
                cbx = rby * pzi - rbz * pyi
                cby = rbz * pxi - rbx * pzi
                cbz = rbx * pyi - rby * pxi
                _rotate_inv(qbw, qbx, qby, qbz, cbx, cby, cbz, &bx2, &by2, &bz2)
                bx2 *= dbx; by2 *= dby; bz2 *= dbz
                _rotate(qbw, qbx, qby, qbz, bx2, by2, bz2, &wx2, &wy2, &wz2)
                angvel[ib, 0] = angvel[ib, 0] + wx2
                angvel[ib, 1] = angvel[ib, 1] + wy2
                angvel[ib, 2] = angvel[ib, 2] + wz2

    free(S)
    free(jt1)
    free(jt2)
