"""Numba-compiled inner loops of the fixed-timestep simulator.

Everything here operates on plain float64 arrays so the hot path stays free of
Python objects.  Collision handling is positional projection with zero
restitution; pair contacts are resolved sequentially in index order so a run
is bit-reproducible for identical inputs.
"""
from __future__ import annotations

import numpy as np
from numba import njit

MAX_PASSES = 10
TANGENT_DAMP = 0.1
CONVERGENCE_EPS = 1e-12


@njit(cache=True)
def _project_static(px, py, r, lx, ly, obstacles):
    """Push a disc centre out of the walls and obstacle rects.

    Returns (x, y, nx, ny, corrected); (nx, ny) is the last contact normal
    pointing into free space (zero vector when no contact).
    """
    nx = 0.0
    ny = 0.0
    corrected = 0.0
    if px < r:
        corrected += r - px
        px = r
        nx = 1.0
    elif px > lx - r:
        corrected += px - (lx - r)
        px = lx - r
        nx = -1.0
    if py < r:
        corrected += r - py
        py = r
        ny = 1.0
    elif py > ly - r:
        corrected += py - (ly - r)
        py = ly - r
        ny = -1.0
    for k in range(obstacles.shape[0]):
        x0 = obstacles[k, 0] - r
        y0 = obstacles[k, 1] - r
        x1 = obstacles[k, 2] + r
        y1 = obstacles[k, 3] + r
        if px > x0 and px < x1 and py > y0 and py < y1:
            # push out along the cheapest axis
            dl = px - x0
            dr = x1 - px
            db = py - y0
            dt_ = y1 - py
            m = dl
            axis = 0
            if dr < m:
                m = dr
                axis = 1
            if db < m:
                m = db
                axis = 2
            if dt_ < m:
                m = dt_
                axis = 3
            corrected += m
            if axis == 0:
                px = x0
                nx, ny = -1.0, 0.0
            elif axis == 1:
                px = x1
                nx, ny = 1.0, 0.0
            elif axis == 2:
                py = y0
                nx, ny = 0.0, -1.0
            else:
                py = y1
                nx, ny = 0.0, 1.0
    return px, py, nx, ny, corrected


@njit(cache=True)
def _disc_part_contact(px, py, r, verts, nv):
    """Disc vs one convex CCW part given in world coordinates.

    Returns (depth, nx, ny, cx, cy): depth > 0 when touching, normal points
    from the part toward the disc centre, (cx, cy) is the surface point.
    """
    inside = True
    best_d = -1.0e30
    bx = 0.0
    by = 0.0
    bnx = 0.0
    bny = 0.0
    for i in range(nv):
        x0 = verts[i, 0]
        y0 = verts[i, 1]
        j = i + 1
        if j == nv:
            j = 0
        x1 = verts[j, 0]
        y1 = verts[j, 1]
        ex = x1 - x0
        ey = y1 - y0
        elen = np.sqrt(ex * ex + ey * ey)
        if elen < 1e-15:
            continue
        # outward normal of a CCW edge
        onx = ey / elen
        ony = -ex / elen
        d = (px - x0) * onx + (py - y0) * ony
        if d > best_d:
            best_d = d
            bnx = onx
            bny = ony
            # clamp projection onto the edge for the contact point
            t = ((px - x0) * ex + (py - y0) * ey) / (elen * elen)
            if t < 0.0:
                t = 0.0
            elif t > 1.0:
                t = 1.0
            bx = x0 + t * ex
            by = y0 + t * ey
        if d > 0.0:
            inside = False
    if inside:
        return r - best_d, bnx, bny, bx, by

    # outside: distance to the closest boundary point
    best = 1.0e30
    for i in range(nv):
        x0 = verts[i, 0]
        y0 = verts[i, 1]
        j = i + 1
        if j == nv:
            j = 0
        ex = verts[j, 0] - x0
        ey = verts[j, 1] - y0
        ll = ex * ex + ey * ey
        if ll < 1e-30:
            t = 0.0
        else:
            t = ((px - x0) * ex + (py - y0) * ey) / ll
            if t < 0.0:
                t = 0.0
            elif t > 1.0:
                t = 1.0
        qx = x0 + t * ex
        qy = y0 + t * ey
        dx = px - qx
        dy = py - qy
        dd = dx * dx + dy * dy
        if dd < best:
            best = dd
            bx = qx
            by = qy
    dist = np.sqrt(best)
    if dist < 1e-12:
        return r, bnx, bny, bx, by
    return r - dist, (px - bx) / dist, (py - by) / dist, bx, by


@njit(cache=True)
def _world_parts(parts, counts, ox, oy, ca, sa, out):
    for p in range(parts.shape[0]):
        for v in range(parts.shape[1]):
            x = parts[p, v, 0]
            y = parts[p, v, 1]
            out[p, v, 0] = ox + ca * x - sa * y
            out[p, v, 1] = oy + sa * x + ca * y


@njit(cache=True)
def _part_rect_mtv(verts, nv, x0, y0, x1, y1):
    """SAT between one convex part and a rect; returns (depth, nx, ny).

    depth <= 0 means separated; the normal pushes the part out of the rect.
    """
    best_depth = 1.0e30
    bnx = 0.0
    bny = 0.0
    # rect axes
    pmin = 1.0e30
    pmax = -1.0e30
    for v in range(nv):
        x = verts[v, 0]
        if x < pmin:
            pmin = x
        if x > pmax:
            pmax = x
    ov = min(pmax, x1) - max(pmin, x0)
    if ov <= 0.0:
        return 0.0, 0.0, 0.0
    if ov < best_depth:
        best_depth = ov
        cx_part = 0.5 * (pmin + pmax)
        bnx = 1.0 if cx_part >= 0.5 * (x0 + x1) else -1.0
        bny = 0.0
    pmin = 1.0e30
    pmax = -1.0e30
    for v in range(nv):
        y = verts[v, 1]
        if y < pmin:
            pmin = y
        if y > pmax:
            pmax = y
    ov = min(pmax, y1) - max(pmin, y0)
    if ov <= 0.0:
        return 0.0, 0.0, 0.0
    if ov < best_depth:
        best_depth = ov
        cy_part = 0.5 * (pmin + pmax)
        bnx = 0.0
        bny = 1.0 if cy_part >= 0.5 * (y0 + y1) else -1.0
    # part edge normals
    for i in range(nv):
        j = i + 1
        if j == nv:
            j = 0
        ex = verts[j, 0] - verts[i, 0]
        ey = verts[j, 1] - verts[i, 1]
        elen = np.sqrt(ex * ex + ey * ey)
        if elen < 1e-15:
            continue
        ax = ey / elen
        ay = -ex / elen
        pmin = 1.0e30
        pmax = -1.0e30
        for v in range(nv):
            pr = verts[v, 0] * ax + verts[v, 1] * ay
            if pr < pmin:
                pmin = pr
            if pr > pmax:
                pmax = pr
        rmin = 1.0e30
        rmax = -1.0e30
        for cxi in range(2):
            for cyi in range(2):
                rx = x0 if cxi == 0 else x1
                ry = y0 if cyi == 0 else y1
                pr = rx * ax + ry * ay
                if pr < rmin:
                    rmin = pr
                if pr > rmax:
                    rmax = pr
        ov = min(pmax, rmax) - max(pmin, rmin)
        if ov <= 0.0:
            return 0.0, 0.0, 0.0
        if ov < best_depth:
            best_depth = ov
            if 0.5 * (pmin + pmax) >= 0.5 * (rmin + rmax):
                bnx = ax
                bny = ay
            else:
                bnx = -ax
                bny = -ay
    return best_depth, bnx, bny


@njit(cache=True)
def step_kernel(pos, vel, obj, noise, ux, uy, dt, pr, pm, vmax, drag,
                lx, ly, obstacles, parts, counts, obj_mass, obj_inertia,
                obj_lin_drag, obj_ang_drag, noise_is_force, has_object):
    """Advance one fixed timestep in place.

    obj is [x, y, angle, vx, vy, omega]; noise is the per-particle (n, 2)
    velocity perturbation already sampled for this step.
    """
    n = pos.shape[0]
    inv_m = 1.0 / pm
    inv_M = 1.0 / obj_mass if has_object else 0.0
    inv_I = 1.0 / obj_inertia if has_object else 0.0

    # object damping + integration (semi-implicit)
    if has_object:
        f = 1.0 - dt * obj_lin_drag / obj_mass
        if f < 0.0:
            f = 0.0
        obj[3] *= f
        obj[4] *= f
        fa = 1.0 - dt * obj_ang_drag / obj_inertia
        if fa < 0.0:
            fa = 0.0
        obj[5] *= fa
        obj[0] += dt * obj[3]
        obj[1] += dt * obj[4]
        obj[2] += dt * obj[5]

    # particle velocity integration
    for i in range(n):
        ax = (ux - drag * vel[i, 0]) * inv_m
        ay = (uy - drag * vel[i, 1]) * inv_m
        if noise_is_force:
            ax += noise[i, 0] * inv_m
            ay += noise[i, 1] * inv_m
        vel[i, 0] += dt * ax
        vel[i, 1] += dt * ay
        sp = np.sqrt(vel[i, 0] ** 2 + vel[i, 1] ** 2)
        if sp > vmax:
            sc = vmax / sp
            vel[i, 0] *= sc
            vel[i, 1] *= sc

    # particle motion, micro-stepped so fast noise cannot tunnel walls
    for i in range(n):
        dx = dt * vel[i, 0]
        dy = dt * vel[i, 1]
        if not noise_is_force:
            dx += dt * noise[i, 0]
            dy += dt * noise[i, 1]
        dist = np.sqrt(dx * dx + dy * dy)
        nsub = int(dist / pr) + 1
        sx = dx / nsub
        sy = dy / nsub
        px = pos[i, 0]
        py = pos[i, 1]
        for _ in range(nsub):
            px += sx
            py += sy
            px, py, cnx, cny, corr = _project_static(px, py, pr, lx, ly, obstacles)
            if corr > 0.0:
                vn = vel[i, 0] * cnx + vel[i, 1] * cny
                if vn < 0.0:
                    vel[i, 0] -= vn * cnx
                    vel[i, 1] -= vn * cny
        pos[i, 0] = px
        pos[i, 1] = py

    world = np.empty_like(parts)

    two_r = 2.0 * pr
    for _pass in range(MAX_PASSES):
        max_corr = 0.0

        # particle-particle, index order
        for i in range(n):
            for j in range(i + 1, n):
                dx = pos[j, 0] - pos[i, 0]
                if dx > two_r or dx < -two_r:
                    continue
                dy = pos[j, 1] - pos[i, 1]
                if dy > two_r or dy < -two_r:
                    continue
                dd = dx * dx + dy * dy
                if dd >= two_r * two_r or dd < 1e-24:
                    continue
                dist = np.sqrt(dd)
                depth = two_r - dist
                nx = dx / dist
                ny = dy / dist
                half = 0.5 * depth
                pos[i, 0] -= half * nx
                pos[i, 1] -= half * ny
                pos[j, 0] += half * nx
                pos[j, 1] += half * ny
                if depth > max_corr:
                    max_corr = depth
                # inelastic normal, damped tangential (equal masses)
                rvx = vel[j, 0] - vel[i, 0]
                rvy = vel[j, 1] - vel[i, 1]
                vn = rvx * nx + rvy * ny
                if vn < 0.0:
                    imp = -0.5 * vn
                    vel[i, 0] -= imp * nx
                    vel[i, 1] -= imp * ny
                    vel[j, 0] += imp * nx
                    vel[j, 1] += imp * ny
                    tx = -ny
                    ty = nx
                    vt = rvx * tx + rvy * ty
                    impt = -0.5 * TANGENT_DAMP * vt
                    vel[i, 0] -= impt * tx
                    vel[i, 1] -= impt * ty
                    vel[j, 0] += impt * tx
                    vel[j, 1] += impt * ty

        # particle-object
        if has_object:
            ca = np.cos(obj[2])
            sa = np.sin(obj[2])
            _world_parts(parts, counts, obj[0], obj[1], ca, sa, world)
            share_p = inv_m / (inv_m + inv_M)
            share_o = inv_M / (inv_m + inv_M)
            for i in range(n):
                for p in range(parts.shape[0]):
                    depth, nx, ny, cx, cy = _disc_part_contact(
                        pos[i, 0], pos[i, 1], pr, world[p], counts[p])
                    if depth <= 0.0:
                        continue
                    pos[i, 0] += share_p * depth * nx
                    pos[i, 1] += share_p * depth * ny
                    obj[0] -= share_o * depth * nx
                    obj[1] -= share_o * depth * ny
                    if depth > max_corr:
                        max_corr = depth
                    rx = cx - obj[0]
                    ry = cy - obj[1]
                    # particle velocity including this step's noise kick
                    pvx = vel[i, 0] + (0.0 if noise_is_force else noise[i, 0])
                    pvy = vel[i, 1] + (0.0 if noise_is_force else noise[i, 1])
                    rvx = pvx - (obj[3] - obj[5] * ry)
                    rvy = pvy - (obj[4] + obj[5] * rx)
                    vn = rvx * nx + rvy * ny
                    if vn < 0.0:
                        rn = rx * ny - ry * nx
                        k = inv_m + inv_M + rn * rn * inv_I
                        jimp = -vn / k
                        vel[i, 0] += jimp * nx * inv_m
                        vel[i, 1] += jimp * ny * inv_m
                        obj[3] -= jimp * nx * inv_M
                        obj[4] -= jimp * ny * inv_M
                        obj[5] -= jimp * rn * inv_I
                        tx = -ny
                        ty = nx
                        vt = rvx * tx + rvy * ty
                        rt = rx * ty - ry * tx
                        kt = inv_m + inv_M + rt * rt * inv_I
                        jt = -TANGENT_DAMP * vt / kt
                        vel[i, 0] += jt * tx * inv_m
                        vel[i, 1] += jt * ty * inv_m
                        obj[3] -= jt * tx * inv_M
                        obj[4] -= jt * ty * inv_M
                        obj[5] -= jt * rt * inv_I

        # particle-static
        for i in range(n):
            px, py, nx, ny, corr = _project_static(pos[i, 0], pos[i, 1], pr, lx, ly, obstacles)
            if corr > 0.0:
                pos[i, 0] = px
                pos[i, 1] = py
                if corr > max_corr:
                    max_corr = corr
                vn = vel[i, 0] * nx + vel[i, 1] * ny
                if vn < 0.0:
                    vel[i, 0] -= vn * nx
                    vel[i, 1] -= vn * ny
                    tx = -ny
                    ty = nx
                    vt = vel[i, 0] * tx + vel[i, 1] * ty
                    vel[i, 0] -= TANGENT_DAMP * vt * tx
                    vel[i, 1] -= TANGENT_DAMP * vt * ty

        # object-static
        if has_object:
            ca = np.cos(obj[2])
            sa = np.sin(obj[2])
            _world_parts(parts, counts, obj[0], obj[1], ca, sa, world)
            for p in range(parts.shape[0]):
                nv = counts[p]
                # workspace walls
                for side in range(4):
                    viol = 0.0
                    for v in range(nv):
                        x = world[p, v, 0]
                        y = world[p, v, 1]
                        if side == 0:
                            d = -x
                        elif side == 1:
                            d = x - lx
                        elif side == 2:
                            d = -y
                        else:
                            d = y - ly
                        if d > viol:
                            viol = d
                    if viol > 0.0:
                        if side == 0:
                            nx, ny = 1.0, 0.0
                        elif side == 1:
                            nx, ny = -1.0, 0.0
                        elif side == 2:
                            nx, ny = 0.0, 1.0
                        else:
                            nx, ny = 0.0, -1.0
                        obj[0] += viol * nx
                        obj[1] += viol * ny
                        for q in range(parts.shape[0]):
                            for v in range(parts.shape[1]):
                                world[q, v, 0] += viol * nx
                                world[q, v, 1] += viol * ny
                        if viol > max_corr:
                            max_corr = viol
                        vn = obj[3] * nx + obj[4] * ny
                        if vn < 0.0:
                            obj[3] -= vn * nx
                            obj[4] -= vn * ny
                        obj[5] *= 0.8
                for k in range(obstacles.shape[0]):
                    depth, nx, ny = _part_rect_mtv(
                        world[p], nv, obstacles[k, 0], obstacles[k, 1],
                        obstacles[k, 2], obstacles[k, 3])
                    if depth <= 0.0:
                        continue
                    obj[0] += depth * nx
                    obj[1] += depth * ny
                    for q in range(parts.shape[0]):
                        for v in range(parts.shape[1]):
                            world[q, v, 0] += depth * nx
                            world[q, v, 1] += depth * ny
                    if depth > max_corr:
                        max_corr = depth
                    vn = obj[3] * nx + obj[4] * ny
                    if vn < 0.0:
                        obj[3] -= vn * nx
                        obj[4] -= vn * ny
                    obj[5] *= 0.8

        if max_corr < CONVERGENCE_EPS:
            break

    # final speed clamp so returned state honours the invariant
    for i in range(n):
        sp = np.sqrt(vel[i, 0] ** 2 + vel[i, 1] ** 2)
        if sp > vmax:
            sc = vmax / sp
            vel[i, 0] *= sc
            vel[i, 1] *= sc
