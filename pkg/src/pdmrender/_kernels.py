"""Sequential numba kernels: chamfer distance transform, block occupancy
scans, and the fixed-grid ray marcher with block-distance skipping.

All kernels are deterministic; the marcher recomputes every sample position
from its integer grid index so that skipping never perturbs the arithmetic
of the samples that are evaluated.
"""

from __future__ import annotations

import numpy as np
from numba import njit

INF32 = 1 << 20


@njit(cache=True)
def chamfer_chebyshev(occ):
    """Exact chessboard distance to the nearest occupied cell.

    Two raster passes over the 26-neighbourhood with unit weights; with no
    occupied cell every entry stays at INF32.
    """
    nx, ny, nz = occ.shape
    d = np.empty((nx, ny, nz), np.int32)
    any_occ = False
    for x in range(nx):
        for y in range(ny):
            for z in range(nz):
                if occ[x, y, z]:
                    d[x, y, z] = 0
                    any_occ = True
                else:
                    d[x, y, z] = INF32
    if not any_occ:
        return d
    for x in range(nx):
        for y in range(ny):
            for z in range(nz):
                best = d[x, y, z]
                if best == 0:
                    continue
                if x > 0:
                    for yy in range(max(y - 1, 0), min(y + 2, ny)):
                        for zz in range(max(z - 1, 0), min(z + 2, nz)):
                            w = d[x - 1, yy, zz] + 1
                            if w < best:
                                best = w
                if y > 0:
                    for zz in range(max(z - 1, 0), min(z + 2, nz)):
                        w = d[x, y - 1, zz] + 1
                        if w < best:
                            best = w
                if z > 0:
                    w = d[x, y, z - 1] + 1
                    if w < best:
                        best = w
                d[x, y, z] = best
    for x in range(nx - 1, -1, -1):
        for y in range(ny - 1, -1, -1):
            for z in range(nz - 1, -1, -1):
                best = d[x, y, z]
                if best == 0:
                    continue
                if x < nx - 1:
                    for yy in range(max(y - 1, 0), min(y + 2, ny)):
                        for zz in range(max(z - 1, 0), min(z + 2, nz)):
                            w = d[x + 1, yy, zz] + 1
                            if w < best:
                                best = w
                if y < ny - 1:
                    for zz in range(max(z - 1, 0), min(z + 2, nz)):
                        w = d[x, y + 1, zz] + 1
                        if w < best:
                            best = w
                if z < nz - 1:
                    w = d[x, y, z + 1] + 1
                    if w < best:
                        best = w
                d[x, y, z] = best
    return d


@njit(cache=True)
def block_any_in_range(vox, b, bx, by, bz, lo, hi, out):
    """Per-block flag: does any voxel of the block fall inside [lo, hi]?

    Scans stop at the first hit, so blocks in wide-support configurations
    cost a single read.
    """
    nx, ny, nz = vox.shape
    for i in range(bx):
        x1 = min((i + 1) * b, nx)
        for j in range(by):
            y1 = min((j + 1) * b, ny)
            for k in range(bz):
                z1 = min((k + 1) * b, nz)
                occ = False
                for x in range(i * b, x1):
                    for y in range(j * b, y1):
                        for z in range(k * b, z1):
                            v = vox[x, y, z]
                            if v >= lo and v <= hi:
                                occ = True
                                break
                        if occ:
                            break
                    if occ:
                        break
                out[i, j, k] = occ


@njit(cache=True)
def block_any_nonzero(vox, b, bx, by, bz, nz_lut, out):
    """Per-block flag: does any voxel map to a nonzero-alpha intensity?"""
    nx, ny, nzv = vox.shape
    for i in range(bx):
        x1 = min((i + 1) * b, nx)
        for j in range(by):
            y1 = min((j + 1) * b, ny)
            for k in range(bz):
                z1 = min((k + 1) * b, nzv)
                occ = False
                for x in range(i * b, x1):
                    for y in range(j * b, y1):
                        for z in range(k * b, z1):
                            if nz_lut[vox[x, y, z]]:
                                occ = True
                                break
                        if occ:
                            break
                    if occ:
                        break
                out[i, j, k] = occ


@njit(cache=True)
def partition_presence(vox, b, pid, out):
    """One pass over the volume marking, per block, which partitions occur.

    out has shape (n_partitions, bx, by, bz) and must arrive zeroed.
    """
    nx, ny, nz = vox.shape
    for x in range(nx):
        i = x // b
        for y in range(ny):
            j = y // b
            for z in range(nz):
                out[pid[vox[x, y, z]], i, j, z // b] = True


@njit(cache=True)
def safe_box_exit(ox, oy, oz, dx, dy, dz, bi, bj, bk, halo, b, hx, hy, hz):
    """Ray parameter at which the ray leaves the safe axis-aligned region.

    The region spans blocks [B - halo, B + halo] on each axis, expressed in
    voxel coordinates and clipped to the sampling hull [0, h] per axis.
    """
    lox = (bi - halo) * b
    if lox < 0.0:
        lox = 0.0
    loy = (bj - halo) * b
    if loy < 0.0:
        loy = 0.0
    loz = (bk - halo) * b
    if loz < 0.0:
        loz = 0.0
    hix = (bi + halo + 1) * b
    if hix > hx:
        hix = hx
    hiy = (bj + halo + 1) * b
    if hiy > hy:
        hiy = hy
    hiz = (bk + halo + 1) * b
    if hiz > hz:
        hiz = hz

    t_exit = 1e30
    if dx > 1e-12:
        te = (hix - ox) / dx
        if te < t_exit:
            t_exit = te
    elif dx < -1e-12:
        te = (lox - ox) / dx
        if te < t_exit:
            t_exit = te
    if dy > 1e-12:
        te = (hiy - oy) / dy
        if te < t_exit:
            t_exit = te
    elif dy < -1e-12:
        te = (loy - oy) / dy
        if te < t_exit:
            t_exit = te
    if dz > 1e-12:
        te = (hiz - oz) / dz
        if te < t_exit:
            t_exit = te
    elif dz < -1e-12:
        te = (loz - oz) / dz
        if te < t_exit:
            t_exit = te
    return t_exit


@njit(cache=True)
def march_rays(vox, lut, dist, b, step, ert_on, ert_thr, origin, dirs, rgba, stats):
    """Front-to-back composite all rays over the fixed sample grid.

    dist is the per-block distance field steering the skip (all zeros
    disables skipping). Sample k sits at t_entry + k*step; positions are
    recomputed from k so evaluated samples are bit-identical whichever
    blocks were skipped. stats rows are (total, evaluated, skip_events,
    ert_terminated) per ray.
    """
    nx, ny, nz = vox.shape
    lut_len = lut.shape[0]
    hx = nx - 1.0
    hy = ny - 1.0
    hz = nz - 1.0
    x_hi = nx - 2 if nx >= 2 else 0
    y_hi = ny - 2 if ny >= 2 else 0
    z_hi = nz - 2 if nz >= 2 else 0
    ox0 = origin[0]
    oy0 = origin[1]
    oz0 = origin[2]
    n_rays = dirs.shape[0]

    for r in range(n_rays):
        dx = dirs[r, 0]
        dy = dirs[r, 1]
        dz = dirs[r, 2]

        # slab intersection with the voxel-centre hull [0, n-1]^3
        tmin = -1e30
        tmax = 1e30
        hit = True
        for axis in range(3):
            if axis == 0:
                o = ox0
                d_ = dx
                h = hx
            elif axis == 1:
                o = oy0
                d_ = dy
                h = hy
            else:
                o = oz0
                d_ = dz
                h = hz
            if d_ > 1e-12 or d_ < -1e-12:
                t0 = (0.0 - o) / d_
                t1 = (h - o) / d_
                if t0 > t1:
                    t0, t1 = t1, t0
                if t0 > tmin:
                    tmin = t0
                if t1 < tmax:
                    tmax = t1
            elif o < 0.0 or o > h:
                hit = False
                break
        if not hit or tmax < tmin or tmax < 0.0:
            rgba[r, 0] = 0.0
            rgba[r, 1] = 0.0
            rgba[r, 2] = 0.0
            rgba[r, 3] = 0.0
            stats[r, 0] = 0
            stats[r, 1] = 0
            stats[r, 2] = 0
            stats[r, 3] = 0
            continue

        t_entry = tmin if tmin > 0.0 else 0.0
        total = int((tmax - t_entry) / step) + 1

        acc_a = 0.0
        acc_r = 0.0
        acc_g = 0.0
        acc_b = 0.0
        evaluated = 0
        skip_events = 0
        ert_fired = 0
        k = 0
        while k < total:
            t = t_entry + k * step
            px = ox0 + t * dx
            py = oy0 + t * dy
            pz = oz0 + t * dz
            if px < 0.0:
                px = 0.0
            elif px > hx:
                px = hx
            if py < 0.0:
                py = 0.0
            elif py > hy:
                py = hy
            if pz < 0.0:
                pz = 0.0
            elif pz > hz:
                pz = hz
            vx = int(px)
            vy = int(py)
            vz = int(pz)
            dval = dist[vx // b, vy // b, vz // b]
            if dval == 0:
                x0 = vx if vx < x_hi else x_hi
                y0 = vy if vy < y_hi else y_hi
                z0 = vz if vz < z_hi else z_hi
                fx = px - x0
                fy = py - y0
                fz = pz - z0
                x1 = x0 + 1 if nx >= 2 else x0
                y1 = y0 + 1 if ny >= 2 else y0
                z1 = z0 + 1 if nz >= 2 else z0
                c000 = vox[x0, y0, z0]
                c100 = vox[x1, y0, z0]
                c010 = vox[x0, y1, z0]
                c110 = vox[x1, y1, z0]
                c001 = vox[x0, y0, z1]
                c101 = vox[x1, y0, z1]
                c011 = vox[x0, y1, z1]
                c111 = vox[x1, y1, z1]
                gx = 1.0 - fx
                gy = 1.0 - fy
                gz = 1.0 - fz
                value = (
                    gz * (gy * (gx * c000 + fx * c100) + fy * (gx * c010 + fx * c110))
                    + fz * (gy * (gx * c001 + fx * c101) + fy * (gx * c011 + fx * c111))
                )
                li = int(value + 0.5)
                if li >= lut_len:
                    li = lut_len - 1
                a = lut[li, 3]
                if a > 0.0:
                    w = (1.0 - acc_a) * a
                    acc_r += w * lut[li, 0]
                    acc_g += w * lut[li, 1]
                    acc_b += w * lut[li, 2]
                    acc_a += w
                evaluated += 1
                if ert_on and acc_a >= ert_thr:
                    ert_fired = 1
                    break
                k += 1
            else:
                t_exit = safe_box_exit(
                    ox0, oy0, oz0, dx, dy, dz,
                    vx // b, vy // b, vz // b,
                    dval - 1, b, hx, hy, hz,
                )
                k_next = int(np.ceil((t_exit - t_entry) / step - 1e-9))
                if k_next <= k:
                    k_next = k + 1
                skip_events += 1
                k = k_next

        rgba[r, 0] = acc_r
        rgba[r, 1] = acc_g
        rgba[r, 2] = acc_b
        rgba[r, 3] = acc_a
        stats[r, 0] = total
        stats[r, 1] = evaluated
        stats[r, 2] = skip_events
        stats[r, 3] = ert_fired
