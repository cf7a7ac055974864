"""Numba CPU kernels for the ray-driven forward and voxel-driven back
projectors.

Every kernel parallelizes over *output* elements (detector pixels going
forward, voxels going back) and each output element is accumulated by exactly
one loop iteration in a fixed order, so results are bit-identical regardless
of the number of threads.

Grid indexing follows the shared convention: world coordinate of index ``i``
on an axis with ``n`` samples and spacing ``s`` is ``(i - (n-1)/2) * s``.
The volume function integrated by the forward operators is the bi/trilinear
interpolant of the voxel values extended with zeros (each voxel carries its
full interpolation tent, fading to zero half a voxel beyond the outermost
centers); samples beyond that support contribute nothing.  The marching
kernels receive the volume pre-padded with one zero voxel per side so the
inner loop needs no per-corner bounds checks.
"""

import math

import numpy as np
from numba import njit, prange

_TINY = 1e-12


@njit(cache=True)
def _clip_ray_2d(px, py, dx, dy, hx, hy):
    """Intersect ray p + t*d with the box |x|<=hx, |y|<=hy; returns (t0, t1).

    Empty intersection is signalled by t0 >= t1.
    """
    t0 = -1e300
    t1 = 1e300
    if abs(dx) > _TINY:
        ta = (-hx - px) / dx
        tb = (hx - px) / dx
        t0 = max(t0, min(ta, tb))
        t1 = min(t1, max(ta, tb))
    elif px < -hx or px > hx:
        return 1.0, 0.0
    if abs(dy) > _TINY:
        ta = (-hy - py) / dy
        tb = (hy - py) / dy
        t0 = max(t0, min(ta, tb))
        t1 = min(t1, max(ta, tb))
    elif py < -hy or py > hy:
        return 1.0, 0.0
    return t0, t1


@njit(cache=True)
def _clip_ray_3d(px, py, pz, dx, dy, dz, hx, hy, hz):
    t0 = -1e300
    t1 = 1e300
    if abs(dx) > _TINY:
        ta = (-hx - px) / dx
        tb = (hx - px) / dx
        t0 = max(t0, min(ta, tb))
        t1 = min(t1, max(ta, tb))
    elif px < -hx or px > hx:
        return 1.0, 0.0
    if abs(dy) > _TINY:
        ta = (-hy - py) / dy
        tb = (hy - py) / dy
        t0 = max(t0, min(ta, tb))
        t1 = min(t1, max(ta, tb))
    elif py < -hy or py > hy:
        return 1.0, 0.0
    if abs(dz) > _TINY:
        ta = (-hz - pz) / dz
        tb = (hz - pz) / dz
        t0 = max(t0, min(ta, tb))
        t1 = min(t1, max(ta, tb))
    elif pz < -hz or pz > hz:
        return 1.0, 0.0
    return t0, t1


@njit(cache=True)
def _march_2d(volp, sy, sx, px, py, dx, dy, step):
    """Line integral of the zero-extended bilinear interpolant along
    p + t*d (|d| = 1).  ``volp`` is the volume padded by one zero voxel
    per side; indices below are into the padded array."""
    ny = volp.shape[0] - 2
    nx = volp.shape[1] - 2
    cy = (ny - 1) / 2.0 + 1.0
    cx = (nx - 1) / 2.0 + 1.0
    t0, t1 = _clip_ray_2d(px, py, dx, dy, (nx + 1) * sx / 2.0, (ny + 1) * sy / 2.0)
    if t0 >= t1:
        return 0.0
    acc = 0.0
    t = t0
    while t < t1 - _TINY:
        seg = step
        if t + seg > t1:
            seg = t1 - t
        tm = t + 0.5 * seg
        fx = (px + tm * dx) / sx + cx
        fy = (py + tm * dy) / sy + cy
        ix = int(math.floor(fx))
        iy = int(math.floor(fy))
        if 0 <= ix < nx + 1 and 0 <= iy < ny + 1:
            wx = fx - ix
            wy = fy - iy
            val = (
                volp[iy, ix] * (1.0 - wx) * (1.0 - wy)
                + volp[iy, ix + 1] * wx * (1.0 - wy)
                + volp[iy + 1, ix] * (1.0 - wx) * wy
                + volp[iy + 1, ix + 1] * wx * wy
            )
            acc += val * seg
        t += seg
    return acc


@njit(cache=True)
def _march_3d(volp, sz, sy, sx, px, py, pz, dx, dy, dz, step):
    nz = volp.shape[0] - 2
    ny = volp.shape[1] - 2
    nx = volp.shape[2] - 2
    cz = (nz - 1) / 2.0 + 1.0
    cy = (ny - 1) / 2.0 + 1.0
    cx = (nx - 1) / 2.0 + 1.0
    t0, t1 = _clip_ray_3d(
        px, py, pz, dx, dy, dz,
        (nx + 1) * sx / 2.0, (ny + 1) * sy / 2.0, (nz + 1) * sz / 2.0,
    )
    if t0 >= t1:
        return 0.0
    acc = 0.0
    t = t0
    while t < t1 - _TINY:
        seg = step
        if t + seg > t1:
            seg = t1 - t
        tm = t + 0.5 * seg
        fx = (px + tm * dx) / sx + cx
        fy = (py + tm * dy) / sy + cy
        fz = (pz + tm * dz) / sz + cz
        ix = int(math.floor(fx))
        iy = int(math.floor(fy))
        iz = int(math.floor(fz))
        if 0 <= ix < nx + 1 and 0 <= iy < ny + 1 and 0 <= iz < nz + 1:
            wx = fx - ix
            wy = fy - iy
            wz = fz - iz
            v00 = volp[iz, iy, ix] * (1.0 - wx) + volp[iz, iy, ix + 1] * wx
            v01 = volp[iz, iy + 1, ix] * (1.0 - wx) + volp[iz, iy + 1, ix + 1] * wx
            v10 = volp[iz + 1, iy, ix] * (1.0 - wx) + volp[iz + 1, iy, ix + 1] * wx
            v11 = volp[iz + 1, iy + 1, ix] * (1.0 - wx) + volp[iz + 1, iy + 1, ix + 1] * wx
            val = (v00 * (1.0 - wy) + v01 * wy) * (1.0 - wz) + (
                v10 * (1.0 - wy) + v11 * wy
            ) * wz
            acc += val * seg
        t += seg
    return acc


@njit(parallel=True, cache=True)
def forward_parallel_2d(volp, sy, sx, cos_a, sin_a, n_det, ds, step, out):
    n_ang = cos_a.shape[0]
    half = (n_det - 1) / 2.0
    for idx in prange(n_ang * n_det):
        ia = idx // n_det
        j = idx % n_det
        ct = cos_a[ia]
        st = sin_a[ia]
        t = (j - half) * ds
        # ray through t * (cos, sin), direction (-sin, cos)
        out[ia, j] = _march_2d(volp, sy, sx, t * ct, t * st, -st, ct, step)


@njit(parallel=True, cache=True)
def back_parallel_2d(sino, cos_a, sin_a, ds, ny, nx, sy, sx, out):
    n_ang, n_det = sino.shape
    half = (n_det - 1) / 2.0
    cy = (ny - 1) / 2.0
    cx = (nx - 1) / 2.0
    for idx in prange(ny * nx):
        iy = idx // nx
        ix = idx % nx
        x = (ix - cx) * sx
        y = (iy - cy) * sy
        acc = 0.0
        for ia in range(n_ang):
            t = x * cos_a[ia] + y * sin_a[ia]
            f = t / ds + half
            j0 = int(math.floor(f))
            w = f - j0
            if 0 <= j0 < n_det:
                acc += (1.0 - w) * sino[ia, j0]
            if 0 <= j0 + 1 < n_det:
                acc += w * sino[ia, j0 + 1]
        out[iy, ix] = acc


@njit(parallel=True, cache=True)
def forward_fan_2d(volp, sy, sx, cos_a, sin_a, sdd, sid, n_det, ds, step, out):
    n_ang = cos_a.shape[0]
    half = (n_det - 1) / 2.0
    for idx in prange(n_ang * n_det):
        ia = idx // n_det
        j = idx % n_det
        ct = cos_a[ia]
        st = sin_a[ia]
        srcx = sid * ct
        srcy = sid * st
        u = (j - half) * ds
        # detector center opposite the source; u axis tangent to the orbit
        pixx = -(sdd - sid) * ct - u * st
        pixy = -(sdd - sid) * st + u * ct
        dx = pixx - srcx
        dy = pixy - srcy
        norm = math.sqrt(dx * dx + dy * dy)
        out[ia, j] = _march_2d(volp, sy, sx, srcx, srcy, dx / norm, dy / norm, step)


@njit(parallel=True, cache=True)
def back_fan_2d(sino, cos_a, sin_a, sdd, sid, ds, ny, nx, sy, sx, weighted, out):
    n_ang, n_det = sino.shape
    half = (n_det - 1) / 2.0
    cy = (ny - 1) / 2.0
    cx = (nx - 1) / 2.0
    for idx in prange(ny * nx):
        iy = idx // nx
        ix = idx % nx
        x = (ix - cx) * sx
        y = (iy - cy) * sy
        acc = 0.0
        for ia in range(n_ang):
            ct = cos_a[ia]
            st = sin_a[ia]
            # depth along the central ray (source -> isocenter direction)
            w = sid - x * ct - y * st
            if w <= _TINY:
                continue
            u = sdd * (-x * st + y * ct) / w
            f = u / ds + half
            j0 = int(math.floor(f))
            fw = f - j0
            val = 0.0
            if 0 <= j0 < n_det:
                val += (1.0 - fw) * sino[ia, j0]
            if 0 <= j0 + 1 < n_det:
                val += fw * sino[ia, j0 + 1]
            if weighted:
                q = sid / w
                val *= q * q
            acc += val
        out[iy, ix] = acc


@njit(parallel=True, cache=True)
def forward_cone_3d(volp, sz, sy, sx, sources, minv, rows, cols, step, out):
    n_views = sources.shape[0]
    for idx in prange(n_views * rows * cols):
        i = idx // (rows * cols)
        r = (idx // cols) % rows
        c = idx % cols
        # M^-1 @ (col, row, 1) points from the source through pixel (r, c)
        dx = minv[i, 0, 0] * c + minv[i, 0, 1] * r + minv[i, 0, 2]
        dy = minv[i, 1, 0] * c + minv[i, 1, 1] * r + minv[i, 1, 2]
        dz = minv[i, 2, 0] * c + minv[i, 2, 1] * r + minv[i, 2, 2]
        norm = math.sqrt(dx * dx + dy * dy + dz * dz)
        out[i, r, c] = _march_3d(
            volp,
            sz,
            sy,
            sx,
            sources[i, 0],
            sources[i, 1],
            sources[i, 2],
            dx / norm,
            dy / norm,
            dz / norm,
            step,
        )


@njit(parallel=True, cache=True)
def back_cone_3d(sino, mats, sid, weighted, nz, ny, nx, sz, sy, sx, out):
    n_views, rows, cols = sino.shape
    cz = (nz - 1) / 2.0
    cy = (ny - 1) / 2.0
    cx = (nx - 1) / 2.0
    for idx in prange(nz * ny * nx):
        iz = idx // (ny * nx)
        iy = (idx // nx) % ny
        ix = idx % nx
        x = (ix - cx) * sx
        y = (iy - cy) * sy
        z = (iz - cz) * sz
        acc = 0.0
        for i in range(n_views):
            w = mats[i, 2, 0] * x + mats[i, 2, 1] * y + mats[i, 2, 2] * z + mats[i, 2, 3]
            if w <= _TINY:
                continue
            a = mats[i, 0, 0] * x + mats[i, 0, 1] * y + mats[i, 0, 2] * z + mats[i, 0, 3]
            b = mats[i, 1, 0] * x + mats[i, 1, 1] * y + mats[i, 1, 2] * z + mats[i, 1, 3]
            fc = a / w
            fr = b / w
            c0 = int(math.floor(fc))
            r0 = int(math.floor(fr))
            wc = fc - c0
            wr = fr - r0
            val = 0.0
            if 0 <= r0 < rows:
                if 0 <= c0 < cols:
                    val += (1.0 - wr) * (1.0 - wc) * sino[i, r0, c0]
                if 0 <= c0 + 1 < cols:
                    val += (1.0 - wr) * wc * sino[i, r0, c0 + 1]
            if 0 <= r0 + 1 < rows:
                if 0 <= c0 < cols:
                    val += wr * (1.0 - wc) * sino[i, r0 + 1, c0]
                if 0 <= c0 + 1 < cols:
                    val += wr * wc * sino[i, r0 + 1, c0 + 1]
            if weighted:
                q = sid / w
                val *= q * q
            acc += val
        out[iz, iy, ix] = acc


def warmup():
    """Force-compile all kernels on tiny inputs (populates the numba cache)."""
    vol2 = np.zeros((4, 4))
    sino2 = np.zeros((1, 4))
    ang = np.zeros(1)
    out2 = np.zeros((1, 4))
    forward_parallel_2d(vol2, 1.0, 1.0, np.cos(ang), np.sin(ang), 4, 1.0, 0.5, out2)
    back_parallel_2d(sino2, np.cos(ang), np.sin(ang), 1.0, 4, 4, 1.0, 1.0, np.zeros((4, 4)))
    forward_fan_2d(vol2, 1.0, 1.0, np.cos(ang), np.sin(ang), 20.0, 10.0, 4, 1.0, 0.5, out2)
    back_fan_2d(
        sino2, np.cos(ang), np.sin(ang), 20.0, 10.0, 1.0, 4, 4, 1.0, 1.0, True, np.zeros((4, 4))
    )
    vol3 = np.zeros((4, 4, 4))
    sources = np.array([[10.0, 0.0, 0.0]])
    minv = np.eye(3)[np.newaxis, :, :].copy()
    forward_cone_3d(vol3, 1.0, 1.0, 1.0, sources, minv, 4, 4, 0.5, np.zeros((1, 4, 4)))
    mats = np.zeros((1, 3, 4))
    mats[0, :, :3] = np.eye(3)
    mats[0, 2, 3] = 10.0
    back_cone_3d(
        np.zeros((1, 4, 4)), mats, 10.0, True, 4, 4, 4, 1.0, 1.0, 1.0, np.zeros((4, 4, 4))
    )
