"""Analytic phantoms: Shepp-Logan ellipse/ellipsoid sets and simple shapes.

Ellipse parameters are the standard "modified Shepp-Logan" (high-contrast)
tables from the literature: the 2D set popularized by Toft's rewrite of
Shepp & Logan's head phantom, and the matching 3D ellipsoid set as shipped
in the classic MATLAB ``phantom3d`` routine.  Values are reproduced verbatim
as data below.

Rasterization is hard point-in-ellipse membership at voxel centers (no
anti-aliasing); a phantom value is the sum of the intensity deltas of all
ellipses containing the point.  Normalized coordinates map the grid onto
[-1, 1] per axis via ``(i - (n - 1) / 2) * (2 / n)`` (pixel centers of an
n-cell partition), so dyadic downsampling aligns cell-for-cell.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import Volume

__all__ = [
    "EllipsoidSpec",
    "SHEPP_LOGAN_2D",
    "SHEPP_LOGAN_3D",
    "shepp_logan_2d",
    "shepp_logan_3d",
    "disk_phantom",
    "ball_phantom",
]

_MIN_SHAPE = 16


@dataclass(frozen=True)
class EllipsoidSpec:
    """One additive ellipsoid: center/semi-axes in [-1, 1] normalized coords,
    rotation about the z axis in degrees, and an additive intensity delta."""

    center: tuple[float, float, float]
    semi_axes: tuple[float, float, float]
    rotation_deg: float
    intensity_delta: float

    def __post_init__(self):
        if any(a <= 0 for a in self.semi_axes):
            raise ValueError("semi_axes must be positive")
        if any(abs(c) > 1 for c in self.center):
            raise ValueError("center components must lie in [-1, 1]")


# Modified (high-contrast) Shepp-Logan, 2D: (delta, a, b, x0, y0, phi_deg).
SHEPP_LOGAN_2D = (
    (1.00, 0.6900, 0.9200, 0.00, 0.0000, 0.0),
    (-0.80, 0.6624, 0.8740, 0.00, -0.0184, 0.0),
    (-0.20, 0.1100, 0.3100, 0.22, 0.0000, -18.0),
    (-0.20, 0.1600, 0.4100, -0.22, 0.0000, 18.0),
    (0.10, 0.2100, 0.2500, 0.00, 0.3500, 0.0),
    (0.10, 0.0460, 0.0460, 0.00, 0.1000, 0.0),
    (0.10, 0.0460, 0.0460, 0.00, -0.1000, 0.0),
    (0.10, 0.0460, 0.0230, -0.08, -0.6050, 0.0),
    (0.10, 0.0230, 0.0230, 0.00, -0.6050, 0.0),
    (0.10, 0.0230, 0.0460, 0.06, -0.6050, 0.0),
)

# Modified Shepp-Logan, 3D: (delta, a, b, c, x0, y0, z0, phi_deg).
SHEPP_LOGAN_3D = (
    (1.00, 0.6900, 0.9200, 0.810, 0.00, 0.0000, 0.000, 0.0),
    (-0.80, 0.6624, 0.8740, 0.780, 0.00, -0.0184, 0.000, 0.0),
    (-0.20, 0.1100, 0.3100, 0.220, 0.22, 0.0000, 0.000, -18.0),
    (-0.20, 0.1600, 0.4100, 0.280, -0.22, 0.0000, 0.000, 18.0),
    (0.10, 0.2100, 0.2500, 0.410, 0.00, 0.3500, -0.150, 0.0),
    (0.10, 0.0460, 0.0460, 0.050, 0.00, 0.1000, 0.250, 0.0),
    (0.10, 0.0460, 0.0460, 0.050, 0.00, -0.1000, 0.250, 0.0),
    (0.10, 0.0460, 0.0230, 0.050, -0.08, -0.6050, 0.000, 0.0),
    (0.10, 0.0230, 0.0230, 0.020, 0.00, -0.6050, 0.000, 0.0),
    (0.10, 0.0230, 0.0460, 0.020, 0.06, -0.6050, 0.000, 0.0),
)


def ellipsoids_3d() -> tuple[EllipsoidSpec, ...]:
    """The 3D table as EllipsoidSpec records."""
    return tuple(
        EllipsoidSpec((x0, y0, z0), (a, b, c), phi, delta)
        for (delta, a, b, c, x0, y0, z0, phi) in SHEPP_LOGAN_3D
    )


def _normalized_axis(n: int) -> np.ndarray:
    return (np.arange(n) - (n - 1) / 2.0) * (2.0 / n)


def _check_shape(shape) -> tuple[int, ...]:
    shape = tuple(int(n) for n in shape)
    if any(n < _MIN_SHAPE for n in shape):
        raise ValueError(f"phantom shape must be >= {_MIN_SHAPE} per axis")
    return shape


def shepp_logan_2d(shape, spacing=(1.0, 1.0)) -> Volume:
    """Rasterize the modified Shepp-Logan ellipse set on a (ny, nx) grid."""
    ny, nx = _check_shape(shape)
    x = _normalized_axis(nx)[np.newaxis, :]
    y = _normalized_axis(ny)[:, np.newaxis]
    img = np.zeros((ny, nx))
    for delta, a, b, x0, y0, phi_deg in SHEPP_LOGAN_2D:
        phi = np.deg2rad(phi_deg)
        dx = x - x0
        dy = y - y0
        xr = dx * np.cos(phi) + dy * np.sin(phi)
        yr = -dx * np.sin(phi) + dy * np.cos(phi)
        img[(xr / a) ** 2 + (yr / b) ** 2 <= 1.0] += delta
    return Volume(img, spacing)


def shepp_logan_3d(shape, spacing=(1.0, 1.0, 1.0)) -> Volume:
    """Rasterize the modified Shepp-Logan ellipsoid set on a (nz, ny, nx) grid."""
    nz, ny, nx = _check_shape(shape)
    x = _normalized_axis(nx)[np.newaxis, np.newaxis, :]
    y = _normalized_axis(ny)[np.newaxis, :, np.newaxis]
    z = _normalized_axis(nz)[:, np.newaxis, np.newaxis]
    vol = np.zeros((nz, ny, nx))
    for delta, a, b, c, x0, y0, z0, phi_deg in SHEPP_LOGAN_3D:
        phi = np.deg2rad(phi_deg)
        dx = x - x0
        dy = y - y0
        dz = z - z0
        xr = dx * np.cos(phi) + dy * np.sin(phi)
        yr = -dx * np.sin(phi) + dy * np.cos(phi)
        vol[(xr / a) ** 2 + (yr / b) ** 2 + (dz / c) ** 2 <= 1.0] += delta
    return Volume(vol, spacing)


def disk_phantom(shape, radius_mm, value=1.0, spacing=(1.0, 1.0)) -> Volume:
    """Uniform disk: voxel = value iff its center lies within radius_mm of
    the isocenter (world mm, per the shared centered-grid convention)."""
    ny, nx = _check_shape(shape)
    sy, sx = (float(s) for s in spacing)
    x = (np.arange(nx) - (nx - 1) / 2.0) * sx
    y = (np.arange(ny) - (ny - 1) / 2.0) * sy
    r2 = x[np.newaxis, :] ** 2 + y[:, np.newaxis] ** 2
    img = np.where(r2 <= float(radius_mm) ** 2, float(value), 0.0)
    return Volume(img, (sy, sx))


def ball_phantom(shape, radius_mm, value=1.0, spacing=(1.0, 1.0, 1.0)) -> Volume:
    """Uniform ball, 3D counterpart of :func:`disk_phantom`."""
    nz, ny, nx = _check_shape(shape)
    sz, sy, sx = (float(s) for s in spacing)
    x = (np.arange(nx) - (nx - 1) / 2.0) * sx
    y = (np.arange(ny) - (ny - 1) / 2.0) * sy
    z = (np.arange(nz) - (nz - 1) / 2.0) * sz
    r2 = (
        x[np.newaxis, np.newaxis, :] ** 2
        + y[np.newaxis, :, np.newaxis] ** 2
        + z[:, np.newaxis, np.newaxis] ** 2
    )
    vol = np.where(r2 <= float(radius_mm) ** 2, float(value), 0.0)
    return Volume(vol, (sz, sy, sx))
