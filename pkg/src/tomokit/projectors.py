"""Forward projection (ray-driven) and backprojection (voxel-driven) for
parallel-, fan-, and cone-beam geometries.

Forward operators integrate the bi/trilinear volume interpolant along each
detector ray with midpoint sampling at ``step_scale * min(spacing)`` (the
last partial step uses its exact width), so outputs carry units of
``value * mm``.  Back operators map each voxel onto the detector and
accumulate linearly interpolated readings, optionally applying the
distance weighting used by the fan/cone reconstruction pipelines.

All operators are pure and deterministic: parallelism is over output
elements only, each accumulated in a fixed order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .geometry import GeometryCone3D, GeometryFan2D, GeometryParallel2D
from .grids import Sinogram, Volume


def _padded(vol: Volume) -> np.ndarray:
    """One zero voxel of margin per side: the marching kernels integrate the
    zero-extended interpolant without per-corner bounds checks."""
    return np.pad(vol.data, 1)

__all__ = [
    "SamplingConfig",
    "forward_project_parallel_2d",
    "back_project_parallel_2d",
    "forward_project_fan_2d",
    "back_project_fan_2d",
    "forward_project_cone_3d",
    "back_project_cone_3d",
    "forward_project",
    "back_project",
    "materialize_operator",
]

_MATERIALIZE_LIMIT = 10**7


@dataclass(frozen=True)
class SamplingConfig:
    """Ray-march discretization: step = step_scale * min(volume spacing).

    Samples outside the voxel-center hull contribute zero (grids are assumed
    compactly supported).
    """

    step_scale: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.step_scale <= 1.0:
            raise ValueError("step_scale must lie in (0, 1]")

    def step(self, spacing) -> float:
        return self.step_scale * float(min(spacing))


def _require_match(actual, expected, what: str):
    if tuple(actual) != tuple(expected):
        raise ValueError(f"{what} mismatch: got {tuple(actual)}, geometry expects {tuple(expected)}")


def _vol2d(vol: Volume, geom) -> Volume:
    if vol.data.ndim != 2:
        raise ValueError("expected a 2D volume")
    _require_match(vol.shape, geom.volume_shape, "volume shape")
    _require_match(vol.spacing, geom.volume_spacing, "volume spacing")
    return vol


def _vol3d(vol: Volume, geom) -> Volume:
    if vol.data.ndim != 3:
        raise ValueError("expected a 3D volume")
    _require_match(vol.shape, geom.volume_shape, "volume shape")
    _require_match(vol.spacing, geom.volume_spacing, "volume spacing")
    return vol


def _sino2d(sino: Sinogram, geom) -> Sinogram:
    if sino.data.ndim != 2:
        raise ValueError("expected a 2D-geometry sinogram (projections, u)")
    _require_match(
        sino.data.shape, (geom.n_projections, geom.detector_width), "sinogram shape"
    )
    _require_match(sino.detector_spacing, (geom.detector_spacing,), "detector spacing")
    return sino


def _sino3d(sino: Sinogram, geom) -> Sinogram:
    if sino.data.ndim != 3:
        raise ValueError("expected a cone-beam sinogram (projections, v, u)")
    _require_match(
        sino.data.shape, (geom.n_projections, *geom.detector_shape), "sinogram shape"
    )
    _require_match(sino.detector_spacing, geom.detector_spacing, "detector spacing")
    return sino


def forward_project_parallel_2d(
    vol: Volume, geom: GeometryParallel2D, cfg: SamplingConfig = SamplingConfig()
) -> Sinogram:
    vol = _vol2d(vol, geom)
    sy, sx = geom.volume_spacing
    out = np.empty((geom.n_projections, geom.detector_width))
    _kernels.forward_parallel_2d(
        _padded(vol),
        sy,
        sx,
        np.cos(geom.angles),
        np.sin(geom.angles),
        geom.detector_width,
        geom.detector_spacing,
        cfg.step(geom.volume_spacing),
        out,
    )
    return Sinogram(out, (geom.detector_spacing,))


def back_project_parallel_2d(sino: Sinogram, geom: GeometryParallel2D) -> Volume:
    sino = _sino2d(sino, geom)
    ny, nx = geom.volume_shape
    sy, sx = geom.volume_spacing
    out = np.empty((ny, nx))
    _kernels.back_parallel_2d(
        sino.data,
        np.cos(geom.angles),
        np.sin(geom.angles),
        geom.detector_spacing,
        ny,
        nx,
        sy,
        sx,
        out,
    )
    return Volume(out, geom.volume_spacing)


def forward_project_fan_2d(
    vol: Volume, geom: GeometryFan2D, cfg: SamplingConfig = SamplingConfig()
) -> Sinogram:
    vol = _vol2d(vol, geom)
    sy, sx = geom.volume_spacing
    out = np.empty((geom.n_projections, geom.detector_width))
    _kernels.forward_fan_2d(
        _padded(vol),
        sy,
        sx,
        np.cos(geom.angles),
        np.sin(geom.angles),
        geom.sdd,
        geom.sid,
        geom.detector_width,
        geom.detector_spacing,
        cfg.step(geom.volume_spacing),
        out,
    )
    return Sinogram(out, (geom.detector_spacing,))


def back_project_fan_2d(
    sino: Sinogram, geom: GeometryFan2D, fdk_weighting: bool = False
) -> Volume:
    sino = _sino2d(sino, geom)
    ny, nx = geom.volume_shape
    sy, sx = geom.volume_spacing
    out = np.empty((ny, nx))
    _kernels.back_fan_2d(
        sino.data,
        np.cos(geom.angles),
        np.sin(geom.angles),
        geom.sdd,
        geom.sid,
        geom.detector_spacing,
        ny,
        nx,
        sy,
        sx,
        bool(fdk_weighting),
        out,
    )
    return Volume(out, geom.volume_spacing)


def _cone_rays(geom: GeometryCone3D):
    """Per-view source positions and pixel->direction maps M^-1."""
    mats = geom.matrix_array()
    sources = np.empty((geom.n_projections, 3))
    minv = np.empty((geom.n_projections, 3, 3))
    for i, mat in enumerate(geom.matrices):
        m = mat.entries[:, :3]
        if abs(np.linalg.det(m)) < 1e-12:
            raise ValueError(f"projection matrix {i} is degenerate (singular M block)")
        sources[i] = mat.source_position()
        minv[i] = np.linalg.inv(m)
    return mats, sources, minv


def forward_project_cone_3d(
    vol: Volume, geom: GeometryCone3D, cfg: SamplingConfig = SamplingConfig()
) -> Sinogram:
    vol = _vol3d(vol, geom)
    sz, sy, sx = geom.volume_spacing
    rows, cols = geom.detector_shape
    _, sources, minv = _cone_rays(geom)
    out = np.empty((geom.n_projections, rows, cols))
    _kernels.forward_cone_3d(
        _padded(vol),
        sz,
        sy,
        sx,
        sources,
        minv,
        rows,
        cols,
        cfg.step(geom.volume_spacing),
        out,
    )
    return Sinogram(out, geom.detector_spacing)


def back_project_cone_3d(
    sino: Sinogram, geom: GeometryCone3D, fdk_weighting: bool = False
) -> Volume:
    sino = _sino3d(sino, geom)
    nz, ny, nx = geom.volume_shape
    sz, sy, sx = geom.volume_spacing
    out = np.empty((nz, ny, nx))
    _kernels.back_cone_3d(
        sino.data,
        geom.matrix_array(),
        geom.sid,
        bool(fdk_weighting),
        nz,
        ny,
        nx,
        sz,
        sy,
        sx,
        out,
    )
    return Volume(out, geom.volume_spacing)


def forward_project(vol: Volume, geom, cfg: SamplingConfig = SamplingConfig()) -> Sinogram:
    """Geometry-dispatching forward projection."""
    if isinstance(geom, GeometryCone3D):
        return forward_project_cone_3d(vol, geom, cfg)
    if isinstance(geom, GeometryFan2D):
        return forward_project_fan_2d(vol, geom, cfg)
    if isinstance(geom, GeometryParallel2D):
        return forward_project_parallel_2d(vol, geom, cfg)
    raise TypeError(f"unsupported geometry {type(geom).__name__}")


def back_project(sino: Sinogram, geom, fdk_weighting: bool = False) -> Volume:
    """Geometry-dispatching backprojection."""
    if isinstance(geom, GeometryCone3D):
        return back_project_cone_3d(sino, geom, fdk_weighting)
    if isinstance(geom, GeometryFan2D):
        return back_project_fan_2d(sino, geom, fdk_weighting)
    if isinstance(geom, GeometryParallel2D):
        if fdk_weighting:
            raise ValueError("parallel backprojection has no distance weighting")
        return back_project_parallel_2d(sino, geom)
    raise TypeError(f"unsupported geometry {type(geom).__name__}")


def _geometry_sizes(geom):
    n_vox = int(np.prod(geom.volume_shape))
    if isinstance(geom, GeometryCone3D):
        n_meas = geom.n_projections * int(np.prod(geom.detector_shape))
    else:
        n_meas = geom.n_projections * geom.detector_width
    return n_vox, n_meas


def _zero_volume(geom) -> np.ndarray:
    return np.zeros(geom.volume_shape)


def _zero_sino(geom) -> np.ndarray:
    if isinstance(geom, GeometryCone3D):
        return np.zeros((geom.n_projections, *geom.detector_shape))
    return np.zeros((geom.n_projections, geom.detector_width))


def materialize_operator(geom, cfg: SamplingConfig = SamplingConfig(), which: str = "forward") -> np.ndarray:
    """Assemble the dense matrix of an operator, one unit impulse per column.

    Test-scale oracle only; refuses problems with more than 10^7 entries.
    ``which`` selects the ray-driven forward map (measurements x voxels) or
    the voxel-driven back map (voxels x measurements).
    """
    n_vox, n_meas = _geometry_sizes(geom)
    if n_vox * n_meas > _MATERIALIZE_LIMIT:
        raise ValueError(
            f"operator too large to materialize: {n_vox} x {n_meas} > {_MATERIALIZE_LIMIT}"
        )
    if which == "forward":
        mat = np.empty((n_meas, n_vox))
        for j in range(n_vox):
            imp = _zero_volume(geom)
            imp.flat[j] = 1.0
            mat[:, j] = forward_project(Volume(imp, geom.volume_spacing), geom, cfg).data.ravel()
        return mat
    if which == "back":
        mat = np.empty((n_vox, n_meas))
        if isinstance(geom, GeometryCone3D):
            spacing = geom.detector_spacing
        else:
            spacing = (geom.detector_spacing,)
        for j in range(n_meas):
            imp = _zero_sino(geom)
            imp.flat[j] = 1.0
            mat[:, j] = back_project(Sinogram(imp, spacing), geom).data.ravel()
        return mat
    raise ValueError("which must be 'forward' or 'back'")
