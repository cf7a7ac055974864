"""Stateless float32 array boundary over the tomokit operators.

Every function takes a C-contiguous float32 array plus a geometry config
(the same JSON-able schema the tomokit CLI consumes) and returns a freshly
allocated C-contiguous float32 array.  No handles, no hidden global state:
the geometry is rebuilt from the config on every call, which keeps the
boundary serializable and versionable.

Outputs equal the primary library's results cast to float32, bit for bit.
"""

from __future__ import annotations

import json

import numpy as np

from tomokit import (
    PipelineConfig,
    Sinogram,
    Volume,
    back_project,
    fft_filter,
    forward_project,
)
from tomokit.filters import reconstruction_filter
from tomokit.geometry import GeometryCone3D

__all__ = [
    "BoundaryError",
    "py_forward_project",
    "py_back_project",
    "py_vjp_forward_project",
    "py_vjp_back_project",
    "py_fft_filter",
    "py_vjp_fft_filter",
]


class BoundaryError(ValueError):
    """Array crossing the boundary violates the dtype/layout/shape contract."""


def _load_config(geometry_config) -> PipelineConfig:
    if isinstance(geometry_config, PipelineConfig):
        return geometry_config
    if isinstance(geometry_config, str):
        geometry_config = json.loads(geometry_config)
    if not isinstance(geometry_config, dict):
        raise BoundaryError(
            f"geometry_config must be a dict, JSON string, or PipelineConfig, "
            f"got {type(geometry_config).__name__}"
        )
    return PipelineConfig.from_dict(geometry_config)


def _check_array(array, expected_shape, what: str) -> np.ndarray:
    if not isinstance(array, np.ndarray):
        raise BoundaryError(f"{what} must be a numpy array, got {type(array).__name__}")
    if array.dtype != np.float32:
        raise BoundaryError(f"{what} must be float32, got {array.dtype}")
    if not array.flags.c_contiguous:
        raise BoundaryError(f"{what} must be C-contiguous (no silent copies are made)")
    if array.shape != tuple(expected_shape):
        raise BoundaryError(
            f"{what} shape mismatch: expected {tuple(expected_shape)}, "
            f"received {array.shape}"
        )
    return array


def _sino_shape(cfg: PipelineConfig, geom) -> tuple[int, ...]:
    if isinstance(geom, GeometryCone3D):
        return (geom.n_projections, *geom.detector_shape)
    return (geom.n_projections, geom.detector_width)


def _detector_spacing(geom):
    if isinstance(geom, GeometryCone3D):
        return geom.detector_spacing
    return (geom.detector_spacing,)


def _fresh(data: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(data, dtype=np.float32)


def py_forward_project(array, geometry_config) -> np.ndarray:
    """Volume (float32) -> sinogram (float32) for the configured geometry."""
    cfg = _load_config(geometry_config)
    geom = cfg.build_geometry()
    arr = _check_array(array, cfg.volume_shape, "volume")
    sino = forward_project(Volume(arr, cfg.volume_spacing), geom, cfg.sampling())
    return _fresh(sino.data)


def py_back_project(array, geometry_config) -> np.ndarray:
    """Sinogram (float32) -> volume (float32), plain (unweighted) adjoint."""
    cfg = _load_config(geometry_config)
    geom = cfg.build_geometry()
    arr = _check_array(array, _sino_shape(cfg, geom), "sinogram")
    vol = back_project(Sinogram(arr, _detector_spacing(geom)), geom, fdk_weighting=False)
    return _fresh(vol.data)


def py_vjp_forward_project(array_cotangent, geometry_config) -> np.ndarray:
    """Gradient of py_forward_project: the paired backprojection."""
    return py_back_project(array_cotangent, geometry_config)


def py_vjp_back_project(array_cotangent, geometry_config) -> np.ndarray:
    """Gradient of py_back_project: the paired forward projection."""
    return py_forward_project(array_cotangent, geometry_config)


def py_fft_filter(array, geometry_config) -> np.ndarray:
    """Row filtering with the config's reconstruction filter (filter_kind)."""
    cfg = _load_config(geometry_config)
    geom = cfg.build_geometry()
    arr = _check_array(array, _sino_shape(cfg, geom), "sinogram")
    filt = reconstruction_filter(geom, cfg.filter_kind)
    out = fft_filter(Sinogram(arr, _detector_spacing(geom)), filt)
    return _fresh(out.data)


def py_vjp_fft_filter(array_cotangent, geometry_config) -> np.ndarray:
    """The filter is self-adjoint: the VJP is the filter itself."""
    return py_fft_filter(array_cotangent, geometry_config)
