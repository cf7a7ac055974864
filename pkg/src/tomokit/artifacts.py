"""Sinogram degradation simulators: jitter, Poisson, Gaussian, rings, blur.

All simulators preserve the sinogram shape and metadata and are pure
functions of (input, parameters, seed).  Randomness comes from numpy's
PCG64 generator; every projection gets its own child stream spawned from
the seed, so results do not depend on evaluation order and are reproducible
byte for byte.  Cross-implementation bit-equality of the noise is not a
goal; the distributions are the contract.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from .geometry import GeometryCone3D, GeometryFan2D, GeometryParallel2D
from .grids import Sinogram

__all__ = [
    "add_detector_jitter",
    "add_poisson_noise",
    "add_gaussian_noise",
    "add_ring_artifact",
    "add_gantry_motion_blur",
]


def _projection_rngs(seed: int, n: int) -> list[np.random.Generator]:
    children = np.random.SeedSequence(int(seed)).spawn(n)
    return [np.random.Generator(np.random.PCG64(c)) for c in children]


def _shift_fill_zero(arr: np.ndarray, shift: int, axis: int) -> np.ndarray:
    """Translate along one axis, zero-filling the vacated strip."""
    out = np.zeros_like(arr)
    if shift == 0:
        return arr.copy()
    src = [slice(None)] * arr.ndim
    dst = [slice(None)] * arr.ndim
    if shift > 0:
        dst[axis] = slice(shift, None)
        src[axis] = slice(None, -shift)
    else:
        dst[axis] = slice(None, shift)
        src[axis] = slice(-shift, None)
    out[tuple(dst)] = arr[tuple(src)]
    return out


def add_detector_jitter(sino: Sinogram, max_shift_px: int, axis: str = "u", seed: int = 0) -> Sinogram:
    """Shift each projection by one uniform integer offset in
    [-max_shift_px, +max_shift_px] along the chosen detector axis."""
    max_shift_px = int(max_shift_px)
    if max_shift_px < 0:
        raise ValueError("max_shift_px must be >= 0")
    if axis not in ("u", "v"):
        raise ValueError("axis must be 'u' or 'v'")
    if sino.data.ndim == 2 and axis == "v":
        raise ValueError("1D detector rows support axis 'u' only")
    ax = -1 if axis == "u" else -2
    data = np.empty_like(sino.data)
    rngs = _projection_rngs(seed, sino.n_projections)
    for i in range(sino.n_projections):
        shift = int(rngs[i].integers(-max_shift_px, max_shift_px + 1))
        data[i] = _shift_fill_zero(sino.data[i], shift, ax % sino.data[i].ndim)
    return Sinogram(data, sino.detector_spacing)


def add_poisson_noise(sino: Sinogram, i0: float, mode: str = "transmission", seed: int = 0) -> Sinogram:
    """Photon-counting noise.

    transmission: counts ~ Poisson(i0 * exp(-p)), clamped to >= 1 before the
    log (avoids infinities), output -ln(counts / i0).
    direct: output ~ Poisson(p) pixel-wise, the line integrals themselves
    used as rates.
    """
    i0 = float(i0)
    if i0 <= 0:
        raise ValueError("i0 must be positive")
    if mode not in ("transmission", "direct"):
        raise ValueError("mode must be 'transmission' or 'direct'")
    if (sino.data < 0).any():
        raise ValueError(f"{mode} mode requires a non-negative sinogram")
    data = np.empty_like(sino.data)
    rngs = _projection_rngs(seed, sino.n_projections)
    for i in range(sino.n_projections):
        if mode == "transmission":
            counts = rngs[i].poisson(i0 * np.exp(-sino.data[i]))
            counts = np.maximum(counts, 1)
            data[i] = -np.log(counts / i0)
        else:
            data[i] = rngs[i].poisson(sino.data[i])
    return Sinogram(data, sino.detector_spacing)


def add_gaussian_noise(sino: Sinogram, mean: float, std: float, seed: int = 0) -> Sinogram:
    """Additive readout noise: out = in + mean + std * N(0, 1) per pixel."""
    std = float(std)
    if std < 0:
        raise ValueError("std must be >= 0")
    data = np.empty_like(sino.data)
    rngs = _projection_rngs(seed, sino.n_projections)
    for i in range(sino.n_projections):
        data[i] = sino.data[i] + mean + std * rngs[i].standard_normal(sino.data[i].shape)
    return Sinogram(data, sino.detector_spacing)


def add_ring_artifact(
    sino: Sinogram,
    columns,
    projection_range: tuple[int, int] | None = None,
    mode: str = "zero",
    factor: float | None = None,
) -> Sinogram:
    """Corrupt selected detector u-columns over [start, end) projections.

    zero mode clears the columns; scale mode multiplies them by ``factor``.
    Everything outside the selection is returned bit-identical.
    """
    width = sino.data.shape[-1]
    columns = [int(c) for c in np.atleast_1d(columns)]
    for c in columns:
        if not 0 <= c < width:
            raise ValueError(f"column {c} outside detector width {width}")
    if projection_range is None:
        projection_range = (0, sino.n_projections)
    start, end = (int(v) for v in projection_range)
    if not (0 <= start <= end <= sino.n_projections):
        raise ValueError(
            f"projection_range {projection_range} outside [0, {sino.n_projections}]"
        )
    if mode == "zero":
        value = 0.0
    elif mode == "scale":
        if factor is None:
            raise ValueError("scale mode requires a factor")
        value = None
    else:
        raise ValueError("mode must be 'zero' or 'scale'")
    data = sino.data.copy()
    for c in columns:
        if value is None:
            data[start:end, ..., c] *= float(factor)
        else:
            data[start:end, ..., c] = 0.0
    return Sinogram(data, sino.detector_spacing)


def _view_angles(geom) -> np.ndarray:
    if isinstance(geom, GeometryCone3D):
        sources = np.stack([m.source_position() for m in geom.matrices])
        return np.arctan2(sources[:, 1], sources[:, 0])
    if isinstance(geom, (GeometryParallel2D, GeometryFan2D)):
        return np.asarray(geom.angles)
    raise TypeError(f"unsupported geometry {type(geom).__name__}")


def _line_kernel(length: int, theta: float) -> np.ndarray:
    """Uniform line segment of ``length`` taps at angle theta in the (u, v)
    detector plane, rasterized with bilinear splatting; taps sum to 1."""
    half = (length - 1) // 2
    kernel = np.zeros((2 * half + 1, 2 * half + 1))
    center = half
    cu, sv = np.cos(theta), np.sin(theta)
    for k in range(-half, half + 1):
        du = k * cu
        dv = k * sv
        u0 = int(np.floor(du))
        v0 = int(np.floor(dv))
        wu = du - u0
        wv = dv - v0
        for (vv, uu, w) in (
            (v0, u0, (1 - wv) * (1 - wu)),
            (v0, u0 + 1, (1 - wv) * wu),
            (v0 + 1, u0, wv * (1 - wu)),
            (v0 + 1, u0 + 1, wv * wu),
        ):
            if w > 0:
                kernel[center + vv, center + uu] += w
    return kernel / kernel.sum()


def add_gantry_motion_blur(sino: Sinogram, geom, kernel_len_px: int) -> Sinogram:
    """Convolve each projection with a rotation-aligned uniform line kernel.

    For 2D geometries (1D detector rows) this degenerates to a plain moving
    average along u; for cone beam the kernel is oriented at the view's
    trajectory angle in the detector plane.  Boundaries are zero-padded.
    """
    length = int(kernel_len_px)
    if length < 1 or length % 2 == 0:
        raise ValueError("kernel_len_px must be odd and >= 1")
    if length == 1:
        return Sinogram(sino.data.copy(), sino.detector_spacing)
    if sino.data.ndim == 2:
        kernel = np.full(length, 1.0 / length)
        data = np.stack(
            [
                ndimage.convolve1d(sino.data[i], kernel, axis=-1, mode="constant", cval=0.0)
                for i in range(sino.n_projections)
            ]
        )
        return Sinogram(data, sino.detector_spacing)
    angles = _view_angles(geom)
    if angles.size != sino.n_projections:
        raise ValueError("geometry view count does not match sinogram")
    data = np.empty_like(sino.data)
    for i in range(sino.n_projections):
        kernel = _line_kernel(length, float(angles[i]))
        data[i] = ndimage.convolve(sino.data[i], kernel, mode="constant", cval=0.0)
    return Sinogram(data, sino.detector_spacing)
