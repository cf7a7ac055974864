"""Dense grid containers (volumes, sinograms) and their on-disk exchange format.

A grid is written as a ``<path>.json`` header plus a ``<path>.raw`` blob of
32-bit little-endian IEEE-754 samples in C (row-major) order.  In memory the
data lives in float64; the file format is the bit-exact exchange contract.

Coordinate convention shared across the library: the world coordinate of
index ``i`` along an axis with ``n`` samples and spacing ``s`` is
``(i - (n - 1) / 2) * s``, i.e. grids are centered on the isocenter.
Array axes are ordered ``(y, x)`` for 2D volumes, ``(z, y, x)`` for 3D
volumes, and ``(projection, u)`` / ``(projection, v, u)`` for sinograms.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "Volume",
    "Sinogram",
    "GridFormatError",
    "SizeMismatchError",
    "UnsupportedDtypeError",
    "write_grid",
    "read_grid",
]

_DISK_DTYPE = "f32le"


class GridFormatError(ValueError):
    """Header/payload of a grid file pair is inconsistent or malformed."""


class SizeMismatchError(GridFormatError):
    """Raw payload length disagrees with the header shape."""


class UnsupportedDtypeError(GridFormatError):
    """Header declares a sample dtype other than f32le."""


def _canonical(data) -> np.ndarray:
    arr = np.ascontiguousarray(np.asarray(data, dtype=np.float64))
    if not np.isfinite(arr).all():
        raise ValueError("grid data must be finite")
    if arr is not data:
        arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Volume:
    """Scalar attenuation grid (1/mm), 2D ``(y, x)`` or 3D ``(z, y, x)``."""

    data: np.ndarray
    spacing: tuple[float, ...]

    def __post_init__(self):
        arr = _canonical(self.data)
        if arr.ndim not in (2, 3):
            raise ValueError(f"volume must be 2D or 3D, got {arr.ndim}D")
        spacing = tuple(float(s) for s in self.spacing)
        if len(spacing) != arr.ndim:
            raise ValueError("spacing length must match dimensionality")
        if any(s <= 0 for s in spacing):
            raise ValueError("spacing must be strictly positive")
        object.__setattr__(self, "data", arr)
        object.__setattr__(self, "spacing", spacing)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape


@dataclass(frozen=True, eq=False)
class Sinogram:
    """Stack of per-projection detector readings (line integrals).

    2D geometries store ``(n_projections, u)`` rows; cone-beam stores
    ``(n_projections, v, u)`` detector images.  ``detector_spacing`` is
    per detector axis, ``(du,)`` or ``(dv, du)``.
    """

    data: np.ndarray
    detector_spacing: tuple[float, ...]

    def __post_init__(self):
        arr = _canonical(self.data)
        if arr.ndim not in (2, 3):
            raise ValueError(
                f"sinogram must be 2D or 3D (projections first), got {arr.ndim}D"
            )
        spacing = tuple(float(s) for s in self.detector_spacing)
        if len(spacing) != arr.ndim - 1:
            raise ValueError("detector_spacing length must match detector rank")
        if any(s <= 0 for s in spacing):
            raise ValueError("detector_spacing must be strictly positive")
        object.__setattr__(self, "data", arr)
        object.__setattr__(self, "detector_spacing", spacing)

    @property
    def n_projections(self) -> int:
        return self.data.shape[0]

    @property
    def detector_shape(self) -> tuple[int, ...]:
        return self.data.shape[1:]


def _strip_suffix(path) -> Path:
    p = Path(path)
    if p.suffix in (".json", ".raw"):
        p = p.with_suffix("")
    return p


def write_grid(grid, path) -> None:
    """Write ``<path>.json`` + ``<path>.raw`` for a Volume or Sinogram.

    Samples are cast to 32-bit little-endian floats, C order (last axis
    fastest).  Raises OSError on I/O failure.
    """
    stem = _strip_suffix(path)
    if isinstance(grid, Volume):
        header = {
            "kind": "volume",
            "shape": list(grid.shape),
            "spacing": list(grid.spacing),
            "dtype": _DISK_DTYPE,
            "order": "C",
        }
    elif isinstance(grid, Sinogram):
        header = {
            "kind": "sinogram",
            "shape": list(grid.data.shape),
            "spacing": [1.0] + list(grid.detector_spacing),
            "dtype": _DISK_DTYPE,
            "order": "C",
            "n_projections": grid.n_projections,
            "detector_shape": list(grid.detector_shape),
            "detector_spacing": list(grid.detector_spacing),
        }
    else:
        raise TypeError(f"expected Volume or Sinogram, got {type(grid).__name__}")

    try:
        stem.with_suffix(".json").write_text(json.dumps(header, indent=2) + "\n")
        stem.with_suffix(".raw").write_bytes(
            np.ascontiguousarray(grid.data, dtype="<f4").tobytes()
        )
    except OSError as exc:
        raise OSError(f"failed writing grid to '{stem}': {exc}") from exc


def read_grid(path):
    """Read a grid pair written by :func:`write_grid`.

    Returns a Volume or Sinogram according to the header ``kind``.
    Raises FileNotFoundError for missing files, UnsupportedDtypeError and
    SizeMismatchError for inconsistent pairs.
    """
    stem = _strip_suffix(path)
    header_path = stem.with_suffix(".json")
    raw_path = stem.with_suffix(".raw")
    if not header_path.exists():
        raise FileNotFoundError(f"missing grid header: {header_path}")
    if not raw_path.exists():
        raise FileNotFoundError(f"missing grid payload: {raw_path}")

    try:
        header = json.loads(header_path.read_text())
    except json.JSONDecodeError as exc:
        raise GridFormatError(f"malformed header {header_path}: {exc}") from exc

    for key in ("kind", "shape", "spacing", "dtype", "order"):
        if key not in header:
            raise GridFormatError(f"header {header_path} missing key '{key}'")
    if header["dtype"] != _DISK_DTYPE:
        raise UnsupportedDtypeError(
            f"unsupported dtype '{header['dtype']}' (only '{_DISK_DTYPE}')"
        )
    if header["order"] != "C":
        raise GridFormatError(f"unsupported order '{header['order']}' (only 'C')")

    shape = tuple(int(n) for n in header["shape"])
    payload = raw_path.read_bytes()
    expected = 4 * int(np.prod(shape))
    if len(payload) != expected:
        raise SizeMismatchError(
            f"{raw_path}: expected {expected} bytes for shape {list(shape)}, "
            f"got {len(payload)}"
        )
    data = np.frombuffer(payload, dtype="<f4").reshape(shape).astype(np.float64)

    kind = header["kind"]
    if kind == "volume":
        return Volume(data, tuple(header["spacing"]))
    if kind == "sinogram":
        for key in ("n_projections", "detector_shape", "detector_spacing"):
            if key not in header:
                raise GridFormatError(f"sinogram header missing key '{key}'")
        if int(header["n_projections"]) != shape[0]:
            raise GridFormatError("n_projections disagrees with shape[0]")
        if tuple(int(n) for n in header["detector_shape"]) != shape[1:]:
            raise GridFormatError("detector_shape disagrees with shape[1:]")
        return Sinogram(data, tuple(header["detector_spacing"]))
    raise GridFormatError(f"unknown grid kind '{kind}'")
