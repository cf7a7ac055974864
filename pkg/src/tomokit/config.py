"""Declarative pipeline configuration (JSON) shared by the CLI and bindings.

A config names the scan the way the geometry builders do::

    {
      "geometry_kind": "cone3d",            // parallel2d | fan2d | cone3d
      "volume_shape": [256, 256, 256],
      "volume_spacing": [0.5, 0.5, 0.5],
      "detector_shape": [400, 600],         // [width] or width for 2D kinds
      "detector_spacing": [1, 1],
      "number_of_projections": 360,
      "angular_range": 6.283185307179586,
      "sdd": 1200, "sid": 750,              // divergent kinds only
      "filter_kind": "shepp_logan",         // ramp | shepp_logan | cosine
      "step_scale": 0.5,
      "matrices_path": "trajectory.json",   // optional, overrides the orbit
      "artifacts": [ {"kind": "...", ...}, ... ]
    }
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from . import artifacts
from .geometry import (
    GeometryCone3D,
    GeometryFan2D,
    GeometryParallel2D,
    circular_trajectory_2d,
    circular_trajectory_3d,
    load_projection_matrices,
)
from .projectors import SamplingConfig

__all__ = ["PipelineConfig", "ConfigError", "load_config"]

GEOMETRY_KINDS = ("parallel2d", "fan2d", "cone3d")


class ConfigError(ValueError):
    """Invalid or inconsistent pipeline configuration; names the field."""


def _require(cfg: dict, key: str):
    if key not in cfg:
        raise ConfigError(f"missing config field '{key}'")
    return cfg[key]


def _int_list(value, key: str, length: int) -> tuple[int, ...]:
    if isinstance(value, (int, float)) and length == 1:
        value = [value]
    try:
        out = tuple(int(v) for v in value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"field '{key}' must be a list of integers") from exc
    if len(out) != length or any(v < 1 for v in out):
        raise ConfigError(f"field '{key}' must hold {length} positive integers")
    return out


def _float_list(value, key: str, length: int) -> tuple[float, ...]:
    if isinstance(value, (int, float)) and length == 1:
        value = [value]
    try:
        out = tuple(float(v) for v in value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"field '{key}' must be a list of numbers") from exc
    if len(out) != length or any(not math.isfinite(v) or v <= 0 for v in out):
        raise ConfigError(f"field '{key}' must hold {length} positive numbers")
    return out


@dataclass(frozen=True)
class PipelineConfig:
    geometry_kind: str
    volume_shape: tuple[int, ...]
    volume_spacing: tuple[float, ...]
    detector_shape: tuple[int, ...]
    detector_spacing: tuple[float, ...]
    number_of_projections: int
    angular_range: float
    sdd: float | None = None
    sid: float | None = None
    filter_kind: str = "ramp"
    step_scale: float = 0.5
    matrices_path: str | None = None
    artifact_chain: tuple[dict, ...] = field(default_factory=tuple)

    @classmethod
    def from_dict(cls, cfg: dict, base_dir: Path | None = None) -> "PipelineConfig":
        kind = _require(cfg, "geometry_kind")
        if kind not in GEOMETRY_KINDS:
            raise ConfigError(
                f"field 'geometry_kind' must be one of {GEOMETRY_KINDS}, got '{kind}'"
            )
        ndim = 3 if kind == "cone3d" else 2
        det_rank = 2 if kind == "cone3d" else 1
        volume_shape = _int_list(_require(cfg, "volume_shape"), "volume_shape", ndim)
        volume_spacing = _float_list(_require(cfg, "volume_spacing"), "volume_spacing", ndim)
        detector_shape = _int_list(_require(cfg, "detector_shape"), "detector_shape", det_rank)
        detector_spacing = _float_list(
            _require(cfg, "detector_spacing"), "detector_spacing", det_rank
        )
        n_proj = int(_require(cfg, "number_of_projections"))
        if n_proj < 1:
            raise ConfigError("field 'number_of_projections' must be >= 1")
        angular_range = float(_require(cfg, "angular_range"))
        if not 0 < angular_range <= 4 * math.pi:
            raise ConfigError("field 'angular_range' must lie in (0, 4*pi]")

        sdd = cfg.get("sdd")
        sid = cfg.get("sid")
        if kind in ("fan2d", "cone3d"):
            if sdd is None or sid is None:
                raise ConfigError(f"geometry '{kind}' requires fields 'sdd' and 'sid'")
            sdd = float(sdd)
            sid = float(sid)
            if not 0 < sid < sdd:
                raise ConfigError("fields 'sdd'/'sid' must satisfy 0 < sid < sdd")

        filter_kind = cfg.get("filter_kind", "ramp")
        if filter_kind not in ("ramp", "shepp_logan", "cosine"):
            raise ConfigError(f"field 'filter_kind' is invalid: '{filter_kind}'")
        step_scale = float(cfg.get("step_scale", 0.5))
        if not 0 < step_scale <= 1:
            raise ConfigError("field 'step_scale' must lie in (0, 1]")

        matrices_path = cfg.get("matrices_path")
        if matrices_path is not None:
            matrices_path = str(matrices_path)
            if base_dir is not None and not Path(matrices_path).is_absolute():
                matrices_path = str(base_dir / matrices_path)

        chain = cfg.get("artifacts", [])
        if not isinstance(chain, list) or not all(isinstance(s, dict) for s in chain):
            raise ConfigError("field 'artifacts' must be a list of objects")

        return cls(
            geometry_kind=kind,
            volume_shape=volume_shape,
            volume_spacing=volume_spacing,
            detector_shape=detector_shape,
            detector_spacing=detector_spacing,
            number_of_projections=n_proj,
            angular_range=angular_range,
            sdd=sdd,
            sid=sid,
            filter_kind=filter_kind,
            step_scale=step_scale,
            matrices_path=matrices_path,
            artifact_chain=tuple(chain),
        )

    def sampling(self) -> SamplingConfig:
        return SamplingConfig(step_scale=self.step_scale)

    def build_geometry(self):
        angles = circular_trajectory_2d(self.number_of_projections, self.angular_range)
        if self.geometry_kind == "parallel2d":
            return GeometryParallel2D(
                volume_shape=self.volume_shape,
                volume_spacing=self.volume_spacing,
                detector_width=self.detector_shape[0],
                detector_spacing=self.detector_spacing[0],
                angles=angles,
            )
        if self.geometry_kind == "fan2d":
            return GeometryFan2D(
                volume_shape=self.volume_shape,
                volume_spacing=self.volume_spacing,
                detector_width=self.detector_shape[0],
                detector_spacing=self.detector_spacing[0],
                angles=angles,
                sdd=self.sdd,
                sid=self.sid,
            )
        if self.matrices_path is not None:
            matrices = load_projection_matrices(self.matrices_path)
            if len(matrices) != self.number_of_projections:
                raise ConfigError(
                    f"matrices_path holds {len(matrices)} matrices, "
                    f"config expects {self.number_of_projections}"
                )
        else:
            matrices = circular_trajectory_3d(
                self.number_of_projections,
                self.angular_range,
                self.sdd,
                self.sid,
                self.detector_shape,
                self.detector_spacing,
            )
        return GeometryCone3D(
            volume_shape=self.volume_shape,
            volume_spacing=self.volume_spacing,
            detector_shape=self.detector_shape,
            detector_spacing=self.detector_spacing,
            matrices=matrices,
            sdd=self.sdd,
            sid=self.sid,
        )

    def apply_artifacts(self, sino, geom):
        """Run the configured artifact chain in declaration order."""
        for i, entry in enumerate(self.artifact_chain):
            entry = dict(entry)
            kind = entry.pop("kind", None)
            try:
                if kind == "detector_jitter":
                    sino = artifacts.add_detector_jitter(
                        sino,
                        max_shift_px=entry.pop("max_shift_px"),
                        axis=entry.pop("axis", "u"),
                        seed=entry.pop("seed", 0),
                    )
                elif kind == "poisson":
                    sino = artifacts.add_poisson_noise(
                        sino,
                        i0=entry.pop("i0"),
                        mode=entry.pop("mode", "transmission"),
                        seed=entry.pop("seed", 0),
                    )
                elif kind == "gaussian":
                    sino = artifacts.add_gaussian_noise(
                        sino,
                        mean=entry.pop("mean", 0.0),
                        std=entry.pop("std"),
                        seed=entry.pop("seed", 0),
                    )
                elif kind == "ring":
                    rng = entry.pop("projection_range", None)
                    sino = artifacts.add_ring_artifact(
                        sino,
                        columns=entry.pop("columns"),
                        projection_range=None if rng is None else tuple(rng),
                        mode=entry.pop("mode", "zero"),
                        factor=entry.pop("factor", None),
                    )
                elif kind == "gantry_blur":
                    sino = artifacts.add_gantry_motion_blur(
                        sino, geom, kernel_len_px=entry.pop("kernel_len_px")
                    )
                else:
                    raise ConfigError(f"artifacts[{i}]: unknown kind '{kind}'")
            except KeyError as exc:
                raise ConfigError(f"artifacts[{i}] ({kind}): missing field {exc}") from exc
            except ValueError as exc:
                raise ConfigError(f"artifacts[{i}] ({kind}): {exc}") from exc
            if entry:
                raise ConfigError(
                    f"artifacts[{i}] ({kind}): unknown fields {sorted(entry)}"
                )
        return sino


def load_config(path) -> PipelineConfig:
    p = Path(path)
    try:
        doc = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {p} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"config {p} must be a JSON object")
    return PipelineConfig.from_dict(doc, base_dir=p.parent)
