"""Acquisition geometries, trajectories, and projection-matrix construction.

World conventions (fixed, shared with the projectors):
  * right-handed world frame, rotation axis +z, isocenter at the origin;
  * at trajectory angle theta = 0 the source sits on the +x axis and rotates
    counterclockwise in the xy-plane;
  * the detector v axis points along +z and u is tangent to the orbit;
  * a 3x4 projection matrix maps a world point to homogeneous detector pixel
    coordinates, ``P @ (x, 1) = (w*col, w*row, w)``, with the principal point
    at the detector center pixel ``((cols-1)/2, (rows-1)/2)``.

Matrices are kept in normalized form: the first three entries of the third
row form a unit vector pointing from the source toward the detector, so
``w`` reads directly as metric depth along the principal axis (what the
cone-beam distance weighting consumes).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "GeometryParallel2D",
    "GeometryFan2D",
    "GeometryCone3D",
    "Pose",
    "ProjectionMatrix",
    "circular_trajectory_2d",
    "circular_pose",
    "pose_to_projection_matrix",
    "circular_trajectory_3d",
    "trajectory_from_poses",
    "load_projection_matrices",
    "save_projection_matrices",
    "circular_cone_geometry",
    "DegeneratePoseError",
]

_UNIT_TOL = 1e-9


class DegeneratePoseError(ValueError):
    """Pose whose rays are parallel to the detector plane (no pinhole map)."""


def _as_vec3(v, name: str) -> np.ndarray:
    arr = np.asarray(v, dtype=np.float64).reshape(-1)
    if arr.shape != (3,):
        raise ValueError(f"{name} must be a 3-vector")
    return arr


@dataclass(frozen=True, eq=False)
class Pose:
    """Source/detector placement for one view.

    ``u_dir`` is the detector column axis, ``v_dir`` the row axis; both are
    unit length and orthogonal, and the source must be off the detector plane.
    """

    source_position: np.ndarray
    detector_center: np.ndarray
    u_dir: np.ndarray
    v_dir: np.ndarray

    def __post_init__(self):
        s = _as_vec3(self.source_position, "source_position")
        c = _as_vec3(self.detector_center, "detector_center")
        u = _as_vec3(self.u_dir, "u_dir")
        v = _as_vec3(self.v_dir, "v_dir")
        if abs(np.linalg.norm(u) - 1.0) > _UNIT_TOL:
            raise ValueError("u_dir must be unit length")
        if abs(np.linalg.norm(v) - 1.0) > _UNIT_TOL:
            raise ValueError("v_dir must be unit length")
        if abs(float(u @ v)) > _UNIT_TOL:
            raise ValueError("u_dir and v_dir must be orthogonal")
        n = np.cross(u, v)
        if abs(float((c - s) @ n)) <= _UNIT_TOL:
            raise ValueError("source must lie off the detector plane")
        for name, arr in (
            ("source_position", s),
            ("detector_center", c),
            ("u_dir", u),
            ("v_dir", v),
        ):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def normal(self) -> np.ndarray:
        """Detector plane normal, oriented from the source toward the plane."""
        n = np.cross(self.u_dir, self.v_dir)
        if float((self.detector_center - self.source_position) @ n) < 0:
            n = -n
        return n


@dataclass(frozen=True, eq=False)
class ProjectionMatrix:
    """Normalized 3x4 world -> detector-pixel homogeneous map."""

    entries: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=np.float64).reshape(3, 4).copy()
        if np.linalg.matrix_rank(m, tol=1e-9 * max(1.0, float(np.abs(m).max()))) < 3:
            raise ValueError("projection matrix must have rank 3")
        if abs(np.linalg.norm(m[2, :3]) - 1.0) > 1e-6:
            raise ValueError("third-row direction must be unit (normalized form)")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @classmethod
    def from_raw(cls, entries) -> "ProjectionMatrix":
        """Normalize an arbitrary homogeneous representative.

        Divides by the signed third-row direction norm, with sign chosen so
        the isocenter depth ``P[2, 3]`` is positive (the source looks at the
        origin); this makes normalization invariant to any nonzero scale.
        """
        m = np.asarray(entries, dtype=np.float64).reshape(3, 4)
        norm = float(np.linalg.norm(m[2, :3]))
        if norm == 0.0:
            raise ValueError("third row direction must be nonzero")
        if m[2, 3] < 0:
            norm = -norm
        return cls(m / norm)

    def source_position(self) -> np.ndarray:
        """Center of projection: the (dehomogenized) null-space point."""
        _, _, vh = np.linalg.svd(self.entries)
        h = vh[-1]
        if abs(h[3]) < 1e-300:
            raise ValueError("projection center at infinity")
        return h[:3] / h[3]

    def project(self, points) -> np.ndarray:
        """Map world points (..., 3) to pixel (col, row) pairs (..., 2)."""
        pts = np.asarray(points, dtype=np.float64)
        h = pts @ self.entries[:, :3].T + self.entries[:, 3]
        return h[..., :2] / h[..., 2:3]


@dataclass(frozen=True, eq=False)
class GeometryParallel2D:
    volume_shape: tuple[int, int]
    volume_spacing: tuple[float, float]
    detector_width: int
    detector_spacing: float
    angles: np.ndarray

    def __post_init__(self):
        angles = np.asarray(self.angles, dtype=np.float64).reshape(-1)
        if angles.size < 1:
            raise ValueError("at least one projection angle required")
        if not np.isfinite(angles).all():
            raise ValueError("angles must be finite")
        angles.setflags(write=False)
        object.__setattr__(self, "angles", angles)
        object.__setattr__(self, "volume_shape", tuple(int(n) for n in self.volume_shape))
        object.__setattr__(
            self, "volume_spacing", tuple(float(s) for s in self.volume_spacing)
        )
        object.__setattr__(self, "detector_width", int(self.detector_width))
        object.__setattr__(self, "detector_spacing", float(self.detector_spacing))
        if len(self.volume_shape) != 2 or len(self.volume_spacing) != 2:
            raise ValueError("parallel geometry references a 2D volume")
        if self.detector_width < 1 or self.detector_spacing <= 0:
            raise ValueError("invalid detector parameters")

    @property
    def n_projections(self) -> int:
        return int(self.angles.size)


@dataclass(frozen=True, eq=False)
class GeometryFan2D(GeometryParallel2D):
    sdd: float = 0.0
    sid: float = 0.0

    def __post_init__(self):
        super().__post_init__()
        object.__setattr__(self, "sdd", float(self.sdd))
        object.__setattr__(self, "sid", float(self.sid))
        if not 0.0 < self.sid < self.sdd:
            raise ValueError("fan geometry requires 0 < sid < sdd")


@dataclass(frozen=True, eq=False)
class GeometryCone3D:
    """Cone-beam geometry: one projection matrix per view.

    ``detector_shape`` is (rows, cols) and ``detector_spacing`` is (dv, du);
    sdd/sid are retained for the reconstruction weights.
    """

    volume_shape: tuple[int, int, int]
    volume_spacing: tuple[float, float, float]
    detector_shape: tuple[int, int]
    detector_spacing: tuple[float, float]
    matrices: tuple[ProjectionMatrix, ...]
    sdd: float
    sid: float

    def __post_init__(self):
        object.__setattr__(self, "volume_shape", tuple(int(n) for n in self.volume_shape))
        object.__setattr__(
            self, "volume_spacing", tuple(float(s) for s in self.volume_spacing)
        )
        object.__setattr__(self, "detector_shape", tuple(int(n) for n in self.detector_shape))
        object.__setattr__(
            self, "detector_spacing", tuple(float(s) for s in self.detector_spacing)
        )
        object.__setattr__(self, "matrices", tuple(self.matrices))
        object.__setattr__(self, "sdd", float(self.sdd))
        object.__setattr__(self, "sid", float(self.sid))
        if len(self.volume_shape) != 3 or len(self.volume_spacing) != 3:
            raise ValueError("cone geometry references a 3D volume")
        if len(self.detector_shape) != 2 or len(self.detector_spacing) != 2:
            raise ValueError("cone detector is 2D (rows, cols)")
        if not self.matrices:
            raise ValueError("at least one projection matrix required")
        if not all(isinstance(m, ProjectionMatrix) for m in self.matrices):
            raise ValueError("matrices must be ProjectionMatrix instances")
        if not 0.0 < self.sid < self.sdd:
            raise ValueError("cone geometry requires 0 < sid < sdd")

    @property
    def n_projections(self) -> int:
        return len(self.matrices)

    def matrix_array(self) -> np.ndarray:
        return np.stack([m.entries for m in self.matrices])


def circular_trajectory_2d(n_projections: int, angular_range: float) -> np.ndarray:
    """Equispaced angles ``i * angular_range / n`` for i = 0..n-1."""
    n = int(n_projections)
    if n < 1:
        raise ValueError("n_projections must be >= 1")
    rng = float(angular_range)
    if rng <= 0:
        raise ValueError("angular_range must be positive")
    return np.arange(n) * (rng / n)


def pose_to_projection_matrix(pose: Pose, detector_shape, detector_spacing) -> ProjectionMatrix:
    """Build the pinhole map of one pose.

    ``detector_shape`` is (rows, cols), ``detector_spacing`` is (dv, du).
    The returned matrix sends a world point to ``(w*col, w*row, w)`` where
    (col, row) are the pixel coordinates of its central projection onto the
    detector plane and w its depth along the (unit) principal axis.
    """
    rows, cols = (int(n) for n in detector_shape)
    dv, du = (float(s) for s in detector_spacing)
    if rows < 1 or cols < 1 or du <= 0 or dv <= 0:
        raise ValueError("invalid detector shape/spacing")

    s = pose.source_position
    c = pose.detector_center
    u = pose.u_dir
    v = pose.v_dir
    n = pose.normal  # oriented so the source-to-plane depth is positive
    depth = float((c - s) @ n)
    if abs(depth) <= _UNIT_TOL:
        raise DegeneratePoseError("central ray parallel to detector plane")

    cu = (cols - 1) / 2.0
    cv = (rows - 1) / 2.0
    offset = c - s
    m = np.empty((3, 4))
    m[0, :3] = (depth / du) * u + (cu - float(offset @ u) / du) * n
    m[1, :3] = (depth / dv) * v + (cv - float(offset @ v) / dv) * n
    m[2, :3] = n
    m[:, 3] = -m[:, :3] @ s
    return ProjectionMatrix(m)


def circular_pose(theta: float, sdd: float, sid: float) -> Pose:
    """Pose of the circular orbit at angle theta (source on +x at theta=0)."""
    ct, st = np.cos(theta), np.sin(theta)
    return Pose(
        source_position=np.array([sid * ct, sid * st, 0.0]),
        detector_center=np.array([-(sdd - sid) * ct, -(sdd - sid) * st, 0.0]),
        u_dir=np.array([-st, ct, 0.0]),
        v_dir=np.array([0.0, 0.0, 1.0]),
    )


def circular_trajectory_3d(
    n_projections: int,
    angular_range: float,
    sdd: float,
    sid: float,
    detector_shape,
    detector_spacing,
) -> list[ProjectionMatrix]:
    """Projection matrices of the closed-form circular orbit."""
    sdd = float(sdd)
    sid = float(sid)
    if not 0.0 < sid < sdd:
        raise ValueError("requires 0 < sid < sdd")
    angles = circular_trajectory_2d(n_projections, angular_range)
    return [
        pose_to_projection_matrix(circular_pose(t, sdd, sid), detector_shape, detector_spacing)
        for t in angles
    ]


def trajectory_from_poses(poses, detector_shape, detector_spacing) -> list[ProjectionMatrix]:
    """Element-wise :func:`pose_to_projection_matrix`, order preserved."""
    poses = list(poses)
    if not poses:
        raise ValueError("at least one pose required")
    matrices = []
    for i, pose in enumerate(poses):
        try:
            matrices.append(
                pose_to_projection_matrix(pose, detector_shape, detector_spacing)
            )
        except (DegeneratePoseError, ValueError) as exc:
            raise DegeneratePoseError(f"pose {i}: {exc}") from exc
    return matrices


def load_projection_matrices(path) -> list[ProjectionMatrix]:
    """Load ``{"matrices": [[12 row-major numbers], ...]}`` and renormalize."""
    p = Path(path)
    try:
        doc = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"malformed matrix file {p}: {exc}") from exc
    if not isinstance(doc, dict) or "matrices" not in doc:
        raise ValueError(f"matrix file {p} must contain a 'matrices' list")
    out = []
    for i, flat in enumerate(doc["matrices"]):
        arr = np.asarray(flat, dtype=np.float64).reshape(-1)
        if arr.shape != (12,):
            raise ValueError(f"matrix {i}: expected 12 entries, got {arr.size}")
        out.append(ProjectionMatrix.from_raw(arr.reshape(3, 4)))
    if not out:
        raise ValueError(f"matrix file {p} holds no matrices")
    return out


def save_projection_matrices(matrices, path) -> None:
    """Write matrices in the JSON exchange format used by the loader."""
    doc = {"matrices": [list(map(float, m.entries.ravel())) for m in matrices]}
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def circular_cone_geometry(
    volume_shape,
    volume_spacing,
    detector_shape,
    detector_spacing,
    number_of_projections,
    angular_range,
    sdd,
    sid,
) -> GeometryCone3D:
    """Convenience builder: circular-orbit cone geometry from scan parameters."""
    matrices = circular_trajectory_3d(
        number_of_projections, angular_range, sdd, sid, detector_shape, detector_spacing
    )
    return GeometryCone3D(
        volume_shape=volume_shape,
        volume_spacing=volume_spacing,
        detector_shape=detector_shape,
        detector_spacing=detector_spacing,
        matrices=matrices,
        sdd=sdd,
        sid=sid,
    )
