"""Vector-Jacobian products for the library operators and a gradient checker.

Every operator here is linear in its grid input, and its VJP is the paired
discrete operator: the voxel-driven backprojector for the ray-driven forward
projector (and vice versa), and the filter itself for FFT filtering (real
symmetric weights make it self-adjoint).  The ray/voxel pair is not an exact
matrix transpose; the residual is quantified by the dense-operator oracle in
the projectors module and bounded in the adjoint test suite.

Distance weighting is excluded from the adjoint pair; the reconstruction
pipelines apply it only inside their own forward composition.

``grad_check`` compares central finite differences of the forward map
against the VJP on random directions.  Each trial reports the normalized
defect ``|<J d, y> - <vjp(y), d>| / max(|J d| |y|, |vjp(y)| |d|)`` (the same
normalization as the adjoint dot-product suite): scalar relative error is
meaningless for deliberately unmatched pairs, while this defect is zero
exactly when the pair is consistent.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .filters import Filter1D, fft_filter, filter_stage, backproject_stage
from .geometry import GeometryCone3D, GeometryParallel2D
from .grids import Sinogram, Volume
from .projectors import SamplingConfig, back_project, forward_project

__all__ = [
    "DifferentiableOp",
    "vjp_forward_projection",
    "vjp_back_projection",
    "vjp_fft_filter",
    "forward_projection_op",
    "back_projection_op",
    "fft_filter_op",
    "fbp_op",
    "GradCheckReport",
    "grad_check",
]


def _detector_spacing_tuple(geom):
    if isinstance(geom, GeometryCone3D):
        return geom.detector_spacing
    return (geom.detector_spacing,)


def _sino_shape(geom):
    if isinstance(geom, GeometryCone3D):
        return (geom.n_projections, *geom.detector_shape)
    return (geom.n_projections, geom.detector_width)


def vjp_forward_projection(geom, cotangent: Sinogram) -> Volume:
    """Gradient of the forward projection w.r.t. the volume: the matching
    (unweighted) backprojection of the cotangent."""
    return back_project(cotangent, geom, fdk_weighting=False)


def vjp_back_projection(geom, cotangent: Volume, cfg: SamplingConfig = SamplingConfig()) -> Sinogram:
    """Gradient of the (unweighted) backprojection w.r.t. the sinogram: the
    matching forward projection of the cotangent."""
    return forward_project(cotangent, geom, cfg)


def vjp_fft_filter(filt: Filter1D, cotangent: Sinogram) -> Sinogram:
    """FFT filtering is self-adjoint (real, even weights): the VJP is the
    filter applied to the cotangent."""
    return fft_filter(cotangent, filt)


@dataclass(frozen=True, eq=False)
class DifferentiableOp:
    """A linear grid operator bundled with its VJP, on raw arrays."""

    name: str
    input_shape: tuple[int, ...]
    output_shape: tuple[int, ...]
    forward: Callable[[np.ndarray], np.ndarray]
    vjp: Callable[[np.ndarray], np.ndarray]


def forward_projection_op(geom, cfg: SamplingConfig = SamplingConfig()) -> DifferentiableOp:
    spacing = _detector_spacing_tuple(geom)

    def fwd(x):
        return forward_project(Volume(x, geom.volume_spacing), geom, cfg).data

    def vjp(y):
        return vjp_forward_projection(geom, Sinogram(y, spacing)).data

    return DifferentiableOp(
        name=f"forward_projection[{type(geom).__name__}]",
        input_shape=tuple(geom.volume_shape),
        output_shape=_sino_shape(geom),
        forward=fwd,
        vjp=vjp,
    )


def back_projection_op(geom, cfg: SamplingConfig = SamplingConfig()) -> DifferentiableOp:
    spacing = _detector_spacing_tuple(geom)

    def fwd(y):
        return back_project(Sinogram(y, spacing), geom, fdk_weighting=False).data

    def vjp(x):
        return vjp_back_projection(geom, Volume(x, geom.volume_spacing), cfg).data

    return DifferentiableOp(
        name=f"back_projection[{type(geom).__name__}]",
        input_shape=_sino_shape(geom),
        output_shape=tuple(geom.volume_shape),
        forward=fwd,
        vjp=vjp,
    )


def fft_filter_op(filt: Filter1D, sino_shape, detector_spacing) -> DifferentiableOp:
    spacing = tuple(detector_spacing)
    shape = tuple(int(n) for n in sino_shape)

    def apply(y):
        return fft_filter(Sinogram(y, spacing), filt).data

    return DifferentiableOp(
        name="fft_filter",
        input_shape=shape,
        output_shape=shape,
        forward=apply,
        vjp=apply,
    )


def fbp_op(geom: GeometryParallel2D, filter_kind: str = "ramp",
           cfg: SamplingConfig = SamplingConfig()) -> DifferentiableOp:
    """The composed parallel-beam FBP pipeline with its paired VJP
    (filter self-adjoint, backprojection paired with the forward projector)."""
    if type(geom) is not GeometryParallel2D:
        raise TypeError("fbp_op is defined for parallel-beam geometry")
    spacing = _detector_spacing_tuple(geom)

    def fwd(p):
        return fbp_forward(Sinogram(p, spacing)).data

    def fbp_forward(sino):
        return backproject_stage(filter_stage(sino, geom, filter_kind), geom)

    def vjp(y):
        scale = np.pi / geom.n_projections
        projected = forward_project(Volume(y * scale, geom.volume_spacing), geom, cfg)
        return filter_stage(projected, geom, filter_kind).data

    return DifferentiableOp(
        name="fbp_parallel_2d",
        input_shape=_sino_shape(geom),
        output_shape=tuple(geom.volume_shape),
        forward=fwd,
        vjp=vjp,
    )


@dataclass(frozen=True)
class GradCheckReport:
    op_name: str
    epsilon: float
    tolerance: float
    errors: tuple[float, ...] = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return all(e < self.tolerance for e in self.errors)

    @property
    def max_error(self) -> float:
        return max(self.errors)

    def __str__(self):
        status = "pass" if self.passed else "FAIL"
        return (
            f"grad_check[{self.op_name}]: {status} "
            f"(max defect {self.max_error:.3e}, tolerance {self.tolerance:.1e}, "
            f"{len(self.errors)} trials)"
        )


def grad_check(
    op: DifferentiableOp,
    trials: int = 10,
    epsilon: float = 1e-3,
    tolerance: float = 1e-3,
    seed: int = 0,
) -> GradCheckReport:
    """Randomized central-finite-difference check of ``op.vjp``.

    Draws (x, d, y), compares the directional derivative of
    ``<forward(x), y>`` along d with ``<vjp(y), d>``, and records the
    normalized defect per trial.
    """
    rng = np.random.default_rng(seed)
    errors = []
    for _ in range(int(trials)):
        x = rng.standard_normal(op.input_shape)
        d = rng.standard_normal(op.input_shape)
        y = rng.standard_normal(op.output_shape)
        fd_vec = (op.forward(x + epsilon * d) - op.forward(x - epsilon * d)) / (2 * epsilon)
        vjp_vec = op.vjp(y)
        num = abs(float(np.vdot(fd_vec, y)) - float(np.vdot(vjp_vec, d)))
        den = max(
            float(np.linalg.norm(fd_vec)) * float(np.linalg.norm(y)),
            float(np.linalg.norm(vjp_vec)) * float(np.linalg.norm(d)),
            1e-300,
        )
        errors.append(num / den)
    return GradCheckReport(
        op_name=op.name,
        epsilon=float(epsilon),
        tolerance=float(tolerance),
        errors=tuple(errors),
    )
