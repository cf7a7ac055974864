"""tomokit: CPU tomography operators with paired gradients.

Forward/back projectors for parallel-, fan-, and cone-beam scans, filtered
backprojection pipelines, analytic phantoms, trajectory modeling through
3x4 projection matrices, and seeded sinogram artifact simulation.
"""

from .artifacts import (
    add_detector_jitter,
    add_gantry_motion_blur,
    add_gaussian_noise,
    add_poisson_noise,
    add_ring_artifact,
)
from .autodiff import (
    DifferentiableOp,
    GradCheckReport,
    back_projection_op,
    fbp_op,
    fft_filter_op,
    forward_projection_op,
    grad_check,
    vjp_back_projection,
    vjp_fft_filter,
    vjp_forward_projection,
)
from .config import ConfigError, PipelineConfig, load_config
from .filters import (
    Filter1D,
    cosine_filter,
    cosine_preweight_cone,
    fbp_fan_2d,
    fbp_parallel_2d,
    fdk_cone_3d,
    fft_filter,
    ramp_filter,
    shepp_logan_filter,
)
from .geometry import (
    GeometryCone3D,
    GeometryFan2D,
    GeometryParallel2D,
    Pose,
    ProjectionMatrix,
    circular_cone_geometry,
    circular_pose,
    circular_trajectory_2d,
    circular_trajectory_3d,
    load_projection_matrices,
    pose_to_projection_matrix,
    save_projection_matrices,
    trajectory_from_poses,
)
from .grids import (
    GridFormatError,
    Sinogram,
    SizeMismatchError,
    UnsupportedDtypeError,
    Volume,
    read_grid,
    write_grid,
)
from .phantoms import (
    EllipsoidSpec,
    ball_phantom,
    disk_phantom,
    shepp_logan_2d,
    shepp_logan_3d,
)
from .projectors import (
    SamplingConfig,
    back_project,
    back_project_cone_3d,
    back_project_fan_2d,
    back_project_parallel_2d,
    forward_project,
    forward_project_cone_3d,
    forward_project_fan_2d,
    forward_project_parallel_2d,
    materialize_operator,
)

__version__ = "0.1.0"
