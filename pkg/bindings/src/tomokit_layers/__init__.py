"""tomokit-layers: float32 array boundary over the tomokit operators,
for wiring the projectors into training frameworks as custom layers."""

from .ops import (
    BoundaryError,
    py_back_project,
    py_fft_filter,
    py_forward_project,
    py_vjp_back_project,
    py_vjp_fft_filter,
    py_vjp_forward_project,
)

__version__ = "0.1.0"
