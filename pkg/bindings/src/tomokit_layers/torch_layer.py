"""Example: registering the projector pair as a custom differentiable op in
PyTorch.

This is the deployment pattern the boundary exists for: the forward pass
calls the compiled forward projector, the backward pass the paired
backprojector, and autograd composes the rest of the graph.  The module is
an example shipped with tests, not a stable API surface.
"""

from __future__ import annotations

import numpy as np
import torch

from .ops import py_forward_project, py_vjp_forward_project


class ForwardProjection(torch.autograd.Function):
    """Differentiable forward projection: input volume tensor, output
    sinogram tensor, geometry fixed by the config captured at call time."""

    @staticmethod
    def forward(ctx, volume: torch.Tensor, geometry_config: dict) -> torch.Tensor:
        ctx.geometry_config = geometry_config
        sino = py_forward_project(
            np.ascontiguousarray(volume.detach().cpu().numpy(), dtype=np.float32),
            geometry_config,
        )
        return torch.from_numpy(sino)

    @staticmethod
    def backward(ctx, grad_output: torch.Tensor):
        grad = py_vjp_forward_project(
            np.ascontiguousarray(grad_output.detach().cpu().numpy(), dtype=np.float32),
            ctx.geometry_config,
        )
        return torch.from_numpy(grad), None


def forward_project(volume: torch.Tensor, geometry_config: dict) -> torch.Tensor:
    return ForwardProjection.apply(volume, geometry_config)


def fit_scale(
    template: np.ndarray,
    target_scale: float,
    geometry_config: dict,
    steps: int = 200,
    lr: float = 0.25,
) -> float:
    """Recover a single multiplicative factor through the projector.

    Builds a measured sinogram ``target_scale * A(template)`` and fits
    ``alpha`` in ``A(alpha * template)`` by gradient descent through the
    custom op.  The least-squares optimum is ``target_scale`` (up to the
    small unmatched-adjoint bias of the gradient pair).
    """
    template_t = torch.from_numpy(np.asarray(template, dtype=np.float32))
    with torch.no_grad():
        measured = forward_project(template_t, geometry_config) * target_scale
    norm = float((measured**2).mean())

    alpha = torch.zeros((), dtype=torch.float32, requires_grad=True)
    opt = torch.optim.SGD([alpha], lr=lr)
    for _ in range(steps):
        opt.zero_grad()
        predicted = forward_project(alpha * template_t, geometry_config)
        loss = ((predicted - measured) ** 2).mean() / norm
        loss.backward()
        opt.step()
    return float(alpha.detach())
