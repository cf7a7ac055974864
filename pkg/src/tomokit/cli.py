"""Command-line front end: phantom generation, projection, filtering,
reconstruction, artifact simulation, and trajectory export, driven by one
JSON config.

Exit codes: 0 success, 1 I/O failure, 2 validation failure.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .config import ConfigError, load_config
from .filters import backproject_stage, fbp_fan_2d, fbp_parallel_2d, fdk_cone_3d, filter_stage
from .geometry import GeometryCone3D, GeometryFan2D, save_projection_matrices
from .grids import GridFormatError, Sinogram, Volume, read_grid, write_grid
from .phantoms import shepp_logan_2d, shepp_logan_3d
from .projectors import forward_project

log = logging.getLogger("tomokit")

EXIT_OK = 0
EXIT_IO = 1
EXIT_INVALID = 2


def _read_sinogram(path, geom) -> Sinogram:
    grid = read_grid(path)
    if not isinstance(grid, Sinogram):
        raise ConfigError(f"'{path}' holds a volume, expected a sinogram")
    expected = (
        (geom.n_projections, *geom.detector_shape)
        if isinstance(geom, GeometryCone3D)
        else (geom.n_projections, geom.detector_width)
    )
    if grid.data.shape != expected:
        raise ConfigError(
            f"sinogram shape {grid.data.shape} does not match geometry "
            f"'{type(geom).__name__}' expecting {expected}"
        )
    return grid


def _read_volume(path, geom) -> Volume:
    grid = read_grid(path)
    if not isinstance(grid, Volume):
        raise ConfigError(f"'{path}' holds a sinogram, expected a volume")
    if grid.data.shape != tuple(geom.volume_shape):
        raise ConfigError(
            f"volume shape {grid.data.shape} does not match config {geom.volume_shape}"
        )
    return grid


def cmd_phantom(cfg, out_path) -> int:
    if cfg.geometry_kind == "cone3d":
        vol = shepp_logan_3d(cfg.volume_shape, cfg.volume_spacing)
    else:
        vol = shepp_logan_2d(cfg.volume_shape, cfg.volume_spacing)
    write_grid(vol, out_path)
    log.info("wrote phantom %s -> %s", vol.shape, out_path)
    return EXIT_OK


def cmd_project(cfg, volume_path, out_path) -> int:
    geom = cfg.build_geometry()
    vol = _read_volume(volume_path, geom)
    sino = forward_project(vol, geom, cfg.sampling())
    write_grid(sino, out_path)
    log.info("projected %s views -> %s", geom.n_projections, out_path)
    return EXIT_OK


def cmd_filter(cfg, sino_path, out_path) -> int:
    geom = cfg.build_geometry()
    sino = _read_sinogram(sino_path, geom)
    write_grid(filter_stage(sino, geom, cfg.filter_kind), out_path)
    return EXIT_OK


def cmd_backproject(cfg, sino_path, out_path) -> int:
    geom = cfg.build_geometry()
    sino = _read_sinogram(sino_path, geom)
    write_grid(backproject_stage(sino, geom), out_path)
    return EXIT_OK


def cmd_fbp(cfg, sino_path, out_path) -> int:
    geom = cfg.build_geometry()
    sino = _read_sinogram(sino_path, geom)
    if isinstance(geom, GeometryCone3D):
        vol = fdk_cone_3d(sino, geom, cfg.filter_kind)
    elif isinstance(geom, GeometryFan2D):
        vol = fbp_fan_2d(sino, geom, cfg.filter_kind)
    else:
        vol = fbp_parallel_2d(sino, geom, cfg.filter_kind)
    write_grid(vol, out_path)
    return EXIT_OK


def cmd_simulate(cfg, sino_path, out_path) -> int:
    geom = cfg.build_geometry()
    sino = _read_sinogram(sino_path, geom)
    write_grid(cfg.apply_artifacts(sino, geom), out_path)
    return EXIT_OK


def cmd_trajectory(cfg, out_path) -> int:
    geom = cfg.build_geometry()
    if not isinstance(geom, GeometryCone3D):
        raise ConfigError("trajectory export requires geometry_kind 'cone3d'")
    save_projection_matrices(geom.matrices, out_path)
    log.info("wrote %d projection matrices -> %s", geom.n_projections, out_path)
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tomokit",
        description="Tomography pipelines driven by a JSON config.",
    )
    parser.add_argument("--config", required=True, help="pipeline config (JSON)")
    parser.add_argument("--threads", type=int, default=None, help="worker thread count")
    parser.add_argument("--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("phantom", help="write the Shepp-Logan phantom")
    p.add_argument("out")
    p = sub.add_parser("project", help="forward-project a volume")
    p.add_argument("volume")
    p.add_argument("out")
    for name, help_text in (
        ("filter", "pre-weight and filter a sinogram"),
        ("backproject", "backproject a (filtered) sinogram"),
        ("fbp", "full filtered-backprojection reconstruction"),
        ("simulate", "apply the configured artifact chain"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("sinogram")
        p.add_argument("out")
    p = sub.add_parser("trajectory", help="export projection matrices (JSON)")
    p.add_argument("out")
    return parser


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code not in (0, None) else EXIT_OK

    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    if args.threads is not None:
        if args.threads < 1:
            print("error: --threads must be >= 1", file=sys.stderr)
            return EXIT_INVALID
        import numba

        numba.set_num_threads(min(args.threads, numba.config.NUMBA_NUM_THREADS))

    try:
        cfg = load_config(args.config)
        if args.command == "phantom":
            return cmd_phantom(cfg, args.out)
        if args.command == "project":
            return cmd_project(cfg, args.volume, args.out)
        if args.command == "filter":
            return cmd_filter(cfg, args.sinogram, args.out)
        if args.command == "backproject":
            return cmd_backproject(cfg, args.sinogram, args.out)
        if args.command == "fbp":
            return cmd_fbp(cfg, args.sinogram, args.out)
        if args.command == "simulate":
            return cmd_simulate(cfg, args.sinogram, args.out)
        if args.command == "trajectory":
            return cmd_trajectory(cfg, args.out)
        raise ConfigError(f"unknown command '{args.command}'")
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ConfigError, GridFormatError, ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
