"""Batch front-end: flat key-value configs, command dispatch, artifacts.

Every command reads one config file, writes its artifacts plus a report.txt
with norms, built-in check results, and a checksum line per artifact.  Exit
status is 0 on success, 1 on configuration problems, 2 when the transport
solve refuses or fails to converge.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import formats
from .coefficients import AbsorptionField, ScatteringKernel
from .geometry import CutoffSpec, DiskGeometry, Grid, visible_mask
from .phantoms import ConstantPhantom, DiskPhantom, GaussianPhantom, rasterize
from .tomography import (
    normal_operator_full,
    svd_injectivity,
    symbol_field,
    smoothing_diagnostic,
    wavefront_image,
)
from .transport import NonConvergenceError, TransportSolver, apply_J

COMMANDS = ("forward", "measure", "normal", "visible-set", "symbol", "svd",
            "wavefront", "smoothing")


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    radius_inner: float = 1.0
    radius_outer: float = 1.2
    nx: int = 64
    ny: int = 64
    n_theta: int = 64
    n_bdry: int = 256
    absorption_preset: str = "zero"
    absorption_value: float = 0.5
    absorption_amplitude: float = 0.5
    absorption_center_x: float = 0.0
    absorption_center_y: float = 0.0
    absorption_width: float = 0.25
    absorption_base: float = 0.5
    absorption_order: int = 1
    absorption_path: str = ""
    scattering_preset: str = "zero"
    scattering_total: float = 0.3
    scattering_g: float = 0.5
    scattering_n_modes: int = 3
    cutoff_preset: str = "full"
    cutoff_arcs: str = ""
    cutoff_cones: str = ""
    cutoff_transition_width: float = 0.0
    solver_tol: float = 1e-10
    solver_max_iter: int = 200
    solver_h_ray: float = 0.0
    source_preset: str = "disk"
    source_center_x: float = 0.0
    source_center_y: float = 0.0
    source_radius: float = 0.5
    source_value: float = 1.0
    source_width: float = 0.2
    source_amplitude: float = 1.0
    source_path: str = ""
    output_dir: str = "out"
    seed: int = 0
    symbol_n_xi: int = 32
    wavefront_n_edge: int = 96


_SCHEMA = {
    "geometry.R": ("radius_inner", float),
    "geometry.R1": ("radius_outer", float),
    "grid.nx": ("nx", int),
    "grid.ny": ("ny", int),
    "grid.n_theta": ("n_theta", int),
    "grid.n_bdry": ("n_bdry", int),
    "absorption.preset": ("absorption_preset", str),
    "absorption.value": ("absorption_value", float),
    "absorption.amplitude": ("absorption_amplitude", float),
    "absorption.center_x": ("absorption_center_x", float),
    "absorption.center_y": ("absorption_center_y", float),
    "absorption.width": ("absorption_width", float),
    "absorption.base": ("absorption_base", float),
    "absorption.order": ("absorption_order", int),
    "absorption.path": ("absorption_path", str),
    "scattering.preset": ("scattering_preset", str),
    "scattering.total": ("scattering_total", float),
    "scattering.g": ("scattering_g", float),
    "scattering.n_modes": ("scattering_n_modes", int),
    "cutoff.preset": ("cutoff_preset", str),
    "cutoff.arcs": ("cutoff_arcs", str),
    "cutoff.cones": ("cutoff_cones", str),
    "cutoff.transition_width": ("cutoff_transition_width", float),
    "solver.tol": ("solver_tol", float),
    "solver.max_iter": ("solver_max_iter", int),
    "solver.h_ray": ("solver_h_ray", float),
    "source.preset": ("source_preset", str),
    "source.center_x": ("source_center_x", float),
    "source.center_y": ("source_center_y", float),
    "source.radius": ("source_radius", float),
    "source.value": ("source_value", float),
    "source.width": ("source_width", float),
    "source.amplitude": ("source_amplitude", float),
    "source.path": ("source_path", str),
    "output.dir": ("output_dir", str),
    "run.seed": ("seed", int),
    "symbol.n_xi": ("symbol_n_xi", int),
    "wavefront.n_edge": ("wavefront_n_edge", int),
}


def parse_config(text):
    """Parse and validate a flat `section.key = value` document.

    Unknown and duplicate keys, malformed lines, and bad values are all
    rejected with their line number.
    """
    cfg = RunConfig()
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, eq, value = line.partition("=")
        if not eq:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key = key.strip()
        value = value.strip()
        if key not in _SCHEMA:
            raise ConfigError(f"line {lineno}: unknown key '{key}'")
        if key in seen:
            raise ConfigError(f"line {lineno}: duplicate key '{key}'")
        seen.add(key)
        attr, conv = _SCHEMA[key]
        try:
            setattr(cfg, attr, conv(value))
        except ValueError:
            raise ConfigError(
                f"line {lineno}: cannot parse '{value}' as {conv.__name__} "
                f"for '{key}'") from None
    _validate(cfg)
    return cfg


def _validate(cfg):
    if not cfg.radius_inner < cfg.radius_outer:
        raise ConfigError(
            f"R < R1 violated: R = {cfg.radius_inner:g}, R1 = {cfg.radius_outer:g}")
    if cfg.radius_inner <= 0.0:
        raise ConfigError("geometry.R must be positive")
    for name in ("nx", "ny", "n_theta", "n_bdry", "symbol_n_xi", "wavefront_n_edge"):
        if getattr(cfg, name) < 8:
            raise ConfigError(f"count '{name}' must be at least 8")
    if not 0.0 < cfg.solver_tol <= 1e-2:
        raise ConfigError("solver.tol must lie in (0, 1e-2]")
    if cfg.solver_max_iter < 1:
        raise ConfigError("solver.max_iter must be at least 1")
    if cfg.solver_h_ray < 0.0:
        raise ConfigError("solver.h_ray must be nonnegative (0 selects the default)")
    if cfg.cutoff_transition_width < 0.0:
        raise ConfigError("cutoff.transition_width must be nonnegative")


# ---------------------------------------------------------------------------
# object construction from a validated config
# ---------------------------------------------------------------------------


def build_geometry(cfg):
    return DiskGeometry(radius_inner=cfg.radius_inner, radius_outer=cfg.radius_outer)


def build_grid(cfg):
    return Grid(nx=cfg.nx, ny=cfg.ny, half_width=cfg.radius_outer)


def build_absorption(cfg, grid, geom):
    preset = cfg.absorption_preset
    if preset == "zero":
        return AbsorptionField.zero(grid)
    if preset == "constant":
        return AbsorptionField.constant(grid, geom, cfg.absorption_value)
    if preset == "gaussian":
        return AbsorptionField.gaussian(
            grid, geom, cfg.absorption_amplitude,
            center=(cfg.absorption_center_x, cfg.absorption_center_y),
            width=cfg.absorption_width)
    if preset == "cosine":
        return AbsorptionField.cosine_anisotropic(
            grid, geom, cfg.absorption_base, cfg.absorption_amplitude,
            order=cfg.absorption_order)
    if preset == "csv":
        raster, _ = formats.read_grid_csv(_existing_path(cfg.absorption_path))
        if raster.shape != (grid.ny, grid.nx):
            raise ConfigError("absorption CSV shape does not match grid.nx/ny")
        return AbsorptionField.from_raster(grid, geom, raster)
    raise ConfigError(f"unknown absorption preset '{preset}'")


def build_scattering(cfg, grid, geom):
    preset = cfg.scattering_preset
    if preset == "zero":
        return ScatteringKernel.zero(grid)
    if preset == "isotropic":
        return ScatteringKernel.isotropic(grid, geom, cfg.scattering_total)
    if preset == "henyey-greenstein":
        return ScatteringKernel.henyey_greenstein(
            grid, geom, cfg.scattering_total, cfg.scattering_g,
            n_modes=cfg.scattering_n_modes)
    raise ConfigError(f"unknown scattering preset '{preset}'")


def _parse_float_list(text, what):
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        try:
            out.append(float(tok))
        except ValueError:
            raise ConfigError(f"cannot parse {what} entry '{tok}'") from None
    return out


def build_cutoff(cfg):
    preset = cfg.cutoff_preset
    if preset == "full":
        return CutoffSpec.full_data()
    if preset == "empty":
        return CutoffSpec.empty()
    if preset != "arcs":
        raise ConfigError(f"unknown cutoff preset '{preset}'")
    arcs = []
    for tok in cfg.cutoff_arcs.split(","):
        tok = tok.strip()
        if not tok:
            continue
        lo, sep, hi = tok.partition(":")
        if not sep:
            raise ConfigError(f"cutoff arc '{tok}' must look like 'start:end'")
        try:
            arcs.append((float(lo), float(hi)))
        except ValueError:
            raise ConfigError(f"cannot parse cutoff arc '{tok}'") from None
    if not arcs:
        raise ConfigError("cutoff.preset = arcs requires cutoff.arcs")
    cones = _parse_float_list(cfg.cutoff_cones, "cutoff.cones") or None
    try:
        return CutoffSpec.from_arcs(arcs, cones=cones,
                                    transition_width=cfg.cutoff_transition_width)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def build_source(cfg, grid, geom):
    """Returns (raster, phantom); the phantom is None for raster sources."""
    preset = cfg.source_preset
    if preset == "disk":
        c = (cfg.source_center_x, cfg.source_center_y)
        if math.hypot(*c) + cfg.source_radius > geom.radius_inner:
            raise ConfigError("disk source reaches outside the source region")
        phantom = DiskPhantom(center=c, radius=cfg.source_radius,
                              value=cfg.source_value)
        return rasterize(phantom, grid, geom), phantom
    if preset == "constant":
        if cfg.source_radius > geom.radius_inner:
            raise ConfigError("constant source reaches outside the source region")
        phantom = ConstantPhantom(radius=cfg.source_radius, value=cfg.source_value)
        return rasterize(phantom, grid, geom), phantom
    if preset == "gaussian":
        phantom = GaussianPhantom(center=(cfg.source_center_x, cfg.source_center_y),
                                  width=cfg.source_width,
                                  amplitude=cfg.source_amplitude)
        return rasterize(phantom, grid, geom), None
    if preset == "csv":
        raster, _ = formats.read_grid_csv(_existing_path(cfg.source_path))
        if raster.shape != (grid.ny, grid.nx):
            raise ConfigError("source CSV shape does not match grid.nx/ny")
        return raster * grid.disk_mask(geom.radius_inner), None
    raise ConfigError(f"unknown source preset '{preset}'")


def _existing_path(text):
    if not text:
        raise ConfigError("a file path is required but empty")
    path = Path(text)
    if not path.is_file():
        raise ConfigError(f"file not found: {text}")
    return path


def _h_ray(cfg):
    return cfg.solver_h_ray if cfg.solver_h_ray > 0.0 else None


def _make_solver(cfg, sigma=None, kernel=None):
    geom = build_geometry(cfg)
    grid = build_grid(cfg)
    sigma = sigma if sigma is not None else build_absorption(cfg, grid, geom)
    kernel = kernel if kernel is not None else build_scattering(cfg, grid, geom)
    return TransportSolver(geom=geom, grid=grid, sigma=sigma, kernel=kernel,
                           n_theta=cfg.n_theta, n_bdry=cfg.n_bdry,
                           h_ray=_h_ray(cfg), tol=cfg.solver_tol,
                           max_iter=cfg.solver_max_iter)


# ---------------------------------------------------------------------------
# report plumbing
# ---------------------------------------------------------------------------


class Report:
    def __init__(self, out_dir, command, config_path):
        self.out = Path(out_dir)
        self.out.mkdir(parents=True, exist_ok=True)
        self.lines = [f"command = {command}", f"config = {config_path}"]
        self.artifacts = []

    def line(self, text):
        self.lines.append(text)

    def value(self, name, val):
        if isinstance(val, float):
            self.lines.append(f"{name} = {formats.fmt(val)}")
        else:
            self.lines.append(f"{name} = {val}")

    def check(self, name, ok):
        self.lines.append(f"check {name} = {'PASS' if ok else 'FAIL'}")

    def artifact(self, name):
        path = self.out / name
        self.artifacts.append(path)
        return path

    def solve_report(self, rep):
        self.value("iterations", rep.iterations)
        self.value("converged", rep.converged)
        self.value("spectral_radius_estimate", rep.spectral_radius_estimate)
        for i, res in enumerate(rep.residual_history):
            self.value(f"residual[{i}]", res)

    def write(self):
        path = self.out / "report.txt"
        with open(path, "w", newline="\n") as fh:
            for line in self.lines:
                fh.write(line + "\n")
            for art in self.artifacts:
                extras = [art]
                meta = Path(str(art) + ".meta")
                if meta.exists():
                    extras.append(meta)
                for p in extras:
                    fh.write(f"artifact {p.name} sha256 {formats.sha256_file(p)}\n")
        return path


def _raster_norm(raster, grid):
    return math.sqrt(grid.pixel_area * float(np.sum(np.asarray(raster) ** 2)))


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _cmd_forward(cfg, rep):
    solver = _make_solver(cfg)
    geom, grid = solver.geom, solver.grid
    raster, phantom = build_source(cfg, grid, geom)
    field, srep = solver.solve(f=None if phantom is not None else raster,
                               phantom=phantom)
    rep.solve_report(srep)
    rep.value("field_phase_norm", field.norm())
    scatter = field.source_scatter[..., None] if field.source_scatter is not None else None
    src = field.source_f
    if isinstance(src, np.ndarray):
        src = src.reshape(-1, 1)
    trace = solver.trace_phase(scatter, src)[..., 0]
    from .transport import BoundaryData
    bd = BoundaryData(bgrid=solver.bgrid, values=trace)
    rep.value("trace_norm", bd.norm())
    rep.check("trace_zero_on_incoming",
              bool(np.all(bd.values[~solver.bgrid.outgoing] == 0.0)))
    formats.write_pgm(rep.artifact("field_mean.pgm"), field.values.mean(axis=0))
    formats.write_boundary_csv(rep.artifact("trace.csv"), bd)
    return 0


def _cmd_measure(cfg, rep):
    solver = _make_solver(cfg)
    raster, phantom = build_source(cfg, solver.grid, solver.geom)
    spec = build_cutoff(cfg)
    bd, srep = solver.measurement(spec, f=None if phantom is not None else raster,
                                  phantom=phantom)
    rep.solve_report(srep)
    rep.value("measurement_norm", bd.norm())
    rep.check("measurement_zero_on_incoming",
              bool(np.all(bd.values[~solver.bgrid.outgoing] == 0.0)))
    formats.write_boundary_csv(rep.artifact("measurement.csv"), bd)
    return 0


def _cmd_normal(cfg, rep):
    solver = _make_solver(cfg)
    raster, _ = build_source(cfg, solver.grid, solver.geom)
    spec = build_cutoff(cfg)
    image = normal_operator_full(spec, solver.sigma, solver.kernel, solver.geom,
                                 raster, solver=solver)
    remainder = _raster_norm(image.scattering_remainder, solver.grid)
    rep.value("normal_image_norm", _raster_norm(image.values, solver.grid))
    rep.line(f"L_V remainder norm = {formats.fmt(remainder)}")
    if solver.kernel.is_zero:
        rep.check("remainder_vanishes_without_scattering", remainder <= 1e-14)
    formats.write_grid_csv(rep.artifact("normal.csv"), image.values,
                           cfg.radius_outer)
    formats.write_pgm(rep.artifact("normal.pgm"), image.values)
    formats.write_pgm(rep.artifact("gradient.pgm"), image.gradient_magnitude)
    return 0


def _cmd_visible_set(cfg, rep):
    geom = build_geometry(cfg)
    grid = build_grid(cfg)
    spec = build_cutoff(cfg)
    mask = visible_mask(spec, geom, grid, n_theta=cfg.n_theta)
    omega = grid.disk_mask(geom.radius_inner)
    rep.value("visible_pixels", int(mask.count))
    rep.value("source_region_pixels", int(omega.sum()))
    rep.check("visible_inside_source_region",
              bool(np.all(~mask.visible | omega)))
    formats.write_pgm(rep.artifact("visible.pgm"), mask.visible.astype(float))
    return 0


def _cmd_symbol(cfg, rep):
    geom = build_geometry(cfg)
    grid = build_grid(cfg)
    spec = build_cutoff(cfg)
    sigma = build_absorption(cfg, grid, geom)
    field = symbol_field(spec, sigma, geom, grid, n_xi=cfg.symbol_n_xi)
    bmin = field.values.min(axis=0)
    rep.value("symbol_min", float(field.values.min()))
    rep.value("symbol_max", float(field.values.max()))
    rep.check("symbol_nonnegative", bool(np.all(field.values >= 0.0)))
    formats.write_grid_csv(rep.artifact("symbol_min.csv"), bmin, cfg.radius_outer)
    formats.write_pgm(rep.artifact("symbol_min.pgm"), bmin)
    return 0


def _cmd_svd(cfg, rep):
    solver = _make_solver(cfg)
    spec = build_cutoff(cfg)
    mask = visible_mask(spec, solver.geom, solver.grid,
                        n_theta=max(cfg.n_theta, 8))
    sv, si, op_vis = svd_injectivity(spec, solver.sigma, solver.kernel,
                                     solver.geom, mask, n_bdry=cfg.n_bdry,
                                     n_theta=cfg.n_theta, solver=solver,
                                     return_operator=True)
    rep.value("sigma_min_visible", sv)
    rep.value("sigma_min_invisible", si)
    rep.value("ratio", sv / max(si, 1e-14))
    rng = np.random.default_rng(cfg.seed)
    fvec = rng.standard_normal(op_vis.cols)
    hvec = rng.standard_normal(op_vis.rows)
    lhs = float(np.sum(op_vis.apply(fvec) * hvec * op_vis.row_weights))
    rhs = float(np.sum(fvec * op_vis.apply_adjoint(hvec) * op_vis.col_weights))
    scale = max(abs(lhs), abs(rhs), 1e-300)
    rep.check("weighted_adjoint_identity", abs(lhs - rhs) <= 1e-12 * scale)
    formats.write_operator(rep.artifact("operator_visible.rteop"), op_vis)
    return 0


def _cmd_wavefront(cfg, rep):
    solver = _make_solver(cfg)
    raster, phantom = build_source(cfg, solver.grid, solver.geom)
    if phantom is None:
        raise ConfigError("wavefront requires a piecewise-constant source preset")
    spec = build_cutoff(cfg)
    image, edges = wavefront_image(spec, solver.sigma, solver.kernel,
                                   solver.geom, phantom,
                                   n_edge=cfg.wavefront_n_edge, solver=solver)
    rep.value("edges_total", len(edges.strengths))
    rep.value("edges_visible", int(edges.visible.sum()))
    rep.value("median_visible_strength", edges.median_visible)
    rep.value("max_invisible_strength", edges.max_invisible)
    rep.value("response_ratio", edges.response_ratio)
    rep.check("edge_strengths_finite",
              bool(np.all(np.isfinite(edges.strengths))))
    formats.write_grid_csv(rep.artifact("wavefront.csv"), image.values,
                           cfg.radius_outer)
    formats.write_pgm(rep.artifact("wavefront.pgm"), image.values)
    formats.write_pgm(rep.artifact("gradient.pgm"), image.gradient_magnitude)
    return 0


def _cmd_smoothing(cfg, rep):
    solver = _make_solver(cfg)
    grid, geom = solver.grid, solver.geom
    rng = np.random.default_rng(cfg.seed)
    noise = rng.standard_normal((grid.ny, grid.nx))
    noise *= grid.disk_mask(geom.radius_inner)
    rough = apply_J(noise, grid, n_theta=cfg.n_theta)
    before, after = smoothing_diagnostic(solver.sigma, solver.kernel, geom,
                                         rough, solver=solver)
    rep.value("high_freq_fraction_before", before)
    rep.value("high_freq_fraction_after", after)
    if not solver.kernel.is_zero:
        rep.check("smoothing_reduces_high_frequencies", after < before)
    return 0


_DISPATCH = {
    "forward": _cmd_forward,
    "measure": _cmd_measure,
    "normal": _cmd_normal,
    "visible-set": _cmd_visible_set,
    "symbol": _cmd_symbol,
    "svd": _cmd_svd,
    "wavefront": _cmd_wavefront,
    "smoothing": _cmd_smoothing,
}


def run_command(command, cfg, config_path="<config>"):
    """Dispatch one command; returns the process exit status."""
    if command not in _DISPATCH:
        raise ConfigError(f"unknown command '{command}'")
    rep = Report(cfg.output_dir, command, config_path)
    try:
        status = _DISPATCH[command](cfg, rep)
    except NonConvergenceError as exc:
        rep.value("converged", False)
        rep.value("spectral_radius_estimate",
                  exc.report.spectral_radius_estimate)
        rep.line(f"error = {exc}")
        rep.write()
        print(f"solver did not converge: {exc}", file=sys.stderr)
        return 2
    rep.write()
    return status


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _apply_thread_cap():
    cap = os.environ.get("RTE_TOMO_THREADS", "").strip()
    if not cap or cap == "0":
        return
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ[var] = cap


def main(argv=None):
    parser = _Parser(prog="rte-tomo",
                     description="Transport tomography batch commands")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="path to a config file")
    parser.add_argument("--out", help="output directory (overrides output.dir)")
    try:
        args = parser.parse_args(argv)
        _apply_thread_cap()
        try:
            text = Path(args.config).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        cfg = parse_config(text)
        if args.out:
            cfg.output_dir = args.out
        return run_command(args.command, cfg, config_path=args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
