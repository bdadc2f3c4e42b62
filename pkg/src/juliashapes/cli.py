"""Command-line pipeline: validate -> solve -> sample -> build -> render -> report.

Exit codes: 0 success, 1 validation/configuration failure, 2 numerical
failure, 3 I/O or parse failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numba

from . import document, dynamics, equilibrium, geometry, imageio, metrics, sampler
from .errors import ExhaustedScan, GridError, JuliaShapesError, NumericalError, ShapeError, TooFewRoots

log = logging.getLogger("juliashapes")

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL, EXIT_IO = 0, 1, 2, 3


@dataclass
class RunConfig:
    n: int = 200
    delta: float = 0.05
    nodes: int = 256
    grid: tuple = (512, 512)
    viewport: tuple = None
    max_iter: int = dynamics.DEFAULT_MAX_ITER
    out: str = "out"
    threads: int = None
    deltas: list = field(default_factory=lambda: [0.02, 0.05])
    ns: list = field(default_factory=lambda: [100, 200, 400, 800])
    eps: float = None
    color: bool = False

    def check(self):
        if self.n < 1:
            raise ConfigError(f"--n must be positive, got {self.n}")
        if not self.delta > 0 or not all(d > 0 for d in self.deltas):
            raise ConfigError("delta values must be positive")
        if self.nodes < 16 or self.nodes % 2:
            raise ConfigError(f"--nodes must be an even integer >= 16, got {self.nodes}")
        if self.max_iter < 1:
            raise ConfigError("--max-iter must be positive")
        if min(self.grid) < 2:
            raise ConfigError("grid must be at least 2x2")


class ConfigError(JuliaShapesError):
    pass


def _parse_grid(text):
    parts = str(text).lower().split("x")
    if len(parts) == 1:
        parts = parts * 2
    try:
        w, h = (int(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must look like WxH, got {text!r}") from None
    return (w, h)


def _parse_floats(text, count=None):
    try:
        values = [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if count is not None and len(values) != count:
        raise argparse.ArgumentTypeError(f"expected {count} numbers, got {text!r}")
    return values


def _parse_ints(text):
    try:
        return [int(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


class _Parser(argparse.ArgumentParser):
    """Usage errors are parse failures and share their exit code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_IO, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--shape", required=True, help="shape document (JSON)")
    common.add_argument("--config", help="optional JSON file of RunConfig values; flags override it")
    common.add_argument("--nodes", type=int, help="boundary nodes per curve for the equilibrium solve")
    common.add_argument("--out", help="output directory")
    common.add_argument("-v", "--verbose", action="store_true")

    poly = _Parser(add_help=False)
    poly.add_argument("--n", type=int, help="number of roots")
    poly.add_argument("--delta", type=float, help="shrink parameter delta > 0")

    render = _Parser(add_help=False)
    render.add_argument("--grid", type=_parse_grid, help="pixels, WxH")
    render.add_argument("--viewport", type=lambda s: tuple(_parse_floats(s, 4)), help="x0,y0,x1,y1; write --viewport=-2,-2,2,2 when it starts with a minus")
    render.add_argument("--max-iter", dest="max_iter", type=int)
    render.add_argument("--threads", type=int, help="worker threads for pixel classification")

    parser = _Parser(prog="juliashapes", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("validate", parents=[common], help="check a shape document")
    sub.add_parser("solve", parents=[common], help="equilibrium measure and Robin's constant")
    sub.add_parser("build", parents=[common, poly], help="write roots.csv and poly.csv")
    p = sub.add_parser("render", parents=[common, poly, render], help="images and Hausdorff report")
    p.add_argument("--color", action="store_true", default=None, help="also write iterations.ppm")
    p = sub.add_parser("study", parents=[common, render], help="(delta, n) convergence study")
    p.add_argument("--deltas", type=_parse_floats)
    p.add_argument("--ns", type=_parse_ints)
    p.add_argument("--eps", type=float, help="stop at the first (delta, n) with all distances < eps")
    return parser


def resolve_config(args) -> RunConfig:
    values = {}
    if args.config:
        with open(args.config) as fh:
            raw = json.load(fh)
        unknown = set(raw) - set(RunConfig.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        values.update(raw)
        if "grid" in values:
            values["grid"] = _parse_grid(values["grid"]) if isinstance(values["grid"], str) else tuple(values["grid"])
        if values.get("viewport") is not None:
            values["viewport"] = tuple(values["viewport"])
    for key in RunConfig.__dataclass_fields__:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    config = RunConfig(**values)
    config.check()
    return config


def _out_dir(config) -> Path:
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_valid(path) -> geometry.ShapeSet:
    shape = document.load_shape(path)
    problems = geometry.validate(shape)
    if problems:
        raise ValidationFailed(problems)
    return shape


class ValidationFailed(ShapeError):
    def __init__(self, violations):
        super().__init__("; ".join(str(v) for v in violations))
        self.violations = violations


def _set_threads(threads):
    if threads:
        numba.set_num_threads(max(1, min(int(threads), numba.config.NUMBA_NUM_THREADS)))


def cmd_validate(args, config) -> int:
    shape = document.load_shape(args.shape)
    problems = geometry.validate(shape)
    for v in problems:
        print(f"violation: {v}")
    if problems:
        return EXIT_INVALID
    print(f"ok: {len(shape.curves)} curve(s)")
    return EXIT_OK


def _solve(shape, config):
    normalized = geometry.normalize_origin(shape)
    return normalized, equilibrium.solve(normalized, config.nodes)


def cmd_solve(args, config) -> int:
    shape = _load_valid(args.shape)
    normalized, sol = _solve(shape, config)
    print(f"gamma {sol.robin_gamma:.12g}")
    print(f"capacity {equilibrium.capacity(sol):.12g}")
    for j, mass in enumerate(sol.per_curve_mass):
        print(f"mass[{j}] {mass:.12g}")
    print(f"condition {sol.condition:.3g}")
    if args.out:
        out = _out_dir(config)
        (out / "gamma.txt").write_text(f"{sol.robin_gamma!r}\n")
        equilibrium.write_density_csv(sol, out / "density.csv")
    return EXIT_OK


def _build(shape, config, n, delta):
    normalized, sol = _solve(shape, config)
    roots = sampler.sample_roots(sol, n)
    poly = dynamics.build_polynomial(roots, delta, sol.robin_gamma, normalized.translation_applied)
    return normalized, sol, roots, poly


def _write_build(out, shape, sol, roots, poly):
    (out / "shape.json").write_text(document.dump_shape(shape))
    (out / "gamma.txt").write_text(f"{sol.robin_gamma!r}\n")
    sampler.write_roots_csv(roots, out / "roots.csv")
    dynamics.write_polynomial_csv(poly, out / "poly.csv")


def cmd_build(args, config) -> int:
    shape = _load_valid(args.shape)
    normalized, sol, roots, poly = _build(shape, config, config.n, config.delta)
    out = _out_dir(config)
    _write_build(out, shape, sol, roots, poly)
    conj = dynamics.conjugated_output(poly)
    print(f"n {poly.n} delta {poly.delta!r} gamma {poly.gamma!r} log_scale {poly.log_scale!r}")
    print(f"translation_offset {poly.translation_offset} fixed_point {conj.fixed_point}")
    print(f"max_arc_mass_deviation {roots.max_arc_mass_deviation:.3g}")
    return EXIT_OK


def _grid_for(config, normalized, radius) -> metrics.Grid:
    width, height = config.grid
    if config.viewport is None:
        if width != height:
            raise ConfigError("a non-square --grid needs an explicit --viewport")
        return metrics.auto_grid(normalized, radius, width)
    try:
        return metrics.Grid(*config.viewport, width, height)
    except GridError as exc:
        raise ConfigError(str(exc)) from None


def _dump_json(path, data):
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def cmd_render(args, config) -> int:
    _set_threads(config.threads)
    shape = _load_valid(args.shape)
    t0 = time.perf_counter()
    normalized, sol, roots, poly = _build(shape, config, config.n, config.delta)
    build_time = time.perf_counter() - t0
    grid = _grid_for(config, normalized, dynamics.escape_radius(poly))
    t0 = time.perf_counter()
    target = metrics.rasterize_target(shape, grid)
    raster_time = time.perf_counter() - t0
    t0 = time.perf_counter()
    computed = metrics.classify_grid(poly, grid, config.max_iter)
    classify_time = time.perf_counter() - t0
    t0 = time.perf_counter()
    report = metrics.compare(target, computed, grid, poly, config.max_iter)
    report.runtimes = {
        "build": build_time,
        "rasterize_target": raster_time,
        "classify": classify_time,
        "distances": time.perf_counter() - t0,
    }
    out = _out_dir(config)
    _write_build(out, shape, sol, roots, poly)
    imageio.write_pgm(out / "filled.pgm", computed.inside)
    imageio.write_pgm(out / "julia.pgm", metrics.extract_boundary(computed))
    imageio.write_pgm(out / "target.pgm", target.inside)
    if config.color:
        imageio.write_ppm(out / "iterations.ppm", imageio.escape_colors(computed.counts, config.max_iter))
    # runtimes vary run to run; report.json must stay byte-identical
    _dump_json(out / "report.json", report.to_dict(include_runtimes=False))
    _dump_json(out / "timings.json", report.runtimes)
    print(
        f"d_filled {report.d_filled:.6g} d_boundary {report.d_boundary:.6g} "
        f"d_complement_chordal {report.d_complement_chordal:.6g} (cell diagonal {grid.diagonal:.3g})"
    )
    return EXIT_OK


STUDY_COLUMNS = ["delta", "n", "d_filled", "d_boundary", "d_complement_chordal", "cell_diagonal", "max_iter"]


def cmd_study(args, config) -> int:
    _set_threads(config.threads)
    shape = _load_valid(args.shape)
    normalized, sol = _solve(shape, config)
    for n in config.ns:
        if n < len(shape.curves):
            raise TooFewRoots(f"n = {n} is smaller than the number of curves")
    radius = metrics.escape_radius_bound(sol, config.ns, config.deltas)
    grid = _grid_for(config, normalized, radius)
    out = _out_dir(config)
    if config.eps is not None:
        try:
            report = metrics.find_parameters(shape, config.deltas, config.ns, grid, config.eps, config.max_iter, config.nodes)
        except ExhaustedScan as exc:
            print(f"scan exhausted: {exc}")
            return EXIT_NUMERICAL
        _dump_json(out / "found.json", report.to_dict(include_runtimes=False))
        print(f"found delta {report.delta} n {report.n}: {report.distances()}")
        return EXIT_OK
    study = metrics.convergence_study(shape, config.deltas, config.ns, grid, config.max_iter, config.nodes, sol)
    with open(out / "study.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(STUDY_COLUMNS)
        for r in study.reports:
            writer.writerow([repr(r.delta), r.n, repr(r.d_filled), repr(r.d_boundary), repr(r.d_complement_chordal), repr(r.cell_diagonal), r.max_iter])
    _dump_json(out / "study.json", {
        "reports": [r.to_dict(include_runtimes=False) for r in study.reports],
        "trends": study.trends,
    })
    _dump_json(out / "timings.json", [r.runtimes for r in study.reports])
    for r in study.reports:
        print(f"delta {r.delta:<6g} n {r.n:<6d} " + " ".join(f"{d:.4f}" for d in r.distances()))
    return EXIT_OK


COMMANDS = {
    "validate": cmd_validate,
    "solve": cmd_solve,
    "build": cmd_build,
    "render": cmd_render,
    "study": cmd_study,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        config = resolve_config(args)
        return COMMANDS[args.command](args, config)
    except (ValidationFailed, ShapeError, GridError, ConfigError, TooFewRoots) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (document.DocumentError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except JuliaShapesError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
