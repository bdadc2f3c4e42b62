"""Rasterization, boundary extraction and Hausdorff distances between E and K(P)."""
from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field

import numba
import numpy as np
from scipy import ndimage

from . import dynamics, equilibrium, sampler
from .errors import EmptyMask, ExhaustedScan, GridError
from .geometry import ShapeSet, classify_points, normalize_origin


@dataclass(frozen=True)
class Grid:
    """Viewport [x0, x1] x [y0, y1] split into width x height square pixels.

    Pixel (row, col) has center x0 + (col + 1/2) h, y1 - (row + 1/2) h, so row 0
    is the top of rendered images.
    """

    x0: float
    y0: float
    x1: float
    y1: float
    width: int
    height: int

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise GridError("grid needs at least one pixel in each direction")
        if not (self.x1 > self.x0 and self.y1 > self.y0):
            raise GridError(f"empty viewport {self.viewport}")
        hx = (self.x1 - self.x0) / self.width
        hy = (self.y1 - self.y0) / self.height
        if abs(hx - hy) > 1e-9 * max(hx, hy):
            raise GridError(f"pixels are not square ({hx:g} x {hy:g})")

    @classmethod
    def square(cls, center: complex, half_width: float, pixels: int) -> "Grid":
        c = complex(center)
        return cls(c.real - half_width, c.imag - half_width, c.real + half_width, c.imag + half_width, pixels, pixels)

    @property
    def viewport(self):
        return (self.x0, self.y0, self.x1, self.y1)

    @property
    def cell(self) -> float:
        return (self.x1 - self.x0) / self.width

    @property
    def diagonal(self) -> float:
        return self.cell * math.sqrt(2.0)

    def centers(self) -> np.ndarray:
        h = self.cell
        x = self.x0 + (np.arange(self.width) + 0.5) * h
        y = self.y1 - (np.arange(self.height) + 0.5) * h
        return x[None, :] + 1j * y[:, None]

    def contains_disk(self, center: complex, radius: float) -> bool:
        c = complex(center)
        return (
            self.x0 < c.real - radius
            and c.real + radius < self.x1
            and self.y0 < c.imag - radius
            and c.imag + radius < self.y1
        )

    def to_dict(self) -> dict:
        return {"viewport": list(self.viewport), "width": self.width, "height": self.height}


@dataclass(frozen=True, eq=False)
class Classification:
    inside: np.ndarray
    counts: np.ndarray
    provenance: str
    flagged: np.ndarray = None


def rasterize_target(shape: ShapeSet, grid: Grid) -> Classification:
    """Ground-truth raster of E; pixels too close to the boundary are Outside and flagged."""
    x0, y0, x1, y1 = shape.bounding_box()
    if not (grid.x0 < x0 and x1 < grid.x1 and grid.y0 < y0 and y1 < grid.y1):
        raise GridError(f"viewport {grid.viewport} does not contain the shape")
    inside, ambiguous = classify_points(shape, grid.centers())
    return Classification(inside, np.zeros(inside.shape, dtype=np.int32), "target-shape", ambiguous)


def classify_grid(poly: dynamics.ShapedPolynomial, grid: Grid, max_iter: int = dynamics.DEFAULT_MAX_ITER) -> Classification:
    """Escape-time classification of pixel centers given in original coordinates."""
    radius = dynamics.escape_radius(poly)
    origin = -poly.translation_offset
    if not grid.contains_disk(origin, radius):
        raise GridError(
            f"viewport {grid.viewport} does not contain the escape disk |w - {origin}| <= {radius:.6g}"
        )
    counts = dynamics.escape_counts(poly, grid.centers() + poly.translation_offset, max_iter, radius)
    return Classification(counts == 0, counts, "polynomial-dynamics")


def extract_boundary(c) -> np.ndarray:
    """Inside pixels with an Outside 4-neighbor, plus Outside pixels with an Inside 4-neighbor."""
    inside = c.inside if isinstance(c, Classification) else np.asarray(c, dtype=bool)
    out = np.zeros(inside.shape, dtype=bool)
    diff_v = inside[1:, :] != inside[:-1, :]
    diff_h = inside[:, 1:] != inside[:, :-1]
    out[1:, :] |= diff_v
    out[:-1, :] |= diff_v
    out[:, 1:] |= diff_h
    out[:, :-1] |= diff_h
    return out


def distance_transform(mask: np.ndarray, grid: Grid, return_indices: bool = False):
    """Exact Euclidean distance from every pixel center to the nearest mask pixel center."""
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise EmptyMask("distance transform of an empty mask")
    return ndimage.distance_transform_edt(~mask, sampling=grid.cell, return_indices=return_indices)


def hausdorff_planar(a_mask: np.ndarray, b_mask: np.ndarray, grid: Grid) -> float:
    a_mask = np.asarray(a_mask, dtype=bool)
    b_mask = np.asarray(b_mask, dtype=bool)
    to_b = distance_transform(b_mask, grid)
    to_a = distance_transform(a_mask, grid)
    return float(max(to_b[a_mask].max(), to_a[b_mask].max()))


def chordal(z, w):
    """Chordal distance on the Riemann sphere; either argument may be infinite."""
    z = complex(z)
    w = complex(w)
    z_inf = math.isinf(z.real) or math.isinf(z.imag)
    w_inf = math.isinf(w.real) or math.isinf(w.imag)
    if z_inf and w_inf:
        return 0.0
    if z_inf:
        return 2.0 / math.sqrt(1.0 + abs(w) ** 2)
    if w_inf:
        return 2.0 / math.sqrt(1.0 + abs(z) ** 2)
    return 2.0 * abs(z - w) / math.sqrt((1.0 + abs(z) ** 2) * (1.0 + abs(w) ** 2))


@numba.njit(cache=True)
def _directed_chordal(rows, cols, near_r, near_c, b_mask, x0, y1, h):
    """max over listed pixels a of min(chordal(a, inf), min_{b in b_mask} chordal(a, b)).

    chordal(a, b) >= F(|a - b|) with F increasing, so only b within
    F^{-1}(current best) of a can improve on the Euclidean-nearest candidate.
    """
    height, width = b_mask.shape
    worst = 0.0
    for i in range(rows.shape[0]):
        ax = x0 + (cols[i] + 0.5) * h
        ay = y1 - (rows[i] + 0.5) * h
        a2 = ax * ax + ay * ay
        best = 2.0 / math.sqrt(1.0 + a2)
        if near_r[i] >= 0:
            bx = x0 + (near_c[i] + 0.5) * h
            by = y1 - (near_r[i] + 0.5) * h
            d = math.sqrt((ax - bx) ** 2 + (ay - by) ** 2)
            best = min(best, 2.0 * d / math.sqrt((1.0 + a2) * (1.0 + bx * bx + by * by)))
        k = best * best * (1.0 + a2) / 4.0
        if k >= 1.0:
            reach = (height + width) * h
        else:
            amod = math.sqrt(a2)
            reach = (k * amod + math.sqrt(k * k * a2 + (1.0 - k) * k * (1.0 + a2))) / (1.0 - k)
        span = int(reach / h) + 1
        r_lo = max(0, rows[i] - span)
        r_hi = min(height, rows[i] + span + 1)
        c_lo = max(0, cols[i] - span)
        c_hi = min(width, cols[i] + span + 1)
        for r in range(r_lo, r_hi):
            by = y1 - (r + 0.5) * h
            for c in range(c_lo, c_hi):
                if b_mask[r, c]:
                    bx = x0 + (c + 0.5) * h
                    d = math.sqrt((ax - bx) ** 2 + (ay - by) ** 2)
                    val = 2.0 * d / math.sqrt((1.0 + a2) * (1.0 + bx * bx + by * by))
                    if val < best:
                        best = val
        if best > worst:
            worst = best
    return worst


def _directed_complement(a_out: np.ndarray, b_out: np.ndarray, grid: Grid) -> float:
    only_a = a_out & ~b_out
    if not only_a.any():
        return 0.0
    rows, cols = np.nonzero(only_a)
    if b_out.any():
        _, (near_r, near_c) = distance_transform(b_out, grid, return_indices=True)
        nr, nc = near_r[rows, cols], near_c[rows, cols]
    else:
        nr = nc = np.full(rows.shape, -1)
    return float(
        _directed_chordal(
            rows.astype(np.int64), cols.astype(np.int64), nr.astype(np.int64), nc.astype(np.int64),
            np.ascontiguousarray(b_out), grid.x0, grid.y1, grid.cell,
        )
    )


def hausdorff_chordal_complement(target_c: Classification, computed_c: Classification, grid: Grid) -> float:
    """Chordal Hausdorff distance between the complements, each including infinity.

    Each complement is its viewport Outside pixels plus the point at infinity;
    beyond the viewport both complements agree and contribute nothing.
    """
    a_out = ~np.asarray(target_c.inside, dtype=bool)
    b_out = ~np.asarray(computed_c.inside, dtype=bool)
    return max(_directed_complement(a_out, b_out, grid), _directed_complement(b_out, a_out, grid))


@dataclass
class HausdorffReport:
    n: int
    delta: float
    max_iter: int
    grid: dict
    d_filled: float
    d_boundary: float
    d_complement_chordal: float
    cell_diagonal: float
    pixel_counts: dict
    translation_offset: list
    gamma: float
    runtimes: dict = field(default_factory=dict)

    def distances(self):
        return (self.d_filled, self.d_boundary, self.d_complement_chordal)

    def within(self, eps: float) -> bool:
        return all(d < eps for d in self.distances())

    def to_dict(self, include_runtimes: bool = True) -> dict:
        out = asdict(self)
        for key in ("d_filled", "d_boundary", "d_complement_chordal"):
            if math.isinf(out[key]):
                out[key] = None
        if not include_runtimes:
            out.pop("runtimes")
        return out


def _safe_hausdorff(a, b, grid):
    if not a.any() or not b.any():
        return 0.0 if (a.any() == b.any()) else math.inf
    return hausdorff_planar(a, b, grid)


def compare(target_c: Classification, computed_c: Classification, grid: Grid, poly, max_iter: int) -> HausdorffReport:
    target_edge = extract_boundary(target_c)
    computed_edge = extract_boundary(computed_c)
    off = complex(poly.translation_offset)
    return HausdorffReport(
        n=poly.n,
        delta=poly.delta,
        max_iter=int(max_iter),
        grid=grid.to_dict(),
        d_filled=_safe_hausdorff(target_c.inside, computed_c.inside, grid),
        d_boundary=_safe_hausdorff(target_edge, computed_edge, grid),
        d_complement_chordal=hausdorff_chordal_complement(target_c, computed_c, grid),
        cell_diagonal=grid.diagonal,
        pixel_counts={
            "target_inside": int(target_c.inside.sum()),
            "target_flagged": int(target_c.flagged.sum()) if target_c.flagged is not None else 0,
            "computed_inside": int(computed_c.inside.sum()),
            "target_boundary": int(target_edge.sum()),
            "computed_boundary": int(computed_edge.sum()),
        },
        translation_offset=[off.real, off.imag],
        gamma=poly.gamma,
    )


def escape_radius_bound(sol, n_list, delta_list) -> float:
    """Largest escape radius over a (delta, n) scan, computed from the exact root sets."""
    best = 0.0
    for n in n_list:
        roots = sampler.sample_roots(sol, n)
        for delta in delta_list:
            poly = dynamics.build_polynomial(roots, delta, sol.robin_gamma)
            best = max(best, dynamics.escape_radius(poly))
    return best


def auto_grid(shape: ShapeSet, radius: float, pixels: int, margin: float = 1.02) -> Grid:
    """Square viewport around the normalized origin containing E and the escape disk."""
    origin = -shape.translation_applied
    half = margin * max(radius, shape.max_radius())
    return Grid.square(origin, half, pixels)


@dataclass
class StudyResult:
    reports: list
    trends: dict


def iter_study(shape: ShapeSet, delta_list, n_list, grid: Grid, max_iter: int = dynamics.DEFAULT_MAX_ITER, m_per_curve: int = 256, sol=None):
    """Yield one HausdorffReport per (delta, n), deltas outermost."""
    if not delta_list or not n_list:
        raise ValueError("delta_list and n_list must be nonempty")
    original = shape.translated(-shape.translation_applied) if shape.translation_applied else shape
    normalized = normalize_origin(original)
    t0 = time.perf_counter()
    if sol is None:
        sol = equilibrium.solve(normalized, m_per_curve)
    solve_time = time.perf_counter() - t0
    t0 = time.perf_counter()
    target = rasterize_target(original, grid)
    raster_time = time.perf_counter() - t0
    samples = {}
    for delta in delta_list:
        for n in n_list:
            t0 = time.perf_counter()
            if n not in samples:
                samples[n] = sampler.sample_roots(sol, n)
            poly = dynamics.build_polynomial(samples[n], delta, sol.robin_gamma, normalized.translation_applied)
            sample_time = time.perf_counter() - t0
            t0 = time.perf_counter()
            computed = classify_grid(poly, grid, max_iter)
            classify_time = time.perf_counter() - t0
            t0 = time.perf_counter()
            report = compare(target, computed, grid, poly, max_iter)
            report.runtimes = {
                "solve": solve_time,
                "rasterize_target": raster_time,
                "sample": sample_time,
                "classify": classify_time,
                "distances": time.perf_counter() - t0,
            }
            yield report


def _trend(reports, tol):
    values = [r.d_boundary for r in reports]
    steps = all(b <= a + tol for a, b in zip(values, values[1:]))
    return {
        "n": [r.n for r in reports],
        "d_boundary": values,
        "non_increasing_within_cell": steps,
        "last_le_first": values[-1] <= values[0],
    }


def convergence_study(shape: ShapeSet, delta_list, n_list, grid: Grid, max_iter: int = dynamics.DEFAULT_MAX_ITER, m_per_curve: int = 256, sol=None) -> StudyResult:
    reports = list(iter_study(shape, delta_list, n_list, grid, max_iter, m_per_curve, sol))
    trends = {}
    for delta in delta_list:
        rows = [r for r in reports if r.delta == delta]
        trends[repr(float(delta))] = _trend(rows, grid.diagonal)
    return StudyResult(reports, trends)


def find_parameters(shape: ShapeSet, delta_list, n_list, grid: Grid, eps: float, max_iter: int = dynamics.DEFAULT_MAX_ITER, m_per_curve: int = 256) -> HausdorffReport:
    """First (delta, n) in scan order whose three distances are all below eps."""
    for report in iter_study(shape, delta_list, n_list, grid, max_iter, m_per_curve):
        if report.within(eps):
            return report
    raise ExhaustedScan(f"no (delta, n) in the scan reached all distances < {eps}")
