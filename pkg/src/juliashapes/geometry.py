"""Target shapes: finite unions of disjoint, mutually exterior smooth Jordan curves.

Every curve is stored as a truncated Fourier series

    zeta(t) = center + sum_k c_k exp(i k t),   t in [0, 2*pi),

oriented counterclockwise.  Circles and ellipses are exact low-order series;
rounded polygons are fitted by projecting a corner-smoothed outline onto a
bounded number of modes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba
import numpy as np
from shapely.geometry import LinearRing, Polygon
from shapely.ops import polylabel

from .errors import AmbiguousBoundary, ShapeError

TWO_PI = 2.0 * math.pi

VALIDATE_SAMPLES = 1024
WINDING_SAMPLES = 512
WINDING_SNAP = 0.25
BOUNDARY_TOL = 1e-9
POLYGON_MODES = 64
_POLYGON_FIT_SAMPLES = 4096


@dataclass(frozen=True, eq=False)
class CurveSpec:
    """One boundary curve.

    ``kind`` and ``params`` record how the curve was specified (for echoing
    shape documents); ``modes``/``coeffs`` are the canonical Fourier form with
    the constant term folded into ``center``.
    """

    kind: str
    params: dict
    center: complex
    modes: np.ndarray
    coeffs: np.ndarray

    @property
    def degree(self) -> int:
        return int(np.max(np.abs(self.modes))) if len(self.modes) else 0

    def points(self, t):
        t = np.asarray(t, dtype=float)
        phase = np.exp(1j * np.multiply.outer(t, self.modes))
        return self.center + phase @ self.coeffs

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        phase = np.exp(1j * np.multiply.outer(t, self.modes))
        return phase @ (1j * self.modes * self.coeffs)

    def second_derivative(self, t):
        t = np.asarray(t, dtype=float)
        phase = np.exp(1j * np.multiply.outer(t, self.modes))
        return phase @ (-(self.modes**2) * self.coeffs)

    def sample(self, m: int):
        """Points at t_j = 2*pi*j/m, via FFT when m resolves every mode."""
        if m <= 2 * self.degree:
            return self.points(TWO_PI * np.arange(m) / m)
        spectrum = np.zeros(m, dtype=complex)
        spectrum[self.modes % m] = self.coeffs
        return self.center + np.fft.ifft(spectrum) * m

    def sample_derivative(self, m: int):
        if m <= 2 * self.degree:
            return self.derivative(TWO_PI * np.arange(m) / m)
        spectrum = np.zeros(m, dtype=complex)
        spectrum[self.modes % m] = 1j * self.modes * self.coeffs
        return np.fft.ifft(spectrum) * m

    def signed_area(self) -> float:
        return float(math.pi * np.sum(self.modes * np.abs(self.coeffs) ** 2))

    def translated(self, offset: complex) -> "CurveSpec":
        params = dict(self.params)
        if "center" in params:
            params["center"] = complex(params["center"]) + offset
        if "vertices" in params:
            params["vertices"] = [complex(v) + offset for v in params["vertices"]]
        return CurveSpec(self.kind, params, self.center + offset, self.modes, self.coeffs)

    def to_dict(self) -> dict:
        """Shape-document form of this curve."""

        def pair(z):
            return [float(complex(z).real), float(complex(z).imag)]

        p = self.params
        if self.kind == "circle":
            return {"type": "circle", "center": pair(p["center"]), "radius": p["radius"]}
        if self.kind == "ellipse":
            return {
                "type": "ellipse",
                "center": pair(p["center"]),
                "semi_axes": list(p["semi_axes"]),
                "rotation": p["rotation"],
            }
        if self.kind == "fourier":
            return {
                "type": "fourier",
                "center": pair(p["center"]),
                "coefficients": [pair(c) for c in p["coefficients"]],
            }
        return {
            "type": "rounded_polygon",
            "vertices": [pair(v) for v in p["vertices"]],
            "rounding": p["rounding"],
        }


def _make(kind, params, center, modes, coeffs) -> CurveSpec:
    modes = np.asarray(modes, dtype=np.int64)
    coeffs = np.asarray(coeffs, dtype=complex)
    keep = (modes != 0) & (coeffs != 0)
    center = complex(center) + complex(np.sum(coeffs[modes == 0]))
    curve = CurveSpec(kind, params, center, modes[keep], coeffs[keep])
    if curve.signed_area() < 0:
        # reverse orientation: zeta(t) -> zeta(-t)
        curve = CurveSpec(kind, params, center, -curve.modes, curve.coeffs)
    return curve


def circle(center: complex, radius: float) -> CurveSpec:
    if not radius > 0:
        raise ShapeError(f"circle radius must be positive, got {radius}")
    center = complex(center)
    return _make("circle", {"center": center, "radius": float(radius)}, center, [1], [radius])


def ellipse(center: complex, semi_axes, rotation: float = 0.0) -> CurveSpec:
    a, b = (float(x) for x in semi_axes)
    if not (a > 0 and b > 0):
        raise ShapeError(f"ellipse semi-axes must be positive, got {semi_axes}")
    center = complex(center)
    rot = complex(math.cos(rotation), math.sin(rotation))
    # a cos t + i b sin t = (a+b)/2 e^{it} + (a-b)/2 e^{-it}
    params = {"center": center, "semi_axes": (a, b), "rotation": float(rotation)}
    return _make("ellipse", params, center, [1, -1], [rot * (a + b) / 2, rot * (a - b) / 2])


def fourier(center: complex, coefficients) -> CurveSpec:
    """Curve from coefficients c_{-K}, ..., c_K (odd-length list)."""
    coefficients = [complex(c) for c in coefficients]
    if len(coefficients) % 2 != 1:
        raise ShapeError("fourier curves need an odd number of coefficients (k = -K..K)")
    big_k = len(coefficients) // 2
    params = {"center": complex(center), "coefficients": coefficients}
    return _make("fourier", params, center, np.arange(-big_k, big_k + 1), coefficients)


def _smoothed_outline(vertices, rounding, per_piece=256):
    """Dense samples of a polygon whose corners are replaced by quadratic Beziers."""
    v = np.asarray(vertices, dtype=complex)
    count = len(v)
    pieces = []
    for i in range(count):
        prev_v, here, next_v = v[i - 1], v[i], v[(i + 1) % count]
        len_in = abs(here - prev_v)
        len_out = abs(next_v - here)
        cut = min(rounding, 0.45 * len_in, 0.45 * len_out)
        start = here + (prev_v - here) * cut / len_in
        end = here + (next_v - here) * cut / len_out
        s = np.linspace(0.0, 1.0, per_piece, endpoint=False)
        pieces.append((1 - s) ** 2 * start + 2 * s * (1 - s) * here + s**2 * end)
        # straight run to the next corner's cut point
        next_next = v[(i + 2) % count]
        cut_next = min(rounding, 0.45 * len_out, 0.45 * abs(next_next - next_v))
        seg_end = next_v + (here - next_v) * cut_next / len_out
        pieces.append(end + (seg_end - end) * s)
    return np.concatenate(pieces)


def rounded_polygon(vertices, rounding: float, modes: int = POLYGON_MODES) -> CurveSpec:
    vertices = [complex(v) for v in vertices]
    if len(vertices) < 3:
        raise ShapeError("rounded_polygon needs at least 3 vertices")
    if not rounding > 0:
        raise ShapeError(f"rounding must be positive, got {rounding}")
    outline = _smoothed_outline(vertices, float(rounding))
    closed = np.append(outline, outline[0])
    arclength = np.concatenate([[0.0], np.cumsum(np.abs(np.diff(closed)))])
    s = np.linspace(0.0, arclength[-1], _POLYGON_FIT_SAMPLES, endpoint=False)
    resampled = np.interp(s, arclength, closed.real) + 1j * np.interp(s, arclength, closed.imag)
    spectrum = np.fft.fft(resampled) / _POLYGON_FIT_SAMPLES
    ks = np.arange(-modes, modes + 1)
    params = {"vertices": vertices, "rounding": float(rounding)}
    return _make("rounded_polygon", params, 0j, ks, spectrum[ks % _POLYGON_FIT_SAMPLES])


def point_at(curve: CurveSpec, t):
    """zeta(t); scalar in, scalar out."""
    z = curve.points(t)
    return complex(z) if np.ndim(z) == 0 else z


def tangent_at(curve: CurveSpec, t):
    """zeta'(t), differentiated termwise."""
    z = curve.derivative(t)
    return complex(z) if np.ndim(z) == 0 else z


def distance_to_curve(curve: CurveSpec, z, coarse: int = 1024, steps: int = 8):
    """Distance from each z to the curve: coarse sampling refined by Newton on the parameter."""
    z = np.atleast_1d(np.asarray(z, dtype=complex)).ravel()
    grid = curve.sample(coarse)
    best = np.empty(z.shape)
    t = np.empty(z.shape)
    for chunk in np.array_split(np.arange(z.size), max(1, z.size // 2048)):
        d = np.abs(z[chunk, None] - grid[None, :])
        k = np.argmin(d, axis=1)
        best[chunk] = d[np.arange(len(chunk)), k]
        t[chunk] = TWO_PI * k / coarse
    for _ in range(steps):
        r = curve.points(t) - z
        d1 = curve.derivative(t)
        f = np.real(np.conj(r) * d1)
        fp = np.abs(d1) ** 2 + np.real(np.conj(r) * curve.second_derivative(t))
        step = np.where(fp > 0, f / np.where(fp > 0, fp, 1.0), 0.0)
        t = t - np.clip(step, -TWO_PI / coarse, TWO_PI / coarse)
    return np.minimum(best, np.abs(curve.points(t) - z))


@dataclass(frozen=True, eq=False)
class ShapeSet:
    curves: tuple
    translation_applied: complex = 0j
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "curves", tuple(self.curves))

    def translated(self, offset: complex) -> "ShapeSet":
        return ShapeSet(
            tuple(c.translated(offset) for c in self.curves),
            self.translation_applied + offset,
            self.name,
        )

    def max_radius(self, samples: int = VALIDATE_SAMPLES) -> float:
        return max(float(np.max(np.abs(c.sample(samples)))) for c in self.curves)

    def bounding_box(self, samples: int = VALIDATE_SAMPLES):
        pts = np.concatenate([c.sample(samples) for c in self.curves])
        return pts.real.min(), pts.imag.min(), pts.real.max(), pts.imag.max()

    def to_dict(self) -> dict:
        return {"name": self.name, "curves": [c.to_dict() for c in self.curves]}


@numba.njit(cache=True, parallel=True)
def _winding_kernel(pts, center, reach, zs, winding, min_dist):
    m = pts.shape[0]
    for i in numba.prange(zs.shape[0]):
        z = zs[i]
        far = abs(z - center) - reach
        if far > 0.0:
            # outside the bounding disk: winding 0, distance bounded below
            winding[i] = 0.0
            min_dist[i] = far
            continue
        total = 0.0
        best = np.inf
        prev = pts[m - 1] - z
        for j in range(m):
            cur = pts[j] - z
            d = abs(cur)
            if d < best:
                best = d
            # principal angle increment arg(cur / prev)
            re = cur.real * prev.real + cur.imag * prev.imag
            im = cur.imag * prev.real - cur.real * prev.imag
            total += math.atan2(im, re)
            prev = cur
        winding[i] = total / (2.0 * math.pi)
        min_dist[i] = best


def winding_numbers(curve: CurveSpec, z, samples: int = WINDING_SAMPLES):
    """Winding number of ``curve`` about each z (float) and sampled distance to it."""
    zs = np.ascontiguousarray(np.atleast_1d(np.asarray(z, dtype=complex)).ravel())
    winding = np.empty(zs.shape[0])
    dist = np.empty(zs.shape[0])
    pts = np.ascontiguousarray(curve.sample(samples))
    reach = float(np.max(np.abs(pts - curve.center)))
    _winding_kernel(pts, curve.center, reach, zs, winding, dist)
    return winding, dist


def classify_points(shape: ShapeSet, z, tol: float = BOUNDARY_TOL, samples: int = WINDING_SAMPLES):
    """Vectorized membership.  Returns (inside, ambiguous) boolean arrays.

    Points within ``tol`` of a sampled boundary point, or whose winding number
    is not within WINDING_SNAP of an integer, are flagged ambiguous and
    reported as not inside.
    """
    z = np.asarray(z, dtype=complex)
    inside = np.zeros(z.size, dtype=bool)
    ambiguous = np.zeros(z.size, dtype=bool)
    for curve in shape.curves:
        w, dist = winding_numbers(curve, z, samples)
        snapped = np.rint(w)
        ambiguous |= (np.abs(w - snapped) > WINDING_SNAP) | (dist <= tol)
        inside |= snapped != 0
    inside &= ~ambiguous
    return inside.reshape(z.shape), ambiguous.reshape(z.shape)


def contains(shape: ShapeSet, z: complex, tol: float = BOUNDARY_TOL) -> bool:
    inside, ambiguous = classify_points(shape, np.array([complex(z)]), tol)
    if ambiguous[0]:
        raise AmbiguousBoundary(f"{complex(z)} is within {tol:g} of the boundary")
    return bool(inside[0])


@dataclass(frozen=True)
class Violation:
    kind: str
    curves: tuple
    detail: str = field(default="")

    def __str__(self):
        who = ", ".join(str(i) for i in self.curves)
        return f"{self.kind} (curve {who}): {self.detail}"


def validate(shape: ShapeSet, samples: int = VALIDATE_SAMPLES) -> list:
    """List every violated ShapeSet invariant; empty means valid."""
    if not shape.curves:
        return [Violation("empty", (), "shape has no curves")]
    violations = []
    rings, polygons = [], []
    t = TWO_PI * np.arange(samples) / samples
    for i, curve in enumerate(shape.curves):
        pts = curve.sample(samples)
        speed = np.abs(curve.sample_derivative(samples))
        scale = max(float(speed.max()), 1e-300)
        bad = np.flatnonzero(speed <= 1e-9 * scale)
        if len(bad) or curve.signed_area() == 0:
            where = f"t in [{t[bad[0]]:.6g}, {t[bad[-1]]:.6g}]" if len(bad) else "degenerate curve"
            violations.append(Violation("irregular", (i,), f"vanishing derivative at {where}"))
        ring = LinearRing(np.column_stack([pts.real, pts.imag]))
        if not ring.is_simple:
            violations.append(Violation("self_intersection", (i,), "sampled curve is not simple"))
        rings.append(ring)
        polygons.append(Polygon(ring))
    for i in range(len(rings)):
        for j in range(i + 1, len(rings)):
            if rings[i].intersects(rings[j]):
                violations.append(Violation("overlap", (i, j), "curves intersect"))
            elif polygons[i].contains(polygons[j]) or polygons[j].contains(polygons[i]):
                violations.append(Violation("nesting", (i, j), "one curve lies inside the other"))
    return violations


def _interior_point(curve: CurveSpec, tol: float) -> complex:
    shape = ShapeSet((curve,))
    try:
        if contains(shape, curve.center, tol):
            return curve.center
    except AmbiguousBoundary:
        pass
    pts = curve.sample(VALIDATE_SAMPLES)
    label = polylabel(Polygon(np.column_stack([pts.real, pts.imag])), tolerance=1e-6)
    return complex(label.x, label.y)


def normalize_origin(shape: ShapeSet, tol: float = BOUNDARY_TOL) -> ShapeSet:
    """Translate so the origin lies strictly inside E (identity if it already does).

    The component whose center is nearest the origin is chosen; its center is
    used when interior, otherwise a deep interior point.  ``translation_applied``
    accumulates the offset c with new = old + c.
    """
    inside, ambiguous = classify_points(shape, np.array([0j]), tol)
    if inside[0] and not ambiguous[0]:
        return shape
    nearest = min(shape.curves, key=lambda c: abs(c.center))
    return shape.translated(-_interior_point(nearest, tol))
