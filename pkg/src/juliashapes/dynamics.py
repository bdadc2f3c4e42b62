"""The shaped polynomials S(z) = e^{n(gamma-delta)} prod (zeta_i - z) and P(z) = z S(z).

Polynomials are kept as roots plus a log-scale; values are accumulated as
mantissa/exponent pairs so that degree-10^5 products neither overflow nor
underflow.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numba
import numpy as np

from .errors import DegreeTooLarge

LN2 = math.log(2.0)
DEFAULT_MAX_ITER = 60
MAX_EXPANDED_DEGREE = 20


@dataclass(frozen=True)
class ScaledComplex:
    """mantissa * 2**exponent with 1 <= |mantissa| < 2, or mantissa == 0."""

    mantissa: complex
    exponent: int

    @classmethod
    def normalized(cls, mantissa: complex, exponent: int = 0) -> "ScaledComplex":
        if mantissa == 0:
            return cls(0j, 0)
        shift = math.floor(math.log2(abs(mantissa)))
        mantissa = complex(math.ldexp(mantissa.real, -shift), math.ldexp(mantissa.imag, -shift))
        # guard rounding at the [1, 2) edges
        if abs(mantissa) >= 2.0:
            mantissa, shift = mantissa / 2, shift + 1
        elif abs(mantissa) < 1.0:
            mantissa, shift = mantissa * 2, shift - 1
        return cls(mantissa, int(exponent + shift))

    def __complex__(self):
        return complex(
            math.ldexp(self.mantissa.real, self.exponent), math.ldexp(self.mantissa.imag, self.exponent)
        )

    def log_abs(self) -> float:
        if self.mantissa == 0:
            return -math.inf
        return math.log(abs(self.mantissa)) + self.exponent * LN2

    def log2_abs(self) -> float:
        if self.mantissa == 0:
            return -math.inf
        return math.log2(abs(self.mantissa)) + self.exponent


@numba.njit(cache=True)
def _scaled_product(roots, z):
    """prod (roots_i - z) as (mantissa, exponent), renormalizing after every factor."""
    mant = 1.0 + 0.0j
    expo = 0
    for i in range(roots.shape[0]):
        mant = mant * (roots[i] - z)
        scale = max(abs(mant.real), abs(mant.imag))
        if scale == 0.0:
            return 0.0j, 0
        m, e = math.frexp(scale)
        mant = complex(math.ldexp(mant.real, -e), math.ldexp(mant.imag, -e))
        expo += e
    return mant, expo


@numba.njit(cache=True)
def _log_abs_sum(roots, z):
    total = 0.0
    for i in range(roots.shape[0]):
        d = abs(roots[i] - z)
        if d == 0.0:
            return -np.inf
        total += math.log(d)
    return total


@dataclass(frozen=True, eq=False)
class ShapedPolynomial:
    """P(z) = e^{log_scale} z prod (roots_i - z) with log_scale = n (gamma - delta).

    Roots are in normalized coordinates (origin inside the shape).  A point w
    in the caller's original coordinates corresponds to w + translation_offset.
    """

    roots: np.ndarray
    delta: float
    gamma: float
    translation_offset: complex = 0j
    n: int = field(init=False)
    log_scale: float = field(init=False)
    root_radius: float = field(init=False)

    def __post_init__(self):
        roots = np.ascontiguousarray(np.asarray(self.roots, dtype=complex))
        if roots.size == 0:
            raise ValueError("a shaped polynomial needs at least one root")
        object.__setattr__(self, "roots", roots)
        object.__setattr__(self, "n", int(roots.size))
        object.__setattr__(self, "log_scale", self.n * (self.gamma - self.delta))
        object.__setattr__(self, "root_radius", float(np.max(np.abs(roots))))
        if not self.root_radius > 0:
            raise ValueError("roots must not all be zero")


def build_polynomial(sample, delta: float, gamma: float, translation_offset: complex = 0j):
    return ShapedPolynomial(sample.roots, float(delta), float(gamma), complex(translation_offset))


def log_abs_S(poly: ShapedPolynomial, z):
    """log|S(z)| = n(gamma - delta) + sum log|zeta_i - z|; -inf at a root."""
    if np.ndim(z) == 0:
        return poly.log_scale + _log_abs_sum(poly.roots, complex(z))
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape)
    flat = out.reshape(-1)
    for i, w in enumerate(z.reshape(-1)):
        flat[i] = poly.log_scale + _log_abs_sum(poly.roots, complex(w))
    return out


def _apply_scale(mant: complex, expo: int, log_scale: float) -> ScaledComplex:
    whole = math.floor(log_scale / LN2)
    frac = log_scale / LN2 - whole
    return ScaledComplex.normalized(mant * 2.0**frac, expo + whole)


def eval_S(poly: ShapedPolynomial, z: complex) -> ScaledComplex:
    mant, expo = _scaled_product(poly.roots, complex(z))
    return _apply_scale(mant, expo, poly.log_scale)


def eval_P(poly: ShapedPolynomial, z: complex) -> ScaledComplex:
    z = complex(z)
    if z == 0:
        return ScaledComplex(0j, 0)
    s = eval_S(poly, z)
    zs = ScaledComplex.normalized(z)
    return ScaledComplex.normalized(s.mantissa * zs.mantissa, s.exponent + zs.exponent)


def escape_radius(poly: ShapedPolynomial) -> float:
    """R with |z| >= R  =>  |S(z)| >= 2, hence |P(z)| >= 2|z|."""
    rho = poly.root_radius
    return max(2.0 * rho, rho + 2.0 ** (1.0 / poly.n) * math.exp(poly.delta - poly.gamma))


def trap_radius(poly: ShapedPolynomial) -> float:
    """Largest r (by bisection) with max_{|z|<=r} |S(z)| <= 1, so P maps B(0, r) into itself.

    Uses |S(z)| <= |S(0)| prod (1 + r/|zeta_i|).  Returns 0 when S(0) is not
    below 1 in modulus.
    """
    moduli = np.abs(poly.roots)
    log_s0 = poly.log_scale + float(np.sum(np.log(moduli)))
    if not log_s0 < 0:
        return 0.0

    def bound(r):
        return log_s0 + float(np.sum(np.log1p(r / moduli)))

    lo, hi = 0.0, float(moduli.min())
    while bound(hi) < 0:
        hi *= 2.0
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if bound(mid) <= 0:
            lo = mid
        else:
            hi = mid
    return lo


@dataclass(frozen=True)
class Escaped:
    iterations: int


@dataclass(frozen=True)
class Bounded:
    pass


@numba.njit(cache=True)
def _orbit(roots, log_scale, z, max_iter, log_r, trap):
    """Escape iteration count (>= 1), or 0 if the orbit stays bounded.

    Escape is certified once log|z_k| > log R.  The orbit is bounded once
    |z_k| <= trap, since P maps that disk into itself.
    """
    whole = math.floor(log_scale / math.log(2.0))
    frac_scale = 2.0 ** (log_scale / math.log(2.0) - whole)
    for k in range(1, max_iter + 1):
        az = abs(z)
        if az <= trap:
            return 0
        if math.log(az) > log_r:
            # P(z) already escaped last step; only reachable for k == 1
            return k
        mant, expo = _scaled_product(roots, z)
        mant = mant * frac_scale * z
        if mant == 0:
            return 0
        log_abs = math.log(abs(mant)) + (expo + whole) * math.log(2.0)
        if log_abs > log_r:
            return k
        z = mant * 2.0 ** (expo + whole)
    return 0


@numba.njit(cache=True, parallel=True)
def _orbit_grid(roots, log_scale, zs, max_iter, log_r, trap, counts):
    for i in numba.prange(zs.shape[0]):
        counts[i] = _orbit(roots, log_scale, zs[i], max_iter, log_r, trap)


def classify_point(poly: ShapedPolynomial, z: complex, max_iter: int = DEFAULT_MAX_ITER, R=None):
    """Escaped(k) if |P^k(z)| > R for some k <= max_iter, else Bounded()."""
    radius = escape_radius(poly) if R is None else float(R)
    count = _orbit(poly.roots, poly.log_scale, complex(z), int(max_iter), math.log(radius), trap_radius(poly))
    return Escaped(int(count)) if count else Bounded()


def escape_counts(poly: ShapedPolynomial, z, max_iter: int = DEFAULT_MAX_ITER, R=None) -> np.ndarray:
    """Vectorized classify_point in normalized coordinates: 0 = bounded, k = escaped after k."""
    radius = escape_radius(poly) if R is None else float(R)
    z = np.asarray(z, dtype=complex)
    zs = np.ascontiguousarray(z.ravel())
    counts = np.empty(zs.shape[0], dtype=np.int32)
    _orbit_grid(poly.roots, poly.log_scale, zs, int(max_iter), math.log(radius), trap_radius(poly), counts)
    return counts.reshape(z.shape)


@dataclass(frozen=True)
class ConjugatedPolynomial:
    """Q(w) = c + P(w - c) with c = -translation_offset, in original coordinates."""

    n: int
    delta: float
    gamma: float
    log_scale: float
    translation_offset: complex
    fixed_point: complex
    roots: tuple

    def describe(self) -> str:
        c = self.fixed_point
        return (
            f"Q(w) = c + e^{{{self.log_scale:.17g}}} (w - c) prod_i (r_i - w), c = {c}; "
            "iterating Q from w equals c plus the P-orbit of w - c"
        )


def conjugated_output(poly: ShapedPolynomial) -> ConjugatedPolynomial:
    c = -poly.translation_offset
    return ConjugatedPolynomial(
        n=poly.n,
        delta=poly.delta,
        gamma=poly.gamma,
        log_scale=poly.log_scale,
        translation_offset=poly.translation_offset,
        fixed_point=c,
        roots=tuple(complex(r) + c for r in poly.roots),
    )


def coefficients(poly: ShapedPolynomial) -> np.ndarray:
    """Coefficients of P, lowest degree first (index k multiplies z**k)."""
    if poly.n > MAX_EXPANDED_DEGREE:
        raise DegreeTooLarge(f"refusing to expand degree {poly.n + 1}; use the root form")
    coef = np.array([0.0, 1.0], dtype=complex)  # the factor z
    for r in poly.roots:
        coef = np.convolve(coef, np.array([r, -1.0]))
    return coef * math.exp(poly.log_scale)


def write_polynomial_csv(poly: ShapedPolynomial, path) -> None:
    """Header block of '# key,value' lines, then one root per row."""
    conj = conjugated_output(poly)
    with open(path, "w", newline="") as fh:
        fh.write(f"# n,{poly.n}\n")
        fh.write(f"# delta,{poly.delta!r}\n")
        fh.write(f"# gamma,{poly.gamma!r}\n")
        fh.write(f"# log_scale,{poly.log_scale!r}\n")
        off = poly.translation_offset
        fh.write(f"# translation_offset,{off.real!r},{off.imag!r}\n")
        fh.write(f"# fixed_point,{conj.fixed_point.real!r},{conj.fixed_point.imag!r}\n")
        fh.write("# form,P(z) = exp(log_scale) * z * prod(root - z); Q(w) = c + P(w - c)\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["index", "re", "im", "orig_re", "orig_im"])
        for i, (r, q) in enumerate(zip(poly.roots, conj.roots)):
            writer.writerow([i, repr(float(r.real)), repr(float(r.imag)), repr(float(q.real)), repr(float(q.imag))])


def read_polynomial_csv(path) -> ShapedPolynomial:
    header = {}
    rows = []
    with open(path, newline="") as fh:
        for line in fh:
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition(",")
                header[key] = value
            else:
                rows.append(line)
    roots = [complex(float(r["re"]), float(r["im"])) for r in csv.DictReader(rows)]
    off = [float(x) for x in header["translation_offset"].split(",")]
    return ShapedPolynomial(
        np.array(roots), float(header["delta"]), float(header["gamma"]), complex(off[0], off[1])
    )
