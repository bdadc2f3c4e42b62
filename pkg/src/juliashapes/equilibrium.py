"""Equilibrium (harmonic) measure, Robin's constant and the exterior Green's function.

The density is found from the first-kind log-kernel equation

    sum_j int log|zeta - z| phi_j(s) ds + gamma = 0,   z on the boundary,
    sum_j int phi_j(s) ds = 1,

discretized by Nystrom's method.  On the diagonal blocks the kernel is split
into log|2 sin((t-s)/2)|, integrated with Kress's trigonometric weights, plus
a smooth remainder handled by the trapezoidal rule.  ``phi_j`` is the density
with respect to the curve parameter; sigma = phi / |zeta'| is the density with
respect to arclength.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import InvalidResolution, NegativeDensity, SingularSystem, TooCloseToBoundary
from .geometry import TWO_PI, ShapeSet, classify_points, distance_to_curve

NEGATIVE_TOL = 1e-8
MAX_CONDITION = 1e13
# trapezoid nodes per unit (distance / speed); error ~ exp(-NODES_PER_GAP * gap)
NODES_PER_GAP = 40.0
MAX_UPSAMPLED = 1 << 22


@dataclass(frozen=True, eq=False)
class CurveNodes:
    t: np.ndarray
    points: np.ndarray
    derivative: np.ndarray
    speed: np.ndarray


@dataclass(frozen=True, eq=False)
class Discretization:
    shape: ShapeSet
    m: int
    nodes: tuple  # CurveNodes per curve

    @property
    def size(self) -> int:
        return self.m * len(self.nodes)


def discretize(shape: ShapeSet, m_per_curve: int) -> Discretization:
    m = int(m_per_curve)
    if m != m_per_curve or m < 16 or m % 2:
        raise InvalidResolution(f"m_per_curve must be an even integer >= 16, got {m_per_curve}")
    t = TWO_PI * np.arange(m) / m
    nodes = []
    for curve in shape.curves:
        d = curve.sample_derivative(m)
        nodes.append(CurveNodes(t, curve.sample(m), d, np.abs(d)))
    return Discretization(shape, m, tuple(nodes))


def kress_weights(m: int, tau):
    """Weights R(tau) with  int_0^{2pi} log(4 sin^2((t-s)/2)) f(s) ds ~ sum_k R(t - t_k) f(t_k)."""
    p = m // 2
    tau = np.asarray(tau, dtype=float)
    ell = np.arange(1, p)
    series = np.cos(np.multiply.outer(tau, ell)) @ (1.0 / ell)
    return -(TWO_PI / p) * (series + np.cos(p * tau) / (2 * p))


def _self_block(nodes: CurveNodes, m: int):
    diff = nodes.points[:, None] - nodes.points[None, :]
    tau = nodes.t[:, None] - nodes.t[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        smooth = np.log(np.abs(diff)) - np.log(np.abs(2 * np.sin(tau / 2)))
    np.fill_diagonal(smooth, np.log(nodes.speed))
    circulant = 0.5 * kress_weights(m, TWO_PI * np.arange(m) / m)
    idx = (np.arange(m)[:, None] - np.arange(m)[None, :]) % m
    return circulant[idx] + (TWO_PI / m) * smooth


def assemble(disc: Discretization):
    m, count = disc.m, len(disc.nodes)
    size = disc.size
    a = np.zeros((size + 1, size + 1))
    for i, ni in enumerate(disc.nodes):
        rows = slice(i * m, (i + 1) * m)
        for j, nj in enumerate(disc.nodes):
            cols = slice(j * m, (j + 1) * m)
            if i == j:
                a[rows, cols] = _self_block(ni, m)
            else:
                dist = np.abs(ni.points[:, None] - nj.points[None, :])
                a[rows, cols] = (TWO_PI / m) * np.log(dist)
    a[:size, size] = 1.0
    a[size, :size] = TWO_PI / m
    b = np.zeros(size + 1)
    b[size] = 1.0
    return a, b


@dataclass(frozen=True, eq=False)
class EquilibriumSolution:
    """Discrete equilibrium measure.

    ``phi[j]`` holds parameter densities at the nodes of curve j, ``sigma[j]``
    the arclength densities, ``spectra[j]`` the FFT of ``phi[j]`` used for
    trigonometric interpolation and the exact cumulative measure.
    """

    disc: Discretization
    phi: tuple
    sigma: tuple
    robin_gamma: float
    per_curve_mass: np.ndarray
    condition: float
    spectra: tuple

    @property
    def shape(self) -> ShapeSet:
        return self.disc.shape

    def total_mass(self) -> float:
        return float(sum(np.sum(p) for p in self.phi) * TWO_PI / self.disc.m)

    def density_at(self, j: int, t):
        """Trigonometric interpolant of phi_j at arbitrary parameters."""
        m = self.disc.m
        t = np.asarray(t, dtype=float)
        k = np.fft.fftfreq(m, 1.0 / m)
        coef = self.spectra[j] / m
        coef = coef.copy()
        coef[m // 2] *= 0.5  # split Nyquist mode symmetrically
        val = np.exp(1j * np.multiply.outer(t, k)) @ coef
        val += coef[m // 2] * np.exp(-1j * (m // 2) * t)
        return val.real

    def cdf(self, j: int, t):
        """Measure of curve j on the parameter interval [0, t], exact for the interpolant."""
        m = self.disc.m
        t = np.asarray(t, dtype=float)
        coef = self.spectra[j] / m
        half = m // 2
        k = np.fft.fftfreq(m, 1.0 / m)
        result = coef[0].real * t
        nz = (k != 0) & (np.abs(k) != half)
        kk = k[nz]
        e = (np.exp(1j * np.multiply.outer(t, kk)) - 1.0) / (1j * kk)
        result = result + (e @ coef[nz]).real
        # Nyquist term as a cosine: coef_N cos(N t) integrates to coef_N sin(N t)/N
        result = result + (coef[half].real * np.sin(half * t) / half)
        return result

    def upsampled(self, j: int, m_fine: int):
        """Density and nodes of curve j at ``m_fine`` uniform parameters."""
        m = self.disc.m
        if m_fine == m:
            nodes = self.disc.nodes[j]
            return self.phi[j], nodes.points
        spectrum = self.spectra[j]
        fine = np.zeros(m_fine, dtype=complex)
        half = m // 2
        fine[:half] = spectrum[:half]
        fine[-half + 1 :] = spectrum[-half + 1 :]
        fine[half] = 0.5 * spectrum[half]
        fine[-half] = 0.5 * spectrum[half]
        phi = np.fft.ifft(fine).real * (m_fine / m)
        return phi, self.shape.curves[j].sample(m_fine)


def solve_equilibrium(disc: Discretization) -> EquilibriumSolution:
    a, b = assemble(disc)
    try:
        cond = float(np.linalg.cond(a, 1))
        if not np.isfinite(cond) or cond > MAX_CONDITION:
            raise SingularSystem(f"equilibrium system is singular (condition ~ {cond:.3g})", cond)
        x = scipy.linalg.solve(a, b)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise SingularSystem(f"dense solve failed: {exc}") from exc
    m = disc.m
    gamma = float(x[-1])
    phis, sigmas, spectra, masses = [], [], [], []
    for j, nodes in enumerate(disc.nodes):
        phi = x[j * m : (j + 1) * m].copy()
        if phi.min() < -NEGATIVE_TOL:
            raise NegativeDensity(
                f"density on curve {j} reaches {phi.min():.3g}; the solve did not converge"
            )
        phi = np.maximum(phi, 0.0)
        phis.append(phi)
        sigmas.append(phi / nodes.speed)
        spectra.append(np.fft.fft(phi))
        masses.append(np.sum(phi) * TWO_PI / m)
    return EquilibriumSolution(
        disc, tuple(phis), tuple(sigmas), gamma, np.array(masses), cond, tuple(spectra)
    )


def solve(shape: ShapeSet, m_per_curve: int = 256) -> EquilibriumSolution:
    return solve_equilibrium(discretize(shape, m_per_curve))


def boundary_log_integral(sol: EquilibriumSolution, j: int, t) -> np.ndarray:
    """int log|zeta - zeta_j(t)| dmu(zeta) for points on curve j (should equal -gamma)."""
    disc = sol.disc
    m = disc.m
    t = np.atleast_1d(np.asarray(t, dtype=float))
    curve = sol.shape.curves[j]
    z = curve.points(t)
    speed = np.abs(curve.derivative(t))
    out = np.zeros(t.shape)
    for l, nodes in enumerate(disc.nodes):
        if l != j:
            dist = np.abs(z[:, None] - nodes.points[None, :])
            out += (TWO_PI / m) * np.log(dist) @ sol.phi[l]
            continue
        tau = t[:, None] - nodes.t[None, :]
        diag = np.abs(np.sin(tau / 2)) < 1e-12
        with np.errstate(divide="ignore", invalid="ignore"):
            smooth = np.log(np.abs(z[:, None] - nodes.points[None, :])) - np.log(
                np.abs(2 * np.sin(tau / 2))
            )
        smooth = np.where(diag, np.log(speed)[:, None], smooth)
        weights = 0.5 * kress_weights(m, tau) + (TWO_PI / m) * smooth
        out += weights @ sol.phi[l]
    return out


def _required_nodes(dist, max_speed, m):
    need = NODES_PER_GAP * max_speed / np.maximum(dist, 1e-300)
    levels = np.maximum(m, 2 ** np.ceil(np.log2(np.maximum(need, 1.0))))
    return levels.astype(np.int64)


def log_potential(sol: EquilibriumSolution, z, min_distance: float = 0.0):
    """U(z) = int log(1/|zeta - z|) dmu(zeta), for z off the boundary.

    The density is trigonometrically upsampled per curve until the
    trapezoidal rule resolves the distance from z to that curve.  Raises
    TooCloseToBoundary when the required resolution exceeds MAX_UPSAMPLED or
    z lies within ``min_distance`` of the curve.
    """
    scalar = np.ndim(z) == 0
    z = np.atleast_1d(np.asarray(z, dtype=complex)).ravel()
    m = sol.disc.m
    total = np.zeros(z.shape)
    for j, nodes in enumerate(sol.disc.nodes):
        dist = distance_to_curve(sol.shape.curves[j], z)
        if np.any(dist <= min_distance):
            raise TooCloseToBoundary(f"point within {min_distance:g} of curve {j}")
        levels = _required_nodes(dist, float(nodes.speed.max()), m)
        if levels.max() > MAX_UPSAMPLED:
            worst = z[np.argmax(levels)]
            raise TooCloseToBoundary(f"{worst} is too close to curve {j} for accurate quadrature")
        for level in np.unique(levels):
            sel = np.flatnonzero(levels == level)
            phi, pts = sol.upsampled(j, int(level))
            w = phi * (TWO_PI / level)
            for chunk in np.array_split(sel, max(1, len(sel) * int(level) // 4_000_000)):
                total[chunk] -= np.log(np.abs(z[chunk, None] - pts[None, :])) @ w
    return float(total[0]) if scalar else total


def green(sol: EquilibriumSolution, z):
    """g(infinity, z) = gamma - U(z), exactly 0 on E and clamped at 0 elsewhere."""
    scalar = np.ndim(z) == 0
    z = np.atleast_1d(np.asarray(z, dtype=complex)).ravel()
    inside, _ = classify_points(sol.shape, z)
    g = np.zeros(z.shape)
    out = ~inside
    if out.any():
        g[out] = np.maximum(sol.robin_gamma - log_potential(sol, z[out]), 0.0)
    return float(g[0]) if scalar else g


def capacity(sol: EquilibriumSolution) -> float:
    return math.exp(-sol.robin_gamma)


def write_density_csv(sol: EquilibriumSolution, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["curve_index", "t", "re", "im", "sigma"])
        for j, nodes in enumerate(sol.disc.nodes):
            for t, p, s in zip(nodes.t, nodes.points, sol.sigma[j]):
                writer.writerow([j, repr(float(t)), repr(float(p.real)), repr(float(p.imag)), repr(float(s))])
