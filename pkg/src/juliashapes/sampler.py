"""Root placement: n boundary points approximately equidistributed for the equilibrium measure."""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .equilibrium import EquilibriumSolution
from .errors import TooFewRoots
from .geometry import TWO_PI

_BISECTION_STEPS = 64


@dataclass(frozen=True, eq=False)
class RootSample:
    n: int
    per_curve_counts: tuple
    roots: np.ndarray
    curve_index: np.ndarray
    t: np.ndarray
    arc_masses: np.ndarray
    max_arc_mass_deviation: float


def allocate_counts(masses, n: int) -> list:
    """Largest-remainder apportionment of n roots; ties go to the lower curve index."""
    masses = np.asarray(masses, dtype=float)
    if n < len(masses):
        raise TooFewRoots(f"need at least {len(masses)} roots (one per curve), got {n}")
    quotas = masses / masses.sum() * n
    counts = np.floor(quotas).astype(int)
    # every curve needs a root for the arcs to be defined
    counts = np.maximum(counts, 1)
    remainder = n - counts.sum()
    # curves lifted to one root have a negative fraction and rank last
    fractions = quotas - counts
    order = sorted(range(len(masses)), key=lambda i: (-fractions[i], i))
    if remainder > 0:
        for i in order[:remainder]:
            counts[i] += 1
    while remainder < 0:
        # only reachable when the minimum-one rule overshoots
        candidates = [i for i in reversed(order) if counts[i] > 1]
        counts[candidates[0]] -= 1
        remainder += 1
    return [int(c) for c in counts]


def _invert_cdf(sol: EquilibriumSolution, j: int, targets: np.ndarray) -> np.ndarray:
    lo = np.zeros_like(targets)
    hi = np.full_like(targets, TWO_PI)
    for _ in range(_BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        below = sol.cdf(j, mid) < targets
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)


def sample_roots(sol: EquilibriumSolution, n: int) -> RootSample:
    """Place n_j roots on curve j at cumulative measure k * mu_j / n_j, k = 0..n_j-1.

    Arcs between consecutive roots on one curve all carry mass mu_j / n_j; the
    reported deviation is the largest |arc mass - 1/n| measured with the
    cumulative measure at the computed parameters.
    """
    masses = sol.per_curve_mass
    counts = allocate_counts(masses, n)
    roots, index, params, arcs = [], [], [], []
    for j, count in enumerate(counts):
        targets = masses[j] * np.arange(count) / count
        t = _invert_cdf(sol, j, targets)
        t[0] = 0.0
        roots.append(sol.shape.curves[j].points(t))
        index.append(np.full(count, j))
        params.append(t)
        cuts = np.append(sol.cdf(j, t), masses[j])
        arcs.append(np.diff(cuts))
    arc_masses = np.concatenate(arcs)
    return RootSample(
        n=n,
        per_curve_counts=tuple(counts),
        roots=np.concatenate(roots),
        curve_index=np.concatenate(index),
        t=np.concatenate(params),
        arc_masses=arc_masses,
        max_arc_mass_deviation=float(np.max(np.abs(arc_masses - 1.0 / n))),
    )


def write_roots_csv(sample: RootSample, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["index", "curve_index", "t", "re", "im"])
        for i, (j, t, z) in enumerate(zip(sample.curve_index, sample.t, sample.roots)):
            writer.writerow([i, int(j), repr(float(t)), repr(float(z.real)), repr(float(z.imag))])


def read_roots_csv(path) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return np.array([complex(float(r["re"]), float(r["im"])) for r in rows])
