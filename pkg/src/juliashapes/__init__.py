"""Polynomials whose filled Julia sets approximate a union of Jordan domains."""
import os

# the TBB layer in this environment is too old; avoid its import-time warning
os.environ.setdefault("NUMBA_THREADING_LAYER", "workqueue")

from .dynamics import ShapedPolynomial, build_polynomial, classify_point, escape_radius, eval_P, log_abs_S  # noqa: E402
from .equilibrium import capacity, green, log_potential, solve, solve_equilibrium  # noqa: E402
from .geometry import ShapeSet, circle, contains, ellipse, fourier, normalize_origin, rounded_polygon, validate  # noqa: E402
from .sampler import sample_roots  # noqa: E402

__version__ = "0.1.0"
