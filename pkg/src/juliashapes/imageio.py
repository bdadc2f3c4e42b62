"""Binary PGM/PPM writers (and a PGM reader for round-trip checks)."""
from __future__ import annotations

import numpy as np

INSIDE_GRAY = 0
OUTSIDE_GRAY = 255


def pgm_bytes(inside: np.ndarray) -> bytes:
    """P5 image, maxval 255, Inside=0, Outside=255, row 0 at the top."""
    inside = np.asarray(inside, dtype=bool)
    height, width = inside.shape
    data = np.where(inside, INSIDE_GRAY, OUTSIDE_GRAY).astype(np.uint8)
    return f"P5\n{width} {height}\n255\n".encode("ascii") + data.tobytes()


def write_pgm(path, inside: np.ndarray) -> None:
    with open(path, "wb") as fh:
        fh.write(pgm_bytes(inside))


def read_pgm(path) -> np.ndarray:
    with open(path, "rb") as fh:
        raw = fh.read()
    magic, dims, maxval, rest = raw.split(b"\n", 3)
    if magic != b"P5" or maxval != b"255":
        raise ValueError(f"{path} is not an 8-bit binary PGM")
    width, height = (int(x) for x in dims.split())
    return np.frombuffer(rest, dtype=np.uint8, count=width * height).reshape(height, width)


def escape_colors(counts: np.ndarray, max_iter: int) -> np.ndarray:
    """RGB uint8 image: bounded pixels black, escaped pixels on a log-scaled ramp."""
    counts = np.asarray(counts)
    level = np.log1p(counts) / np.log1p(max(int(max_iter), 1))
    level = np.clip(level, 0.0, 1.0)
    rgb = np.stack([255 * level, 255 * level**0.5, 255 * (1 - level) ** 2 * (counts > 0)], axis=-1)
    rgb[counts == 0] = 0
    return np.rint(rgb).astype(np.uint8)


def write_ppm(path, rgb: np.ndarray) -> None:
    rgb = np.asarray(rgb, dtype=np.uint8)
    height, width, _ = rgb.shape
    with open(path, "wb") as fh:
        fh.write(f"P6\n{width} {height}\n255\n".encode("ascii"))
        fh.write(rgb.tobytes())
