"""Escape-time pictures of ``z -> lam z + z^2`` with overlays, written as PPM (P6) or PNG."""
from __future__ import annotations

import math
import warnings

import numba
import numpy as np

from .circle_dynamics import CircleArc
from .errors import ConfigError
from .hypgeo import HalfNbhd

ESCAPE = 1000.0

# an old system TBB makes numba fall back to another threading layer, which is fine
warnings.filterwarnings("ignore", message="The TBB threading layer", category=numba.NumbaWarning)

BASIN_DARK = np.array([10, 10, 30], dtype=np.uint8)
BASIN_LIGHT = np.array([120, 160, 255], dtype=np.uint8)
FILLED = np.array([250, 245, 225], dtype=np.uint8)
ORBIT = np.array([220, 30, 30], dtype=np.uint8)
COMPONENT = np.array([20, 150, 40], dtype=np.uint8)
REGION = np.array([255, 190, 60], dtype=np.uint8)


@numba.njit(parallel=True, cache=True)
def _escape_counts(lam_re, lam_im, xmin, xmax, ymin, ymax, width, height, iterations):
    counts = np.empty((height, width), dtype=np.int32)
    dist = np.empty((height, width), dtype=np.float64)
    for row in numba.prange(height):
        y = ymax - (row + 0.5) * (ymax - ymin) / height
        for col in range(width):
            x = xmin + (col + 0.5) * (xmax - xmin) / width
            zr, zi = x, y
            dr, di = 1.0, 0.0
            n = 0
            while n < iterations:
                # derivative first: z' <- (lam + 2 z) z'
                ar, ai = lam_re + 2.0 * zr, lam_im + 2.0 * zi
                dr, di = ar * dr - ai * di, ar * di + ai * dr
                # z <- z (lam + z)
                ar, ai = lam_re + zr, lam_im + zi
                zr, zi = zr * ar - zi * ai, zr * ai + zi * ar
                if zr * zr + zi * zi > ESCAPE * ESCAPE:
                    break
                n += 1
            counts[row, col] = n
            if n >= iterations:
                dist[row, col] = 0.0
            else:
                r = math.sqrt(zr * zr + zi * zi)
                dist[row, col] = r * math.log(r) / math.sqrt(dr * dr + di * di)
    return counts, dist


def escape_counts(lam: complex, view, width: int, height: int, iterations: int) -> np.ndarray:
    """Iterations before leaving the escape disk; ``iterations`` marks a bounded orbit."""
    return escape_data(lam, view, width, height, iterations)[0]


def escape_data(lam: complex, view, width: int, height: int, iterations: int) -> tuple[np.ndarray, np.ndarray]:
    """Escape counts and the distance estimate ``|z| log|z| / |z'|`` (0 for bounded orbits)."""
    xmin, xmax, ymin, ymax = view
    return _escape_counts(lam.real, lam.imag, xmin, xmax, ymin, ymax, width, height, iterations)


def filled_mask(counts: np.ndarray, dist: np.ndarray, iterations: int, view) -> np.ndarray:
    """Pixels with a bounded orbit or whose distance estimate puts the filled set within half a pixel."""
    h, w = counts.shape
    pixel = max((view[1] - view[0]) / w, (view[3] - view[2]) / h)
    return (counts >= iterations) | (dist < 0.5 * pixel)


def to_pixels(z, view, width: int, height: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Row, column and in-frame mask of each point."""
    z = np.asarray(z, dtype=complex).ravel()
    xmin, xmax, ymin, ymax = view
    col = np.floor((z.real - xmin) / (xmax - xmin) * width).astype(np.int64)
    row = np.floor((ymax - z.imag) / (ymax - ymin) * height).astype(np.int64)
    inside = (col >= 0) & (col < width) & (row >= 0) & (row < height)
    return row, col, inside


def shade(counts: np.ndarray, iterations: int, filled: np.ndarray | None = None) -> np.ndarray:
    bounded = counts >= iterations if filled is None else filled
    s = np.log1p(counts.astype(float)) / math.log1p(iterations)
    img = (BASIN_DARK[None, None, :] * (1 - s[..., None]) + BASIN_LIGHT[None, None, :] * s[..., None]).astype(np.uint8)
    img[bounded] = FILLED
    return img


def bounded_fraction(filled: np.ndarray, z, view) -> float:
    """Fraction of the in-frame points that land on filled-set pixels."""
    h, w = filled.shape
    row, col, inside = to_pixels(z, view, w, h)
    if not np.any(inside):
        return math.nan
    return float(np.mean(filled[row[inside], col[inside]]))


def draw_points(img: np.ndarray, z, view, colour) -> None:
    h, w, _ = img.shape
    row, col, inside = to_pixels(z, view, w, h)
    img[row[inside], col[inside]] = colour


def draw_polyline(img: np.ndarray, vertices, view, colour, closed: bool = True) -> None:
    v = np.asarray(vertices, dtype=complex)
    if closed:
        v = np.append(v, v[0])
    h, w, _ = img.shape
    scale = max(w / (view[1] - view[0]), h / (view[3] - view[2]))
    pts = []
    for a, b in zip(v[:-1], v[1:]):
        k = max(2, int(abs(b - a) * scale * 2) + 2)
        pts.append(a + (b - a) * np.linspace(0.0, 1.0, k))
    draw_points(img, np.concatenate(pts), view, colour)


def half_nbhd_image(arc: CircleArc, d: float, view, width: int, height: int) -> np.ndarray:
    """Unit circle picture with the half neighbourhood of depth ``d`` over ``arc`` shaded."""
    xmin, xmax, ymin, ymax = view
    x = xmin + (np.arange(width) + 0.5) * (xmax - xmin) / width
    y = ymax - (np.arange(height) + 0.5) * (ymax - ymin) / height
    z = x[None, :] + 1j * y[:, None]
    img = np.empty((height, width, 3), dtype=np.uint8)
    img[...] = FILLED
    img[np.abs(z) < 1.0] = BASIN_LIGHT
    mask = HalfNbhd(arc, d).contains(z.ravel()).reshape(z.shape)
    img[mask] = REGION
    draw_points(img, np.exp(1j * np.linspace(0, 2 * math.pi, 8 * (width + height))), view, BASIN_DARK)
    draw_points(img, np.exp(1j * (arc.a + arc.length * np.linspace(0, 1, 4 * width))), view, ORBIT)
    return img


def write_ppm(path, img: np.ndarray) -> None:
    h, w, _ = img.shape
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(np.ascontiguousarray(img, dtype=np.uint8).tobytes())


def read_ppm(path) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()
    fields, pos = [], 0
    while len(fields) < 4:
        while data[pos : pos + 1].isspace():
            pos += 1
        end = pos
        while not data[end : end + 1].isspace():
            end += 1
        fields.append(data[pos:end])
        pos = end
    if fields[0] != b"P6":
        raise ValueError("not a binary PPM")
    w, h = int(fields[1]), int(fields[2])
    # exactly one whitespace byte separates the header from the pixels
    return np.frombuffer(data, dtype=np.uint8, count=w * h * 3, offset=pos + 1).reshape(h, w, 3)


def write_image(path, img: np.ndarray, fmt: str = "ppm") -> str:
    """Write the image; PNG goes through Pillow, which is optional."""
    if fmt == "png":
        try:
            from PIL import Image
        except ImportError as exc:
            raise ConfigError("png output needs Pillow (pip install siegel-lab[png])") from exc

        path = str(path)
        Image.fromarray(img).save(path)
        return path
    write_ppm(path, img)
    return str(path)
