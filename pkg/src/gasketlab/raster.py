"""RGB raster images, binary PPM output, and the row-chunked render driver."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass
class RasterImage:
    """Row-major RGB8 image."""

    pixels: np.ndarray  # (height, width, 3) uint8

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


def ppm_bytes(img: RasterImage) -> bytes:
    """Binary PPM (P6), bit-exact: header then h*w*3 raw bytes."""
    header = f"P6\n{img.width} {img.height}\n255\n".encode("ascii")
    return header + img.pixels.astype(np.uint8).tobytes()


def write_ppm(img: RasterImage, path: str) -> None:
    try:
        with open(path, "wb") as fh:
            fh.write(ppm_bytes(img))
    except OSError as exc:
        raise OSError(f"cannot write image to {path!r}: {exc}") from exc


def default_threads() -> int:
    env = os.environ.get("GASKETLAB_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def render_rows(row_fn: Callable[[int, int], np.ndarray], width: int, height: int,
                threads: int | None = None) -> np.ndarray:
    """Assemble an image from ``row_fn(j0, j1) -> (j1-j0, width, 3)`` chunks.

    Chunks are computed on a thread pool (numpy releases the GIL in the inner
    loops) and written to disjoint row ranges, so output is deterministic.
    """
    threads = threads or default_threads()
    out = np.zeros((height, width, 3), dtype=np.uint8)
    chunk = max(8, height // (4 * threads) or 1)
    ranges = [(j, min(j + chunk, height)) for j in range(0, height, chunk)]
    if threads <= 1 or len(ranges) == 1:
        for j0, j1 in ranges:
            out[j0:j1] = row_fn(j0, j1)
        return out
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futs = {pool.submit(row_fn, j0, j1): (j0, j1) for j0, j1 in ranges}
        for fut, (j0, j1) in futs.items():
            out[j0:j1] = fut.result()
    return out


# fixed palettes (deterministic golden renders depend on these values)

BASIN_BASE = np.array([
    [230, 80, 60],    # basin of 0
    [70, 140, 230],   # basin of 1
    [90, 200, 110],   # basin of omega
    [235, 200, 70],   # basin of omega^2
    [200, 110, 220],  # extra components (tile ids beyond four, etc.)
    [120, 220, 220],
], dtype=np.float64)


def basin_colors(target: np.ndarray, time: np.ndarray, maxiter: int,
                 h: int, w: int) -> np.ndarray:
    """Color decided pixels by basin, shaded by arrival time; undecided black."""
    img = np.zeros((h, w, 3), dtype=np.uint8)
    dec = target >= 0
    if dec.any():
        shade = 1.0 - 0.7 * np.minimum(time[dec] / max(maxiter, 1), 1.0)
        base = BASIN_BASE[np.minimum(target[dec], len(BASIN_BASE) - 1) % len(BASIN_BASE)]
        img[dec] = np.clip(base * shade[:, None], 0, 255).astype(np.uint8)
    return img


TILE_BASE = np.array([
    [0, 0, 0],        # unused (component ids start at 1)
    [60, 120, 230],   # tiling component 1 (right)
    [80, 205, 120],   # tiling component 2 (upper left)
    [150, 90, 210],   # tiling component 3 (lower left)
], dtype=np.float64)


def two_class_colors(escaped: np.ndarray, comp: np.ndarray, time: np.ndarray,
                     maxiter: int, h: int, w: int) -> np.ndarray:
    """Basin-of-infinity yellow plus per-component tiling colors (Schwarz render)."""
    img = np.zeros((h, w, 3), dtype=np.uint8)
    esc = escaped
    if esc.any():
        shade = 1.0 - 0.6 * np.minimum(time[esc] / max(maxiter, 1), 1.0)
        img[esc] = np.clip(np.array([250.0, 230.0, 90.0]) * shade[:, None], 0, 255
                           ).astype(np.uint8)
    tile = (~escaped) & (comp > 0)
    if tile.any():
        base = TILE_BASE[np.clip(comp[tile], 1, 3)]
        shade = 1.0 - 0.5 * np.minimum(time[tile] / max(maxiter, 1), 1.0)
        img[tile] = np.clip(base * shade[:, None], 0, 255).astype(np.uint8)
    return img
