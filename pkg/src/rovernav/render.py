"""Plain-pixmap rendering of terrain, maps, and trajectories.

Everything draws into (H, W, 3) uint8 arrays written as binary P6 files,
so outputs stay diffable and dependency-free. Row 0 of the arrays is the
minimum-y edge; viewers show the world flipped, which is fine for
diagnostics.
"""

from __future__ import annotations

import math

import numpy as np

from .mapping import CostGrid
from .modes import NavMode
from .terrain import HeightField, Terrain

MODE_COLORS = {
    NavMode.EFFICIENT.value: (80, 200, 120),
    NavMode.SAFE.value: (245, 180, 60),
    NavMode.CONSERVATIVE.value: (205, 75, 75),
}
UNKNOWN_COLOR = (70, 90, 140)


def hillshade(fld: HeightField) -> np.ndarray:
    """Lambertian shading with light from the north-west, uint8."""
    gy, gx = np.gradient(fld.elevation, fld.cell_size)
    lx, ly, lz = -0.5, 0.5, math.sqrt(0.5)
    norm = 1.0 / np.sqrt(gx * gx + gy * gy + 1.0)
    shade = (-gx * lx - gy * ly + lz) * norm
    lo, hi = float(shade.min()), float(shade.max())
    if hi - lo < 1e-12:
        return np.full(fld.elevation.shape, 180, dtype=np.uint8)
    return (40 + 200 * (shade - lo) / (hi - lo)).astype(np.uint8)


def render_terrain(terrain: Terrain, scale: float = 1.0) -> np.ndarray:
    """Shaded relief of the full surface, tinted rust like dry regolith."""
    gray = hillshade(terrain.full_field()).astype(float)
    rgb = np.stack([gray * 0.95, gray * 0.62, gray * 0.45], axis=-1)
    return np.clip(rgb, 0, 255).astype(np.uint8)


def render_cost(grid: CostGrid) -> np.ndarray:
    """Costs as grayscale; unknown cells in a distinct blue."""
    vals = grid.values
    gray = np.clip(vals.astype(float) / 100.0 * 255.0, 0, 255).astype(np.uint8)
    rgb = np.stack([gray, gray, gray], axis=-1)
    rgb[vals < 0] = UNKNOWN_COLOR
    return rgb


def draw_trajectory(image: np.ndarray, rows: list[str], origin, cell_size: float,
                    thickness: int = 1) -> np.ndarray:
    """Overlay trajectory-log rows onto an image, colored by active mode.

    Rows use the trajectory CSV layout: time,x,y,heading,speed,mode.
    """
    out = image.copy()
    h, w = out.shape[:2]
    for row in rows:
        parts = row.strip().split(",")
        if len(parts) != 6 or parts[0] == "time":
            continue
        x, y = float(parts[1]), float(parts[2])
        mode = parts[5]
        color = MODE_COLORS.get(mode, (255, 255, 255))
        c = int((x - origin[0]) / cell_size)
        r = int((y - origin[1]) / cell_size)
        for dr in range(-thickness, thickness + 1):
            for dc in range(-thickness, thickness + 1):
                rr, cc = r + dr, c + dc
                if 0 <= rr < h and 0 <= cc < w:
                    out[rr, cc] = color
    return out


def draw_points(image: np.ndarray, points, origin, cell_size: float,
                color=(255, 255, 255), radius: int = 2) -> np.ndarray:
    out = image.copy()
    h, w = out.shape[:2]
    for x, y in points:
        c = int((x - origin[0]) / cell_size)
        r = int((y - origin[1]) / cell_size)
        for dr in range(-radius, radius + 1):
            for dc in range(-radius, radius + 1):
                if dr * dr + dc * dc <= radius * radius:
                    rr, cc = r + dr, c + dc
                    if 0 <= rr < h and 0 <= cc < w:
                        out[rr, cc] = color
    return out
