"""Local mapping: elevation rasterization, obstacle extraction, costmaps.

Sensed point clouds become elevation grids (max-z per cell, so thin
obstacles survive). From there two products are derived: a binary obstacle
grid for the mid-tier navigation mode, and a 0-100 traversal costmap for
the cautious mode, built from slope, roughness, and step-height features.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np
from scipy import ndimage

from .errors import ValidationError
from .grids import disk_footprint, plane_fit_grid, slope_degrees
from . import pgmio

FREE = 0
OBSTACLE = 1
UNKNOWN = -1

COST_MAX = 100
COST_UNKNOWN = -1

# Rock rims at 0.5 m cells produce median-difference signals of only
# ~0.2 m (a smooth flank looks locally planar to a 3x3 median), so the
# threshold sits well below that while staying far above sensor noise.
DEFAULT_OBSTACLE_HEIGHT = 0.12
# Obstacle/lethal inflation: circumscribed rover radius (2.3 m) plus the
# worst-case cell quantization of the sensed rim and the global-map storage
# (2 x 0.35 m at 0.5 m cells) plus tracking error.
DEFAULT_INFLATION_RADIUS = 3.5


class GridGeometry(NamedTuple):
    rows: int
    cols: int
    origin: tuple[float, float]
    cell_size: float


@dataclass
class ElevationGrid:
    """Per-cell elevation with an explicit known mask."""

    elevation: np.ndarray
    known: np.ndarray
    origin: tuple[float, float]
    cell_size: float

    @property
    def rows(self) -> int:
        return self.elevation.shape[0]

    @property
    def cols(self) -> int:
        return self.elevation.shape[1]

    @property
    def geometry(self) -> GridGeometry:
        return GridGeometry(self.rows, self.cols, self.origin, self.cell_size)


@dataclass
class ObstacleGrid:
    """Ternary occupancy: FREE, OBSTACLE, or UNKNOWN per cell."""

    cells: np.ndarray  # int8
    origin: tuple[float, float]
    cell_size: float

    @property
    def rows(self) -> int:
        return self.cells.shape[0]

    @property
    def cols(self) -> int:
        return self.cells.shape[1]


@dataclass
class CostGrid:
    """Traversal cost per cell: integers 0..100, or -1 for unknown."""

    values: np.ndarray  # int16
    origin: tuple[float, float]
    cell_size: float

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]

    def copy(self) -> "CostGrid":
        return CostGrid(self.values.copy(), self.origin, self.cell_size)


def build_elevation_grid(points: np.ndarray, geometry: GridGeometry) -> ElevationGrid:
    """Rasterize (x, y, z) points onto a grid, keeping the max z per cell.

    Cells that receive no points stay unknown. Points outside the geometry
    are dropped.
    """
    rows, cols, origin, cell = geometry
    elevation = np.zeros((rows, cols))
    known = np.zeros((rows, cols), dtype=bool)
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    if len(pts) == 0:
        return ElevationGrid(elevation, known, origin, cell)
    c = np.floor((pts[:, 0] - origin[0]) / cell).astype(int)
    r = np.floor((pts[:, 1] - origin[1]) / cell).astype(int)
    ok = (r >= 0) & (r < rows) & (c >= 0) & (c < cols)
    r, c, z = r[ok], c[ok], pts[ok, 2]
    acc = np.full((rows, cols), -np.inf)
    np.maximum.at(acc, (r, c), z)
    known = np.isfinite(acc)
    elevation[known] = acc[known]
    return ElevationGrid(elevation, known, origin, cell)


def extract_obstacles(
    elev: ElevationGrid,
    h_obstacle: float = DEFAULT_OBSTACLE_HEIGHT,
    inflate_radius: float = DEFAULT_INFLATION_RADIUS,
) -> ObstacleGrid:
    """Mark cells that stand out from their 3x3 neighborhood as obstacles.

    A cell is an obstacle when |z - median(known 3x3 neighborhood)| exceeds
    h_obstacle; the rule is symmetric, so both rocks and pits register, and
    it only sees elevation differences, so a constant offset changes
    nothing. Obstacles are then inflated into surrounding free cells by
    inflate_radius; unknown cells stay unknown.
    """
    if elev.rows == 0 or elev.cols == 0:
        raise ValidationError("elevation grid is empty")
    z = elev.elevation
    known = elev.known
    stack = np.full((9, elev.rows, elev.cols), np.nan)
    idx = 0
    for dr in (-1, 0, 1):
        for dc in (-1, 0, 1):
            shifted = np.full_like(z, np.nan)
            src_r = slice(max(-dr, 0), elev.rows - max(dr, 0))
            dst_r = slice(max(dr, 0), elev.rows - max(-dr, 0))
            src_c = slice(max(-dc, 0), elev.cols - max(dc, 0))
            dst_c = slice(max(dc, 0), elev.cols - max(-dc, 0))
            block = np.where(known, z, np.nan)[src_r, src_c]
            shifted[dst_r, dst_c] = block
            stack[idx] = shifted
            idx += 1
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        median = np.nanmedian(stack, axis=0)
    raw = known & np.isfinite(median) & (np.abs(z - median) > h_obstacle)

    cells = np.full((elev.rows, elev.cols), UNKNOWN, dtype=np.int8)
    cells[known] = FREE
    if inflate_radius > 0 and raw.any():
        footprint = disk_footprint(inflate_radius / elev.cell_size)
        inflated = ndimage.binary_dilation(raw, structure=footprint)
        cells[known & inflated] = OBSTACLE
    else:
        cells[raw] = OBSTACLE
    return ObstacleGrid(cells, elev.origin, elev.cell_size)


@dataclass(frozen=True)
class CostWeights:
    """Weights and saturation limits for the traversal-cost features.

    Slope dominates; any feature at or past its limit makes the cell
    lethal (cost 100) outright so a cliff can never be traded against
    smooth surroundings. Step height is measured on slope-detrended
    elevation within step_radius, so a smooth incline contributes no step.
    """

    w_slope: float = 0.5
    w_rough: float = 0.3
    w_step: float = 0.2
    slope_max_deg: float = 30.0
    rough_max: float = 0.15
    step_max: float = 0.3
    fit_window_m: float = 4.6
    step_radius_m: float = 0.5


def compute_costmap(elev: ElevationGrid, weights: CostWeights = CostWeights()) -> CostGrid:
    """Traversal cost from slope, roughness, and residual step height.

    Per known cell: fit a plane over the footprint-scaled window (slope =
    plane inclination, roughness = RMS residual of the fit), then measure
    the largest detrended elevation jump to any cell within step_radius.
    cost = round(100 * (w_s*min(s/s_max,1) + w_r*min(r/r_max,1) +
    w_h*min(h/h_max,1))), forced to 100 when any feature saturates.
    Unknown cells map to -1.
    """
    if elev.rows == 0 or elev.cols == 0:
        raise ValidationError("elevation grid is empty")
    cell = elev.cell_size
    win = max(int(round(weights.fit_window_m / cell)) | 1, 3)
    a, b, c, rough, _count = plane_fit_grid(elev.elevation, elev.known, win, cell)
    slope = slope_degrees(a, b)

    res = np.where(elev.known, elev.elevation - c, 0.0)
    ring = disk_footprint(max(weights.step_radius_m / cell, 1.0))
    res_hi = ndimage.maximum_filter(np.where(elev.known, res, -np.inf), footprint=ring, mode="nearest")
    res_lo = ndimage.minimum_filter(np.where(elev.known, res, np.inf), footprint=ring, mode="nearest")
    step = np.maximum(res - res_lo, res_hi - res)
    step = np.where(np.isfinite(step), step, 0.0)

    f_s = np.minimum(slope / weights.slope_max_deg, 1.0)
    f_r = np.minimum(rough / weights.rough_max, 1.0)
    f_h = np.minimum(step / weights.step_max, 1.0)
    cost = 100.0 * (weights.w_slope * f_s + weights.w_rough * f_r + weights.w_step * f_h)
    lethal = (slope >= weights.slope_max_deg) | (rough >= weights.rough_max) | (step >= weights.step_max)
    cost[lethal] = float(COST_MAX)

    values = np.rint(cost).astype(np.int16)
    values = np.clip(values, 0, COST_MAX)
    values[~elev.known] = COST_UNKNOWN
    return CostGrid(values, elev.origin, elev.cell_size)


def cost_features(elev: ElevationGrid, weights: CostWeights = CostWeights()):
    """Unrounded cost plus the raw (slope_deg, roughness, step) features."""
    cell = elev.cell_size
    win = max(int(round(weights.fit_window_m / cell)) | 1, 3)
    a, b, c, rough, _ = plane_fit_grid(elev.elevation, elev.known, win, cell)
    slope = slope_degrees(a, b)
    res = np.where(elev.known, elev.elevation - c, 0.0)
    ring = disk_footprint(max(weights.step_radius_m / cell, 1.0))
    res_hi = ndimage.maximum_filter(np.where(elev.known, res, -np.inf), footprint=ring, mode="nearest")
    res_lo = ndimage.minimum_filter(np.where(elev.known, res, np.inf), footprint=ring, mode="nearest")
    step = np.maximum(res - res_lo, res_hi - res)
    step = np.where(np.isfinite(step), step, 0.0)
    f = 100.0 * (
        weights.w_slope * np.minimum(slope / weights.slope_max_deg, 1.0)
        + weights.w_rough * np.minimum(rough / weights.rough_max, 1.0)
        + weights.w_step * np.minimum(step / weights.step_max, 1.0)
    )
    lethal = (slope >= weights.slope_max_deg) | (rough >= weights.rough_max) | (step >= weights.step_max)
    f[lethal] = 100.0
    return f, slope, rough, step


def build_navigation_costmap(
    elev: ElevationGrid,
    weights: CostWeights = CostWeights(),
    slope_inflation: float = DEFAULT_INFLATION_RADIUS,
    bump_inflation: float = 1.5,
) -> CostGrid:
    """Costmap with per-source lethal inflation for planning use.

    Slope-lethal cells mark the hazard itself, so they inflate by the full
    footprint-plus-margin radius. Roughness- and step-lethal cells already
    extend half a fit window beyond the bump that caused them; they only
    need a small quantization-and-tracking margin, or every boulder would
    seal the corridors around it.
    """
    cost = compute_costmap(elev, weights)
    _, slope, rough, step = cost_features(elev, weights)
    out = cost.values.copy()
    for mask, radius in (
        (slope >= weights.slope_max_deg, slope_inflation),
        ((rough >= weights.rough_max) | (step >= weights.step_max), bump_inflation),
    ):
        mask = mask & elev.known
        if radius > 0 and mask.any():
            grown = ndimage.binary_dilation(mask, structure=disk_footprint(radius / elev.cell_size))
            out[grown & (cost.values >= 0)] = COST_MAX
    return CostGrid(out, cost.origin, cost.cell_size)


def inflate_lethal(cost: CostGrid, radius: float) -> CostGrid:
    """Dilate lethal (cost 100) cells by the rover footprint radius.

    Keeps the planner's center-point paths clear of lethal terrain by the
    rover's own size. Unknown cells stay unknown.
    """
    out = cost.values.copy()
    lethal = cost.values >= COST_MAX
    if radius > 0 and lethal.any():
        footprint = disk_footprint(radius / cost.cell_size)
        grown = ndimage.binary_dilation(lethal, structure=footprint)
        out[grown & (cost.values >= 0)] = COST_MAX
    return CostGrid(out, cost.origin, cost.cell_size)


def obstacle_to_cost(grid: ObstacleGrid) -> CostGrid:
    """Binary occupancy as a cost layer: obstacle -> 100, free -> 0."""
    values = np.full(grid.cells.shape, COST_UNKNOWN, dtype=np.int16)
    values[grid.cells == FREE] = 0
    values[grid.cells == OBSTACLE] = COST_MAX
    return CostGrid(values, grid.origin, grid.cell_size)


def cost_to_obstacle(grid: CostGrid, lethal: int = COST_MAX) -> ObstacleGrid:
    """Binarize a cost layer: cost >= lethal -> obstacle, known -> free."""
    cells = np.full(grid.values.shape, UNKNOWN, dtype=np.int8)
    cells[grid.values >= 0] = FREE
    cells[grid.values >= lethal] = OBSTACLE
    return ObstacleGrid(cells, grid.origin, grid.cell_size)


# --- serialization ---------------------------------------------------------

_UNKNOWN_PIXEL = 255


def save_grid(grid: ObstacleGrid | CostGrid, path_stem) -> None:
    """Write a grid as graymap + metadata sidecar.

    Pixel encoding: cost/occupancy value as-is, 255 for unknown (documented
    in the sidecar).
    """
    stem = Path(path_stem)
    if isinstance(grid, ObstacleGrid):
        data = grid.cells.astype(np.int16)
        kind = "obstacle"
    else:
        data = grid.values.astype(np.int16)
        kind = "cost"
    pixels = np.where(data < 0, _UNKNOWN_PIXEL, data).astype(np.uint8)
    pgmio.write_pgm(stem.with_suffix(".pgm"), pixels, maxval=255)
    meta = {
        "kind": kind,
        "origin": list(grid.origin),
        "cell_size": grid.cell_size,
        "unknown_pixel": _UNKNOWN_PIXEL,
    }
    stem.with_suffix(".json").write_text(json.dumps(meta, indent=2, sort_keys=True), encoding="utf-8")


def load_grid(path_stem) -> ObstacleGrid | CostGrid:
    stem = Path(path_stem)
    meta = json.loads(stem.with_suffix(".json").read_text(encoding="utf-8"))
    pixels, _ = pgmio.read_pgm(stem.with_suffix(".pgm"))
    data = pixels.astype(np.int16)
    data[pixels == meta["unknown_pixel"]] = -1
    origin = tuple(meta["origin"])
    if meta["kind"] == "obstacle":
        return ObstacleGrid(data.astype(np.int8), origin, meta["cell_size"])
    return CostGrid(data, origin, meta["cell_size"])
