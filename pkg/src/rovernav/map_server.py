"""Global costmap ownership, priority merging, waypoints, collision checks.

One server instance owns the mission-wide costmap (0-100 traversal cost,
-1 unknown) plus a per-cell record of which navigation mode wrote it.
Local maps merge in under a strict priority rule: data from a more cautious
mode is never overwritten by a less cautious one. The server also holds the
waypoint queue and runs the periodic path collision check that emits replan
signals.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from pathlib import Path as FsPath

import numpy as np

from .errors import MissionConfigError, ValidationError
from .mapping import COST_MAX, COST_UNKNOWN, CostGrid, OBSTACLE, ObstacleGrid
from .modes import NavMode
from .planning import COST_REPLAN_TOLERANCE, Path, path_collides, path_cost
from . import pgmio

DEFAULT_GLOBAL_RESOLUTION = 0.5


class ReplanReason(enum.Enum):
    COLLISION = "collision"
    COST_TOLERANCE = "cost_tolerance"


@dataclass
class GlobalCostmap:
    values: np.ndarray  # int16, -1 unknown
    source: np.ndarray  # uint8 mode priority, 0 = none
    origin: tuple[float, float]
    cell_size: float


@dataclass
class WaypointQueue:
    points: list[tuple[float, float]]
    cursor: int = 0

    def __post_init__(self):
        if self.cursor > len(self.points):
            raise ValidationError("cursor beyond queue length")

    def __len__(self) -> int:
        return len(self.points)

    @property
    def complete(self) -> bool:
        return self.cursor >= len(self.points)

    def current(self) -> tuple[float, float] | None:
        if self.complete:
            return None
        return self.points[self.cursor]

    def advance(self) -> None:
        if not self.complete:
            self.cursor += 1


class MapServer:
    def __init__(
        self,
        extent: tuple[float, float],
        resolution: float = DEFAULT_GLOBAL_RESOLUTION,
        cost_tolerance: float = COST_REPLAN_TOLERANCE,
        lethal: int = COST_MAX,
    ):
        if extent[0] <= 0 or extent[1] <= 0 or resolution <= 0:
            raise ValidationError("extent and resolution must be positive")
        cols = round(extent[0] / resolution)
        rows = round(extent[1] / resolution)
        self.global_map = GlobalCostmap(
            values=np.full((rows, cols), COST_UNKNOWN, dtype=np.int16),
            source=np.zeros((rows, cols), dtype=np.uint8),
            origin=(0.0, 0.0),
            cell_size=resolution,
        )
        self.cost_tolerance = cost_tolerance
        self.lethal = lethal
        self.waypoints: WaypointQueue | None = None

    # -- map updates --------------------------------------------------------

    def update_from_local(self, local: CostGrid | ObstacleGrid, mode: NavMode) -> int:
        """Merge a local map into the global costmap under mode priority.

        Known local cells write into the global map only where the incoming
        mode's priority is >= the priority already recorded for the cell.
        Equal priority overwrites (newer data refines older data of the
        same mode) with one ratchet: a lethal cell is never downgraded at
        equal priority, because a later sensing window with the hazard
        outside its bounds would otherwise erase inflation margins written
        by an earlier, better-placed window. Finer local grids max-pool
        into the coarser global cells. The fast mode performs no mapping,
        so its updates are no-ops. Returns the number of cells written.
        """
        if mode is NavMode.EFFICIENT:
            return 0
        if isinstance(local, ObstacleGrid):
            known = local.cells != -1
            values = np.where(local.cells == OBSTACLE, COST_MAX, 0).astype(np.int16)
        else:
            known = local.values >= 0
            values = local.values.astype(np.int16)
        if not known.any():
            return 0
        gm = self.global_map
        rows, cols = gm.values.shape
        rr, cc = np.nonzero(known)
        xs = local.origin[0] + (cc + 0.5) * local.cell_size
        ys = local.origin[1] + (rr + 0.5) * local.cell_size
        gc = np.floor((xs - gm.origin[0]) / gm.cell_size).astype(int)
        gr = np.floor((ys - gm.origin[1]) / gm.cell_size).astype(int)
        ok = (gr >= 0) & (gr < rows) & (gc >= 0) & (gc < cols)
        if not ok.any():
            return 0
        acc = np.full((rows, cols), COST_UNKNOWN, dtype=np.int16)
        np.maximum.at(acc, (gr[ok], gc[ok]), values[rr[ok], cc[ok]])
        downgrade = (gm.values >= self.lethal) & (mode.priority == gm.source) & (acc < self.lethal)
        writable = (acc >= 0) & (mode.priority >= gm.source) & ~downgrade
        gm.values[writable] = acc[writable]
        gm.source[writable] = mode.priority
        return int(np.count_nonzero(writable))

    # -- windows -------------------------------------------------------------

    def get_local_window(self, pose_xy, size: float, resolution: float) -> CostGrid:
        """Snapshot of the global map over a window around the pose.

        Nearest-neighbor resampling to the requested resolution; the window
        is clamped to the map extent. The returned grid is a copy and never
        changes as the global map keeps updating.
        """
        if size <= 0 or resolution <= 0:
            raise ValidationError("size and resolution must be positive")
        gm = self.global_map
        total_c = round(gm.values.shape[1] * gm.cell_size / resolution)
        total_r = round(gm.values.shape[0] * gm.cell_size / resolution)
        n = min(round(size / resolution), total_c, total_r)
        half = size / 2.0
        # Snap the window onto the requested-resolution lattice anchored at
        # the map origin, then clamp it inside the extent at full size.
        c0 = int(math.floor((pose_xy[0] - gm.origin[0] - half) / resolution))
        r0 = int(math.floor((pose_xy[1] - gm.origin[1] - half) / resolution))
        c0 = min(max(c0, 0), total_c - n)
        r0 = min(max(r0, 0), total_r - n)
        xs = gm.origin[0] + (np.arange(c0, c0 + n) + 0.5) * resolution
        ys = gm.origin[1] + (np.arange(r0, r0 + n) + 0.5) * resolution
        src_c = np.clip(((xs - gm.origin[0]) / gm.cell_size).astype(int), 0, gm.values.shape[1] - 1)
        src_r = np.clip(((ys - gm.origin[1]) / gm.cell_size).astype(int), 0, gm.values.shape[0] - 1)
        block = gm.values[np.ix_(src_r, src_c)].copy()
        origin = (gm.origin[0] + c0 * resolution, gm.origin[1] + r0 * resolution)
        return CostGrid(block, origin, resolution)

    # -- waypoints ------------------------------------------------------------

    def set_waypoints(self, queue: WaypointQueue) -> None:
        if len(queue) == 0:
            raise MissionConfigError("waypoint queue is empty")
        ex = self.global_map.values.shape[1] * self.global_map.cell_size
        ey = self.global_map.values.shape[0] * self.global_map.cell_size
        for x, y in queue.points:
            if not (0 <= x <= ex and 0 <= y <= ey):
                raise MissionConfigError(f"waypoint ({x:.1f}, {y:.1f}) outside the map extent")
        self.waypoints = queue

    def next_waypoint(self) -> tuple[float, float] | None:
        """Current waypoint, or None once the queue is exhausted."""
        if self.waypoints is None:
            raise MissionConfigError("waypoint queue not initialized")
        return self.waypoints.current()

    def advance_waypoint(self, pose_xy, tolerance: float) -> bool:
        """Advance the cursor when the rover is within tolerance. Returns
        True when an advance happened."""
        wp = self.next_waypoint()
        if wp is None:
            return False
        if math.hypot(wp[0] - pose_xy[0], wp[1] - pose_xy[1]) <= tolerance:
            self.waypoints.advance()
            return True
        return False

    # -- collision checks ------------------------------------------------------

    def collision_check_tick(self, active_path: Path | None, mode: NavMode) -> ReplanReason | None:
        """1 Hz check of the active path against the global map."""
        if active_path is None:
            return None
        gm = self.global_map
        snapshot = CostGrid(gm.values, gm.origin, gm.cell_size)
        if path_collides(active_path, snapshot, lethal=self.lethal):
            return ReplanReason.COLLISION
        if mode is NavMode.CONSERVATIVE and path_cost(active_path, snapshot) > self.cost_tolerance:
            return ReplanReason.COST_TOLERANCE
        return None

    # -- dump -------------------------------------------------------------------

    def dump(self, out_dir) -> None:
        """Write the value graymap, source-mode overlay, and metadata."""
        out = FsPath(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        gm = self.global_map
        pixels = np.where(gm.values < 0, 255, gm.values).astype(np.uint8)
        pgmio.write_pgm(out / "global_cost.pgm", pixels, maxval=255)
        colors = np.array(
            [[40, 40, 40], [80, 200, 120], [240, 180, 60], [200, 70, 70]], dtype=np.uint8
        )
        overlay = colors[gm.source]
        pgmio.write_ppm(out / "global_source.ppm", overlay)
        meta = {
            "origin": list(gm.origin),
            "cell_size": gm.cell_size,
            "unknown_pixel": 255,
            "source_codes": {"none": 0, "efficient": 1, "safe": 2, "conservative": 3},
        }
        (out / "global_map.json").write_text(json.dumps(meta, indent=2, sort_keys=True), encoding="utf-8")
