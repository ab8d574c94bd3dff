"""Path generation: clamped B-spline smoothing and grid A* searches.

Three planners, one per navigation mode. The fast mode draws a cubic
B-spline from pose to waypoint with a heading-tangent control point. The
mid mode runs 8-connected A* over the binary obstacle grid with an octile
heuristic (unknown cells are optimistically free). The cautious mode runs
A* over the costmap with edge weights scaled by cell cost; unknown cells
are blocked there.

All searches are deterministic: ties break on lower f, then lower h, then
row-major cell order.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidStartError, NoPathError, ValidationError
from .mapping import COST_MAX, CostGrid, OBSTACLE, ObstacleGrid
from .modes import NavMode

SQRT2 = math.sqrt(2.0)

PATH_SAMPLE_SPACING = 0.5
COST_EDGE_ALPHA = 4.0
COST_REPLAN_TOLERANCE = 80.0
SPLINE_TANGENT_LEN = 2.0

# Neighbor offsets in row-major order with their step lengths (cells).
_NEIGHBORS = (
    (-1, -1, SQRT2), (-1, 0, 1.0), (-1, 1, SQRT2),
    (0, -1, 1.0), (0, 1, 1.0),
    (1, -1, SQRT2), (1, 0, 1.0), (1, 1, SQRT2),
)


@dataclass
class Path:
    points: np.ndarray  # (N, 2)
    mode: NavMode | None = None
    created_at: float = 0.0

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float).reshape(-1, 2)
        if len(self.points) == 0:
            raise ValidationError("a path needs at least one point")
        if not np.isfinite(self.points).all():
            raise ValidationError("path coordinates must be finite")

    def __len__(self) -> int:
        return len(self.points)

    @property
    def end(self) -> np.ndarray:
        return self.points[-1]

    def length(self) -> float:
        if len(self.points) < 2:
            return 0.0
        return float(np.sum(np.hypot(*np.diff(self.points, axis=0).T)))

    def arc_lengths(self) -> np.ndarray:
        """Cumulative arc length at each point (starts at 0)."""
        if len(self.points) < 2:
            return np.zeros(1)
        seg = np.hypot(*np.diff(self.points, axis=0).T)
        return np.concatenate([[0.0], np.cumsum(seg)])

    def to_csv(self) -> str:
        return "\n".join(f"{x:.6f},{y:.6f}" for x, y in self.points)


@dataclass
class PlanRequest:
    start: tuple[float, float]
    goal: tuple[float, float]
    cost_threshold: int = COST_MAX
    mode: NavMode | None = None


def bspline_path(start, goal, heading: float, spacing: float = PATH_SAMPLE_SPACING,
                 created_at: float = 0.0) -> Path:
    """Smooth path from start to goal, tangent to the current heading.

    Cubic clamped B-spline (here: a Bezier segment) through four control
    points: start, a point SPLINE_TANGENT_LEN ahead along the heading, the
    start-goal midpoint, and the goal. Resampled at roughly `spacing` arc
    steps; first and last points equal start and goal exactly.
    """
    start = np.asarray(start, dtype=float)
    goal = np.asarray(goal, dtype=float)
    if np.allclose(start, goal):
        return Path(start[None, :], NavMode.EFFICIENT, created_at)
    ahead = start + SPLINE_TANGENT_LEN * np.array([math.cos(heading), math.sin(heading)])
    ctrl = np.stack([start, ahead, 0.5 * (start + goal), goal])

    u = np.linspace(0.0, 1.0, 512)
    b0 = (1 - u) ** 3
    b1 = 3 * u * (1 - u) ** 2
    b2 = 3 * u**2 * (1 - u)
    b3 = u**3
    dense = (b0[:, None] * ctrl[0] + b1[:, None] * ctrl[1]
             + b2[:, None] * ctrl[2] + b3[:, None] * ctrl[3])
    seg = np.hypot(*np.diff(dense, axis=0).T)
    arc = np.concatenate([[0.0], np.cumsum(seg)])
    total = arc[-1]
    n_samples = max(int(total / spacing), 1)
    targets = np.linspace(0.0, total, n_samples + 1)
    xs = np.interp(targets, arc, dense[:, 0])
    ys = np.interp(targets, arc, dense[:, 1])
    pts = np.column_stack([xs, ys])
    pts[0] = start
    pts[-1] = goal
    return Path(pts, NavMode.EFFICIENT, created_at)


def octile(dr: int, dc: int) -> float:
    """Shortest 8-connected distance between cells, in cell units."""
    dr, dc = abs(dr), abs(dc)
    return max(dr, dc) + (SQRT2 - 1.0) * min(dr, dc)


def astar_obstacle(grid: ObstacleGrid, start, goal, created_at: float = 0.0) -> Path:
    """Shortest path over the binary obstacle grid (8-connected).

    Unknown cells are treated as traversable at free cost, matching the
    behavior of planning beyond sensed range. Octile heuristic; diagonal
    steps cost sqrt(2).
    """
    rows, cols = grid.rows, grid.cols
    blocked = grid.cells == OBSTACLE
    sr, sc = _to_cell(grid, start)
    gr, gc = _to_cell(grid, goal)
    _check_bounds(rows, cols, sr, sc, gr, gc)
    if blocked[sr, sc]:
        raise InvalidStartError("start cell is inside an obstacle")
    if blocked[gr, gc]:
        raise NoPathError("goal cell is inside an obstacle")

    came, ok = _search(blocked, None, sr, sc, gr, gc, 1.0)
    if not ok:
        raise NoPathError("no obstacle-free path to the goal")
    return _reconstruct(grid, came, sr, sc, gr, gc, NavMode.SAFE, created_at)


def astar_cost(grid: CostGrid, start, goal, lethal: int = COST_MAX,
               alpha: float = COST_EDGE_ALPHA, created_at: float = 0.0) -> Path:
    """Minimum-weight path over the costmap (8-connected).

    Edge weight = step length * (1 + alpha * mean endpoint cost / 100).
    Cells at or past `lethal`, and unknown cells, are blocked: this planner
    must not commit the rover to unsensed ground.
    """
    rows, cols = grid.rows, grid.cols
    values = grid.values
    blocked = (values >= lethal) | (values < 0)
    sr, sc = _to_cell(grid, start)
    gr, gc = _to_cell(grid, goal)
    _check_bounds(rows, cols, sr, sc, gr, gc)
    if values[sr, sc] < 0 or values[sr, sc] >= lethal:
        raise InvalidStartError("start cell is lethal or unknown")
    if blocked[gr, gc]:
        raise NoPathError("goal cell is lethal or unknown")

    mult = 1.0 + alpha * values.astype(float) / 100.0
    came, ok = _search(blocked, mult, sr, sc, gr, gc, 1.0)
    if not ok:
        raise NoPathError("no admissible path to the goal")
    return _reconstruct(grid, came, sr, sc, gr, gc, NavMode.CONSERVATIVE, created_at)


def _search(blocked, mult, sr, sc, gr, gc, h_scale):
    """A* core. mult is the per-cell weight multiplier (None = uniform).

    Returns (came_from, reached). The heuristic is octile distance times the
    minimum possible edge multiplier (1.0), which is admissible and
    consistent for both planners.
    """
    rows, cols = blocked.shape
    start_idx = sr * cols + sc
    goal_idx = gr * cols + gc
    dist = {start_idx: 0.0}
    came: dict[int, int] = {}
    h0 = octile(sr - gr, sc - gc) * h_scale
    heap = [(h0, h0, start_idx)]
    closed = set()
    while heap:
        f, h, idx = heapq.heappop(heap)
        if idx in closed:
            continue
        if idx == goal_idx:
            return came, True
        closed.add(idx)
        g = dist[idx]
        r, c = divmod(idx, cols)
        for dr, dc, step_len in _NEIGHBORS:
            nr, nc = r + dr, c + dc
            if nr < 0 or nr >= rows or nc < 0 or nc >= cols:
                continue
            if blocked[nr, nc]:
                continue
            if mult is None:
                w = step_len
            else:
                w = step_len * 0.5 * (mult[r, c] + mult[nr, nc])
            nidx = nr * cols + nc
            ng = g + w
            if nidx not in dist or ng < dist[nidx] - 1e-12:
                dist[nidx] = ng
                came[nidx] = idx
                nh = octile(nr - gr, nc - gc) * h_scale
                heapq.heappush(heap, (ng + nh, nh, nidx))
    return came, False


def _reconstruct(grid, came, sr, sc, gr, gc, mode, created_at) -> Path:
    cols = grid.cols
    idx = gr * cols + gc
    cells = [idx]
    start_idx = sr * cols + sc
    while idx != start_idx:
        idx = came[idx]
        cells.append(idx)
    cells.reverse()
    rr = np.array([i // cols for i in cells])
    cc = np.array([i % cols for i in cells])
    xs = grid.origin[0] + (cc + 0.5) * grid.cell_size
    ys = grid.origin[1] + (rr + 0.5) * grid.cell_size
    return Path(np.column_stack([xs, ys]), mode, created_at)


def _to_cell(grid, point):
    x, y = float(point[0]), float(point[1])
    c = int(math.floor((x - grid.origin[0]) / grid.cell_size))
    r = int(math.floor((y - grid.origin[1]) / grid.cell_size))
    return r, c


def _check_bounds(rows, cols, sr, sc, gr, gc):
    if not (0 <= sr < rows and 0 <= sc < cols):
        raise InvalidStartError("start lies outside the grid")
    if not (0 <= gr < rows and 0 <= gc < cols):
        raise NoPathError("goal lies outside the grid")


def best_progress_path(grid: ObstacleGrid | CostGrid, start, goal,
                       lethal: int = COST_MAX, alpha: float = COST_EDGE_ALPHA,
                       created_at: float = 0.0) -> Path:
    """Path to the reachable cell that gets closest to an unreachable goal.

    Runs the same weighted search as the mode's planner but floods from the
    start instead of aiming at the goal, then picks the settled cell with
    the smallest Euclidean distance to the goal (ties: lower path weight,
    then row-major order). On a costmap, when no settled cell improves on
    the start (the rover is pressed against a wall), the target becomes the
    settled frontier cell nearest the goal - a reachable cell bordering
    unknown space - so fresh sensing from there can open the route. Falls
    back to a single-point path at the start cell when nothing else is
    reachable. Used when the direct planners report no path, so the rover
    can still make progress around large blocked regions.
    """
    if isinstance(grid, ObstacleGrid):
        blocked = grid.cells == OBSTACLE
        mult = None
        mode = NavMode.SAFE
    else:
        blocked = (grid.values >= lethal) | (grid.values < 0)
        mult = 1.0 + alpha * grid.values.astype(float) / 100.0
        mode = NavMode.CONSERVATIVE
    rows, cols = blocked.shape
    sr, sc = _to_cell(grid, start)
    if not (0 <= sr < rows and 0 <= sc < cols) or blocked[sr, sc]:
        raise InvalidStartError("start cell is blocked or outside the grid")
    gr, gc = _to_cell(grid, goal)

    start_idx = sr * cols + sc
    dist = {start_idx: 0.0}
    came: dict[int, int] = {}
    heap = [(0.0, start_idx)]
    closed = set()
    best = (math.inf, math.inf, start_idx)
    while heap:
        g, idx = heapq.heappop(heap)
        if idx in closed:
            continue
        closed.add(idx)
        r, c = divmod(idx, cols)
        d_goal = math.hypot(r - gr, c - gc)
        key = (d_goal, g, idx)
        if key < best:
            best = key
        for dr, dc, step_len in _NEIGHBORS:
            nr, nc = r + dr, c + dc
            if nr < 0 or nr >= rows or nc < 0 or nc >= cols or blocked[nr, nc]:
                continue
            if mult is None:
                w = step_len
            else:
                w = step_len * 0.5 * (mult[r, c] + mult[nr, nc])
            nidx = nr * cols + nc
            ng = g + w
            if nidx not in dist or ng < dist[nidx] - 1e-12:
                dist[nidx] = ng
                came[nidx] = idx
                heapq.heappush(heap, (ng, nidx))
    start_d_goal = math.hypot(sr - gr, sc - gc)
    min_progress_cells = 3.0 / grid.cell_size
    if mult is not None and best[0] >= start_d_goal - min_progress_cells and closed:
        # walled in: aim for the reachable frontier nearest the goal
        unknown = grid.values < 0
        near_unknown = np.zeros_like(unknown)
        for dr, dc, _ in _NEIGHBORS:
            src_r = slice(max(-dr, 0), rows - max(dr, 0))
            dst_r = slice(max(dr, 0), rows - max(-dr, 0))
            src_c = slice(max(-dc, 0), cols - max(dc, 0))
            dst_c = slice(max(dc, 0), cols - max(-dc, 0))
            near_unknown[dst_r, dst_c] |= unknown[src_r, src_c]
        frontier_best = None
        for idx in closed:
            r, c = divmod(idx, cols)
            if near_unknown[r, c]:
                key = (math.hypot(r - gr, c - gc), dist[idx], idx)
                if frontier_best is None or key < frontier_best:
                    frontier_best = key
        if frontier_best is not None:
            best = frontier_best
    tr, tc = divmod(best[2], cols)
    return _reconstruct(grid, came, sr, sc, tr, tc, mode, created_at)


def path_collides(path: Path, grid: ObstacleGrid | CostGrid, lethal: int = COST_MAX) -> bool:
    """True when any path point lands on an obstacle / lethal-cost cell.

    Points outside the grid are ignored, and unknown cells never collide:
    a collision requires positive evidence.
    """
    if isinstance(grid, ObstacleGrid):
        data = grid.cells
        hit = lambda v: v == OBSTACLE  # noqa: E731
    else:
        data = grid.values
        hit = lambda v: v >= lethal  # noqa: E731
    rows, cols = data.shape
    for x, y in path.points:
        c = int(math.floor((x - grid.origin[0]) / grid.cell_size))
        r = int(math.floor((y - grid.origin[1]) / grid.cell_size))
        if 0 <= r < rows and 0 <= c < cols and hit(data[r, c]):
            return True
    return False


def path_cost(path: Path, grid: CostGrid) -> float:
    """Mean cell cost over the path samples that land on known cells."""
    if len(path.points) == 0:
        raise ValidationError("path is empty")
    rows, cols = grid.values.shape
    total = 0.0
    count = 0
    for x, y in path.points:
        c = int(math.floor((x - grid.origin[0]) / grid.cell_size))
        r = int(math.floor((y - grid.origin[1]) / grid.cell_size))
        if 0 <= r < rows and 0 <= c < cols and grid.values[r, c] >= 0:
            total += float(grid.values[r, c])
            count += 1
    return total / count if count else 0.0
