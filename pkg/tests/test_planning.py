import math

import numpy as np
import pytest

from rovernav.errors import InvalidStartError, NoPathError
from rovernav.mapping import CostGrid, FREE, OBSTACLE, ObstacleGrid, UNKNOWN
from rovernav.planning import (
    astar_cost,
    astar_obstacle,
    bspline_path,
    octile,
    path_collides,
    path_cost,
)

from oracles import dijkstra_grid_length, dijkstra_weighted_cost, point_segment_distance

SQRT2 = math.sqrt(2.0)


def obstacle_grid(cells, cell_size=1.0):
    return ObstacleGrid(np.asarray(cells, dtype=np.int8), (0.0, 0.0), cell_size)


def cost_grid(values, cell_size=1.0):
    return CostGrid(np.asarray(values, dtype=np.int16), (0.0, 0.0), cell_size)


def center(r, c, cs=1.0):
    return ((c + 0.5) * cs, (r + 0.5) * cs)


class TestBattleSpline:
    def test_degenerate_single_point(self):
        path = bspline_path((3.0, 4.0), (3.0, 4.0), 0.0)
        assert len(path) == 1
        assert tuple(path.points[0]) == (3.0, 4.0)

    def test_endpoints_exact(self):
        path = bspline_path((0.0, 0.0), (17.3, -4.2), 0.4)
        assert tuple(path.points[0]) == (0.0, 0.0)
        assert tuple(path.points[-1]) == (17.3, -4.2)

    def test_collinear_controls_stay_on_segment(self):
        # heading along the start-goal line puts all control points on it
        path = bspline_path((0.0, 0.0), (20.0, 0.0), 0.0)
        for p in path.points:
            assert point_segment_distance(p, (0.0, 0.0), (20.0, 0.0)) < 1e-6

    def test_samples_inside_control_hull(self):
        start, goal, heading = (0.0, 0.0), (12.0, 6.0), 1.2
        path = bspline_path(start, goal, heading)
        ctrl = np.array([
            start,
            (2.0 * math.cos(heading), 2.0 * math.sin(heading)),
            (6.0, 3.0),
            goal,
        ])
        lo = ctrl.min(axis=0) - 1e-9
        hi = ctrl.max(axis=0) + 1e-9
        # bounding box of the hull contains the hull
        assert (path.points >= lo).all() and (path.points <= hi).all()

    def test_sample_spacing(self):
        path = bspline_path((0.0, 0.0), (30.0, 0.0), 0.0)
        gaps = np.hypot(*np.diff(path.points, axis=0).T)
        assert gaps.max() < 0.75
        assert gaps.min() > 0.2


class TestAstarObstacle:
    def test_empty_grid_diagonal(self):
        grid = obstacle_grid(np.zeros((20, 20)))
        path = astar_obstacle(grid, center(0, 0), center(19, 19))
        assert path.length() == pytest.approx(19 * SQRT2)
        oracle = dijkstra_grid_length(np.zeros((20, 20), dtype=bool), (0, 0), (19, 19))
        assert path.length() == pytest.approx(oracle)

    def test_enclosed_goal_unreachable(self):
        cells = np.zeros((10, 10))
        cells[4:7, 4:7] = OBSTACLE
        cells[5, 5] = FREE
        with pytest.raises(NoPathError):
            astar_obstacle(obstacle_grid(cells), center(0, 0), center(5, 5))

    def test_wall_with_gap(self):
        cells = np.zeros((11, 11))
        cells[:, 5] = OBSTACLE
        cells[7, 5] = FREE
        grid = obstacle_grid(cells)
        path = astar_obstacle(grid, center(2, 1), center(2, 9))
        cols = ((path.points[:, 0]) - 0.5).round().astype(int)
        rows = ((path.points[:, 1]) - 0.5).round().astype(int)
        on_wall = [tuple(p) for p in zip(rows, cols) if p[1] == 5]
        assert on_wall == [(7, 5)]
        blocked = cells == OBSTACLE
        assert path.length() == pytest.approx(
            dijkstra_grid_length(blocked.tolist(), (2, 1), (2, 9)))

    def test_start_in_obstacle_rejected(self):
        cells = np.zeros((5, 5))
        cells[2, 2] = OBSTACLE
        with pytest.raises(InvalidStartError):
            astar_obstacle(obstacle_grid(cells), center(2, 2), center(0, 0))

    def test_unknown_cells_traversable(self):
        cells = np.full((9, 9), UNKNOWN)
        cells[0, 0] = FREE
        cells[8, 8] = FREE
        path = astar_obstacle(obstacle_grid(cells), center(0, 0), center(8, 8))
        assert path.length() == pytest.approx(8 * SQRT2)

    def test_matches_oracle_on_random_grids(self, rng):
        for _ in range(60):
            cells = (rng.random((30, 30)) < 0.25).astype(np.int8)
            cells[0, 0] = FREE
            cells[29, 29] = FREE
            grid = obstacle_grid(cells)
            oracle = dijkstra_grid_length(cells == OBSTACLE, (0, 0), (29, 29))
            if oracle is None:
                with pytest.raises(NoPathError):
                    astar_obstacle(grid, center(0, 0), center(29, 29))
            else:
                path = astar_obstacle(grid, center(0, 0), center(29, 29))
                assert path.length() == pytest.approx(oracle, abs=1e-9)


class TestAstarCost:
    def test_uniform_grid_matches_geometry(self):
        values = np.full((15, 15), 20)
        path = astar_cost(cost_grid(values), center(0, 0), center(14, 14))
        assert path.length() == pytest.approx(14 * SQRT2)

    def test_detour_around_expensive_strip(self):
        # a 4-cell-wide cost-90 strip with a free gap along the top row:
        # crossing straight costs ~14 extra weight, the detour only ~3.3
        values = np.zeros((9, 21), dtype=int)
        values[:, 9:13] = 90
        values[0, 9:13] = 0
        path = astar_cost(cost_grid(values), center(4, 2), center(4, 18))
        rows = ((path.points[:, 1]) - 0.5).round().astype(int)
        cols = ((path.points[:, 0]) - 0.5).round().astype(int)
        crossing_rows = {r for r, c in zip(rows, cols) if 9 <= c <= 12}
        assert crossing_rows == {0}
        oracle = dijkstra_weighted_cost(values.tolist(), (4, 2), (4, 18))
        assert _path_weight(path, values) == pytest.approx(oracle, abs=1e-9)

    def test_unknown_blocked(self):
        values = np.zeros((9, 9), dtype=int)
        values[:, 4] = -1
        with pytest.raises(NoPathError):
            astar_cost(cost_grid(values), center(4, 0), center(4, 8))

    def test_lethal_start_rejected(self):
        values = np.zeros((5, 5), dtype=int)
        values[2, 2] = 100
        with pytest.raises(InvalidStartError):
            astar_cost(cost_grid(values), center(2, 2), center(0, 0))

    def test_deterministic_tie_break(self):
        values = np.zeros((12, 12), dtype=int)
        a = astar_cost(cost_grid(values), center(0, 0), center(0, 11))
        b = astar_cost(cost_grid(values), center(0, 0), center(0, 11))
        assert np.array_equal(a.points, b.points)

    def test_matches_weighted_oracle_on_random_grids(self, rng):
        for _ in range(60):
            values = rng.integers(0, 100, size=(25, 25)).astype(np.int16)
            values[rng.random((25, 25)) < 0.1] = 100
            values[0, 0] = min(int(values[0, 0]), 99)
            values[24, 24] = min(int(values[24, 24]), 99)
            grid = cost_grid(values)
            oracle = dijkstra_weighted_cost(values.tolist(), (0, 0), (24, 24))
            if oracle is None:
                with pytest.raises(NoPathError):
                    astar_cost(grid, center(0, 0), center(24, 24))
                continue
            path = astar_cost(grid, center(0, 0), center(24, 24))
            weight = _path_weight(path, values)
            assert weight == pytest.approx(oracle, abs=1e-9)


def _path_weight(path, values, cell_size=1.0, alpha=4.0):
    total = 0.0
    cells = [(int(y // cell_size), int(x // cell_size)) for x, y in path.points]
    for (r0, c0), (r1, c1) in zip(cells, cells[1:]):
        step = math.hypot(r1 - r0, c1 - c0) * cell_size
        total += step * (1.0 + alpha * 0.5 * (values[r0][c0] + values[r1][c1]) / 100.0)
    return total


class TestPathChecks:
    def test_collision_on_obstacle_cell(self):
        cells = np.zeros((10, 10))
        cells[5, 5] = OBSTACLE
        grid = obstacle_grid(cells)
        path = astar_obstacle(grid, center(5, 0), center(5, 9))
        hit = type(path)(np.array([[5.5, 5.5]]))
        assert path_collides(hit, grid)
        assert not path_collides(path, grid)

    def test_unknown_cells_do_not_collide(self):
        cells = np.full((6, 6), UNKNOWN)
        grid = obstacle_grid(cells)
        probe = astar_obstacle(
            obstacle_grid(np.zeros((6, 6))), center(0, 0), center(5, 5))
        assert not path_collides(probe, grid)

    def test_points_outside_grid_ignored(self):
        cells = np.zeros((4, 4))
        grid = obstacle_grid(cells)
        from rovernav.planning import Path

        path = Path(np.array([[100.0, 100.0], [-5.0, 2.0]]))
        assert not path_collides(path, grid)

    def test_cost_lethal_collides(self):
        values = np.zeros((4, 4), dtype=int)
        values[1, 1] = 100
        from rovernav.planning import Path

        assert path_collides(Path(np.array([[1.5, 1.5]])), cost_grid(values))

    def test_path_cost_mean(self):
        from rovernav.planning import Path

        values = np.zeros((4, 8), dtype=int)
        values[:, :4] = 20
        values[:, 4:] = 60
        grid = cost_grid(values)
        pts = np.column_stack([np.arange(8) + 0.5, np.full(8, 1.5)])
        assert path_cost(Path(pts), grid) == pytest.approx(40.0)

    def test_path_cost_constant(self):
        from rovernav.planning import Path

        values = np.full((4, 4), 40, dtype=int)
        pts = np.array([[0.5, 0.5], [1.5, 1.5], [2.5, 2.5]])
        assert path_cost(Path(pts), cost_grid(values)) == 40.0

    def test_path_cost_unknown_only_is_zero(self):
        from rovernav.planning import Path

        values = np.full((4, 4), -1, dtype=int)
        assert path_cost(Path(np.array([[1.5, 1.5]])), cost_grid(values)) == 0.0


class TestOctile:
    def test_known_values(self):
        assert octile(0, 5) == 5.0
        assert octile(3, 3) == pytest.approx(3 * SQRT2)
        assert octile(2, 5) == pytest.approx(5 + (SQRT2 - 1) * 2)
