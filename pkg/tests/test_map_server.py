import numpy as np
import pytest

from rovernav.errors import MissionConfigError
from rovernav.map_server import MapServer, ReplanReason, WaypointQueue
from rovernav.mapping import CostGrid, ObstacleGrid
from rovernav.modes import NavMode
from rovernav.planning import Path


def cost_local(values, origin, cell=0.5):
    return CostGrid(np.asarray(values, dtype=np.int16), origin, cell)


def obstacle_local(cells, origin, cell=0.5):
    return ObstacleGrid(np.asarray(cells, dtype=np.int8), origin, cell)


def server(extent=(40.0, 40.0)):
    return MapServer(extent)


class TestUpdatePriority:
    def test_unknown_accepts_any_mode(self):
        srv = server()
        written = srv.update_from_local(cost_local([[40]], (10.0, 10.0)), NavMode.SAFE)
        assert written == 1
        r, c = 20, 20  # cell containing (10.25, 10.25) at 0.5 m
        assert srv.global_map.values[r, c] == 40
        assert srv.global_map.source[r, c] == NavMode.SAFE.priority

    def test_lower_mode_cannot_overwrite_higher(self):
        srv = server()
        srv.update_from_local(cost_local([[70]], (10.0, 10.0)), NavMode.CONSERVATIVE)
        srv.update_from_local(cost_local([[5]], (10.0, 10.0)), NavMode.SAFE)
        assert srv.global_map.values[20, 20] == 70
        assert srv.global_map.source[20, 20] == NavMode.CONSERVATIVE.priority

    def test_equal_priority_overwrites(self):
        srv = server()
        srv.update_from_local(cost_local([[70]], (10.0, 10.0)), NavMode.SAFE)
        srv.update_from_local(cost_local([[20]], (10.0, 10.0)), NavMode.SAFE)
        assert srv.global_map.values[20, 20] == 20

    def test_efficient_mode_writes_nothing(self):
        srv = server()
        written = srv.update_from_local(cost_local([[50]], (10.0, 10.0)), NavMode.EFFICIENT)
        assert written == 0
        assert (srv.global_map.values == -1).all()

    def test_obstacle_grid_binarized(self):
        srv = server()
        srv.update_from_local(obstacle_local([[1, 0], [-1, 0]], (10.0, 10.0)), NavMode.SAFE)
        assert srv.global_map.values[20, 20] == 100
        assert srv.global_map.values[20, 21] == 0
        assert srv.global_map.values[21, 20] == -1  # unknown never written

    def test_fine_grid_max_pools(self):
        vals = np.zeros((5, 5), dtype=np.int16)
        vals[2, 2] = 80
        srv = server()
        srv.update_from_local(cost_local(vals, (10.0, 10.0), cell=0.1), NavMode.CONSERVATIVE)
        assert srv.global_map.values[20, 20] == 80

    def test_outside_extent_noop(self):
        srv = server()
        assert srv.update_from_local(cost_local([[50]], (500.0, 500.0)), NavMode.SAFE) == 0

    def test_idempotent(self):
        srv = server()
        local = cost_local(np.arange(16).reshape(4, 4) * 6, (8.0, 8.0))
        srv.update_from_local(local, NavMode.CONSERVATIVE)
        vals = srv.global_map.values.copy()
        src = srv.global_map.source.copy()
        srv.update_from_local(local, NavMode.CONSERVATIVE)
        assert np.array_equal(vals, srv.global_map.values)
        assert np.array_equal(src, srv.global_map.source)


class TestRandomizedInvariants:
    def test_priority_monotone_idempotent_snapshot(self, rng):
        """Replay random update sequences: source priority never decreases,
        repeating an update changes nothing, and earlier window snapshots
        never change afterwards."""
        for _ in range(60):
            srv = server((30.0, 30.0))
            snapshots = []
            for _step in range(15):
                mode = [NavMode.EFFICIENT, NavMode.SAFE, NavMode.CONSERVATIVE][rng.integers(3)]
                size = int(rng.integers(2, 8))
                origin = (float(rng.uniform(0, 25)), float(rng.uniform(0, 25)))
                vals = rng.integers(0, 101, size=(size, size)).astype(np.int16)
                vals[rng.random((size, size)) < 0.2] = -1
                local = cost_local(vals, origin)
                before = srv.global_map.source.copy()
                srv.update_from_local(local, mode)
                assert (srv.global_map.source >= before).all()
                after_vals = srv.global_map.values.copy()
                after_src = srv.global_map.source.copy()
                srv.update_from_local(local, mode)
                assert np.array_equal(after_vals, srv.global_map.values)
                assert np.array_equal(after_src, srv.global_map.source)
                window = srv.get_local_window((15.0, 15.0), 10.0, 0.5)
                snapshots.append((window, window.values.copy()))
            for window, frozen in snapshots:
                assert np.array_equal(window.values, frozen)


class TestWindows:
    def test_untouched_region_all_unknown(self):
        win = server().get_local_window((20.0, 20.0), 10.0, 0.5)
        assert (win.values == -1).all()

    def test_aligned_window_is_identity(self):
        srv = server()
        vals = np.arange(100).reshape(10, 10).astype(np.int16)
        srv.update_from_local(cost_local(vals, (10.0, 10.0)), NavMode.CONSERVATIVE)
        win = srv.get_local_window((12.5, 12.5), 5.0, 0.5)
        r0 = int(win.origin[1] / 0.5)
        c0 = int(win.origin[0] / 0.5)
        assert np.array_equal(
            win.values, srv.global_map.values[r0 : r0 + win.rows, c0 : c0 + win.cols]
        )

    def test_window_dimensions(self):
        win = server().get_local_window((20.0, 20.0), 20.0, 0.5)
        assert win.rows == win.cols == 40
        fine = server().get_local_window((20.0, 20.0), 20.0, 0.1)
        assert fine.rows == fine.cols == 200

    def test_window_clamped_at_border(self):
        win = server().get_local_window((1.0, 1.0), 20.0, 0.5)
        assert win.rows == win.cols == 40
        assert win.origin == (0.0, 0.0)


class TestWaypoints:
    def test_sequential_access(self):
        srv = server()
        srv.set_waypoints(WaypointQueue([(5.0, 5.0), (10.0, 10.0), (15.0, 15.0)]))
        assert srv.next_waypoint() == (5.0, 5.0)
        assert not srv.advance_waypoint((20.0, 20.0), 1.0)  # 10+ m away
        assert srv.next_waypoint() == (5.0, 5.0)
        assert srv.advance_waypoint((5.2, 5.0), 1.0)
        assert srv.next_waypoint() == (10.0, 10.0)

    def test_complete_after_last(self):
        srv = server()
        srv.set_waypoints(WaypointQueue([(5.0, 5.0)]))
        assert srv.advance_waypoint((5.0, 5.0), 0.5)
        assert srv.next_waypoint() is None
        assert srv.waypoints.complete

    def test_empty_queue_rejected(self):
        with pytest.raises(MissionConfigError):
            server().set_waypoints(WaypointQueue([]))

    def test_waypoint_outside_extent_rejected(self):
        with pytest.raises(MissionConfigError):
            server().set_waypoints(WaypointQueue([(500.0, 5.0)]))

    def test_uninitialized_queue_rejected(self):
        with pytest.raises(MissionConfigError):
            server().next_waypoint()


class TestCollisionCheck:
    def test_obstacle_on_path_signals(self):
        srv = server()
        srv.update_from_local(cost_local([[100]], (20.0, 20.0)), NavMode.SAFE)
        path = Path(np.array([[18.0, 20.25], [20.25, 20.25], [22.0, 20.25]]))
        assert srv.collision_check_tick(path, NavMode.SAFE) is ReplanReason.COLLISION

    def test_clear_path_silent(self):
        srv = server()
        srv.update_from_local(cost_local(np.zeros((10, 10)), (15.0, 15.0)), NavMode.SAFE)
        path = Path(np.array([[16.0, 16.0], [18.0, 18.0]]))
        assert srv.collision_check_tick(path, NavMode.SAFE) is None

    def test_cost_tolerance_in_cautious_mode(self):
        srv = server()
        vals = np.full((10, 10), 85, dtype=np.int16)
        srv.update_from_local(cost_local(vals, (15.0, 15.0)), NavMode.CONSERVATIVE)
        path = Path(np.array([[16.0, 16.0], [17.0, 17.0], [18.0, 18.0]]))
        assert srv.collision_check_tick(path, NavMode.CONSERVATIVE) is ReplanReason.COST_TOLERANCE
        assert srv.collision_check_tick(path, NavMode.SAFE) is None

    def test_no_path_no_signal(self):
        assert server().collision_check_tick(None, NavMode.SAFE) is None


class TestDump:
    def test_dump_writes_artifacts(self, tmp_path):
        srv = server()
        srv.update_from_local(cost_local([[50]], (10.0, 10.0)), NavMode.SAFE)
        srv.dump(tmp_path / "map")
        assert (tmp_path / "map" / "global_cost.pgm").exists()
        assert (tmp_path / "map" / "global_source.ppm").exists()
        assert (tmp_path / "map" / "global_map.json").exists()
