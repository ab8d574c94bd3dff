"""Closed-loop mission executor.

A fixed 20 Hz tick drives every subsystem at its own rate: classification
at 0.2 Hz, obstacle mapping at 1 Hz, costmapping at 0.5 Hz, path collision
checks at 1 Hz, and control at 10 Hz. The classifier looks at the terrain
ahead of the rover (toward the next waypoint); its verdict selects the
navigation mode, which in turn selects the speed cap, the mapping product,
and the planner. Everything is simulated time; a run is exactly
reproducible from its seed when using the mock or geometric classifier.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .classify import (
    GeometricThresholds,
    ScoreRule,
    TerrainAssessment,
    VlmConfig,
    compute_terrain_metrics,
    default_prompt,
    mock_classify,
    render_patch_image,
    threshold_classify,
    vlm_classify,
)
from .control import PathTracker, PursuitConfig
from .errors import (
    EmptyPatchError,
    InsufficientDataError,
    InvalidStartError,
    MissionConfigError,
    NoPathError,
    ValidationError,
    VlmError,
)
from .map_server import MapServer, ReplanReason, WaypointQueue
from .mapping import (
    COST_MAX,
    CostGrid,
    CostWeights,
    GridGeometry,
    build_elevation_grid,
    build_navigation_costmap,
    cost_to_obstacle,
    extract_obstacles,
)
from .modes import MODE_FOR_CLASS, NavMode, TerrainClass
from .planning import Path, astar_cost, astar_obstacle, best_progress_path, bspline_path
from .world import (
    HazardEvent,
    RoverState,
    TICK_DT,
    VelocityCommand,
    World,
    format_trajectory_row,
    step,
)


@dataclass(frozen=True)
class ModeConfig:
    """Per-mode speeds, map geometry, and scheduler rates."""

    speed_efficient: float = 2.0
    speed_safe: float = 0.8
    speed_conservative: float = 0.5
    map_window: float = 20.0
    obstacle_resolution: float = 0.5
    cost_resolution: float = 0.1
    sense_resolution_safe: float = 0.25
    control_rate: float = 10.0
    obstacle_rate: float = 1.0
    costmap_rate: float = 0.5
    collision_rate: float = 1.0
    classifier_rate: float = 0.2
    tick_rate: float = 1.0 / TICK_DT
    classifier_lookahead: float = 12.0
    waypoint_tolerance: float = 1.0
    final_tolerance: float = 0.5
    downswitch_periods: int = 2
    lethal_inflation: float = 3.5
    start_clear_radius: float = 1.15
    # An intermediate waypoint whose surroundings are blocked counts as
    # served once the rover stands at the closest approachable point within
    # this distance of it; the final goal is never relaxed.
    blocked_waypoint_slack: float = 8.0
    off_path_limit: float = 1.2
    no_path_limit: int = 5
    timeout_factor: float = 5.0

    def __post_init__(self):
        if not self.speed_efficient > self.speed_safe > self.speed_conservative > 0:
            raise ValidationError("mode speeds must strictly decrease with severity")
        for rate in (self.control_rate, self.obstacle_rate, self.costmap_rate,
                     self.collision_rate, self.classifier_rate):
            ticks = self.tick_rate / rate
            if abs(ticks - round(ticks)) > 1e-9:
                raise ValidationError(f"rate {rate} Hz does not divide the {self.tick_rate} Hz tick")

    def speed(self, mode: NavMode) -> float:
        return {
            NavMode.EFFICIENT: self.speed_efficient,
            NavMode.SAFE: self.speed_safe,
            NavMode.CONSERVATIVE: self.speed_conservative,
        }[mode]

    def ticks(self, rate: float) -> int:
        return round(self.tick_rate / rate)


@dataclass
class MissionMetrics:
    success: bool = False
    end_reason: str = ""
    time_by_mode: dict = field(default_factory=lambda: {m.value: 0.0 for m in NavMode})
    distance_by_mode: dict = field(default_factory=lambda: {m.value: 0.0 for m in NavMode})
    hazards: list = field(default_factory=list)
    replan_count: int = 0
    waypoints_reached: int = 0
    waypoints_skipped: int = 0
    scheduler_counts: dict = field(default_factory=dict)

    @property
    def total_time(self) -> float:
        return sum(self.time_by_mode.values())

    @property
    def total_distance(self) -> float:
        return sum(self.distance_by_mode.values())

    def to_dict(self) -> dict:
        return {
            "success": self.success,
            "end_reason": self.end_reason,
            "total_time": round(self.total_time, 6),
            "total_distance": round(self.total_distance, 6),
            "time_by_mode": {k: round(v, 6) for k, v in sorted(self.time_by_mode.items())},
            "distance_by_mode": {k: round(v, 6) for k, v in sorted(self.distance_by_mode.items())},
            "hazards": self.hazards,
            "replan_count": self.replan_count,
            "waypoints_reached": self.waypoints_reached,
            "waypoints_skipped": self.waypoints_skipped,
            "scheduler_counts": dict(sorted(self.scheduler_counts.items())),
        }


# --- classifier backends -----------------------------------------------------


class MockClassifierBackend:
    """Scores terrain from the generating spec; no sensing, no network."""

    def __init__(self, seed: int, rule: ScoreRule = ScoreRule(), analysis_radius: float = 10.0):
        self.seed = seed
        self.rule = rule
        self.analysis_radius = analysis_radius

    def assess(self, world: World, center, timestamp: float) -> TerrainAssessment:
        spec = world.terrain.spec_at(center[0])
        return mock_classify(
            spec, world.terrain.ground, center, self.seed,
            rule=self.rule, analysis_radius=self.analysis_radius, timestamp=timestamp,
        )


class GeometricClassifierBackend:
    """Senses an elevation patch ahead and applies the geometric baseline."""

    def __init__(self, thresholds: GeometricThresholds = GeometricThresholds(),
                 patch_size: float = 20.0, patch_resolution: float = 0.1):
        self.thresholds = thresholds
        self.patch_size = patch_size
        self.patch_resolution = patch_resolution

    def assess(self, world: World, center, timestamp: float) -> TerrainAssessment:
        pose = RoverState(center[0], center[1], 0.0)
        patch = world.sense_elevation_patch(pose, self.patch_size, self.patch_resolution)
        metrics = compute_terrain_metrics(
            patch, self.thresholds.analysis_radius, self.thresholds.stddev_rock_cell
        )
        return threshold_classify(metrics, self.thresholds, timestamp)


class VlmClassifierBackend:
    """Renders the terrain ahead and queries the configured endpoint."""

    def __init__(self, config: VlmConfig, api_key: str | None = None,
                 patch_size: float = 20.0, patch_resolution: float = 0.5):
        self.config = config
        self.api_key = api_key
        self.prompt = default_prompt()
        self.patch_size = patch_size
        self.patch_resolution = patch_resolution

    def assess(self, world: World, center, timestamp: float) -> TerrainAssessment:
        pose = RoverState(center[0], center[1], 0.0)
        patch = world.sense_elevation_patch(pose, self.patch_size, self.patch_resolution)
        image = render_patch_image(patch)
        return vlm_classify(image, self.prompt, self.config, timestamp, self.api_key)


class ModeSwitcher:
    """Mode selection with fail-safe fallback and down-switch hysteresis.

    Moving to a more severe mode happens immediately; moving down requires
    the calmer class to persist for `downswitch_periods` consecutive
    classifier periods. On classifier failure the previous assessment is
    retained for one period; persistent failure falls back to the most
    cautious mode.
    """

    def __init__(self, downswitch_periods: int = 2):
        self.downswitch_periods = downswitch_periods
        self.mode: NavMode | None = None
        self.assessment: TerrainAssessment | None = None
        self._pending: NavMode | None = None
        self._pending_count = 0
        self._missed = 0

    def update(self, assessment: TerrainAssessment | None) -> NavMode:
        if assessment is None:
            self._missed += 1
            if self.mode is None or self._missed > 1:
                self.mode = NavMode.CONSERVATIVE
                self.assessment = None
            return self.mode
        self._missed = 0
        self.assessment = assessment
        target = MODE_FOR_CLASS[assessment.terrain_class]
        if self.mode is None or target.priority > self.mode.priority:
            self.mode = target
            self._pending = None
            self._pending_count = 0
        elif target.priority < self.mode.priority:
            if self._pending is target:
                self._pending_count += 1
            else:
                self._pending = target
                self._pending_count = 1
            if self._pending_count >= self.downswitch_periods:
                self.mode = target
                self._pending = None
                self._pending_count = 0
        else:
            self._pending = None
            self._pending_count = 0
        return self.mode


# --- the executor ------------------------------------------------------------


@dataclass
class MissionResult:
    metrics: MissionMetrics
    trajectory: list
    server: MapServer
    final_state: RoverState


class MissionRunner:
    def __init__(
        self,
        world: World,
        waypoints: WaypointQueue,
        classifier,
        config: ModeConfig = ModeConfig(),
        forced_mode: NavMode | None = None,
        start: RoverState | None = None,
        pursuit: PursuitConfig = PursuitConfig(),
    ):
        if len(waypoints) == 0:
            raise MissionConfigError("waypoint queue is empty")
        self.world = world
        self.config = config
        self.classifier = classifier
        self.forced_mode = forced_mode
        self.server = MapServer((world.extent_x, world.extent_y))
        self.server.set_waypoints(waypoints)
        if start is None:
            first = waypoints.points[0]
            start = RoverState(first[0], first[1], 0.0)
        self.state = start
        self.switcher = ModeSwitcher(config.downswitch_periods)
        self.pursuit = pursuit
        # cells the rover has actually traversed are proven drivable; they
        # stay plannable so the rover can always back out of regions the
        # map later condemns
        self._breadcrumbs: list[tuple[float, float]] = [(start.x, start.y)]

    # -- helpers --

    def _classifier_center(self) -> tuple[float, float]:
        wp = self.server.next_waypoint()
        if wp is None:
            return (self.state.x, self.state.y)
        dx = wp[0] - self.state.x
        dy = wp[1] - self.state.y
        d = math.hypot(dx, dy)
        look = self.config.classifier_lookahead
        if d < 1e-6:
            ux, uy = math.cos(self.state.heading), math.sin(self.state.heading)
        else:
            ux, uy = dx / d, dy / d
        cx = self.state.x + look * ux
        cy = self.state.y + look * uy
        cx = min(max(cx, 1.0), self.world.extent_x - 1.0)
        cy = min(max(cy, 1.0), self.world.extent_y - 1.0)
        return (cx, cy)

    def _snapped_geometry(self, resolution: float) -> GridGeometry:
        """Sensing grid geometry aligned to the global 0.5 m lattice."""
        size = self.config.map_window
        base = self.server.global_map.cell_size
        x0 = math.floor((self.state.x - size / 2.0) / base) * base
        y0 = math.floor((self.state.y - size / 2.0) / base) * base
        n = round(size / resolution)
        return GridGeometry(n, n, (x0, y0), resolution)

    def _update_obstacle_map(self) -> None:
        geom = self._snapped_geometry(self.config.obstacle_resolution)
        pts = self.world.sense_points(self.state, self.config.map_window + 1.0,
                                      self.config.sense_resolution_safe)
        elev = build_elevation_grid(pts, geom)
        grid = extract_obstacles(elev, inflate_radius=self.config.lethal_inflation)
        self.server.update_from_local(grid, NavMode.SAFE)

    def _update_costmap(self) -> None:
        # Sense and fit over a margin wider than the published window, then
        # write only the interior: cost features near a grid edge come from
        # truncated fit windows and underestimate hazards.
        res = self.config.cost_resolution
        margin = CostWeights().fit_window_m / 2.0
        margin_cells = int(math.ceil(margin / res))
        inner = self._snapped_geometry(res)
        geom = GridGeometry(
            inner.rows + 2 * margin_cells,
            inner.cols + 2 * margin_cells,
            (inner.origin[0] - margin_cells * res, inner.origin[1] - margin_cells * res),
            res,
        )
        pts = self.world.sense_points(self.state, self.config.map_window + 2.0 * margin + 1.0,
                                      self.config.cost_resolution)
        elev = build_elevation_grid(pts, geom)
        cost = build_navigation_costmap(elev, slope_inflation=self.config.lethal_inflation)
        core = CostGrid(
            cost.values[margin_cells:-margin_cells, margin_cells:-margin_cells].copy(),
            inner.origin, res,
        )
        self.server.update_from_local(core, NavMode.CONSERVATIVE)

    def _clamp_goal(self, grid: CostGrid, goal) -> tuple[float, float]:
        eps = grid.cell_size * 0.5
        x0 = grid.origin[0] + eps
        x1 = grid.origin[0] + grid.cols * grid.cell_size - eps
        y0 = grid.origin[1] + eps
        y1 = grid.origin[1] + grid.rows * grid.cell_size - eps
        return (min(max(goal[0], x0), x1), min(max(goal[1], y0), y1))

    def _clear_start(self, grid: CostGrid) -> None:
        """Zero out the cells under the rover so planning can always leave
        the (physically occupied, hazard-checked) current pose."""
        radius = self.config.start_clear_radius
        c0 = int((self.state.x - radius - grid.origin[0]) / grid.cell_size)
        c1 = int((self.state.x + radius - grid.origin[0]) / grid.cell_size) + 1
        r0 = int((self.state.y - radius - grid.origin[1]) / grid.cell_size)
        r1 = int((self.state.y + radius - grid.origin[1]) / grid.cell_size) + 1
        for r in range(max(r0, 0), min(r1, grid.rows)):
            for c in range(max(c0, 0), min(c1, grid.cols)):
                cx = grid.origin[0] + (c + 0.5) * grid.cell_size
                cy = grid.origin[1] + (r + 0.5) * grid.cell_size
                if math.hypot(cx - self.state.x, cy - self.state.y) <= radius:
                    grid.values[r, c] = 0

    def _clear_breadcrumbs(self, grid: CostGrid) -> None:
        for bx, by in self._breadcrumbs:
            c = int((bx - grid.origin[0]) / grid.cell_size)
            r = int((by - grid.origin[1]) / grid.cell_size)
            if 0 <= r < grid.rows and 0 <= c < grid.cols and grid.values[r, c] >= COST_MAX:
                grid.values[r, c] = 0

    def _plan(self, mode: NavMode, waypoint, now: float) -> Path | None:
        """Plan a path toward the waypoint with the mode's machinery.

        The goal is the waypoint clamped into the local window. When the
        direct planner finds no route (goal blocked, or walled off by
        inflated terrain), a flood search returns the path to the reachable
        cell with best progress toward the goal instead. Returns None only
        when the mode's map holds no data yet.
        """
        if mode is NavMode.EFFICIENT:
            return bspline_path((self.state.x, self.state.y), waypoint, self.state.heading,
                                created_at=now)
        # Repeated failures mean the exit lies beyond the local horizon:
        # retry over a doubled window (coarser in the cautious mode to keep
        # the search tractable).
        escape = self._no_path_streak >= 2
        size = self.config.map_window * (2.0 if escape else 1.0)
        if mode is NavMode.SAFE:
            res = self.config.obstacle_resolution
        else:
            res = 0.2 if escape else self.config.cost_resolution
        window = self.server.get_local_window((self.state.x, self.state.y), size, res)
        if int(np.count_nonzero(window.values >= 0)) == 0:
            return None
        self._clear_start(window)
        self._clear_breadcrumbs(window)
        start = (self.state.x, self.state.y)
        goal = self._clamp_goal(window, waypoint)
        grid = cost_to_obstacle(window) if mode is NavMode.SAFE else window
        try:
            try:
                path = (astar_obstacle(grid, start, goal, created_at=now)
                        if mode is NavMode.SAFE
                        else astar_cost(grid, start, goal, created_at=now))
            except NoPathError:
                path = best_progress_path(grid, start, goal, created_at=now)
        except InvalidStartError:
            self._no_path_streak += 1
            return None
        pts = path.points
        end_err = math.hypot(pts[-1][0] - waypoint[0], pts[-1][1] - waypoint[1])
        if 1e-9 < end_err <= window.cell_size * 1.5:
            # the search ends on the goal cell's center; finish on the true
            # waypoint so arrival tolerances measure against the real target
            pts = np.vstack([pts, np.asarray(waypoint, dtype=float)])
            end_err = 0.0
        if (end_err > self.config.waypoint_tolerance
                and Path(pts).length() < 2.0 * self.config.start_clear_radius + 0.2):
            # no meaningful progress is possible on this leg (anything this
            # short stays inside the start-clearing bubble)
            self._no_path_streak += 1
            return None
        self._no_path_streak = 0
        return Path(pts, mode, now)

    # -- main loop --

    def run(self) -> MissionResult:
        cfg = self.config
        metrics = MissionMetrics()
        trajectory: list[str] = []
        counts = {"classifier": 0, "obstacle_map": 0, "costmap": 0, "collision": 0, "control": 0}

        route_len = 0.0
        prev = (self.state.x, self.state.y)
        for wp in self.server.waypoints.points:
            route_len += math.hypot(wp[0] - prev[0], wp[1] - prev[1])
            prev = wp
        budget = cfg.timeout_factor * max(route_len, cfg.map_window) / cfg.speed_conservative

        cls_ticks = cfg.ticks(cfg.classifier_rate)
        obs_ticks = cfg.ticks(cfg.obstacle_rate)
        cost_ticks = cfg.ticks(cfg.costmap_rate)
        col_ticks = cfg.ticks(cfg.collision_rate)
        ctl_ticks = cfg.ticks(cfg.control_rate)

        mode = self.forced_mode or NavMode.CONSERVATIVE
        tracker: PathTracker | None = None
        stale_path = False
        last_cmd = VelocityCommand(0.0, 0.0)
        self._no_path_streak = 0
        next_plan_tick = 0
        n = 0

        while True:
            now = n * TICK_DT

            # classification
            if n % cls_ticks == 0:
                counts["classifier"] += 1
                if self.forced_mode is None and self.classifier is not None:
                    center = self._classifier_center()
                    try:
                        assessment = self.classifier.assess(self.world, center, now)
                    except (VlmError, EmptyPatchError, InsufficientDataError):
                        assessment = None
                    new_mode = self.switcher.update(assessment)
                    if new_mode is not mode:
                        mode = new_mode
                        stale_path = True
                        next_plan_tick = n

            # mapping
            if n % obs_ticks == 0:
                counts["obstacle_map"] += 1
                if mode is NavMode.SAFE:
                    self._update_obstacle_map()
            if n % cost_ticks == 0:
                counts["costmap"] += 1
                if mode is NavMode.CONSERVATIVE:
                    self._update_costmap()

            # collision check
            if n % col_ticks == 0:
                counts["collision"] += 1
                if tracker is not None:
                    reason = self.server.collision_check_tick(tracker.path, mode)
                    if reason is not None:
                        metrics.replan_count += 1
                        tracker = None
                        stale_path = True
                        next_plan_tick = n

            # a large cross-track excursion (turn-around sweeps after a
            # direction-reversing replan) invalidates the path: replan from
            # where the rover actually is, keeping deviations bounded
            if tracker is not None:
                pts = tracker.path.points
                d_path = float(np.min(np.hypot(pts[:, 0] - self.state.x, pts[:, 1] - self.state.y)))
                if d_path > cfg.off_path_limit:
                    tracker = None
                    stale_path = False

            # partial-leg paths (goal clamped to the local window, or best
            # reachable progress) end short of the waypoint: replan from the
            # new pose once consumed. A waypoint that cannot be touched but
            # is already close counts as served.
            if tracker is not None and not stale_path:
                wp_now = self.server.next_waypoint()
                if wp_now is not None and tracker.reached(self.state):
                    d_wp = math.hypot(wp_now[0] - self.state.x, wp_now[1] - self.state.y)
                    final_wp = self.server.waypoints.cursor >= len(self.server.waypoints) - 1
                    if d_wp > cfg.waypoint_tolerance:
                        if not final_wp and d_wp <= cfg.blocked_waypoint_slack:
                            self.server.waypoints.advance()
                            metrics.waypoints_skipped += 1
                        tracker = None

            # planning
            waypoint = self.server.next_waypoint()
            if waypoint is not None and (tracker is None or stale_path) and n >= next_plan_tick:
                path = self._plan(mode, waypoint, now)
                if path is not None:
                    tracker = PathTracker(path, self.pursuit)
                    stale_path = False
                else:
                    next_plan_tick = n + col_ticks
                    if self._no_path_streak >= cfg.no_path_limit:
                        final_wp = self.server.waypoints.cursor >= len(self.server.waypoints) - 1
                        if not final_wp:
                            # this leg is walled off; route via the next one
                            self.server.waypoints.advance()
                            metrics.waypoints_skipped += 1
                            self._no_path_streak = 0
                            next_plan_tick = n
                        else:
                            metrics.success = False
                            metrics.end_reason = "no_path"
                            break

            # control
            if n % ctl_ticks == 0:
                counts["control"] += 1
                if tracker is not None:
                    final_leg = self.server.waypoints.cursor >= len(self.server.waypoints) - 1
                    last_cmd = tracker.step(self.state, cfg.speed(mode), taper=final_leg)
                else:
                    last_cmd = VelocityCommand(0.0, 0.0)

            # physics
            self.state = step(self.state, last_cmd, TICK_DT)
            bx, by = self._breadcrumbs[-1]
            if math.hypot(self.state.x - bx, self.state.y - by) >= 0.5:
                self._breadcrumbs.append((self.state.x, self.state.y))
                if len(self._breadcrumbs) > 200:
                    self._breadcrumbs.pop(0)
            metrics.time_by_mode[mode.value] += TICK_DT
            metrics.distance_by_mode[mode.value] += last_cmd.linear * TICK_DT
            trajectory.append(format_trajectory_row(self.state, mode.value))

            # hazards
            hazard = self.world.check_hazard(self.state)
            if hazard is not None:
                metrics.hazards.append({
                    "kind": hazard.kind.value,
                    "x": round(hazard.position[0], 3),
                    "y": round(hazard.position[1], 3),
                    "time": round(hazard.time, 3),
                })
                metrics.success = False
                metrics.end_reason = hazard.kind.value
                break

            # waypoint arrival
            final_wp = self.server.waypoints.cursor >= len(self.server.waypoints) - 1
            tol = cfg.final_tolerance if final_wp else cfg.waypoint_tolerance
            if self.server.advance_waypoint((self.state.x, self.state.y), tol):
                metrics.waypoints_reached += 1
                tracker = None
                stale_path = False
                next_plan_tick = 0
                if self.server.waypoints.complete:
                    metrics.success = True
                    metrics.end_reason = "complete"
                    break

            if now > budget:
                metrics.success = False
                metrics.end_reason = "timeout"
                break
            n += 1

        metrics.scheduler_counts = counts
        return MissionResult(metrics, trajectory, self.server, self.state)


def run_mission(
    world: World,
    waypoints: WaypointQueue,
    classifier,
    config: ModeConfig = ModeConfig(),
    forced_mode: NavMode | None = None,
    start: RoverState | None = None,
) -> MissionResult:
    runner = MissionRunner(world, waypoints, classifier, config, forced_mode, start)
    return runner.run()


# --- single-mode vs multi-mode comparison -------------------------------------


@dataclass
class ComparisonReport:
    single: MissionMetrics
    multi: MissionMetrics

    @property
    def time_ratio(self) -> float:
        return self.multi.total_time / self.single.total_time if self.single.total_time else math.inf

    @property
    def speedup(self) -> float:
        return self.single.total_time / self.multi.total_time if self.multi.total_time else math.inf

    @property
    def distance_ratio(self) -> float:
        if not self.single.total_distance:
            return math.inf
        return self.multi.total_distance / self.single.total_distance

    def multi_time_shares(self) -> dict[str, float]:
        total = self.multi.total_time
        return {k: (v / total if total else 0.0) for k, v in sorted(self.multi.time_by_mode.items())}

    def multi_distance_shares(self) -> dict[str, float]:
        total = self.multi.total_distance
        return {k: (v / total if total else 0.0) for k, v in sorted(self.multi.distance_by_mode.items())}

    def to_dict(self) -> dict:
        return {
            "single": self.single.to_dict(),
            "multi": self.multi.to_dict(),
            "time_ratio": round(self.time_ratio, 6),
            "speedup": round(self.speedup, 6),
            "distance_ratio": round(self.distance_ratio, 6),
            "multi_time_shares": {k: round(v, 6) for k, v in self.multi_time_shares().items()},
            "multi_distance_shares": {k: round(v, 6) for k, v in self.multi_distance_shares().items()},
        }


def compare_single_vs_multi(
    terrain,
    waypoints: WaypointQueue,
    seed: int,
    config: ModeConfig = ModeConfig(),
    start: RoverState | None = None,
    sensor_sigma: float = 0.0,
) -> ComparisonReport:
    """Run the cautious-only baseline and the adaptive system on the same
    world and waypoints, then report times, distances, and mode shares.

    Mission failures propagate into the report (success flags / end
    reasons), not as exceptions.
    """
    single_world = World(terrain, sensor_sigma=sensor_sigma, seed=seed)
    single = run_mission(
        single_world, WaypointQueue(list(waypoints.points)), None, config,
        forced_mode=NavMode.CONSERVATIVE, start=start,
    )
    multi_world = World(terrain, sensor_sigma=sensor_sigma, seed=seed)
    multi = run_mission(
        multi_world, WaypointQueue(list(waypoints.points)),
        MockClassifierBackend(seed), config, forced_mode=None, start=start,
    )
    return ComparisonReport(single.metrics, multi.metrics)
