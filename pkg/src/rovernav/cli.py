"""Command-line interface.

Subcommands: gen-terrain, run, compare, render, config-ref. Exit codes:
0 success, 2 usage or configuration problem, 3 mission failure (outputs
still written), 4 classifier backend unavailable.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path as FsPath

from . import config as cfgmod
from . import pgmio, render
from .errors import MissionConfigError, RoverNavError
from .map_server import WaypointQueue
from .mapping import CostGrid
from .mission import run_mission
from .terrain import TERRAIN_META, load_terrain, save_terrain
from .waypoints import save_waypoints
from .world import TRAJECTORY_HEADER

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_MISSION_FAILED = 3
EXIT_BACKEND = 4


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except MissionConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RoverNavError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rovernav",
                                     description="Multi-mode rover navigation simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-terrain", help="generate terrain files from a config")
    p.add_argument("config")
    p.add_argument("-o", "--out", default="terrain_out")
    p.set_defaults(func=cmd_gen_terrain)

    p = sub.add_parser("run", help="run one mission")
    p.add_argument("config")
    p.add_argument("-o", "--out", default="mission_out")
    p.add_argument("--mode", choices=["auto", "efficient", "safe", "conservative"])
    p.add_argument("--classifier", choices=["mock", "geometric", "vlm"])
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("compare", help="cautious-only baseline vs adaptive system")
    p.add_argument("config")
    p.add_argument("-o", "--out", default="compare_out")
    p.add_argument("--seeds", default="0", help="comma-separated seed list")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("render", help="render terrain / trajectory / map artifacts")
    p.add_argument("artifacts", nargs="+",
                   help="terrain dir, map dump dir, and/or trajectory csv")
    p.add_argument("-o", "--out", default="render_out")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("config-ref", help="print the mission config key reference")
    p.set_defaults(func=lambda args: (print(cfgmod.config_reference()), EXIT_OK)[1])
    return parser


def cmd_gen_terrain(args) -> int:
    cfg = cfgmod.load_mission_config(args.config)
    terrain = cfgmod.terrain_from_config(cfg)
    save_terrain(terrain, args.out)
    print(f"terrain: {terrain.extent_x:.0f} m x {terrain.extent_y:.0f} m, "
          f"{len(terrain.segments)} segment(s), {len(terrain.rocks)} rocks "
          f"(coverage {terrain.rocks.achieved_coverage:.4f})")
    for seg in terrain.segments:
        print(f"  [{seg.x0:6.1f}, {seg.x1:6.1f}) {seg.spec.ground_truth_class.value:12s} "
              f"octaves={seg.spec.octaves} lacunarity={seg.spec.lacunarity} "
              f"height_variation={seg.spec.height_variation} "
              f"rock_coverage={seg.spec.rock_coverage} seed={seg.spec.seed}")
    print(f"wrote {args.out}/")
    return EXIT_OK


def _apply_overrides(cfg: dict, args) -> dict:
    cfg = dict(cfg)
    if getattr(args, "mode", None):
        cfg["mode"] = args.mode
    if getattr(args, "classifier", None):
        cfg["classifier"] = args.classifier
    if getattr(args, "seed", None) is not None:
        cfg["seed"] = args.seed
    return cfg


def cmd_run(args) -> int:
    cfg = _apply_overrides(cfgmod.load_mission_config(args.config), args)
    if cfg.get("classifier") == "vlm" and not cfg.get("vlm_endpoint"):
        print("error: vlm classifier selected but no vlm_endpoint configured", file=sys.stderr)
        return EXIT_BACKEND
    seed = int(cfg.get("seed", 0))
    scene = cfgmod.scene_from_config(cfg)
    forced = cfgmod.forced_mode_from(cfg)
    classifier = None if forced else cfgmod.classifier_from_config(cfg, seed)
    mode_config = cfgmod.mode_config_from(cfg)

    result = run_mission(scene.world, scene.waypoints, classifier, mode_config,
                         forced_mode=forced, start=scene.start)

    out = FsPath(args.out)
    out.mkdir(parents=True, exist_ok=True)
    metrics = result.metrics.to_dict()
    (out / "metrics.json").write_text(json.dumps(metrics, indent=2, sort_keys=True) + "\n",
                                      encoding="utf-8")
    (out / "trajectory.csv").write_text(
        TRAJECTORY_HEADER + "\n" + "\n".join(result.trajectory) + "\n", encoding="utf-8")
    result.server.dump(out / "map")
    save_waypoints(WaypointQueue(list(scene.waypoints.points)), out / "waypoints.csv")

    status = "success" if metrics["success"] else f"FAILED ({metrics['end_reason']})"
    print(f"mission {status}: {metrics['total_time']:.1f} s over "
          f"{metrics['total_distance']:.1f} m, {metrics['waypoints_reached']} waypoints")
    print(f"wrote {out}/")
    return EXIT_OK if metrics["success"] else EXIT_MISSION_FAILED


def cmd_compare(args) -> int:
    from .mission import compare_single_vs_multi

    cfg = cfgmod.load_mission_config(args.config)
    try:
        seeds = [int(s) for s in str(args.seeds).split(",") if s.strip() != ""]
    except ValueError:
        print("error: --seeds must be a comma-separated integer list", file=sys.stderr)
        return EXIT_CONFIG
    if not seeds:
        print("error: no seeds given", file=sys.stderr)
        return EXIT_CONFIG
    reference = float(cfg.get("reference_speedup", 1.795))

    out = FsPath(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    header = (f"{'seed':>4}  {'single(s)':>10}  {'multi(s)':>10}  {'eff(s)':>8}  {'safe(s)':>8}  "
              f"{'cons(s)':>8}  {'speedup':>8}  {'target':>7}")
    print(header)
    print("-" * len(header))
    for seed in seeds:
        cfg_seed = dict(cfg)
        cfg_seed["seed"] = seed
        scene = cfgmod.scene_from_config(cfg_seed)
        report = compare_single_vs_multi(scene.terrain, scene.waypoints, seed,
                                         cfgmod.mode_config_from(cfg_seed), start=scene.start)
        row = report.to_dict()
        row["seed"] = seed
        row["reference_speedup"] = reference
        rows.append(row)
        multi = report.multi
        flag = "" if (report.single.success and report.multi.success) else "  [failure recorded]"
        print(f"{seed:>4}  {report.single.total_time:>10.1f}  {multi.total_time:>10.1f}  "
              f"{multi.time_by_mode['efficient']:>8.1f}  {multi.time_by_mode['safe']:>8.1f}  "
              f"{multi.time_by_mode['conservative']:>8.1f}  {report.speedup:>8.3f}  "
              f"{reference:>7.3f}{flag}")
    (out / "comparison.json").write_text(json.dumps(rows, indent=2, sort_keys=True) + "\n",
                                         encoding="utf-8")
    print(f"wrote {out}/comparison.json")
    return EXIT_OK


def cmd_render(args) -> int:
    out = FsPath(args.out)
    out.mkdir(parents=True, exist_ok=True)
    terrain = None
    trajectory_file = None
    cost_dump = None
    for art in args.artifacts:
        p = FsPath(art)
        if p.is_dir() and (p / TERRAIN_META).exists():
            terrain = load_terrain(p)
        elif p.is_dir() and (p / "global_map.json").exists():
            cost_dump = p
        elif p.suffix == ".csv":
            trajectory_file = p
        else:
            print(f"error: cannot identify artifact kind: {p}", file=sys.stderr)
            return EXIT_CONFIG

    wrote = []
    if terrain is not None:
        image = render.render_terrain(terrain)
        if trajectory_file is not None:
            rows = trajectory_file.read_text(encoding="utf-8").splitlines()
            image = render.draw_trajectory(image, rows, terrain.ground.origin,
                                           terrain.ground.cell_size)
        pgmio.write_ppm(out / "terrain.ppm", image)
        wrote.append("terrain.ppm")
    elif trajectory_file is not None:
        print("error: a trajectory render needs a terrain directory too", file=sys.stderr)
        return EXIT_CONFIG
    if cost_dump is not None:
        meta = json.loads((cost_dump / "global_map.json").read_text(encoding="utf-8"))
        pixels, _ = pgmio.read_pgm(cost_dump / "global_cost.pgm")
        values = pixels.astype("int16")
        values[pixels == meta["unknown_pixel"]] = -1
        grid = CostGrid(values, tuple(meta["origin"]), meta["cell_size"])
        pgmio.write_ppm(out / "global_cost.ppm", render.render_cost(grid))
        wrote.append("global_cost.ppm")
    if not wrote:
        print("error: nothing to render", file=sys.stderr)
        return EXIT_CONFIG
    print(f"wrote {', '.join(wrote)} to {out}/")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
