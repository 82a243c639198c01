"""Command-line harness: single trials, sweeps, replay, and serving.

Five verbs share one scenario vocabulary (maze fixture or scenario file,
plus the usual knobs).  ``run`` executes one seeded autonomous trial,
``sweep`` fans a knob across values, ``replay`` re-executes a saved record
and verifies it bit-for-bit, ``policy-dump`` prints the planned route
field, and ``serve`` exposes live steerable sessions over a socket for
the browser client.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .manipulation import ManipulationConfig, build_policy, run_to_completion
from .planner import HOLD, NO_POLICY
from .records import load_record, replay, save_record
from .scenarios import MAZE_IDS, Scenario, load_scenario, make_scenario
from .sweep import PARAMS, run_sweep

ARROWS = "→↗↑↖←↙↓↘"  # E..SE, planner order


def _add_scenario_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--maze", choices=MAZE_IDS, default="fig-story-maze")
    p.add_argument("--scenario", metavar="FILE",
                   help="scenario file overriding the maze fixture")
    p.add_argument("--shape", help="object shape id")
    p.add_argument("--robots", type=int)
    p.add_argument("--noise", type=float, metavar="W",
                   help="noise on the 0..10 sweep scale")
    p.add_argument("--weight", type=float)
    p.add_argument("--method", default="vi+pf+or")
    p.add_argument("--seed", type=int, default=0)


def _scenario_from(args) -> Scenario:
    config = None
    maze = args.maze
    if args.scenario:
        # a scenario file is a bare world config; label it by its filename
        config = load_scenario(args.scenario)
        maze = Path(args.scenario).stem
    return make_scenario(maze, config=config, shape=args.shape,
                         robots=args.robots, noise_w=args.noise,
                         weight=args.weight, method=args.method,
                         seed=args.seed)


def cmd_run(args) -> int:
    sc = _scenario_from(args)
    cfg = ManipulationConfig.from_method(sc.method)
    rec = run_to_completion(cfg, sc.config, sc.seed, args.max_time,
                            spawn_region=sc.spawn_region)
    verdict = "success" if rec.success else "timeout"
    print(f"{sc.maze_id} {sc.method} seed={sc.seed}: {verdict} "
          f"t={rec.completion_time_s:.1f}s steps={rec.steps} "
          f"wall={rec.wall_time_s:.1f}s")
    if args.out:
        save_record(rec, args.out)
        print(f"record -> {args.out}")
    return 0 if rec.success else 1


def cmd_sweep(args) -> int:
    base = _scenario_from(args)
    values = [v for v in (s.strip() for s in args.values.split(",")) if v]
    if not values:
        print("sweep: --values is empty", file=sys.stderr)
        return 2

    def progress(row):
        print(f"  {row['param']}={row['value']} seed={row['seed']}: "
              f"{'ok' if row['success'] else 'fail'} "
              f"t={row['completion_time_s']}s", flush=True)

    res = run_sweep(args.param, values, base, args.seeds,
                    max_time=args.max_time, out=args.out, progress=progress)
    for c in res.cells:
        print(f"{c.param}={c.value}: n={c.trials} "
              f"success={c.success_rate:.0%} median={c.median_s:.1f}s")
    if res.row_path:
        print(f"rows -> {res.row_path}")
    return 0


def cmd_replay(args) -> int:
    rec = load_record(args.record)
    res = replay(rec)
    same_digest = res.final_digest == rec.final_digest
    same_time = abs(res.completion_time_s - rec.completion_time_s) < 1e-9
    print(f"replayed {args.record}: t={res.completion_time_s:.3f}s "
          f"steps={res.steps}")
    print(f"digest {'matches' if same_digest else 'MISMATCH'}, "
          f"time {'matches' if same_time else 'MISMATCH'}")
    return 0 if (same_digest and same_time) else 1


def cmd_policy_dump(args) -> int:
    sc = _scenario_from(args)
    cfg = ManipulationConfig.from_method(sc.method)
    policy = build_policy(cfg, sc.config)
    ny, nx = policy.policy.shape
    if args.out:
        payload = {
            "maze_id": sc.maze_id,
            "method": sc.method,
            "nx": nx, "ny": ny,
            "cell_size": policy.grid.cell_size,
            "policy": policy.policy.tolist(),
            "values": [[None if not _finite(v) else round(float(v), 6)
                        for v in row] for row in policy.values],
        }
        with open(args.out, "w") as fh:
            json.dump(payload, fh)
            fh.write("\n")
        print(f"policy -> {args.out}")
        return 0
    # top row printed last so the dump reads like the workspace: y up
    for iy in range(ny - 1, -1, -1):
        line = []
        for ix in range(nx):
            d = int(policy.policy[iy, ix])
            if d == HOLD:
                line.append("@")
            elif d == NO_POLICY:
                line.append("#")
            else:
                line.append(ARROWS[d])
        print("".join(line))
    return 0


def _finite(v) -> bool:
    return v == v and v not in (float("inf"), float("-inf"))


def cmd_serve(args) -> int:
    from . import server  # websockets import kept out of the fast paths
    sc = _scenario_from(args)

    def ready(port):
        # printed after bind so --port 0 reports the real port
        print(f"serving {sc.maze_id} ({sc.digest}) on {args.host}:{port}, "
              f"records -> {args.records}", flush=True)

    server.serve_forever(sc, host=args.host, port=args.port,
                         records_dir=args.records, max_time=args.max_time,
                         ready=ready)
    return 0


def main(argv=None) -> int:
    top = argparse.ArgumentParser(
        prog="swarmpush",
        description="swarm pushing experiments: run, sweep, replay, serve")
    sub = top.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("run", help="one seeded autonomous trial")
    _add_scenario_flags(p)
    p.add_argument("--max-time", type=float, default=600.0)
    p.add_argument("--out", help="write the trial record here")
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("sweep", help="trials across one parameter")
    _add_scenario_flags(p)
    p.add_argument("--param", choices=PARAMS, required=True)
    p.add_argument("--values", required=True,
                   help="comma-separated values for --param")
    p.add_argument("--seeds", type=int, default=5)
    p.add_argument("--max-time", type=float, default=600.0)
    p.add_argument("--out", help="row file (cells/manifest named after it)")
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("replay", help="re-run a record and verify digests")
    p.add_argument("record")
    p.set_defaults(fn=cmd_replay)

    p = sub.add_parser("policy-dump",
                       help="print or save the planned route field")
    _add_scenario_flags(p)
    p.add_argument("--out", help="write JSON instead of ASCII")
    p.set_defaults(fn=cmd_policy_dump)

    p = sub.add_parser("serve", help="live steerable sessions over a socket")
    _add_scenario_flags(p)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--records", default="records",
                   help="directory for session trial records")
    p.add_argument("--max-time", type=float, default=600.0)
    p.set_defaults(fn=cmd_serve)

    args = top.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    raise SystemExit(main())
