"""Command line entry point: ``layoutlab gen|run|simulate|trace|validate``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .cachesim import default_config, simulate
from .errors import ConfigError, LayoutLabError, MazeFormatError, MazeValidationError
from .harness import ExperimentConfig, emit_reports, run_experiment
from .layoutstore import load_trace, new_store, save_trace
from .maze import generate_perfect_maze, load_maze, save_maze, validate_perfect
from .search import astar

EXIT_OK, EXIT_CONFIG, EXIT_RUN = 0, 2, 3


def _cmd_gen(args) -> int:
    maze = generate_perfect_maze(args.width, args.height, args.seed)
    save_maze(maze, args.out)
    print(f"wrote {args.width}x{args.height} maze (seed {args.seed}) to {args.out}")
    return EXIT_OK


def _cmd_validate(args) -> int:
    try:
        maze = load_maze(args.maze)
    except MazeValidationError as exc:
        print(f"INVALID: {exc}")
        return EXIT_RUN
    report = validate_perfect(maze)
    if report.ok:
        print(f"OK: {maze.width}x{maze.height} perfect maze, start {tuple(maze.start)}, goal {tuple(maze.goal)}")
        return EXIT_OK
    for v in report.violations:
        print(f"INVALID: {v}")
    return EXIT_RUN


def _cmd_run(args) -> int:
    cfg = ExperimentConfig.from_file(args.config)
    out = args.out or cfg.output
    if out is None:
        raise ConfigError("no output directory: pass --out or set output = DIR")
    report = run_experiment(cfg)
    files = emit_reports(report, out)
    for c in report.cells:
        print(f"{c.key:7s} cost={c.cost} expansions={c.expansions} median={c.median:.6f}s")
    for group, values in report.ratios.items():
        for k, v in values.items():
            print(f"ratio {group}[{k}] = {v}")
    print(f"wrote {len(files)} files to {out}")
    return EXIT_OK


def _cmd_trace(args) -> int:
    maze = load_maze(args.maze)
    store = new_store(args.layout, maze.cells, trace=True, width=maze.width)
    result = astar(maze, store)
    save_trace(result.trace, args.out)
    print(f"wrote {len(result.trace)} events ({args.layout}) to {args.out}")
    return EXIT_OK


def _cmd_simulate(args) -> int:
    if args.cache != "default":
        raise ConfigError(f"unknown cache {args.cache!r}; only 'default' is available here")
    trace = load_trace(args.trace)
    report = simulate(trace, default_config())
    text = report.to_json()
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="layoutlab", description="AoS vs SoA A* benchmark laboratory")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a perfect maze file")
    g.add_argument("--width", type=int, required=True)
    g.add_argument("--height", type=int, required=True)
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--out", required=True)
    g.set_defaults(func=_cmd_gen)

    r = sub.add_parser("run", help="run the layout x executor experiment")
    r.add_argument("--config", required=True, help="key = value experiment file")
    r.add_argument("--out", help="report directory (overrides 'output' in the config)")
    r.set_defaults(func=_cmd_run)

    s = sub.add_parser("simulate", help="replay an LLTRACE file through the cache model")
    s.add_argument("--trace", required=True)
    s.add_argument("--cache", default="default")
    s.add_argument("--out")
    s.set_defaults(func=_cmd_simulate)

    t = sub.add_parser("trace", help="record the single-threaded A* access trace of a maze")
    t.add_argument("--maze", required=True)
    t.add_argument("--layout", choices=["aos", "soa"], required=True)
    t.add_argument("--out", required=True)
    t.set_defaults(func=_cmd_trace)

    v = sub.add_parser("validate", help="check that a maze file holds a perfect maze")
    v.add_argument("--maze", required=True)
    v.set_defaults(func=_cmd_validate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, MazeFormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (LayoutLabError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUN


if __name__ == "__main__":
    sys.exit(main())
