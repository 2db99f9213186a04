"""Experiment driver: the {layout x executor} matrix, metrics and reports."""

from __future__ import annotations

import copy
import csv
import io
import json
import logging
import math
import statistics
import time
from dataclasses import dataclass, field
from pathlib import Path

from .cachesim import CacheConfig, CacheReport, default_config, make_config, simulate
from .errors import ConfigError, LayoutLabError, RunFailure
from .layoutstore import Layout, memory_model_bytes, new_store
from .maze import CellCoord, GridMaze, generate_perfect_maze, load_maze
from .parallel import ParallelPlan, astar_mt, observed_worker_count
from .search import astar

log = logging.getLogger(__name__)

EXECUTORS = ("st", "mt")
NOT_SIMULATED = "not simulated"
# Fields that legitimately differ between two runs of one config.
VOLATILE_CELL_FIELDS = ("wall_time_s", "observed_worker_count", "os_peak_rss_bytes")


def _parse_bool(key, value: str) -> bool:
    v = value.strip().lower()
    if v in ("on", "true", "yes", "1"):
        return True
    if v in ("off", "false", "no", "0"):
        return False
    raise ConfigError(f"{key}: expected on/off, got {value!r}")


def _parse_int(key, value: str) -> int:
    try:
        return int(value.strip(), 0)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {value!r}") from None


def _parse_coord(key, value: str) -> CellCoord:
    parts = value.replace(" ", "").split(",")
    if len(parts) != 2:
        raise ConfigError(f"{key}: expected 'row,col', got {value!r}")
    return CellCoord(_parse_int(key, parts[0]), _parse_int(key, parts[1]))


def _parse_list(value: str) -> tuple[str, ...]:
    return tuple(p.strip().lower() for p in value.split(",") if p.strip())


@dataclass
class ExperimentConfig:
    maze: str | None = None
    width: int = 200
    height: int = 200
    seed: int = 1
    start: CellCoord | None = None
    goal: CellCoord | None = None
    layouts: tuple = (Layout.AOS, Layout.SOA)
    executors: tuple = EXECUTORS
    workers: int = 4
    batch: int = 4
    trials: int = 5
    cache: CacheConfig = field(default_factory=default_config)
    cache_name: str = "default"
    trace: bool = True
    output: str | None = None
    sample_os_memory: bool = False
    read_coords: bool = False

    def __post_init__(self):
        try:
            self.layouts = tuple(Layout.parse(x) for x in self.layouts)
        except LayoutLabError as exc:
            raise ConfigError(str(exc)) from None
        self.executors = tuple(str(x).lower() for x in self.executors)
        self.validate()

    def validate(self) -> None:
        if not self.layouts or not self.executors:
            raise ConfigError("experiment matrix is empty: need at least one layout and one executor")
        bad = [e for e in self.executors if e not in EXECUTORS]
        if bad:
            raise ConfigError(f"unknown executor(s) {bad}; expected st and/or mt")
        if len(set(self.layouts)) != len(self.layouts) or len(set(self.executors)) != len(self.executors):
            raise ConfigError("layouts and executors must not repeat")
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if "mt" in self.executors and self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        if not 1 <= self.batch <= 4:
            raise ConfigError(f"batch must be in [1, 4], got {self.batch}")
        if self.maze is None and (self.width < 1 or self.height < 1):
            raise ConfigError(f"maze dimensions must be >= 1, got {self.width}x{self.height}")

    @classmethod
    def from_text(cls, text: str) -> "ExperimentConfig":
        """Parse flat ``key = value`` lines; ``#`` starts a comment."""
        kw = {}
        cache_parts = {}
        for n, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {n}: expected key = value, got {raw!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            key = key.lower()
            if key == "maze":
                kw["maze"] = value
            elif key in ("width", "height", "seed", "workers", "batch", "trials"):
                kw[key] = _parse_int(key, value)
            elif key in ("start", "goal"):
                kw[key] = _parse_coord(key, value)
            elif key == "layouts":
                kw["layouts"] = _parse_list(value)
            elif key == "executors":
                kw["executors"] = _parse_list(value)
            elif key in ("trace", "sample_os_memory", "read_coords"):
                kw[key] = _parse_bool(key, value)
            elif key == "output":
                kw["output"] = value
            elif key == "cache":
                if value.lower() != "default":
                    raise ConfigError("cache: only 'default' is named; use cache.* keys for custom sizes")
            elif key.startswith("cache."):
                sub = key[len("cache."):]
                if sub not in ("d1_size", "d1_ways", "ll_size", "ll_ways", "line"):
                    raise ConfigError(f"unknown cache key {key!r}")
                cache_parts[sub] = _parse_int(key, value)
            else:
                raise ConfigError(f"line {n}: unknown key {key!r}")
        if cache_parts:
            base = default_config()
            try:
                kw["cache"] = make_config(
                    cache_parts.get("d1_size", base.D1.capacity),
                    cache_parts.get("d1_ways", base.D1.associativity),
                    cache_parts.get("ll_size", base.LL.capacity),
                    cache_parts.get("ll_ways", base.LL.associativity),
                    cache_parts.get("line", base.line),
                )
            except LayoutLabError as exc:
                raise ConfigError(f"cache: {exc}") from None
            kw["cache_name"] = "custom"
        return cls(**kw)

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        return cls.from_text(text)

    def load_maze(self) -> GridMaze:
        if self.maze is not None:
            maze = load_maze(self.maze)
        else:
            maze = generate_perfect_maze(self.width, self.height, self.seed)
        if self.start is not None or self.goal is not None:
            maze = maze.with_endpoints(self.start, self.goal)
        return maze

    def to_dict(self) -> dict:
        return {
            "maze": self.maze,
            "width": self.width,
            "height": self.height,
            "seed": self.seed,
            "start": list(self.start) if self.start else None,
            "goal": list(self.goal) if self.goal else None,
            "layouts": [lv.value for lv in self.layouts],
            "executors": list(self.executors),
            "workers": self.workers,
            "batch": self.batch,
            "trials": self.trials,
            "cache": self.cache_name,
            "cache_config": self.cache.to_dict(),
            "trace": self.trace,
            "sample_os_memory": self.sample_os_memory,
            "read_coords": self.read_coords,
        }


@dataclass
class CellResult:
    layout: Layout
    executor: str
    times: list[float]
    cost: int
    expansions: int
    heap_pushes: int
    heap_pops: int
    memory_model_bytes: int
    d_refs: int | None = None
    cache: CacheReport | None = None
    observed_worker_count: int | None = None
    os_peak_rss_bytes: int | None = None
    expanded: list[int] = field(default_factory=list, repr=False)

    @property
    def key(self) -> str:
        return f"{self.executor.upper()}-{self.layout.value.upper()}"

    @property
    def median(self) -> float:
        return statistics.median(self.times)

    def to_dict(self) -> dict:
        if self.executor == "mt":
            cache = NOT_SIMULATED
        else:
            cache = self.cache.to_dict() if self.cache is not None else None
        return {
            "layout": self.layout.value,
            "executor": self.executor,
            "cost": self.cost,
            "expansions": self.expansions,
            "heap_pushes": self.heap_pushes,
            "heap_pops": self.heap_pops,
            "memory_model_bytes": self.memory_model_bytes,
            "d_refs": self.d_refs,
            "cache": cache,
            "observed_worker_count": self.observed_worker_count,
            "os_peak_rss_bytes": self.os_peak_rss_bytes,
            "wall_time_s": {
                "median": round(self.median, 6),
                "min": round(min(self.times), 6),
                "max": round(max(self.times), 6),
            },
        }


def _ratio(num: float, den: float) -> float | None:
    if den == 0:
        return 1.0 if num == 0 else None
    return round(num / den, 6)


@dataclass
class RunReport:
    config: ExperimentConfig
    maze: GridMaze
    cells: list[CellResult]

    def cell(self, layout, executor) -> CellResult | None:
        layout = Layout.parse(layout)
        for c in self.cells:
            if c.layout is layout and c.executor == executor:
                return c
        return None

    @property
    def ratios(self) -> dict:
        """Speedups from the reported (6-decimal) medians.

        ``ood_over_dod`` is t(AoS)/t(SoA) per executor; ``mt_over_st`` is
        t(MT)/t(ST) per layout. ``None`` marks a zero denominator.
        """
        med = {(c.layout, c.executor): round(c.median, 6) for c in self.cells}
        out = {"ood_over_dod": {}, "mt_over_st": {}}
        for ex in EXECUTORS:
            a, s = med.get((Layout.AOS, ex)), med.get((Layout.SOA, ex))
            if a is not None and s is not None:
                out["ood_over_dod"][ex] = _ratio(a, s)
        for lv in Layout:
            st, mt = med.get((lv, "st")), med.get((lv, "mt"))
            if st is not None and mt is not None:
                out["mt_over_st"][lv.value] = _ratio(mt, st)
        return out

    def to_dict(self) -> dict:
        cfg = self.config.to_dict()
        cfg["resolved_maze"] = {
            "width": self.maze.width,
            "height": self.maze.height,
            "seed": self.maze.seed,
            "start": list(self.maze.start),
            "goal": list(self.maze.goal),
        }
        return {
            "config": cfg,
            "cells": [c.to_dict() for c in self.cells],
            "ratios": self.ratios,
        }

    def to_json(self) -> str:
        return dumps_report(self.to_dict())


def _peak_rss() -> int | None:
    try:
        import resource
    except ImportError:
        return None
    # ru_maxrss is KiB on Linux
    return resource.getrusage(resource.RUSAGE_SELF).ru_maxrss * 1024


def _run_cell(maze: GridMaze, cfg: ExperimentConfig, layout: Layout, executor: str) -> CellResult:
    plan = ParallelPlan(cfg.workers, cfg.batch) if executor == "mt" else None
    times = []
    result = None
    for _ in range(cfg.trials):
        store = new_store(layout, maze.cells, trace=False, width=maze.width)
        if plan is None:
            t0 = time.perf_counter()
            result = astar(maze, store, read_coords=cfg.read_coords)
            t1 = time.perf_counter()
        else:
            t0 = time.perf_counter()
            result = astar_mt(maze, store, plan, read_coords=cfg.read_coords)
            t1 = time.perf_counter()
        times.append(t1 - t0)

    cell = CellResult(
        layout=layout,
        executor=executor,
        times=times,
        cost=result.cost,
        expansions=result.expansions,
        heap_pushes=result.heap_pushes,
        heap_pops=result.heap_pops,
        memory_model_bytes=memory_model_bytes(layout, maze.cells),
        expanded=result.expanded,
    )
    if plan is not None:
        cell.observed_worker_count = observed_worker_count(result)
    elif cfg.trace:
        # separate untimed run so tracing cost never leaks into wall times
        store = new_store(layout, maze.cells, trace=True, width=maze.width)
        traced = astar(maze, store, read_coords=cfg.read_coords)
        cell.d_refs = len(traced.trace)
        cell.cache = simulate(traced.trace, cfg.cache)
    if cfg.sample_os_memory:
        cell.os_peak_rss_bytes = _peak_rss()
    return cell


def run_experiment(cfg: ExperimentConfig, maze: GridMaze | None = None) -> RunReport:
    """Run every configured cell in the order ST-AoS, ST-SoA, MT-AoS, MT-SoA."""
    cfg.validate()
    if maze is None:
        maze = cfg.load_maze()
    cells = []
    for executor in EXECUTORS:
        if executor not in cfg.executors:
            continue
        for layout in Layout:
            if layout not in cfg.layouts:
                continue
            name = f"{executor.upper()}-{layout.value.upper()}"
            log.info("running %s on %dx%d maze", name, maze.width, maze.height)
            try:
                cell = _run_cell(maze, cfg, layout, executor)
            except Exception as exc:
                raise RunFailure(name, exc) from exc
            if cells and cell.cost != cells[0].cost:
                raise RunFailure(name, f"cost {cell.cost} differs from {cells[0].key} cost {cells[0].cost}")
            cells.append(cell)
    return RunReport(cfg, maze, cells)


def _format_value(v, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if v is None:
        return "null"
    if v is True:
        return "true"
    if v is False:
        return "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isnan(v) or math.isinf(v):
            return "null"
        return f"{v:.6f}"
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, dict):
        if not v:
            return "{}"
        items = [f"{pad}{_format_value(str(k), indent, 0)}: {_format_value(v[k], indent, level + 1)}"
                 for k in sorted(v)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(v, (list, tuple)):
        if not v:
            return "[]"
        items = [pad + _format_value(x, indent, level + 1) for x in v]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(v).__name__}")


def dumps_report(obj) -> str:
    """JSON with sorted keys, 2-space indent and every float at 6 decimals."""
    return _format_value(obj, 2, 0) + "\n"


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _f6(x) -> str:
    return "" if x is None else f"{x:.6f}"


def _blank(x) -> str:
    return "" if x is None else str(x)


def emit_reports(report: RunReport, out_dir) -> list[Path]:
    """Write report.json, summary.csv and figdata/*.csv under ``out_dir``."""
    out = Path(out_dir)
    figdata = out / "figdata"
    figdata.mkdir(parents=True, exist_ok=True)
    files = {}
    files[out / "report.json"] = report.to_json()

    summary = []
    for c in report.cells:
        d1 = c.cache.levels.get("D1") if c.cache else None
        ll = c.cache.levels.get("LL") if c.cache else None
        summary.append([
            c.layout.value, c.executor, c.cost, c.expansions, c.heap_pushes, c.heap_pops,
            _f6(c.median), _f6(min(c.times)), _f6(max(c.times)), c.memory_model_bytes,
            _blank(c.d_refs),
            _blank(d1.misses if d1 else None), _f6(d1.miss_pct if d1 else None),
            _blank(ll.misses if ll else None), _f6(ll.miss_pct if ll else None),
            _blank(c.observed_worker_count),
        ])
    files[out / "summary.csv"] = _csv_text(
        ["layout", "executor", "cost", "expansions", "heap_pushes", "heap_pops",
         "wall_median_s", "wall_min_s", "wall_max_s", "memory_model_bytes", "d_refs",
         "d1_misses", "d1_miss_pct", "ll_misses", "ll_miss_pct", "observed_worker_count"],
        summary,
    )

    files[figdata / "execution_time.csv"] = _csv_text(
        ["cell", "median_s", "min_s", "max_s"],
        [[c.key, _f6(c.median), _f6(min(c.times)), _f6(max(c.times))] for c in report.cells],
    )
    files[figdata / "memory.csv"] = _csv_text(
        ["cell", "memory_model_bytes", "memory_model_mib"],
        [[c.key, c.memory_model_bytes, _f6(c.memory_model_bytes / 2**20)] for c in report.cells],
    )
    traced = [c for c in report.cells if c.cache is not None]
    files[figdata / "miss_pct.csv"] = _csv_text(
        ["cell", "level", "miss_pct"],
        [[c.key, name, _f6(s.miss_pct)] for c in traced for name, s in c.cache.levels.items()],
    )
    files[figdata / "raw_misses.csv"] = _csv_text(
        ["cell", "level", "misses", "accesses"],
        [[c.key, name, s.misses, s.accesses] for c in traced for name, s in c.cache.levels.items()],
    )
    files[figdata / "d_refs.csv"] = _csv_text(
        ["cell", "d_refs", "ll_refs"],
        [[c.key, c.d_refs, c.cache.levels["LL"].accesses] for c in traced],
    )

    for path, text in files.items():
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    return list(files)


def mask_volatile(report_dict: dict) -> dict:
    """Copy of a report dict with timing/scheduling fields blanked."""
    d = copy.deepcopy(report_dict)
    for cell in d["cells"]:
        for k in VOLATILE_CELL_FIELDS:
            cell[k] = "<masked>"
    d["ratios"] = "<masked>"
    return d
