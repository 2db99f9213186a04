"""Acceptance criteria, one test each; every test prints a PASS/FAIL line."""

import json
import os
import random
import statistics
import time
from contextlib import contextmanager

import pytest

from layoutlab.cachesim import compare_reports, default_config, simulate
from layoutlab.harness import ExperimentConfig, dumps_report, emit_reports, mask_volatile, run_experiment
from layoutlab.layoutstore import Field, new_store
from layoutlab.maze import generate_perfect_maze, validate_perfect
from layoutlab.parallel import ParallelPlan, astar_mt, observed_worker_count
from layoutlab.racecheck import LocksetDetector
from layoutlab.search import astar, bfs_oracle

# frozen from the first verified run on maze_200x200_seed1.llm, default cache config
GOLDEN_200_D1 = {"aos": (217_156, 27_532), "soa": (217_156, 19_030)}  # (accesses, misses)
GOLDEN_200_LL_MISSES = {"aos": 20_000, "soa": 14_352}


@contextmanager
def criterion(capsys, n, title):
    detail = {}
    try:
        yield detail
    except BaseException as exc:
        if isinstance(exc, pytest.skip.Exception):
            with capsys.disabled():
                print(f"\n[criterion {n}] SKIP {title}: {exc}")
            raise
        with capsys.disabled():
            print(f"\n[criterion {n}] FAIL {title}: {type(exc).__name__}: {exc}")
        raise
    extra = ", ".join(f"{k}={v}" for k, v in detail.items())
    with capsys.disabled():
        print(f"\n[criterion {n}] PASS {title}" + (f" ({extra})" if extra else ""))


def _store(maze, layout, trace=False):
    return new_store(layout, maze.cells, width=maze.width, trace=trace)


def test_c1_four_cells_match_bfs_oracle(capsys):
    with criterion(capsys, 1, "all four cells equal the BFS oracle on 100+ mazes up to 64x64") as d:
        rng = random.Random(20240101)
        t0 = time.perf_counter()
        plan = ParallelPlan(workers=4)
        n = 0
        for _ in range(110):
            m = generate_perfect_maze(rng.randint(1, 64), rng.randint(1, 64), rng.getrandbits(64))
            want = bfs_oracle(m)
            for layout in ("aos", "soa"):
                assert astar(m, _store(m, layout)).cost == want
                assert astar_mt(m, _store(m, layout), plan).cost == want
            n += 1
        elapsed = time.perf_counter() - t0
        d.update(mazes=n, seconds=f"{elapsed:.1f}")
        assert elapsed < 60.0


@pytest.mark.parametrize("w,h", [(1, 1), (2, 2), (16, 16), (200, 200)])
def test_c2_maze_invariants(capsys, w, h):
    with criterion(capsys, 2, f"{w}x{h} generated maze is perfect"):
        for seed in (0, 1, 2):
            m = generate_perfect_maze(w, h, seed)
            report = validate_perfect(m)
            assert report.ok, report.violations
            open_pairs = sum(bin(x & 0b0110).count("1") for x in m.walls)
            assert open_pairs == m.cells - 1


def test_c3_layout_equivalence(capsys, maze200):
    with criterion(capsys, 3, "ST-AoS and ST-SoA agree on expansions, path, heap counters, d_refs") as d:
        a = astar(maze200, _store(maze200, "aos", trace=True))
        s = astar(maze200, _store(maze200, "soa", trace=True))
        assert a.expanded == s.expanded
        assert a.path == s.path
        assert (a.heap_pushes, a.heap_pops) == (s.heap_pushes, s.heap_pops)
        assert len(a.trace) == len(s.trace)
        d.update(cost=a.cost, expansions=a.expansions, d_refs=len(a.trace))


def test_c4_streaming_field_misses(capsys):
    with criterion(capsys, 4, "streaming one field over 40,000 cells: 20,000 vs 5,000 D1 misses") as d:
        reports = {}
        for layout in ("aos", "soa"):
            store = new_store(layout, 40_000, trace=True)
            for i in range(40_000):
                store.get_field(i, Field.G_SCORE)
            reports[layout] = simulate(store.trace, default_config())
        assert reports["aos"]["D1"].misses == 20_000
        assert reports["soa"]["D1"].misses == 5_000
        ratio = compare_reports(reports["aos"], reports["soa"])["D1"]["misses"]
        assert ratio == 4.0
        d.update(ratio=ratio)


def test_c5_astar_soa_misses_not_above_aos(capsys, maze200):
    with criterion(capsys, 5, "SoA D1 misses <= AoS D1 misses on the 200x200 golden maze") as d:
        got = {}
        for layout in ("aos", "soa"):
            r = astar(maze200, _store(maze200, layout, trace=True))
            got[layout] = simulate(r.trace, default_config())
        d.update(aos=got["aos"]["D1"].misses, soa=got["soa"]["D1"].misses)
        assert got["soa"]["D1"].misses <= got["aos"]["D1"].misses
        for layout, rep in got.items():
            assert (rep["D1"].accesses, rep["D1"].misses) == GOLDEN_200_D1[layout]
            assert rep["LL"].misses == GOLDEN_200_LL_MISSES[layout]


@pytest.mark.smoke
def test_c6_mt_slower_than_st(capsys, maze200):
    with criterion(capsys, 6, "median t(MT)/t(ST) > 1 for both layouts, workers=4") as d:
        cpus = len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1)
        if cpus < 2:
            pytest.skip(f"needs >= 2 hardware threads, this machine exposes {cpus}")
        cfg = ExperimentConfig(trials=3, workers=4)
        rep = run_experiment(cfg, maze=maze200)
        for layout, ratio in rep.ratios["mt_over_st"].items():
            d[f"mt_over_st[{layout}]"] = ratio
        d["workers_seen"] = max(c.observed_worker_count for c in rep.cells if c.executor == "mt")
        assert all(r is not None and r > 1.0 for r in rep.ratios["mt_over_st"].values())


def test_c7_simulator_determinism_and_laws(capsys):
    with criterion(capsys, 7, "simulate is bit-stable; LL.accesses == D1.misses; misses >= distinct lines") as d:
        rng = random.Random(77)
        cfg = default_config()
        line = cfg.line
        for _ in range(1000):
            span = rng.choice([1 << 12, 1 << 16, 1 << 22])
            events = [(rng.randint(0, 1), rng.randrange(span), rng.choice([1, 4, 8]))
                      for _ in range(rng.randint(0, 200))]
            r1 = simulate(events, cfg)
            assert r1.to_json() == simulate(events, cfg).to_json()
            distinct = {ln for _, a, s in events for ln in range(a // line, (a + s - 1) // line + 1)}
            assert r1["LL"].accesses == r1["D1"].misses
            assert r1["D1"].misses >= len(distinct)
            assert r1["LL"].misses >= len(distinct)
        d.update(traces=1000)


def test_c8_golden_report(capsys, tmp_path, golden_dir):
    with criterion(capsys, 8, "4x4 report.json matches the frozen golden with volatile fields masked"):
        cfg = ExperimentConfig.from_text("width = 4\nheight = 4\nseed = 42\ntrials = 1\nworkers = 2\n")
        emit_reports(run_experiment(cfg), tmp_path)
        emitted = dumps_report(mask_volatile(json.loads((tmp_path / "report.json").read_text())))
        assert emitted == (golden_dir / "report_4x4.json").read_text()


def test_c9_parallel_suite_race_free(capsys):
    with criterion(capsys, 9, "parallel property runs report zero races under the lockset detector") as d:
        rng = random.Random(9)
        det = LocksetDetector()
        seen = []
        for _ in range(60):
            m = generate_perfect_maze(rng.randint(1, 48), rng.randint(1, 48), rng.getrandbits(64))
            plan = ParallelPlan(workers=rng.randint(1, 4), batch=rng.randint(1, 4))
            r = astar_mt(m, _store(m, rng.choice(["aos", "soa"])), plan, detector=det,
                         read_coords=rng.random() < 0.5)
            assert r.cost == bfs_oracle(m)
            seen.append(observed_worker_count(r))
        d.update(accesses_checked=det.accesses, races=len(det.races),
                 max_workers_seen=max(seen), median_workers=statistics.median(seen))
        assert det.races == []
        assert det.accesses > 0
