"""Multi-threaded A* with per-expansion neighbour fan-out.

The controlling thread pops one node, hands its neighbour relaxations to a
fixed thread pool and waits for all of them before the next pop. Each task is
a few arithmetic operations, so pool dispatch and lock traffic dominate the
runtime. That overhead is the behaviour this executor exists to measure; do
not coarsen the decomposition to "fix" it.
"""

from __future__ import annotations

import heapq
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .errors import ExecutorError, InvalidArgumentError, NoPathError, UnavailableError
from .layoutstore import Field, Status
from .maze import GridMaze
from .racecheck import LocksetDetector
from .search import SearchResult, check_store, manhattan, reconstruct_path

LINHA, COLUNA, G, F = Field.LINHA, Field.COLUNA, Field.G_SCORE, Field.F_SCORE
OPEN, CLOSED = Status.OPEN, Status.CLOSED


@dataclass(frozen=True)
class ParallelPlan:
    workers: int = 4
    batch: int = 4

    def __post_init__(self):
        if self.workers < 1:
            raise InvalidArgumentError(f"workers must be >= 1, got {self.workers}")
        if not 1 <= self.batch <= 4:
            raise InvalidArgumentError(f"batch must be in [1, 4], got {self.batch}")


def _chunks(items, n):
    k, extra = divmod(len(items), n)
    out, pos = [], 0
    for t in range(n):
        size = k + (1 if t < extra else 0)
        if size:
            out.append(items[pos:pos + size])
        pos += size
    return out


def astar_mt(maze: GridMaze, store, plan: ParallelPlan, instrument: bool = True,
             detector: LocksetDetector | None = None, read_coords: bool = False) -> SearchResult:
    """A* whose neighbour relaxations run on ``plan.workers`` pool threads.

    The open list and every g/f/parent/status access is guarded by one lock.
    Row/col fields are never written during a search; with ``read_coords``
    the tasks read them without the lock.
    Pass a :class:`LocksetDetector` to audit every shared access.
    """
    check_store(maze, store)
    if store.trace is not None:
        raise InvalidArgumentError("tracing is single-threaded only; build the store with trace=False")

    lock = detector.lock("open-list") if detector is not None else threading.Lock()
    if detector is not None:
        note = detector.access
    else:
        def note(location, write):
            pass

    _get, _put = store.get_field, store.set_field
    status, parent = store.status, store.parent

    def get(i, f):
        note(("field", i, int(f)), False)
        return _get(i, f)

    def put(i, f, v):
        note(("field", i, int(f)), True)
        _put(i, f, v)

    adj = maze.adjacency
    start, goal = maze.index(maze.start), maze.index(maze.goal)
    goal_row, goal_col = maze.goal
    w = maze.width
    heap = []
    counters = {"pushes": 0}
    seen = set()

    def relax(cells, i, g_next):
        if instrument:
            tid = threading.get_ident()
        for j in cells:
            if read_coords:
                h = abs(get(j, LINHA) - goal_row) + abs(get(j, COLUNA) - goal_col)
            else:
                h = abs(j // w + 1 - goal_row) + abs(j % w + 1 - goal_col)
            with lock:
                if instrument:
                    seen.add(tid)
                note(("status", j), False)
                if status[j] == CLOSED:
                    continue
                if g_next < get(j, G):
                    f_new = g_next + h
                    put(j, G, g_next)
                    put(j, F, f_new)
                    note(("parent", j), True)
                    parent[j] = i
                    note(("status", j), True)
                    status[j] = OPEN
                    note("heap", True)
                    heapq.heappush(heap, (f_new, -g_next, j))
                    counters["pushes"] += 1

    with lock:
        put(start, G, 0.0)
        f0 = float(manhattan(maze.start, maze.goal))
        put(start, F, f0)
        note(("status", start), True)
        status[start] = OPEN
        note("heap", True)
        heap.append((f0, -0.0, start))
        counters["pushes"] = 1
    pops = 0
    expanded = []
    found = False

    with ThreadPoolExecutor(max_workers=plan.workers, thread_name_prefix="astar") as pool:
        while True:
            with lock:
                note("heap", True)
                if not heap:
                    break
                f, _, i = heapq.heappop(heap)
                pops += 1
                note(("status", i), False)
                if status[i] == CLOSED or f > get(i, F):
                    continue
                note(("status", i), True)
                status[i] = CLOSED
                expanded.append(i)
                if i == goal:
                    found = True
                    break
                g_next = get(i, G) + 1.0
            nbrs = adj[i]
            if not nbrs:
                continue
            futures = [pool.submit(relax, part, i, g_next) for part in _chunks(nbrs, plan.batch)]
            errors = [fut.exception() for fut in futures]
            errors = [e for e in errors if e is not None]
            if errors:
                raise ExecutorError(f"worker task failed: {errors[0]!r}") from errors[0]

    if not found:
        raise NoPathError(f"goal {maze.goal} unreachable from {maze.start}")
    path = reconstruct_path(store, goal, start=start)
    return SearchResult(
        path=path,
        cost=len(path) - 1,
        expansions=len(expanded),
        heap_pushes=counters["pushes"],
        heap_pops=pops,
        expanded=expanded,
        workers_seen=frozenset(seen) if instrument else None,
    )


def observed_worker_count(run: SearchResult) -> int:
    """Distinct pool threads that ran a relaxation task.

    A search that finishes without dispatching any task (1x1 maze) still ran
    on one thread, so the floor is 1.
    """
    if run.workers_seen is None:
        raise UnavailableError("run was made without worker instrumentation")
    return max(1, len(run.workers_seen))
