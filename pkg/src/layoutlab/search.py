"""Single-threaded A* over a :class:`GridMaze`, plus a BFS oracle."""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass, field

from .errors import InternalStateError, InvalidArgumentError, NoPathError
from .layoutstore import NO_PARENT, Field, MemoryTrace, NodeStore, Status
from .maze import CellCoord, GridMaze

LINHA, COLUNA, G, F = Field.LINHA, Field.COLUNA, Field.G_SCORE, Field.F_SCORE
OPEN, CLOSED = Status.OPEN, Status.CLOSED


@dataclass
class SearchResult:
    path: list[CellCoord]
    cost: int
    expansions: int
    heap_pushes: int
    heap_pops: int
    expanded: list[int] = field(default_factory=list, repr=False)
    trace: MemoryTrace | None = field(default=None, repr=False)
    # thread idents that ran at least one relaxation task (MT executor only)
    workers_seen: frozenset | None = None


def manhattan(c, d) -> int:
    return abs(c[0] - d[0]) + abs(c[1] - d[1])


def check_store(maze: GridMaze, store: NodeStore) -> None:
    if store.capacity != maze.cells:
        raise InvalidArgumentError(f"store capacity {store.capacity} != maze cells {maze.cells}")
    if store.width != maze.width:
        raise InvalidArgumentError(f"store width {store.width} != maze width {maze.width}")


def astar(maze: GridMaze, store: NodeStore, read_coords: bool = False) -> SearchResult:
    """Shortest start-to-goal path with a Manhattan heuristic and unit moves.

    Open-list entries are ``(f, -g, index)``: lowest f first, ties to the
    deeper node, then to the lower row-major index. Improved cells are pushed
    again and the outdated entries are dropped when popped (their f is above
    the stored one, or the cell is already closed).

    The relaxation loop touches only the g and f fields; a neighbour's
    coordinates come from its row-major index. With ``read_coords=True`` they
    are read from the store's row/col fields instead, which changes the
    memory trace (and the AoS/SoA cache comparison) but not the search.
    """
    check_store(maze, store)
    get, put = store.get_field, store.set_field
    status, parent = store.status, store.parent
    adj = maze.adjacency
    start, goal = maze.index(maze.start), maze.index(maze.goal)
    goal_row, goal_col = maze.goal
    w = maze.width

    put(start, G, 0.0)
    f0 = float(manhattan(maze.start, maze.goal))
    put(start, F, f0)
    status[start] = OPEN
    heap = [(f0, -0.0, start)]
    pushes, pops = 1, 0
    expanded = []

    while heap:
        f, _, i = heapq.heappop(heap)
        pops += 1
        if status[i] == CLOSED or f > get(i, F):
            continue
        status[i] = CLOSED
        expanded.append(i)
        if i == goal:
            break
        g_next = get(i, G) + 1.0
        for j in adj[i]:
            if status[j] == CLOSED:
                continue
            if g_next < get(j, G):
                if read_coords:
                    h = abs(get(j, LINHA) - goal_row) + abs(get(j, COLUNA) - goal_col)
                else:
                    h = abs(j // w + 1 - goal_row) + abs(j % w + 1 - goal_col)
                f_new = g_next + h
                put(j, G, g_next)
                put(j, F, f_new)
                parent[j] = i
                status[j] = OPEN
                heapq.heappush(heap, (f_new, -g_next, j))
                pushes += 1
    else:
        raise NoPathError(f"goal {maze.goal} unreachable from {maze.start}")

    path = reconstruct_path(store, goal, start=start)
    return SearchResult(
        path=path,
        cost=len(path) - 1,
        expansions=len(expanded),
        heap_pushes=pushes,
        heap_pops=pops,
        expanded=expanded,
        trace=store.trace,
    )


def reconstruct_path(store: NodeStore, goal, start=None) -> list[CellCoord]:
    """Follow parent links back from ``goal``; cells may be indices or coords.

    Coordinates of the returned cells are read from the store's row/col fields.
    """
    w = store.width
    goal = _as_index(goal, w)
    start = _as_index(start, w) if start is not None else None
    if store.status[goal] != CLOSED:
        raise InternalStateError(f"goal cell {goal} was never closed")
    chain = [goal]
    i = goal
    while store.parent[i] != NO_PARENT:
        i = store.parent[i]
        chain.append(i)
        if len(chain) > store.capacity:
            raise InternalStateError("parent chain contains a cycle")
    if start is not None and i != start:
        raise InternalStateError(f"parent chain ends at {i}, not at start {start}")
    chain.reverse()
    get = store.get_field
    return [CellCoord(int(get(k, LINHA)), int(get(k, COLUNA))) for k in chain]


def _as_index(c, width: int) -> int:
    if isinstance(c, int):
        return c
    return (c[0] - 1) * width + (c[1] - 1)


def bfs_oracle(maze: GridMaze, start=None, goal=None) -> int:
    start = maze.start if start is None else start
    goal = maze.goal if goal is None else goal
    for c in (start, goal):
        if not maze.contains(c):
            raise InvalidArgumentError(f"cell {tuple(c)} lies outside the grid")
    s, t = maze.index(start), maze.index(goal)
    dist = {s: 0}
    queue = deque([s])
    adj = maze.adjacency
    while queue:
        i = queue.popleft()
        if i == t:
            return dist[i]
        for j in adj[i]:
            if j not in dist:
                dist[j] = dist[i] + 1
                queue.append(j)
    raise NoPathError(f"goal {tuple(goal)} unreachable from {tuple(start)}")
