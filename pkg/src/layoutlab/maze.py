"""Perfect rectangular mazes: generation, validation, queries and persistence.

Cells are addressed by 1-based ``(row, col)`` coordinates. Each cell carries a
4-bit openness mask; a set bit means the wall on that side is open::

    bit0 = North, bit1 = East, bit2 = South, bit3 = West

Internally the masks are stored row-major, so the cell ``(r, c)`` lives at
index ``(r - 1) * width + (c - 1)``.
"""

from __future__ import annotations

import os
import zlib
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple

from .errors import InvalidArgumentError, MazeFormatError, MazeValidationError
from .rng import MASK64, XorShift64Star

NORTH, EAST, SOUTH, WEST = 1, 2, 4, 8
# (bit, d_row, d_col, opposite bit) in the fixed N, E, S, W order
DIRECTIONS = (
    (NORTH, -1, 0, SOUTH),
    (EAST, 0, 1, WEST),
    (SOUTH, 1, 0, NORTH),
    (WEST, 0, -1, EAST),
)

MAGIC = "LLMAZE"
FORMAT_VERSION = 1


class CellCoord(NamedTuple):
    row: int
    col: int


@dataclass(frozen=True)
class GridMaze:
    width: int
    height: int
    walls: bytes
    start: CellCoord
    goal: CellCoord
    seed: int = 0

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise InvalidArgumentError(f"maze dimensions must be >= 1, got {self.width}x{self.height}")
        if len(self.walls) != self.width * self.height:
            raise MazeValidationError(
                f"mask count {len(self.walls)} does not match {self.width}x{self.height}"
            )
        if any(m > 0xF for m in self.walls):
            raise MazeValidationError("wall masks must fit in 4 bits")
        if not 0 <= self.seed <= MASK64:
            raise InvalidArgumentError("seed must be a 64-bit unsigned integer")
        object.__setattr__(self, "walls", bytes(self.walls))
        object.__setattr__(self, "start", CellCoord(*self.start))
        object.__setattr__(self, "goal", CellCoord(*self.goal))
        for name in ("start", "goal"):
            if not self.contains(getattr(self, name)):
                raise InvalidArgumentError(f"{name} {getattr(self, name)} lies outside the grid")

    @property
    def cells(self) -> int:
        return self.width * self.height

    def contains(self, c) -> bool:
        return 1 <= c[0] <= self.height and 1 <= c[1] <= self.width

    def index(self, c) -> int:
        return (c[0] - 1) * self.width + (c[1] - 1)

    def coord(self, i: int) -> CellCoord:
        return CellCoord(i // self.width + 1, i % self.width + 1)

    def mask(self, c) -> int:
        return self.walls[self.index(c)]

    @cached_property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        """Open neighbours of every cell as row-major indices, N/E/S/W order.

        Only neighbours inside the grid are listed, even if a malformed mask
        has a boundary bit set.
        """
        w, h = self.width, self.height
        out = []
        for i, m in enumerate(self.walls):
            r, c = divmod(i, w)
            nbrs = []
            for bit, dr, dc, _ in DIRECTIONS:
                if m & bit:
                    nr, nc = r + dr, c + dc
                    if 0 <= nr < h and 0 <= nc < w:
                        nbrs.append(nr * w + nc)
            out.append(tuple(nbrs))
        return tuple(out)

    def with_endpoints(self, start=None, goal=None) -> "GridMaze":
        return GridMaze(
            self.width,
            self.height,
            self.walls,
            CellCoord(*start) if start is not None else self.start,
            CellCoord(*goal) if goal is not None else self.goal,
            self.seed,
        )


@dataclass
class ValidationReport:
    ok: bool
    violations: list[str] = field(default_factory=list)

    def __bool__(self):
        return self.ok


def generate_perfect_maze(width: int, height: int, seed: int, start=None, goal=None) -> GridMaze:
    """Carve a perfect maze with an iterative randomized depth-first backtracker.

    Carving starts at (1, 1). At every step the unvisited neighbours of the
    stack top are collected in N, E, S, W order and one is picked with
    ``XorShift64Star(seed).below(k)``, so output depends only on the inputs.
    """
    if width < 1 or height < 1:
        raise InvalidArgumentError(f"maze dimensions must be >= 1, got {width}x{height}")
    if not 0 <= seed <= MASK64:
        raise InvalidArgumentError("seed must be a 64-bit unsigned integer")
    rng = XorShift64Star(seed)
    walls = bytearray(width * height)
    visited = bytearray(width * height)
    visited[0] = 1
    stack = [(0, 0)]
    while stack:
        r, c = stack[-1]
        options = []
        for bit, dr, dc, opp in DIRECTIONS:
            nr, nc = r + dr, c + dc
            if 0 <= nr < height and 0 <= nc < width and not visited[nr * width + nc]:
                options.append((bit, opp, nr, nc))
        if not options:
            stack.pop()
            continue
        bit, opp, nr, nc = options[rng.below(len(options))] if len(options) > 1 else options[0]
        walls[r * width + c] |= bit
        walls[nr * width + nc] |= opp
        visited[nr * width + nc] = 1
        stack.append((nr, nc))
    return GridMaze(
        width,
        height,
        bytes(walls),
        CellCoord(*start) if start is not None else CellCoord(height, width),
        CellCoord(*goal) if goal is not None else CellCoord(1, 1),
        seed,
    )


def validate_perfect(maze: GridMaze) -> ValidationReport:
    w, h = maze.width, maze.height
    walls = maze.walls
    violations = []
    open_edges = 0
    for i, m in enumerate(walls):
        r, c = divmod(i, w)
        for bit, dr, dc, opp in DIRECTIONS:
            if not m & bit:
                continue
            nr, nc = r + dr, c + dc
            if not (0 <= nr < h and 0 <= nc < w):
                violations.append(f"boundary: cell {maze.coord(i)} open toward outside ({bit:#x})")
                continue
            if not walls[nr * w + nc] & opp:
                violations.append(f"asymmetric: cell {maze.coord(i)} open toward {maze.coord(nr * w + nc)} but not back")
            elif bit in (EAST, SOUTH):
                open_edges += 1

    # connectivity over symmetric open edges only
    seen = bytearray(len(walls))
    seen[0] = 1
    queue = deque([0])
    reached = 1
    adj = maze.adjacency
    while queue:
        i = queue.popleft()
        for j in adj[i]:
            if not seen[j] and walls[j] & _toward(j, i, w):
                seen[j] = 1
                reached += 1
                queue.append(j)
    if reached != maze.cells:
        violations.append(f"disconnected: {maze.cells - reached} of {maze.cells} cells unreachable from (1, 1)")

    if open_edges != maze.cells - 1:
        violations.append(f"cycle/edge-count: {open_edges} open wall pairs, expected {maze.cells - 1}")
    return ValidationReport(not violations, violations)


def _toward(i: int, j: int, w: int) -> int:
    """Bit on cell ``i`` that faces adjacent cell ``j``."""
    d = j - i
    if d == -w:
        return NORTH
    if d == w:
        return SOUTH
    return EAST if d == 1 else WEST


def open_neighbors(maze: GridMaze, c) -> list[CellCoord]:
    if not maze.contains(c):
        raise InvalidArgumentError(f"cell {tuple(c)} lies outside the {maze.width}x{maze.height} grid")
    return [maze.coord(j) for j in maze.adjacency[maze.index(c)]]


def dumps_maze(maze: GridMaze) -> str:
    lines = [
        f"{MAGIC} {FORMAT_VERSION}",
        f"{maze.width} {maze.height} {maze.seed}",
        f"{maze.start.row} {maze.start.col} {maze.goal.row} {maze.goal.col}",
    ]
    w = maze.width
    for r in range(maze.height):
        lines.append(" ".join(f"{m:x}" for m in maze.walls[r * w:(r + 1) * w]))
    body = "\n".join(lines) + "\n"
    crc = zlib.crc32(body.encode("utf-8"))
    return body + f"CRC32 {crc:08x}\n"


def loads_maze(text: str) -> GridMaze:
    """Parse the text maze format; checksum first, then structure, then perfection."""
    if not text.endswith("\n"):
        raise MazeFormatError("maze file is truncated (missing final newline)")
    cut = text.rfind("CRC32 ")
    if cut < 0 or (cut > 0 and text[cut - 1] != "\n"):
        raise MazeFormatError("missing CRC32 trailer")
    body, trailer = text[:cut], text[cut:].rstrip("\n")
    parts = trailer.split()
    if len(parts) != 2 or len(parts[1]) != 8:
        raise MazeFormatError(f"malformed checksum line {trailer!r}")
    try:
        expected = int(parts[1], 16)
    except ValueError:
        raise MazeFormatError(f"malformed checksum line {trailer!r}") from None
    if zlib.crc32(body.encode("utf-8")) != expected:
        raise MazeFormatError("CRC32 mismatch")

    lines = body.split("\n")[:-1]
    if len(lines) < 3:
        raise MazeFormatError("maze header is incomplete")
    if lines[0] != f"{MAGIC} {FORMAT_VERSION}":
        raise MazeFormatError(f"bad magic/version line {lines[0]!r}")
    try:
        width, height, seed = (int(x) for x in _fields(lines[1], 3))
        sr, sc, gr, gc = (int(x) for x in _fields(lines[2], 4))
    except ValueError as exc:
        raise MazeFormatError(f"bad header: {exc}") from None

    rows = lines[3:]
    if width < 1 or height < 1 or len(rows) != height:
        raise MazeValidationError(f"expected {height} mask rows for {width}x{height}, found {len(rows)}")
    walls = bytearray()
    for n, row in enumerate(rows, start=1):
        digits = row.split(" ")
        if len(digits) != width:
            raise MazeValidationError(f"row {n} has {len(digits)} cells, expected {width}")
        for d in digits:
            if len(d) != 1 or d not in "0123456789abcdef":
                raise MazeFormatError(f"row {n} contains a non-hex mask {d!r}")
            walls.append(int(d, 16))

    try:
        maze = GridMaze(width, height, bytes(walls), CellCoord(sr, sc), CellCoord(gr, gc), seed)
    except InvalidArgumentError as exc:
        raise MazeValidationError(str(exc)) from None
    report = validate_perfect(maze)
    if not report.ok:
        raise MazeValidationError("; ".join(report.violations))
    return maze


def _fields(line: str, n: int) -> list[str]:
    parts = line.split(" ")
    if len(parts) != n:
        raise ValueError(f"expected {n} fields in {line!r}")
    return parts


def save_maze(maze: GridMaze, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps_maze(maze))


def load_maze(path) -> GridMaze:
    with open(os.fspath(path), "rb") as fh:
        raw = fh.read()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError:
        raise MazeFormatError("maze file is not valid UTF-8") from None
    return loads_maze(text)
