"""Trace-driven two-level (D1 -> LL) data cache simulator.

Model:

* set-associative, exact LRU replacement, cold start, no prefetching;
* write-back + write-allocate: a write miss fills the line like a read, and
  the line is marked dirty;
* inclusive: every D1 miss is one LL access, and a line evicted from LL is
  back-invalidated in D1.

A dirty line evicted from D1 is written into its LL copy (present by
inclusion). The writeback is tallied in ``writebacks`` but is not an LL
access and does not change LL recency, so ``LL.accesses == D1.misses`` holds
exactly. Accesses that straddle a line boundary are split into one access per
line touched; ``d_refs`` counts trace events before the split.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .errors import InvalidArgumentError


@dataclass(frozen=True)
class LevelConfig:
    name: str
    capacity: int
    associativity: int
    line: int = 64

    def __post_init__(self):
        if self.line <= 0 or self.line & (self.line - 1):
            raise InvalidArgumentError(f"{self.name}: line size {self.line} is not a power of two")
        if self.capacity <= 0 or self.associativity <= 0:
            raise InvalidArgumentError(f"{self.name}: capacity and associativity must be positive")
        if self.capacity % (self.associativity * self.line):
            raise InvalidArgumentError(
                f"{self.name}: capacity {self.capacity} not divisible by "
                f"{self.associativity} ways x {self.line} B lines"
            )

    @property
    def sets(self) -> int:
        return self.capacity // (self.associativity * self.line)


@dataclass(frozen=True)
class CacheConfig:
    levels: tuple[LevelConfig, ...]
    replacement: str = "LRU"
    write_policy: str = "write-back+write-allocate"
    inclusion: str = "inclusive"

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple(self.levels))
        if len(self.levels) != 2:
            raise InvalidArgumentError("the simulator models exactly two levels (D1, LL)")
        if len({lv.line for lv in self.levels}) != 1:
            raise InvalidArgumentError("all levels must share one line size")
        if len({lv.name for lv in self.levels}) != len(self.levels):
            raise InvalidArgumentError("level names must be unique")

    @property
    def line(self) -> int:
        return self.levels[0].line

    def __getattr__(self, name):
        # cfg.D1 / cfg.LL
        for lv in self.__dict__.get("levels", ()):
            if lv.name == name:
                return lv
        raise AttributeError(name)

    def to_dict(self) -> dict:
        return {
            "levels": [
                {"name": lv.name, "capacity": lv.capacity, "associativity": lv.associativity, "line": lv.line}
                for lv in self.levels
            ],
            "replacement": self.replacement,
            "write_policy": self.write_policy,
            "inclusion": self.inclusion,
        }


def default_config() -> CacheConfig:
    """Data path of an Intel Core i5-7200U.

    128 KB of L1 over two cores split into I and D halves gives 32 KiB of D1
    per core (8-way). LL is the shared 3 MiB L3 (12-way). The 512 KB L2 is not
    modelled.
    """
    return CacheConfig((
        LevelConfig("D1", 32 * 1024, 8, 64),
        LevelConfig("LL", 3 * 1024 * 1024, 12, 64),
    ))


def make_config(d1_size: int, d1_ways: int, ll_size: int, ll_ways: int, line: int = 64) -> CacheConfig:
    return CacheConfig((LevelConfig("D1", d1_size, d1_ways, line), LevelConfig("LL", ll_size, ll_ways, line)))


@dataclass
class LevelStats:
    accesses: int = 0
    misses: int = 0
    writebacks: int = 0

    @property
    def miss_pct(self) -> float:
        return 100.0 * self.misses / self.accesses if self.accesses else 0.0


@dataclass
class CacheReport:
    levels: dict[str, LevelStats]
    d_refs: int = 0
    line_accesses: int = 0
    config: dict = field(default_factory=dict)

    def __getitem__(self, name) -> LevelStats:
        return self.levels[name]

    def to_dict(self) -> dict:
        return {
            "d_refs": self.d_refs,
            "line_accesses": self.line_accesses,
            "levels": {
                name: {
                    "accesses": s.accesses,
                    "misses": s.misses,
                    "miss_pct": round(s.miss_pct, 6),
                    "writebacks": s.writebacks,
                }
                for name, s in self.levels.items()
            },
            "config": self.config,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


class _Level:
    """One set-associative LRU level; each set is a list of tags, MRU last."""

    def __init__(self, cfg: LevelConfig):
        self.cfg = cfg
        self.nsets = cfg.sets
        self.ways = cfg.associativity
        self.sets = [[] for _ in range(self.nsets)]
        self.dirty = set()
        self.stats = LevelStats()

    def lookup(self, line_no: int, write: bool):
        """Touch ``line_no``; returns ``(hit, evicted_line_or_None, evicted_dirty)``."""
        s = self.sets[line_no % self.nsets]
        self.stats.accesses += 1
        if line_no in s:
            if s[-1] != line_no:
                s.remove(line_no)
                s.append(line_no)
            if write:
                self.dirty.add(line_no)
            return True, None, False
        self.stats.misses += 1
        victim = None
        victim_dirty = False
        if len(s) >= self.ways:
            victim = s.pop(0)
            if victim in self.dirty:
                self.dirty.discard(victim)
                victim_dirty = True
                self.stats.writebacks += 1
        s.append(line_no)
        if write:
            self.dirty.add(line_no)
        return False, victim, victim_dirty

    def invalidate(self, line_no: int) -> bool:
        s = self.sets[line_no % self.nsets]
        if line_no in s:
            s.remove(line_no)
            if line_no in self.dirty:
                self.dirty.discard(line_no)
                return True
        return False


def simulate(trace, cfg: CacheConfig | None = None) -> CacheReport:
    """Replay ``trace`` (a MemoryTrace or iterable of (op, addr, size)) through ``cfg``."""
    cfg = cfg or default_config()
    d1_cfg, ll_cfg = cfg.levels
    d1, ll = _Level(d1_cfg), _Level(ll_cfg)
    shift = cfg.line.bit_length() - 1
    d_refs = 0
    line_accesses = 0
    d1_lookup, ll_lookup = d1.lookup, ll.lookup

    for op, addr, size in trace:
        d_refs += 1
        if addr < 0 or size <= 0:
            raise InvalidArgumentError(f"bad trace event ({op}, {addr}, {size})")
        write = op == 1
        first = addr >> shift
        last = (addr + size - 1) >> shift
        for line_no in range(first, last + 1):
            line_accesses += 1
            hit, victim, victim_dirty = d1_lookup(line_no, write)
            if hit:
                continue
            if victim_dirty and victim in ll.sets[victim % ll.nsets]:
                ll.dirty.add(victim)
            _, ll_victim, ll_victim_dirty = ll_lookup(line_no, False)
            if ll_victim is not None and d1.invalidate(ll_victim) and not ll_victim_dirty:
                ll.stats.writebacks += 1

    return CacheReport(
        levels={d1_cfg.name: d1.stats, ll_cfg.name: ll.stats},
        d_refs=d_refs,
        line_accesses=line_accesses,
        config=cfg.to_dict(),
    )


@dataclass
class RatioTable:
    """Per-level ``a / b`` ratios of misses and accesses."""

    ratios: dict[str, dict[str, float]]

    @property
    def infinite(self) -> list[tuple[str, str]]:
        return [(lv, k) for lv, row in self.ratios.items() for k, v in row.items() if math.isinf(v)]

    def __getitem__(self, level):
        return self.ratios[level]


def _ratio(a: float, b: float) -> float:
    if b == 0:
        return 1.0 if a == 0 else math.inf
    return a / b


def compare_reports(a: CacheReport, b: CacheReport) -> RatioTable:
    if set(a.levels) != set(b.levels):
        raise InvalidArgumentError(f"level sets differ: {sorted(a.levels)} vs {sorted(b.levels)}")
    return RatioTable({
        name: {
            "misses": _ratio(a.levels[name].misses, b.levels[name].misses),
            "accesses": _ratio(a.levels[name].accesses, b.levels[name].accesses),
        }
        for name in a.levels
    })
