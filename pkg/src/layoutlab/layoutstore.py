"""Per-cell search fields in array-of-structs or struct-of-arrays layout.

Both stores hold the same four 8-byte float fields per cell (row, col, g, f)
and differ only in where each ``(cell, field)`` pair lives in a modelled
address space starting at 0:

* AoS: ``address = i * 32 + field * 8``; one contiguous region of
  ``capacity * 32`` bytes.
* SoA: ``address = field * align64(capacity * 8) + i * 8``; four regions, each
  starting on a 64-byte boundary.

Every ``get_field``/``set_field`` on a traced store appends exactly one event to
its :class:`MemoryTrace`. Parent links and open/closed status are bookkeeping
kept in separate, untraced arrays so the traced footprint is identical for
both layouts.
"""

from __future__ import annotations

import enum
import io
import struct
from array import array

from .errors import InvalidArgumentError, TraceFormatError

FIELD_SIZE = 8
RECORD_STRIDE = 4 * FIELD_SIZE
LINE_ALIGN = 64
INF = float("inf")
NO_PARENT = -1

# Fixed per-store overheads used by the memory model: one 64-byte
# descriptor per traced region (AoS has one region, SoA has four).
OVERHEAD_AOS = 64
OVERHEAD_SOA = 4 * 64


class Layout(str, enum.Enum):
    AOS = "aos"
    SOA = "soa"

    @classmethod
    def parse(cls, value) -> "Layout":
        if isinstance(value, Layout):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise InvalidArgumentError(f"unknown layout {value!r}; expected 'aos' or 'soa'") from None


class Field(enum.IntEnum):
    LINHA = 0
    COLUNA = 1
    G_SCORE = 2
    F_SCORE = 3


class Status(enum.IntEnum):
    UNVISITED = 0
    OPEN = 1
    CLOSED = 2


READ, WRITE = 0, 1


def align64(n: int) -> int:
    return (n + LINE_ALIGN - 1) // LINE_ALIGN * LINE_ALIGN


class MemoryTrace:
    """Ordered byte-addressed read/write events.

    Events are kept column-wise (ops, addresses, sizes) so that a few hundred
    thousand of them stay cheap to record and replay.
    """

    __slots__ = ("ops", "addrs", "sizes")

    def __init__(self):
        self.ops = bytearray()
        self.addrs = array("Q")
        self.sizes = bytearray()

    def record(self, op: int, address: int, size: int = FIELD_SIZE) -> None:
        self.ops.append(op)
        self.addrs.append(address)
        self.sizes.append(size)

    def __len__(self):
        return len(self.ops)

    def __iter__(self):
        return zip(self.ops, self.addrs, self.sizes)

    def __eq__(self, other):
        if not isinstance(other, MemoryTrace):
            return NotImplemented
        return self.ops == other.ops and self.addrs == other.addrs and self.sizes == other.sizes

    @classmethod
    def from_events(cls, events) -> "MemoryTrace":
        t = cls()
        for op, addr, size in events:
            t.record(op, addr, size)
        return t

    def to_bytes(self) -> bytes:
        buf = io.BytesIO()
        write_trace(self, buf)
        return buf.getvalue()


TRACE_HEADER = b"LLTRACE 1\n"
_EVENT = struct.Struct("<BQB")


def write_trace(trace: MemoryTrace, fh) -> None:
    """Serialize ``trace`` to a binary ``LLTRACE 1`` stream."""
    fh.write(TRACE_HEADER)
    pack = _EVENT.pack
    fh.write(b"".join(pack(op, a, s) for op, a, s in trace))


def read_trace(fh) -> MemoryTrace:
    data = fh.read()
    if not data.startswith(TRACE_HEADER):
        raise TraceFormatError("missing LLTRACE 1 header")
    payload = memoryview(data)[len(TRACE_HEADER):]
    if len(payload) % _EVENT.size:
        raise TraceFormatError(f"trailing partial event ({len(payload) % _EVENT.size} bytes)")
    trace = MemoryTrace()
    for n, (op, addr, size) in enumerate(_EVENT.iter_unpack(payload)):
        if op not in (READ, WRITE):
            raise TraceFormatError(f"event {n}: unknown op {op}")
        if size == 0:
            raise TraceFormatError(f"event {n}: zero-sized access")
        trace.record(op, addr, size)
    return trace


def save_trace(trace: MemoryTrace, path) -> None:
    with open(path, "wb") as fh:
        write_trace(trace, fh)


def load_trace(path) -> MemoryTrace:
    with open(path, "rb") as fh:
        return read_trace(fh)


class NodeStore:
    """Common surface of the two layouts; use :func:`new_store` to build one."""

    layout: Layout

    def __init__(self, capacity: int, width: int | None = None, trace: bool = False):
        if capacity < 1:
            raise InvalidArgumentError(f"capacity must be >= 1, got {capacity}")
        self.capacity = capacity
        self.width = width or capacity
        self.trace = MemoryTrace() if trace else None
        self.parent = array("i", [NO_PARENT]) * capacity
        self.status = bytearray(capacity)

    def address(self, i: int, f: int) -> int:
        raise NotImplementedError

    def regions(self) -> list[tuple[int, int]]:
        """``(base, length)`` of each traced region."""
        raise NotImplementedError

    def _check(self, i: int, f: int) -> None:
        if not 0 <= i < self.capacity:
            raise InvalidArgumentError(f"cell index {i} out of range [0, {self.capacity})")
        if not 0 <= f < 4:
            raise InvalidArgumentError(f"unknown field {f}")

    def get_field(self, i: int, f: int) -> float:
        raise NotImplementedError

    def set_field(self, i: int, f: int, v: float) -> None:
        raise NotImplementedError

    def memory_model_bytes(self) -> int:
        return memory_model_bytes(self.layout, self.capacity)


class AoSStore(NodeStore):
    layout = Layout.AOS

    def __init__(self, capacity, width=None, trace=False):
        super().__init__(capacity, width, trace)
        w = self.width
        data = array("d", bytes(RECORD_STRIDE * capacity))
        for i in range(capacity):
            base = 4 * i
            data[base] = i // w + 1
            data[base + 1] = i % w + 1
            data[base + 2] = INF
            data[base + 3] = INF
        self._data = data

    def address(self, i, f):
        return i * RECORD_STRIDE + f * FIELD_SIZE

    def regions(self):
        return [(0, self.capacity * RECORD_STRIDE)]

    def get_field(self, i, f):
        self._check(i, f)
        if self.trace is not None:
            self.trace.record(READ, i * RECORD_STRIDE + f * FIELD_SIZE)
        return self._data[4 * i + f]

    def set_field(self, i, f, v):
        self._check(i, f)
        if self.trace is not None:
            self.trace.record(WRITE, i * RECORD_STRIDE + f * FIELD_SIZE)
        self._data[4 * i + f] = v


class SoAStore(NodeStore):
    layout = Layout.SOA

    def __init__(self, capacity, width=None, trace=False):
        super().__init__(capacity, width, trace)
        w = self.width
        self.region_stride = align64(capacity * FIELD_SIZE)
        self._fields = (
            array("d", (i // w + 1 for i in range(capacity))),
            array("d", (i % w + 1 for i in range(capacity))),
            array("d", [INF]) * capacity,
            array("d", [INF]) * capacity,
        )

    def address(self, i, f):
        return f * self.region_stride + i * FIELD_SIZE

    def regions(self):
        return [(f * self.region_stride, self.capacity * FIELD_SIZE) for f in range(4)]

    def get_field(self, i, f):
        self._check(i, f)
        if self.trace is not None:
            self.trace.record(READ, f * self.region_stride + i * FIELD_SIZE)
        return self._fields[f][i]

    def set_field(self, i, f, v):
        self._check(i, f)
        if self.trace is not None:
            self.trace.record(WRITE, f * self.region_stride + i * FIELD_SIZE)
        self._fields[f][i] = v


def new_store(layout, capacity: int, trace: bool = False, width: int | None = None) -> NodeStore:
    """Build an empty store; ``width`` sets how cell indices map to (row, col).

    Without ``width`` the cells are treated as a single row.
    """
    layout = Layout.parse(layout)
    cls = AoSStore if layout is Layout.AOS else SoAStore
    return cls(capacity, width=width, trace=trace)


def memory_model_bytes(layout, capacity: int) -> int:
    """Deterministic footprint: traced fields + parent (4 B) + status (1 B) + overhead."""
    layout = Layout.parse(layout)
    bookkeeping = capacity * 4 + capacity * 1
    if layout is Layout.AOS:
        return capacity * RECORD_STRIDE + bookkeeping + OVERHEAD_AOS
    return 4 * align64(capacity * FIELD_SIZE) + bookkeeping + OVERHEAD_SOA


def payload_bytes(layout, capacity: int) -> int:
    """The traced-field part of :func:`memory_model_bytes`."""
    layout = Layout.parse(layout)
    if layout is Layout.AOS:
        return capacity * RECORD_STRIDE
    return 4 * align64(capacity * FIELD_SIZE)
