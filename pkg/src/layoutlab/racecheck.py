"""Lockset race detection for the multi-threaded executor.

This follows the Eraser algorithm (Savage et al., 1997). Every shared location
moves through the states virgin -> exclusive -> shared -> shared-modified and
keeps a candidate lockset: the intersection of the locks held on each access
once a second thread touches it. A location in shared-modified state whose
candidate set becomes empty is reported as a race.

Only locks created through :meth:`LocksetDetector.lock` are visible to the
detector.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

VIRGIN, EXCLUSIVE, SHARED, SHARED_MODIFIED = range(4)


@dataclass(frozen=True)
class Race:
    location: object
    thread: int
    write: bool


class TrackedLock:
    def __init__(self, detector: "LocksetDetector", name: str):
        self._lock = threading.Lock()
        self._detector = detector
        self.name = name

    def acquire(self):
        self._lock.acquire()
        self._detector._held(threading.get_ident()).add(self.name)

    def release(self):
        self._detector._held(threading.get_ident()).discard(self.name)
        self._lock.release()

    def __enter__(self):
        self.acquire()
        return self

    def __exit__(self, *exc):
        self.release()


class LocksetDetector:
    def __init__(self):
        self._meta = threading.Lock()
        self._locks_held: dict[int, set] = {}
        self._state: dict[object, list] = {}
        self.races: list[Race] = []
        self.accesses = 0

    def lock(self, name: str) -> TrackedLock:
        return TrackedLock(self, name)

    def _held(self, tid: int) -> set:
        held = self._locks_held.get(tid)
        if held is None:
            with self._meta:
                held = self._locks_held.setdefault(tid, set())
        return held

    def access(self, location, write: bool) -> None:
        tid = threading.get_ident()
        held = frozenset(self._held(tid))
        with self._meta:
            self.accesses += 1
            entry = self._state.get(location)
            if entry is None:
                self._state[location] = [EXCLUSIVE, tid, None, False]
                return
            state, owner, lockset, reported = entry
            if state == EXCLUSIVE:
                if tid == owner:
                    return
                state = SHARED_MODIFIED if write else SHARED
                lockset = held
            elif state == SHARED:
                lockset = lockset & held
                if write:
                    state = SHARED_MODIFIED
            else:
                lockset = lockset & held
            if state == SHARED_MODIFIED and not lockset and not reported:
                self.races.append(Race(location, tid, write))
                reported = True
            self._state[location] = [state, owner, lockset, reported]

    @property
    def clean(self) -> bool:
        return not self.races
