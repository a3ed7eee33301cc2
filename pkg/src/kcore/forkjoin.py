"""Minimal fork-join helper over a fixed set of pooled threads."""

from __future__ import annotations

import itertools
import queue
import threading
from typing import Callable, Iterable, TypeVar

T = TypeVar("T")
R = TypeVar("R")


class _Job:
    def __init__(self, fn, items, workers):
        self.fn = fn
        self.items = items
        self.results = [None] * len(items)
        self.next = itertools.count()  # next() is atomic under the GIL
        self.left = workers
        self.lock = threading.Lock()
        self.done = threading.Event()
        self.error: BaseException | None = None

    def work(self):
        items, fn, results, n = self.items, self.fn, self.results, len(self.items)
        try:
            while self.error is None:
                i = next(self.next)
                if i >= n:
                    break
                results[i] = fn(items[i])
        except BaseException as exc:  # noqa: BLE001 - re-raised by run()
            self.error = exc
        with self.lock:
            self.left -= 1
            if self.left == 0:
                self.done.set()


class ForkJoin:
    """Run independent tasks on ``threads`` pooled threads and wait for all of them.

    Tasks of one :meth:`run` call are queued together and claimed one at a
    time by whichever pool thread is free. ``local(factory)`` hands each pool
    thread its own lazily built object; ``locals()`` returns every one created
    so far.
    """

    def __init__(self, threads: int):
        if threads < 1:
            raise ValueError("threads must be at least 1")
        self._tls = threading.local()
        self._made: list = []
        self._lock = threading.Lock()
        self._inboxes = [queue.SimpleQueue() for _ in range(threads)]
        self._threads = [
            threading.Thread(target=self._loop, args=(q,), name=f"forkjoin-{i}", daemon=True)
            for i, q in enumerate(self._inboxes)
        ]
        for t in self._threads:
            t.start()

    @staticmethod
    def _loop(inbox: queue.SimpleQueue) -> None:
        while True:
            job = inbox.get()
            if job is None:
                return
            job.work()

    def run(self, fn: Callable[[T], R], items: Iterable[T]) -> list[R]:
        items = list(items)
        if not items:
            return []
        job = _Job(fn, items, len(self._inboxes))
        for q in self._inboxes:
            q.put(job)
        job.done.wait()
        if job.error is not None:
            raise job.error
        return job.results

    def local(self, factory: Callable[[], T]) -> T:
        obj = getattr(self._tls, "obj", None)
        if obj is None:
            obj = self._tls.obj = factory()
            with self._lock:
                self._made.append(obj)
        return obj

    def locals(self) -> list:
        with self._lock:
            return list(self._made)

    def close(self) -> None:
        for q in self._inboxes:
            q.put(None)
        for t in self._threads:
            t.join()

    def __enter__(self) -> "ForkJoin":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
