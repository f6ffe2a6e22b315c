from __future__ import annotations

import logging
from contextlib import asynccontextmanager
from functools import partial
from io import StringIO
from typing import AsyncIterator, Callable, List, Sequence, TypeVar

import trio
from prettyprinter import pprint
from trio import CapacityLimiter, Nursery

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


class LimitingNursery(object):
    """
    A nursery that only allows a certain amount of worker threads to be ran at any one time.
    """

    def __init__(self, real_nursery: Nursery, limiter: CapacityLimiter):
        self._nursery = real_nursery
        self._limiter = limiter

    async def start(self, fn: Callable[[], R], on_result: Callable[[R], None]):
        """
        Starts a new job. ``fn`` is a synchronous, pure callable that is run in a worker thread;
        its return value is passed to ``on_result`` back on the trio thread.

        This will block until the capacity limiter has a token available.
        """

        async def inner(task_status):
            async with self._limiter:
                task_status.started()
                result = await trio.to_thread.run_sync(fn)
                on_result(result)

        await self._nursery.start(inner)

    @property
    def available_tasks(self):
        return self._limiter.available_tokens


@asynccontextmanager
async def open_limiting_nursery(max_tasks: int = 4) -> AsyncIterator[LimitingNursery]:
    """
    Opens a capacity limiting nursery.

    :param max_tasks: The maximum number of jobs that can run simultaneously.
    """
    async with trio.open_nursery() as n:
        yield LimitingNursery(n, CapacityLimiter(max_tasks))


async def map_in_threads(fn: Callable[[T], R], items: Sequence[T], max_tasks: int) -> List[R]:
    """
    Applies ``fn`` to every item on a pool of worker threads.

    :return: The results, in the order of ``items`` regardless of completion order.
    """
    results: List[R] = [None] * len(items)  # type: ignore

    def store(idx: int, value: R):
        results[idx] = value

    async with open_limiting_nursery(max_tasks=max_tasks) as n:
        for idx, item in enumerate(items):
            await n.start(partial(fn, item), partial(store, idx))

    return results


def run_parallel(fn: Callable[[T], R], items: Sequence[T], *, jobs: int = 1) -> List[R]:
    """
    Runs independent pure jobs, optionally fanned out over ``jobs`` worker threads.

    ``jobs=1`` runs serially in the calling thread and never starts trio, so this is safe to
    call from anywhere, including from inside a worker thread.

    :param fn: The job. Must not touch shared mutable state.
    :param items: The inputs, one job each.
    :param jobs: The maximum number of concurrent jobs.
    :return: The results, in input order.
    """
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]

    logger.debug(f"Fanning {len(items)} jobs out over {jobs} worker threads")
    return trio.run(map_in_threads, fn, items, jobs)


def stringify_object(obb) -> str:
    """
    Stringifies an object using prettyprinter.
    """

    stream = StringIO()
    pprint(obb, stream=stream)
    return stream.getvalue()
