"""Sampling coordinator: fans per-sample work out over worker processes."""
from __future__ import annotations

import asyncio
from collections.abc import Callable, Sequence
from concurrent.futures import ProcessPoolExecutor
import logging
import os
from typing import Any, TypeVar

from .core.util import derive_seed, sample_rng
from .exceptions import InvalidArgumentError

_LOGGER = logging.getLogger(__name__)

DEFAULT_CHUNK_SIZE = 64

T = TypeVar("T")

__all__ = ["SamplingCoordinator", "derive_seed", "sample_rng"]


def _run_chunk(func: Callable[..., T], start: int, stop: int, args: Sequence[Any]) -> list[T]:
    return [func(index, *args) for index in range(start, stop)]


class SamplingCoordinator:
    """Run `func(index, *args)` for every sample index and reduce in index order.

    Each sample derives its own generator from (master seed, key), so the
    collected results do not depend on the number of workers.
    """

    def __init__(self, workers: int | None = None, chunk_size: int = DEFAULT_CHUNK_SIZE) -> None:
        """Initialize the coordinator."""
        if workers is not None and workers < 1:
            raise InvalidArgumentError(f"workers must be >= 1, got {workers}")
        if chunk_size < 1:
            raise InvalidArgumentError(f"chunk_size must be >= 1, got {chunk_size}")
        self.workers = workers or os.cpu_count() or 1
        self.chunk_size = chunk_size

    def _chunks(self, count: int) -> list[tuple[int, int]]:
        return [
            (start, min(start + self.chunk_size, count))
            for start in range(0, count, self.chunk_size)
        ]

    async def async_map(self, func: Callable[..., T], count: int, *args: Any) -> list[T]:
        """Evaluate every sample, in worker processes when workers > 1."""
        if count < 0:
            raise InvalidArgumentError(f"count must be >= 0, got {count}")
        if self.workers == 1 or count <= self.chunk_size:
            return _run_chunk(func, 0, count, args)

        loop = asyncio.get_running_loop()
        chunks = self._chunks(count)
        _LOGGER.debug(
            "Dispatching %d samples in %d chunks to %d workers",
            count,
            len(chunks),
            self.workers,
        )
        with ProcessPoolExecutor(max_workers=self.workers) as executor:
            results = await asyncio.gather(
                *(
                    loop.run_in_executor(executor, _run_chunk, func, start, stop, args)
                    for start, stop in chunks
                )
            )
        return [item for chunk in results for item in chunk]

    def map(self, func: Callable[..., T], count: int, *args: Any) -> list[T]:
        """Synchronous wrapper around async_map."""
        if count < 0:
            raise InvalidArgumentError(f"count must be >= 0, got {count}")
        if self.workers == 1 or count <= self.chunk_size:
            return _run_chunk(func, 0, count, args)
        return asyncio.run(self.async_map(func, count, *args))
