import asyncio
import time
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from typing import Self


class RequestLimiter:
    """
    Bounds the number of in-flight requests and spaces request starts so
    that at most requests_per_second of them begin each second.
    """

    _semaphore: asyncio.Semaphore
    """Bounds concurrent requests."""
    _interval: float
    """Minimum delay between two request starts, in seconds (0 = unlimited)."""
    _next_start: float
    """Earliest monotonic time the next request may start."""
    _lock: asyncio.Lock
    """Protects _next_start."""

    def __init__(self, max_concurrency: int = 4, requests_per_second: float | None = None) -> None:
        if max_concurrency < 1:
            raise ValueError(f"Concurrency must be positive, got {max_concurrency}.")
        if requests_per_second is not None and requests_per_second <= 0:
            raise ValueError(
                f"Request rate must be positive, got {requests_per_second}."
            )
        self._semaphore = asyncio.Semaphore(max_concurrency)
        self._interval = 1.0 / requests_per_second if requests_per_second else 0.0
        self._next_start = 0.0
        self._lock = asyncio.Lock()

    async def __aenter__(self) -> "Self":
        await self._semaphore.acquire()
        if self._interval:
            async with self._lock:
                now = time.monotonic()
                wait = self._next_start - now
                self._next_start = max(now, self._next_start) + self._interval
            if wait > 0:
                await asyncio.sleep(wait)
        return self

    async def __aexit__(self, exc_type, exc_val, exc_tb) -> None:
        self._semaphore.release()
