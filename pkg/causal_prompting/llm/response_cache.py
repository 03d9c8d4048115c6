import asyncio
import hashlib
import json
import os
from pathlib import Path

from loguru import logger

from causal_prompting.llm.llm_backend import CompletionResult, LlmBackend


class ResponseCache:
    """
    Content-addressed on-disk store of completions. Reads are lock-free;
    writes go through a temporary file and an atomic rename, one at a time.
    """

    _directory: Path
    """Directory holding one JSON file per cached completion."""
    _write_lock: asyncio.Lock
    """Serializes writers within a process."""

    def __init__(self, directory: str | Path) -> None:
        self._directory = Path(directory)
        self._directory.mkdir(parents=True, exist_ok=True)
        self._write_lock = asyncio.Lock()

    @staticmethod
    def key(model_id: str, prompt: str, temperature: float, shot: int) -> str:
        """
        Cache key of a request: SHA-256 over (model id, prompt, temperature, shot).

        :return: Hex digest.
        """
        material = json.dumps(
            [model_id, prompt, float(temperature), int(shot)], ensure_ascii=False
        )
        return hashlib.sha256(material.encode("utf-8")).hexdigest()

    def _path(self, key: str) -> Path:
        return self._directory / f"{key}.json"

    def get(self, key: str) -> CompletionResult | None:
        """
        Looks up a cached completion.

        :param key: Cache key.
        :return: The completion, or None on a miss or an unreadable entry.
        """
        path = self._path(key)
        if not path.exists():
            return None
        try:
            content = json.loads(path.read_text(encoding="utf-8"))
            return CompletionResult(
                text=content["text"],
                top_logprobs=tuple(
                    tuple((token, logprob) for token, logprob in position)
                    for position in content["top_logprobs"]
                ),
            )
        except (OSError, KeyError, TypeError, ValueError) as e:
            logger.warning(f"Ignoring unreadable cache entry {path.name}: {e}")
            return None

    async def put(self, key: str, result: CompletionResult) -> None:
        """
        Stores a completion atomically.

        :param key: Cache key.
        :param result: Completion to store.
        """
        content = {
            "text": result.text,
            "top_logprobs": [
                [[token, logprob] for token, logprob in position]
                for position in result.top_logprobs
            ],
        }
        async with self._write_lock:
            temporary = self._path(key).with_suffix(".tmp")
            temporary.write_text(json.dumps(content, ensure_ascii=False), encoding="utf-8")
            os.replace(temporary, self._path(key))


class CachedLlmBackend(LlmBackend):
    """
    Wraps a backend so that repeated requests are served from a ResponseCache.
    """

    _backend: LlmBackend
    """Backend queried on cache misses."""
    _cache: ResponseCache
    """Response store."""

    def __init__(self, backend: LlmBackend, cache: ResponseCache) -> None:
        super().__init__()
        self._backend = backend
        self._cache = cache
        self.model_id = backend.model_id

    async def complete(
        self,
        prompt: str,
        temperature: float,
        want_logprobs: bool = True,
        shot: int = 0,
    ) -> CompletionResult:
        key = ResponseCache.key(self.model_id, prompt, temperature, shot)
        cached = self._cache.get(key)
        if cached is not None and (cached.top_logprobs or not want_logprobs):
            return cached
        result = await self._backend.complete(prompt, temperature, want_logprobs, shot)
        await self._cache.put(key, result)
        return result

    async def close(self) -> None:
        await self._backend.close()
