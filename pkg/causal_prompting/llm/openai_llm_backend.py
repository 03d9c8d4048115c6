import asyncio
from typing import Any

import httpx
from loguru import logger

from causal_prompting.llm.llm_backend import CompletionResult, LlmBackend
from causal_prompting.llm.llm_exceptions import LlmProtocolError, LlmTransportError
from causal_prompting.types import SecretStr

_RETRYABLE_STATUS_CODES = frozenset({408, 409, 429, 500, 502, 503, 504})
"""HTTP statuses that are retried with backoff; any other error status fails at once."""


class OpenAiLlmBackend(LlmBackend):
    """
    Backend for chat-completions-compatible HTTP endpoints that can return
    the log-probabilities of the most likely tokens.
    """

    _endpoint: str
    """Full chat-completions URL."""
    _api_key: SecretStr
    """Bearer token sent with every request."""
    _top_logprobs: int
    """Number of candidates requested per token position."""
    _max_retries: int
    """Retries after the first failed attempt."""
    _backoff_seconds: float
    """Base delay of the exponential backoff."""
    _client: httpx.AsyncClient
    """HTTP client shared by all requests."""

    def __init__(
        self,
        endpoint: str,
        model_id: str,
        api_key: SecretStr,
        top_logprobs: int = 5,
        max_retries: int = 3,
        backoff_seconds: float = 1.0,
        timeout: float = 120.0,
        transport: httpx.AsyncBaseTransport | None = None,
    ) -> None:
        super().__init__()
        self._endpoint = endpoint
        self.model_id = model_id
        self._api_key = api_key
        self._top_logprobs = top_logprobs
        self._max_retries = max_retries
        self._backoff_seconds = backoff_seconds
        self._client = httpx.AsyncClient(timeout=timeout, transport=transport)

    async def close(self) -> None:
        await self._client.aclose()

    def _payload(self, prompt: str, temperature: float, want_logprobs: bool) -> dict[str, Any]:
        payload: dict[str, Any] = {
            "model": self.model_id,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": temperature,
        }
        if want_logprobs:
            payload["logprobs"] = True
            payload["top_logprobs"] = self._top_logprobs
        return payload

    async def complete(
        self,
        prompt: str,
        temperature: float,
        want_logprobs: bool = True,
        shot: int = 0,
    ) -> CompletionResult:
        if temperature < 0:
            raise ValueError(f"Temperature cannot be negative, got {temperature}.")
        payload = self._payload(prompt, temperature, want_logprobs)
        headers = {
            "Authorization": f"Bearer {self._api_key.get_secret_value()}",
            "Content-Type": "application/json",
        }

        attempts = self._max_retries + 1
        reason = "no attempt made"
        for attempt in range(attempts):
            if attempt > 0:
                delay = self._backoff_seconds * 2 ** (attempt - 1)
                logger.debug(f"Retrying completion in {delay:.1f}s ({reason})")
                await asyncio.sleep(delay)
            try:
                response = await self._client.post(
                    self._endpoint, headers=headers, json=payload
                )
            except httpx.TransportError as e:
                reason = f"{e.__class__.__name__}: {e}"
                continue

            if response.status_code in _RETRYABLE_STATUS_CODES:
                reason = f"HTTP {response.status_code}"
                continue
            if response.is_error:
                raise LlmTransportError(
                    self._endpoint, attempt + 1, f"HTTP {response.status_code}"
                )
            try:
                data = response.json()
            except ValueError:
                raise LlmProtocolError("response body is not JSON")
            return self._parse(data, want_logprobs)

        logger.warning(f"Completion request to {self._endpoint} gave up: {reason}")
        raise LlmTransportError(self._endpoint, attempts, reason)

    def _parse(self, data: Any, want_logprobs: bool) -> CompletionResult:
        """
        Converts a chat-completions response body into a CompletionResult.

        :raises LlmProtocolError: If a required field is missing or malformed.
        """
        try:
            choice = data["choices"][0]
            text = choice["message"]["content"] or ""
            positions = []
            if want_logprobs:
                logprobs = choice.get("logprobs") or {}
                for position in logprobs.get("content") or []:
                    candidates = position.get("top_logprobs") or [position]
                    positions.append(
                        tuple(
                            (candidate["token"], float(candidate["logprob"]))
                            for candidate in candidates
                        )
                    )
                if not positions:
                    raise LlmProtocolError("log-probabilities were requested but not returned")
            return CompletionResult(text=text, top_logprobs=tuple(positions))
        except (KeyError, IndexError, TypeError, ValueError) as e:
            raise LlmProtocolError(f"{e.__class__.__name__}: {e}")
