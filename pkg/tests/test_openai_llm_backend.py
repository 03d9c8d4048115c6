import asyncio
import json
import math

import httpx
import pytest

from causal_prompting.llm.llm_exceptions import LlmProtocolError, LlmTransportError
from causal_prompting.llm.openai_llm_backend import OpenAiLlmBackend
from causal_prompting.types import SecretStr

ENDPOINT = "https://llm.example.com/v1/chat/completions"


def _body(with_logprobs: bool = True) -> dict:
    choice = {"message": {"role": "assistant", "content": "yes"}}
    if with_logprobs:
        choice["logprobs"] = {
            "content": [
                {
                    "token": "yes",
                    "logprob": math.log(0.7),
                    "top_logprobs": [
                        {"token": "yes", "logprob": math.log(0.7)},
                        {"token": "no", "logprob": math.log(0.25)},
                    ],
                }
            ]
        }
    return {"choices": [choice]}


def _backend(handler, max_retries: int = 2) -> OpenAiLlmBackend:
    return OpenAiLlmBackend(
        endpoint=ENDPOINT,
        model_id="gpt-4-0613",
        api_key=SecretStr("sk-test"),
        max_retries=max_retries,
        backoff_seconds=0.0,
        transport=httpx.MockTransport(handler),
    )


def _complete(backend: OpenAiLlmBackend, want_logprobs: bool = True):
    async def run():
        async with backend:
            return await backend.complete("Is it?", 0.7, want_logprobs=want_logprobs)

    return asyncio.run(run())


def test_request_payload_and_parsed_candidates():
    requests = []

    def handler(request: httpx.Request) -> httpx.Response:
        requests.append(request)
        return httpx.Response(200, json=_body())

    result = _complete(_backend(handler))

    payload = json.loads(requests[0].content)
    assert requests[0].headers["Authorization"] == "Bearer sk-test"
    assert payload["model"] == "gpt-4-0613"
    assert payload["messages"] == [{"role": "user", "content": "Is it?"}]
    assert payload["logprobs"] is True
    assert payload["top_logprobs"] == 5
    assert result.text == "yes"
    assert result.top_logprobs[0] == (
        ("yes", pytest.approx(math.log(0.7))),
        ("no", pytest.approx(math.log(0.25))),
    )


def test_knowledge_request_omits_logprobs():
    payloads = []

    def handler(request: httpx.Request) -> httpx.Response:
        payloads.append(json.loads(request.content))
        return httpx.Response(200, json=_body(with_logprobs=False))

    result = _complete(_backend(handler), want_logprobs=False)

    assert "logprobs" not in payloads[0]
    assert result.top_logprobs == ()


def test_retryable_status_is_retried():
    statuses = iter([429, 503, 200])

    def handler(request: httpx.Request) -> httpx.Response:
        status = next(statuses)
        return httpx.Response(status, json=_body() if status == 200 else {})

    result = _complete(_backend(handler))

    assert result.text == "yes"


def test_retries_are_capped():
    calls = []

    def handler(request: httpx.Request) -> httpx.Response:
        calls.append(request)
        return httpx.Response(500)

    with pytest.raises(LlmTransportError, match="3 attempt"):
        _complete(_backend(handler, max_retries=2))
    assert len(calls) == 3


def test_connection_errors_are_retried():
    def handler(request: httpx.Request) -> httpx.Response:
        raise httpx.ConnectError("refused", request=request)

    with pytest.raises(LlmTransportError, match="ConnectError"):
        _complete(_backend(handler, max_retries=1))


def test_client_error_fails_at_once():
    calls = []

    def handler(request: httpx.Request) -> httpx.Response:
        calls.append(request)
        return httpx.Response(401)

    with pytest.raises(LlmTransportError, match="HTTP 401"):
        _complete(_backend(handler))
    assert len(calls) == 1


def test_missing_logprobs_is_a_protocol_error():
    def handler(request: httpx.Request) -> httpx.Response:
        return httpx.Response(200, json=_body(with_logprobs=False))

    with pytest.raises(LlmProtocolError):
        _complete(_backend(handler))


def test_malformed_body_is_a_protocol_error():
    def handler(request: httpx.Request) -> httpx.Response:
        return httpx.Response(200, json={"choices": []})

    with pytest.raises(LlmProtocolError):
        _complete(_backend(handler))


def test_secret_is_hidden():
    assert "sk-test" not in repr(SecretStr("sk-test"))
    assert "sk-test" not in str(SecretStr("sk-test"))
