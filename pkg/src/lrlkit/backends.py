"""Inference backends: a chat/completions-style HTTP client, an in-process
deterministic mock, and an ASGI app exposing the mock over the same wire
format.

The wire contract has two capabilities:

* generation: POST {base}/chat/completions (or /completions) with
  {model, messages|prompt, max_tokens, temperature=0}; decoding is always
  greedy.
* teacher-forced scoring: POST {base}/completions with
  {model, prompt, max_tokens=0, echo=true, logprobs=0}; the response echoes
  per-token log-probabilities, whose negated sum is the text's NLL. Leading
  null logprobs (the BOS position) are skipped.

Transport failures are retried 3 times with exponential backoff; anything
else propagates as a BackendError carrying the request id. Parse failures
of model *output* are never retried — that is model behavior, not
transport.
"""

from __future__ import annotations

import math
import time
import uuid
from dataclasses import dataclass
from typing import Iterable
from urllib.parse import parse_qsl, urlsplit

import httpx

from .errors import BackendError
from .tokmetrics import ScoreResult

DEFAULT_RETRY_SLEEPS = (0.5, 2.0, 8.0)


class HttpBackend:
    """Client for an OpenAI-compatible inference endpoint."""

    def __init__(
        self,
        base_url: str,
        model: str,
        api_key: str | None = None,
        timeout: float = 60.0,
        generate_api: str = "chat",
        retry_sleeps: Iterable[float] = DEFAULT_RETRY_SLEEPS,
        transport: httpx.BaseTransport | None = None,
    ):
        base = base_url.rstrip("/")
        if not base.endswith("/v1"):
            base = base + "/v1"
        self.base_url = base
        self.model = model
        self.generate_api = generate_api
        self._retry_sleeps = tuple(retry_sleeps)
        headers = {"Authorization": f"Bearer {api_key}"} if api_key else {}
        self._client = httpx.Client(timeout=timeout, headers=headers, transport=transport)

    @property
    def identity(self) -> str:
        return f"http:{self.base_url} model={self.model}"

    def _post(self, path: str, payload: dict) -> dict:
        last_error: Exception | None = None
        request_id = None
        for attempt, sleep_s in enumerate((0.0, *self._retry_sleeps)):
            if sleep_s:
                time.sleep(sleep_s)
            request_id = uuid.uuid4().hex
            try:
                resp = self._client.post(
                    f"{self.base_url}{path}",
                    json=payload,
                    headers={"X-Request-Id": request_id},
                )
            except httpx.TransportError as e:
                last_error = e
                continue
            if resp.status_code >= 500:
                last_error = BackendError(f"server error {resp.status_code}", request_id)
                continue
            if resp.status_code != 200:
                raise BackendError(
                    f"backend rejected request ({resp.status_code}): {resp.text[:200]}",
                    request_id,
                )
            return resp.json()
        raise BackendError(f"backend unreachable after retries: {last_error}", request_id)

    def generate(self, prompt: str, max_tokens: int, greedy: bool = True) -> str:
        if not greedy:
            raise BackendError("only greedy decoding is supported")
        if self.generate_api == "chat":
            payload = {
                "model": self.model,
                "messages": [{"role": "user", "content": prompt}],
                "max_tokens": max_tokens,
                "temperature": 0,
            }
            data = self._post("/chat/completions", payload)
            try:
                return data["choices"][0]["message"]["content"]
            except (KeyError, IndexError, TypeError) as e:
                raise BackendError(f"malformed chat completion response: {e}") from None
        payload = {
            "model": self.model,
            "prompt": prompt,
            "max_tokens": max_tokens,
            "temperature": 0,
        }
        data = self._post("/completions", payload)
        try:
            return data["choices"][0]["text"]
        except (KeyError, IndexError, TypeError) as e:
            raise BackendError(f"malformed completion response: {e}") from None

    def score(self, text: str) -> ScoreResult:
        payload = {
            "model": self.model,
            "prompt": text,
            "max_tokens": 0,
            "echo": True,
            "logprobs": 0,
            "temperature": 0,
        }
        data = self._post("/completions", payload)
        try:
            raw = data["choices"][0]["logprobs"]["token_logprobs"]
        except (KeyError, IndexError, TypeError) as e:
            raise BackendError(f"backend did not return token logprobs: {e}") from None
        logprobs = tuple(float(lp) for lp in raw if lp is not None)
        return ScoreResult(nll=-math.fsum(logprobs), token_logprobs=logprobs)

    def close(self) -> None:
        self._client.close()


class MockBackend:
    """Deterministic in-process backend implementing the same capabilities.

    Generation modes:
      * ``echo``: return the text of the final ``Text:`` block in the
        prompt (truncated to max_tokens whitespace words) — the bundled
        oracle for prompts whose inputs embed their own answer.
      * ``constant``: always return a fixed string.

    Scoring assigns each UTF-8 byte a fixed log-probability: ``ascii_cost``
    for bytes < 128, ``other_cost`` otherwise, both scaled by
    ``score_scale``. Texts in scripts the "model" has never seen therefore
    cost ~4x per byte, mimicking an under-represented language, and all
    scores are exactly reproducible.
    """

    def __init__(
        self,
        mode: str = "echo",
        constant_text: str = "",
        ascii_cost: float = 0.25,
        other_cost: float = 1.0,
        score_scale: float = 1.0,
        score_overrides: dict[str, float] | None = None,
    ):
        if mode not in ("echo", "constant"):
            raise ValueError(f"unknown mock mode {mode!r}")
        self.mode = mode
        self.constant_text = constant_text
        self.ascii_cost = ascii_cost
        self.other_cost = other_cost
        self.score_scale = score_scale
        self.score_overrides = dict(score_overrides or {})

    @property
    def identity(self) -> str:
        if self.mode == "constant":
            return f"mock:constant:{self.constant_text}"
        return "mock:echo"

    def generate(self, prompt: str, max_tokens: int, greedy: bool = True) -> str:
        if self.mode == "constant":
            return self.constant_text
        marker = "Text: "
        idx = prompt.rfind(marker)
        tail = prompt[idx + len(marker):] if idx >= 0 else prompt
        for anchor in (". Topic option is:", "\nAnswer:"):
            cut = tail.rfind(anchor)
            if cut >= 0:
                tail = tail[:cut]
        words = tail.split()
        return " ".join(words[:max_tokens])

    def score(self, text: str) -> ScoreResult:
        if text in self.score_overrides:
            nll = self.score_overrides[text] * self.score_scale
            return ScoreResult(nll=nll, token_logprobs=(-nll,))
        logprobs = tuple(
            -(self.ascii_cost if byte < 128 else self.other_cost) * self.score_scale
            for byte in text.encode("utf-8")
        )
        return ScoreResult(nll=-math.fsum(logprobs), token_logprobs=logprobs)


def backend_from_url(url: str, model: str = "mock", api_key: str | None = None, **kwargs):
    """Construct a backend from a URL.

    ``http(s)://...`` gives an HttpBackend; ``mock://echo`` or
    ``mock://constant?text=...`` (plus optional ascii_cost/other_cost
    query parameters) gives the bundled deterministic mock.
    """
    parts = urlsplit(url)
    if parts.scheme in ("http", "https"):
        return HttpBackend(url, model=model, api_key=api_key, **kwargs)
    if parts.scheme == "mock":
        params = dict(parse_qsl(parts.query))
        mode = parts.netloc or parts.path.lstrip("/")
        return MockBackend(
            mode=mode or "echo",
            constant_text=params.get("text", ""),
            ascii_cost=float(params.get("ascii_cost", 0.25)),
            other_cost=float(params.get("other_cost", 1.0)),
        )
    raise BackendError(f"unsupported backend URL scheme: {url!r}")


# --- ASGI wrapper -----------------------------------------------------------
#
# Serves any in-process backend over the wire format above. Used by the
# test suite to drive HttpBackend end-to-end, and handy for smoke-testing:
#     uvicorn --factory 'lrlkit.backends:create_mock_app'


def create_mock_app(backend=None):
    from fastapi import FastAPI, HTTPException
    from pydantic import BaseModel

    if backend is None:
        backend = MockBackend()

    class ChatMessage(BaseModel):
        role: str
        content: str

    class ChatRequest(BaseModel):
        model: str
        messages: list[ChatMessage]
        max_tokens: int = 16
        temperature: float = 0.0

    class CompletionRequest(BaseModel):
        model: str
        prompt: str
        max_tokens: int = 16
        temperature: float = 0.0
        echo: bool = False
        logprobs: int | None = None

    app = FastAPI(title="lrlkit mock inference backend")

    @app.post("/v1/chat/completions")
    def chat_completions(req: ChatRequest):
        if req.temperature != 0:
            raise HTTPException(status_code=400, detail="only greedy decoding (temperature=0)")
        if not req.messages:
            raise HTTPException(status_code=400, detail="empty messages")
        content = backend.generate(req.messages[-1].content, req.max_tokens)
        return {
            "id": f"mock-{uuid.uuid4().hex[:12]}",
            "object": "chat.completion",
            "model": req.model,
            "choices": [
                {
                    "index": 0,
                    "message": {"role": "assistant", "content": content},
                    "finish_reason": "stop",
                }
            ],
        }

    @app.post("/v1/completions")
    def completions(req: CompletionRequest):
        if req.temperature != 0:
            raise HTTPException(status_code=400, detail="only greedy decoding (temperature=0)")
        if req.echo and req.max_tokens == 0 and req.logprobs is not None:
            result = backend.score(req.prompt)
            return {
                "id": f"mock-{uuid.uuid4().hex[:12]}",
                "object": "text_completion",
                "model": req.model,
                "choices": [
                    {
                        "index": 0,
                        "text": req.prompt,
                        "logprobs": {"token_logprobs": [None, *result.token_logprobs]},
                        "finish_reason": "stop",
                    }
                ],
            }
        text = backend.generate(req.prompt, req.max_tokens)
        return {
            "id": f"mock-{uuid.uuid4().hex[:12]}",
            "object": "text_completion",
            "model": req.model,
            "choices": [{"index": 0, "text": text, "finish_reason": "stop"}],
        }

    return app
