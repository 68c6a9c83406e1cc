"""Chat-completions advisor over plain HTTP."""

from __future__ import annotations

import os
import time
from dataclasses import dataclass, field
from typing import Callable

import httpx

ENV_ENDPOINT = "IDSS_LLM_ENDPOINT"
ENV_API_KEY = "IDSS_LLM_API_KEY"
ENV_MODEL = "IDSS_LLM_MODEL"


class AdvisorError(RuntimeError):
    pass


class AdvisorUnavailable(AdvisorError):
    pass


class AdvisorAmbiguous(AdvisorError):
    pass


@dataclass(frozen=True)
class GenerationSettings:
    """Sampling limits sent with every request."""
    temperature: float = 0.0
    top_p: float | None = 0.9
    top_k: int | None = None
    max_output_tokens: int = 512
    stop: tuple[str, ...] = ()

    def __post_init__(self):
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.top_p is not None and not 0 < self.top_p <= 1:
            raise ValueError("top_p must be in (0, 1]")
        if self.top_k is not None and self.top_k < 1:
            raise ValueError("top_k must be >= 1")
        if self.max_output_tokens < 1:
            raise ValueError("max_output_tokens must be >= 1")

    def payload(self) -> dict:
        out: dict = {"temperature": self.temperature,
                     "max_tokens": self.max_output_tokens}
        if self.top_p is not None:
            out["top_p"] = self.top_p
        if self.top_k is not None:
            out["top_k"] = self.top_k
        if self.stop:
            out["stop"] = list(self.stop)
        return out


@dataclass
class LiveAdvisor:
    endpoint: str
    model: str
    api_key: str = ""
    settings: GenerationSettings = field(default_factory=GenerationSettings)
    timeout: float = 30.0
    retries: int = 2
    backoff: float = 0.5
    transport: httpx.BaseTransport | None = None
    sleep: Callable[[float], None] = time.sleep
    name: str = "live"

    @classmethod
    def from_env(cls, **kw) -> "LiveAdvisor":
        endpoint = os.environ.get(ENV_ENDPOINT, "").strip()
        if not endpoint:
            raise AdvisorUnavailable(f"{ENV_ENDPOINT} is not set")
        return cls(endpoint=endpoint,
                   model=os.environ.get(ENV_MODEL, "").strip() or "default",
                   api_key=os.environ.get(ENV_API_KEY, ""), **kw)

    def request_body(self, messages: list[dict]) -> dict:
        return {"model": self.model, "messages": messages, **self.settings.payload()}

    def complete(self, messages: list[dict], settings: GenerationSettings | None = None) -> str:
        body = self.request_body(messages)
        if settings is not None:
            body.update(settings.payload())
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        last: Exception | str = ""
        with httpx.Client(timeout=self.timeout, transport=self.transport) as client:
            for attempt in range(self.retries + 1):
                if attempt:
                    self.sleep(self.backoff * 2 ** (attempt - 1))
                try:
                    resp = client.post(self.endpoint, json=body, headers=headers)
                except httpx.TransportError as exc:
                    last = exc
                    continue
                if resp.status_code == 429 or resp.status_code >= 500:
                    last = f"HTTP {resp.status_code}"
                    continue
                if resp.status_code >= 400:
                    raise AdvisorUnavailable(f"advisor endpoint returned HTTP {resp.status_code}")
                try:
                    return resp.json()["choices"][0]["message"]["content"] or ""
                except (ValueError, KeyError, IndexError, TypeError) as exc:
                    raise AdvisorUnavailable(f"malformed completion response: {exc}") from exc
        raise AdvisorUnavailable(
            f"advisor endpoint failed after {self.retries + 1} attempts: {last}")
