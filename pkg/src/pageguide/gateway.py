"""Single chokepoint for model calls: HTTP chat-completions client plus a
record/replay transcript store.

Every request has a content hash (``request_key``) over model and messages;
temperature and output caps are deliberately excluded so retuning them does
not invalidate recorded fixtures. Transcript files are JSON Lines, one
``{"key", "request", "response"}`` object per line, append-only and
hand-auditable.

Replay mode never touches the network; record mode calls out once per key
and persists the result; passthrough always calls out.
"""

from __future__ import annotations

import hashlib
import json
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import httpx

from .errors import MissingCredential, ReplayMiss, TransportError, UpstreamError

DEFAULT_MODEL = "google/gemini-3-flash-preview"
DEFAULT_BASE_URL = "https://openrouter.ai/api/v1"
DEFAULT_TIMEOUT = 60.0
RETRY_BACKOFF = (1.0, 4.0)  # seconds before retry 1 and retry 2


@dataclass(frozen=True)
class ChatMessage:
    role: str  # system | user | assistant
    content: str


@dataclass(frozen=True)
class ChatRequest:
    model: str
    messages: tuple[ChatMessage, ...]
    temperature: float = 0.0
    max_output: int = 2048

    def __post_init__(self) -> None:
        if not self.messages:
            raise ValueError("a chat request needs at least one message")


@dataclass(frozen=True)
class ChatResponse:
    text: str
    model: str
    latency_ms: int
    source: str  # live | replay


def request_key(request: ChatRequest) -> str:
    """SHA-256 over model and ordered (role, content) pairs, 0x1F-separated."""
    parts = [request.model]
    for message in request.messages:
        parts.append(message.role)
        parts.append(message.content)
    return hashlib.sha256("\x1f".join(parts).encode("utf-8")).hexdigest()


def _request_to_json(request: ChatRequest) -> dict:
    return {
        "model": request.model,
        "messages": [{"role": m.role, "content": m.content} for m in request.messages],
        "temperature": request.temperature,
        "max_output": request.max_output,
    }


def _request_from_json(data: dict) -> ChatRequest:
    return ChatRequest(
        model=data["model"],
        messages=tuple(ChatMessage(m["role"], m["content"]) for m in data["messages"]),
        temperature=data.get("temperature", 0.0),
        max_output=data.get("max_output", 2048),
    )


class TranscriptStore:
    """Append-only fixture store keyed by request hash."""

    def __init__(self, path: Optional[Path | str] = None):
        self.path = Path(path) if path is not None else None
        self.entries: dict[str, tuple[ChatRequest, ChatResponse]] = {}
        self._write_lock = threading.Lock()
        if self.path is not None and self.path.exists():
            self._load()

    def _load(self) -> None:
        assert self.path is not None
        with self.path.open(encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                record = json.loads(line)
                request = _request_from_json(record["request"])
                resp = record["response"]
                response = ChatResponse(
                    text=resp["text"],
                    model=resp.get("model", request.model),
                    latency_ms=int(resp.get("latency_ms", 0)),
                    source="replay",
                )
                self.entries[record["key"]] = (request, response)

    def __contains__(self, key: str) -> bool:
        return key in self.entries

    def get(self, key: str) -> Optional[ChatResponse]:
        entry = self.entries.get(key)
        return entry[1] if entry else None

    def put(self, request: ChatRequest, response: ChatResponse) -> str:
        """Persist one exchange; recording an existing key is a no-op."""
        key = request_key(request)
        with self._write_lock:
            if key in self.entries:
                return key
            stored = ChatResponse(
                text=response.text, model=response.model,
                latency_ms=response.latency_ms, source="replay",
            )
            self.entries[key] = (request, stored)
            if self.path is not None:
                record = {
                    "key": key,
                    "request": _request_to_json(request),
                    "response": {
                        "text": response.text,
                        "model": response.model,
                        "latency_ms": response.latency_ms,
                    },
                }
                self.path.parent.mkdir(parents=True, exist_ok=True)
                with self.path.open("a", encoding="utf-8") as fh:
                    fh.write(json.dumps(record, ensure_ascii=False) + "\n")
        return key


# transport(url, headers, payload, timeout) -> (status_code, body_text)
Transport = Callable[[str, dict, dict, float], tuple[int, str]]


def _httpx_transport(url: str, headers: dict, payload: dict, timeout: float) -> tuple[int, str]:
    response = httpx.post(url, headers=headers, json=payload, timeout=timeout)
    return response.status_code, response.text


@dataclass
class Gateway:
    mode: str = "passthrough"  # record | replay | passthrough
    store: Optional[TranscriptStore] = None
    model: str = DEFAULT_MODEL
    base_url: str = DEFAULT_BASE_URL
    api_key: Optional[str] = None
    timeout: float = DEFAULT_TIMEOUT
    retries: int = 2
    transport: Transport = field(default=_httpx_transport)
    _sleep: Callable[[float], None] = field(default=time.sleep, repr=False)

    def __post_init__(self) -> None:
        if self.mode not in ("record", "replay", "passthrough"):
            raise ValueError(f"unknown gateway mode {self.mode!r}")
        if self.mode in ("record", "replay") and self.store is None:
            raise ValueError(f"{self.mode} mode requires a transcript store")

    def complete(self, request: ChatRequest) -> ChatResponse:
        key = request_key(request)
        if self.mode == "replay":
            assert self.store is not None
            response = self.store.get(key)
            if response is None:
                raise ReplayMiss(f"no recorded response for key {key[:16]}…")
            return response
        if self.mode == "record":
            assert self.store is not None
            cached = self.store.get(key)
            if cached is not None:
                return cached
            response = self._call_live(request)
            self.store.put(request, response)
            return response
        return self._call_live(request)

    def _call_live(self, request: ChatRequest) -> ChatResponse:
        if not self.api_key:
            raise MissingCredential(
                "no API key configured (set PAGEGUIDE_API_KEY for live calls)")
        url = self.base_url.rstrip("/") + "/chat/completions"
        headers = {
            "Authorization": f"Bearer {self.api_key}",
            "Content-Type": "application/json",
        }
        payload = {
            "model": request.model,
            "messages": [
                {"role": m.role, "content": m.content} for m in request.messages
            ],
            "temperature": request.temperature,
            "max_tokens": request.max_output,
        }
        last_error: Exception | None = None
        started = time.monotonic()
        for attempt in range(self.retries + 1):
            if attempt > 0:
                self._sleep(RETRY_BACKOFF[min(attempt - 1, len(RETRY_BACKOFF) - 1)])
            try:
                status, body = self.transport(url, headers, payload, self.timeout)
            except Exception as exc:  # transport-level failure: retry
                last_error = exc
                continue
            if not 200 <= status < 300:
                raise UpstreamError(status, body[:400])
            latency_ms = int((time.monotonic() - started) * 1000)
            return ChatResponse(
                text=_extract_text(body),
                model=request.model,
                latency_ms=latency_ms,
                source="live",
            )
        raise TransportError(f"transport failed after {self.retries + 1} attempts: {last_error}")


def _extract_text(body: str) -> str:
    try:
        data = json.loads(body)
        return data["choices"][0]["message"]["content"]
    except (json.JSONDecodeError, KeyError, IndexError, TypeError) as exc:
        raise UpstreamError(200, f"unexpected response shape: {body[:200]}") from exc
