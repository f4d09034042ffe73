"""Model access layer: prompt templates, caching, and call accounting.

All completions go through :class:`Gateway`, which owns a deterministic
response cache and a ledger of backend calls. Identical requests (same
model, rendered prompt, sampling config, sample index) always hit the
cache, so reruns of a benchmark are free and bit-identical. Greedy
requests collapse the sample index: asking for sample 0 or sample 7 of
a temperature-0 completion is the same request.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
import time
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Any, Protocol

API_KEY_ENV = "DUALEXEC_API_KEY"

# Sample index reserved for the one-shot retry lane of pseudocode
# generation; keeps the retry from hitting the original cache entry.
RETRY_INDEX_OFFSET = 1_000_000


class GatewayError(Exception):
    """Base class for completion failures."""


class BackendUnreachable(GatewayError):
    pass


class RateLimited(GatewayError):
    pass


class CredentialMissing(GatewayError):
    pass


class MalformedResponse(GatewayError):
    pass


class ScriptError(GatewayError):
    """A scripted backend saw a prompt it has no response for."""


class MissingPromptField(GatewayError):
    """A template was rendered without one of its required fields."""


# ── prompt templates ───────────────────────────────────────────────────


class PromptKind(str, Enum):
    PSEUDOCODE_GEN = "pseudocode_gen"
    CODE_GEN = "code_gen"
    EXEC_NO_GROUNDING = "exec_no_grounding"
    EXEC_PSEUDOCODE = "exec_pseudocode"
    EXEC_CODE = "exec_code"
    TEST_INPUT_GEN = "test_input_gen"


# Fields substituted into each template. Placeholders that describe the
# answer the model must produce (reasoning, output, code, ...) stay in
# the text verbatim; only these input fields are ever replaced.
REQUIRED_FIELDS: dict[PromptKind, tuple[str, ...]] = {
    PromptKind.PSEUDOCODE_GEN: ("problem", "starter_code"),
    PromptKind.CODE_GEN: ("problem", "starter_code", "pseudocode"),
    PromptKind.EXEC_NO_GROUNDING: ("problem", "tc_input"),
    PromptKind.EXEC_PSEUDOCODE: ("problem", "starter_code", "pseudocode", "tc_input"),
    PromptKind.EXEC_CODE: ("problem", "starter_code", "pseudocode", "tc_input"),
    PromptKind.TEST_INPUT_GEN: ("problem", "starter_code"),
}

_template_cache: dict[PromptKind, str] = {}


def template_text(kind: PromptKind) -> str:
    text = _template_cache.get(kind)
    if text is None:
        text = (resources.files("dualexec") / "templates" / f"{kind.value}.txt").read_text(
            encoding="utf-8"
        )
        _template_cache[kind] = text
    return text


def render(kind: PromptKind, fields: dict[str, str]) -> str:
    """Render a prompt, substituting exactly the kind's input fields."""
    text = template_text(kind)
    for name in REQUIRED_FIELDS[kind]:
        if name not in fields:
            raise MissingPromptField(f"{kind.value} requires field {name!r}")
        placeholder = "{{ " + name + " }}"
        if placeholder not in text:
            raise MissingPromptField(f"template {kind.value} has no placeholder {name!r}")
        text = text.replace(placeholder, fields[name])
    return text


# ── sampling configuration ─────────────────────────────────────────────


@dataclass(frozen=True)
class SamplingConfig:
    """Decoding parameters for one completion request."""

    mode: str  # "greedy" or "nucleus"
    temperature: float
    top_p: float
    max_tokens: int = 4096

    def __post_init__(self) -> None:
        if self.mode not in ("greedy", "nucleus"):
            raise ValueError(f"unknown sampling mode {self.mode!r}")
        if self.mode == "greedy" and (self.temperature != 0.0 or self.top_p != 1.0):
            raise ValueError("greedy sampling is temperature 0.0, top_p 1.0")
        if self.max_tokens <= 0:
            raise ValueError("max_tokens must be positive")

    @staticmethod
    def greedy(max_tokens: int = 4096) -> "SamplingConfig":
        return SamplingConfig("greedy", 0.0, 1.0, max_tokens)

    @staticmethod
    def nucleus(temperature: float = 0.8, top_p: float = 0.95, max_tokens: int = 4096) -> "SamplingConfig":
        return SamplingConfig("nucleus", temperature, top_p, max_tokens)


def cache_key(model: str, prompt: str, config: SamplingConfig, sample_index: int) -> str:
    """Stable digest identifying one completion request."""
    effective_index = 0 if config.mode == "greedy" else sample_index
    payload = json.dumps(
        {
            "model": model,
            "prompt": prompt,
            "temperature": config.temperature,
            "top_p": config.top_p,
            "max_tokens": config.max_tokens,
            "sample_index": effective_index,
        },
        sort_keys=True,
        ensure_ascii=False,
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def prompt_digest(prompt: str) -> str:
    """Digest used by scripted backends to match rendered prompts."""
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


# ── backends ───────────────────────────────────────────────────────────


class Backend(Protocol):
    def complete(self, model: str, prompt: str, config: SamplingConfig, sample_index: int) -> str:
        ...


class ScriptedBackend:
    """Deterministic backend for tests and offline runs.

    Responses are keyed on a digest of the full rendered prompt. A key
    may map to a single response or to a list indexed by sample index
    (greedy requests always take index 0). Prompts with no scripted
    response raise, so a drifted prompt fails loudly instead of
    silently changing an experiment.
    """

    def __init__(self, responses: dict[str, str | list[str]] | None = None) -> None:
        self._responses: dict[str, str | list[str]] = dict(responses or {})

    def add(self, prompt: str, response: str | list[str]) -> None:
        self._responses[prompt_digest(prompt)] = response

    def add_rendered(self, kind: PromptKind, fields: dict[str, str], response: str | list[str]) -> None:
        self.add(render(kind, fields), response)

    def complete(self, model: str, prompt: str, config: SamplingConfig, sample_index: int) -> str:
        digest = prompt_digest(prompt)
        entry = self._responses.get(digest)
        if entry is None:
            raise ScriptError(
                f"no scripted response for prompt digest {digest[:12]} "
                f"(prompt starts {prompt[:80]!r})"
            )
        if isinstance(entry, str):
            return entry
        index = 0 if config.mode == "greedy" else sample_index
        if index >= len(entry):
            raise ScriptError(
                f"scripted response list for digest {digest[:12]} has "
                f"{len(entry)} entries, sample index {index} requested"
            )
        return entry[index]

    @staticmethod
    def from_file(path: str | Path) -> "ScriptedBackend":
        """Load a digest -> response (or response list) mapping from JSON."""
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        if not isinstance(data, dict):
            raise ScriptError("script file must contain a JSON object")
        return ScriptedBackend(data)

    def to_file(self, path: str | Path) -> None:
        """Save the scripted responses in the format ``from_file`` reads."""
        Path(path).write_text(
            json.dumps(self._responses, indent=2, sort_keys=True, ensure_ascii=False),
            encoding="utf-8",
        )


class HttpBackend:
    """Chat-completions client for an OpenAI-compatible endpoint."""

    def __init__(self, endpoint: str, api_key: str | None = None, timeout_s: float = 120.0) -> None:
        self.endpoint = endpoint.rstrip("/")
        self.timeout_s = timeout_s
        self._api_key = api_key

    def _key(self) -> str:
        key = self._api_key or os.environ.get(API_KEY_ENV)
        if not key:
            raise CredentialMissing(f"set {API_KEY_ENV} or pass an api key")
        return key

    def complete(self, model: str, prompt: str, config: SamplingConfig, sample_index: int) -> str:
        import requests

        payload = {
            "model": model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": config.temperature,
            "top_p": config.top_p,
            "max_tokens": config.max_tokens,
        }
        try:
            resp = requests.post(
                f"{self.endpoint}/chat/completions",
                json=payload,
                headers={"Authorization": f"Bearer {self._key()}"},
                timeout=self.timeout_s,
            )
        except requests.RequestException as exc:
            raise BackendUnreachable(str(exc)) from exc
        if resp.status_code == 429:
            raise RateLimited(resp.text[:200])
        if resp.status_code != 200:
            raise MalformedResponse(f"status {resp.status_code}: {resp.text[:200]}")
        try:
            return resp.json()["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise MalformedResponse(f"unexpected response shape: {exc}") from exc


# ── cache and ledger ───────────────────────────────────────────────────


class ResponseCache:
    """Append-only JSONL cache keyed by request digest."""

    def __init__(self, cache_dir: str | Path | None = None) -> None:
        self._mem: dict[str, str] = {}
        self._lock = threading.Lock()
        self._path: Path | None = None
        if cache_dir is not None:
            directory = Path(cache_dir)
            directory.mkdir(parents=True, exist_ok=True)
            self._path = directory / "responses.jsonl"
            if self._path.exists():
                with self._path.open(encoding="utf-8") as fh:
                    for line in fh:
                        line = line.strip()
                        if not line:
                            continue
                        record = json.loads(line)
                        self._mem[record["key"]] = record["response"]

    def get(self, key: str) -> str | None:
        with self._lock:
            return self._mem.get(key)

    def put(self, key: str, response: str) -> None:
        with self._lock:
            if key in self._mem:
                return
            self._mem[key] = response
            if self._path is not None:
                line = json.dumps({"key": key, "response": response}, ensure_ascii=False)
                with self._path.open("a", encoding="utf-8") as fh:
                    fh.write(line + "\n")

    def __len__(self) -> int:
        with self._lock:
            return len(self._mem)


@dataclass
class LedgerSnapshot:
    backend_calls: int
    cache_hits: int
    executions: int


class Ledger:
    """Thread-safe counters for cost accounting."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self.backend_calls = 0
        self.cache_hits = 0
        self.executions = 0

    def record_backend_call(self) -> None:
        with self._lock:
            self.backend_calls += 1

    def record_cache_hit(self) -> None:
        with self._lock:
            self.cache_hits += 1

    def record_execution(self) -> None:
        with self._lock:
            self.executions += 1

    def snapshot(self) -> LedgerSnapshot:
        with self._lock:
            return LedgerSnapshot(self.backend_calls, self.cache_hits, self.executions)

    def reset(self) -> None:
        with self._lock:
            self.backend_calls = 0
            self.cache_hits = 0
            self.executions = 0


def count_calls(ledger: Ledger) -> tuple[int, int]:
    """(billed model calls, sandbox executions). Cache hits are free."""
    snap = ledger.snapshot()
    return snap.backend_calls, snap.executions


# ── the gateway ────────────────────────────────────────────────────────


class Gateway:
    """Caching, retrying front door for all model completions."""

    def __init__(
        self,
        backend: Backend,
        cache_dir: str | Path | None = None,
        ledger: Ledger | None = None,
        max_retries: int = 3,
        backoff_s: float = 0.5,
    ) -> None:
        self.backend = backend
        self.cache = ResponseCache(cache_dir)
        self.ledger = ledger or Ledger()
        self.max_retries = max_retries
        self.backoff_s = backoff_s
        self._flight_lock = threading.Lock()
        self._inflight: dict[str, threading.Lock] = {}

    def complete(
        self,
        model: str,
        prompt: str,
        config: SamplingConfig,
        sample_index: int = 0,
    ) -> str:
        key = cache_key(model, prompt, config, sample_index)
        cached = self.cache.get(key)
        if cached is not None:
            self.ledger.record_cache_hit()
            return cached

        with self._flight_lock:
            gate = self._inflight.setdefault(key, threading.Lock())
        try:
            with gate:
                cached = self.cache.get(key)
                if cached is not None:
                    self.ledger.record_cache_hit()
                    return cached
                response = self._call_with_retry(model, prompt, config, sample_index)
                self.ledger.record_backend_call()
                self.cache.put(key, response)
                return response
        finally:
            with self._flight_lock:
                self._inflight.pop(key, None)

    def _call_with_retry(
        self, model: str, prompt: str, config: SamplingConfig, sample_index: int
    ) -> str:
        delay = self.backoff_s
        for attempt in range(self.max_retries + 1):
            try:
                return self.backend.complete(model, prompt, config, sample_index)
            except (RateLimited, BackendUnreachable):
                if attempt == self.max_retries:
                    raise
                if delay > 0:
                    time.sleep(delay)
                delay *= 2
        raise AssertionError("unreachable")


@dataclass
class LlmContext:
    """Everything a prediction path needs to talk to the model."""

    gateway: Gateway
    model: str
    generation: SamplingConfig = field(default_factory=SamplingConfig.nucleus)
    execution: SamplingConfig = field(default_factory=SamplingConfig.greedy)
    translation: SamplingConfig = field(default_factory=SamplingConfig.greedy)
