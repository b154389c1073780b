"""External paraphrase and translation providers, with offline mocks.

Every network touchpoint of the toolkit lives here. The live clients speak
a generic chat-completion / translation HTTP+JSON protocol with bearer-token
auth, bounded exponential-backoff retries, and a per-client rate limit. The
mocks are pure functions of their inputs so the whole pipeline is testable
byte-for-byte without a network.

Secrets come from the environment only (PERSUAKIT_LLM_KEY /
PERSUAKIT_TRANSLATE_KEY); configuration files never carry keys. The
paraphrase prompt ships as a versioned JSON file so prompt revisions do not
require code changes.
"""
from __future__ import annotations

import json
import logging
import os
import threading
import time
from dataclasses import dataclass
from importlib import resources
from typing import Callable, Protocol

import requests

from .errors import ProviderError, ValidationError

log = logging.getLogger(__name__)

LLM_KEY_ENV = "PERSUAKIT_LLM_KEY"
TRANSLATE_KEY_ENV = "PERSUAKIT_TRANSLATE_KEY"
BUNDLED_PROMPT = "paraphrase_prompt.json"

# transport(url, headers, payload, timeout) -> (status_code, parsed_body)
Transport = Callable[[str, dict, dict, float], tuple[int, dict]]


@dataclass(frozen=True)
class ProviderConfig:
    endpoint: str
    model_name: str = "gpt-3.5-turbo"
    temperature: float = 0.7
    max_retries: int = 3
    rate_limit: float | None = None  # requests per second; None = unlimited
    api_key_env: str = LLM_KEY_ENV
    timeout: float = 30.0
    backoff_base: float = 0.5

    def __post_init__(self):
        if not (0.0 <= self.temperature <= 2.0):
            raise ValidationError("temperature must be in [0, 2]")
        if self.max_retries < 0:
            raise ValidationError("max_retries must be >= 0")
        if self.rate_limit is not None and self.rate_limit <= 0:
            raise ValidationError("rate_limit must be positive")

    def api_key(self) -> str:
        key = os.environ.get(self.api_key_env, "")
        if not key:
            raise ProviderError(
                f"missing API key: set the {self.api_key_env} environment variable"
            )
        return key


class ParaphraseProvider(Protocol):
    def paraphrase(self, text: str, n: int) -> list[str]: ...


class Translator(Protocol):
    def translate(self, text: str, source_lang: str, target_lang: str) -> str: ...


class MockParaphraseProvider:
    """Deterministic offline paraphraser: "{text} ⟨para k⟩" for k = 1..n."""

    def paraphrase(self, text: str, n: int) -> list[str]:
        _check_paraphrase_args(text, n)
        return [f"{text} ⟨para {k}⟩" for k in range(1, n + 1)]


class MockTranslator:
    """Identity for same-language pairs, else "[{target}] {text}"."""

    def translate(self, text: str, source_lang: str, target_lang: str) -> str:
        _check_translate_args(text, target_lang)
        if source_lang == target_lang:
            return text
        return f"[{target_lang}] {text}"


def _check_paraphrase_args(text: str, n: int) -> None:
    if not text:
        raise ValidationError("paraphrase requires non-empty text")
    if n < 0:
        raise ValidationError("paraphrase count must be >= 0")


def _check_translate_args(text: str, target_lang: str) -> None:
    if not text:
        raise ValidationError("translate requires non-empty text")
    if not target_lang:
        raise ValidationError("translate requires a target language tag")


def load_prompt_template(path=None) -> dict:
    if path is None:
        raw = resources.files("persuakit.data").joinpath(BUNDLED_PROMPT).read_bytes()
    else:
        with open(path, "rb") as fh:
            raw = fh.read()
    try:
        obj = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"prompt template is not valid JSON: {exc}") from exc
    for key in ("version", "system", "user_template"):
        if key not in obj:
            raise ValidationError(f"prompt template missing key {key!r}")
    return obj


def _requests_transport(url: str, headers: dict, payload: dict, timeout: float):
    resp = requests.post(url, headers=headers, json=payload, timeout=timeout)
    try:
        body = resp.json()
    except ValueError:
        body = {}
    return resp.status_code, body


class _RateLimiter:
    def __init__(self, rate: float | None):
        self._interval = 1.0 / rate if rate else 0.0
        self._lock = threading.Lock()
        self._next_at = 0.0

    def wait(self, sleep: Callable[[float], None]) -> None:
        if self._interval == 0.0:
            return
        with self._lock:
            now = time.monotonic()
            delay = self._next_at - now
            self._next_at = max(now, self._next_at) + self._interval
        if delay > 0:
            sleep(delay)


class _HttpClient:
    """Shared retry/backoff/rate-limit plumbing for the live providers."""

    def __init__(self, cfg: ProviderConfig, transport: Transport | None, sleep=time.sleep):
        self.cfg = cfg
        self._transport = transport or _requests_transport
        self._sleep = sleep
        self._limiter = _RateLimiter(cfg.rate_limit)

    def post(self, payload: dict) -> dict:
        headers = {
            "Authorization": f"Bearer {self.cfg.api_key()}",
            "Content-Type": "application/json",
        }
        last_error = "no attempts made"
        for attempt in range(self.cfg.max_retries + 1):
            if attempt:
                self._sleep(min(self.cfg.backoff_base * 2 ** (attempt - 1), 30.0))
            self._limiter.wait(self._sleep)
            try:
                status, body = self._transport(
                    self.cfg.endpoint, headers, payload, self.cfg.timeout
                )
            except Exception as exc:
                last_error = f"transport failure: {exc}"
                log.warning("provider attempt %d failed: %s", attempt + 1, last_error)
                continue
            if status == 429 or status >= 500:
                last_error = f"HTTP {status}"
                log.warning("provider attempt %d failed: %s", attempt + 1, last_error)
                continue
            if status != 200:
                raise ProviderError(f"provider returned HTTP {status}: {body}")
            return body
        raise ProviderError(
            f"provider failed after {self.cfg.max_retries + 1} attempts ({last_error})"
        )


class ChatCompletionParaphraser:
    """Paraphrase via a chat-completion endpoint.

    The prompt asks for a JSON array of exactly n strings; anything else in
    the reply is a malformed-response error. Returns exactly n paraphrases
    or raises - never a short list.
    """

    def __init__(
        self,
        cfg: ProviderConfig,
        prompt_path=None,
        transport: Transport | None = None,
        sleep=time.sleep,
    ):
        self.prompt = load_prompt_template(prompt_path)
        self._http = _HttpClient(cfg, transport, sleep)

    def paraphrase(self, text: str, n: int) -> list[str]:
        _check_paraphrase_args(text, n)
        if n == 0:
            return []
        payload = {
            "model": self._http.cfg.model_name,
            "temperature": self._http.cfg.temperature,
            "messages": [
                {"role": "system", "content": self.prompt["system"]},
                {
                    "role": "user",
                    "content": self.prompt["user_template"].format(n=n, text=text),
                },
            ],
        }
        body = self._http.post(payload)
        try:
            content = body["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise ProviderError(f"malformed chat-completion response: {body}") from exc
        try:
            items = json.loads(content)
        except json.JSONDecodeError as exc:
            raise ProviderError(
                f"provider reply is not a JSON array: {content[:200]!r}"
            ) from exc
        if (
            not isinstance(items, list)
            or len(items) != n
            or not all(isinstance(x, str) and x for x in items)
        ):
            raise ProviderError(
                f"provider reply must be a JSON array of exactly {n} non-empty strings"
            )
        return items


class HttpTranslator:
    """Translate via a configurable HTTP endpoint.

    Request: {"text": ..., "source": ..., "target": ...};
    response: {"translation": ...}.
    """

    def __init__(
        self,
        cfg: ProviderConfig,
        transport: Transport | None = None,
        sleep=time.sleep,
    ):
        self._http = _HttpClient(cfg, transport, sleep)

    def translate(self, text: str, source_lang: str, target_lang: str) -> str:
        _check_translate_args(text, target_lang)
        body = self._http.post(
            {"text": text, "source": source_lang, "target": target_lang}
        )
        translation = body.get("translation")
        if not isinstance(translation, str) or not translation:
            raise ProviderError(f"malformed translation response: {body}")
        return translation
