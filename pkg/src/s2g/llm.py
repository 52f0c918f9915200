"""Language-model gateway with record/replay fixtures.

Every call is addressed by a digest of (prompt kind + whitespace-collapsed
prompt body).  Replay mode answers purely from the fixture directory and
raises :class:`FixtureMiss` for anything unknown; record mode calls the live
endpoint and persists each response; live mode skips fixtures entirely.
Invalid responses are re-prompted up to twice with the validation error
appended before giving up.
"""

from __future__ import annotations

import copy
import hashlib
import json
import logging
import os
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, TypeVar

import httpx

from .errors import FixtureMiss, GenerationError, IrError
from .ir import ActionSpec, parse_action_spec
from .prompts import PromptKind, build_prompt

log = logging.getLogger(__name__)

T = TypeVar("T")

MODE_LIVE = "live"
MODE_RECORD = "record"
MODE_REPLAY = "replay"

ENV_ENDPOINT = "S2G_LLM_ENDPOINT"
ENV_KEY = "S2G_LLM_KEY"
ENV_MODE = "S2G_LLM_MODE"
ENV_MODEL = "S2G_LLM_MODEL"

MAX_REPROMPTS = 2


def canonical_digest(kind: PromptKind, prompt: str) -> str:
    """Digest of a prompt, insensitive to whitespace differences."""
    body = " ".join(prompt.split())
    return hashlib.sha256(f"{kind.value}\n{body}".encode("utf-8")).hexdigest()


def reprompt_text(prompt: str, error: Exception) -> str:
    """The follow-up prompt sent after an invalid response."""
    detail = " ".join(str(error).split())[:200]
    return (
        f"{prompt}\n\nThe previous response was invalid "
        f"({type(error).__name__}: {detail}). Respond again with only the corrected JSON."
    )


class FixtureStore:
    """Directory of ``<digest>.json`` records, safe for concurrent use."""

    def __init__(self, root: Path | str):
        self.root = Path(root)
        self._lock = threading.Lock()
        self._cache: dict[str, dict] = {}

    def path_for(self, digest: str) -> Path:
        return self.root / f"{digest}.json"

    def get(self, digest: str) -> dict | None:
        with self._lock:
            if digest in self._cache:
                return copy.deepcopy(self._cache[digest])
            path = self.path_for(digest)
            if not path.exists():
                return None
            record = json.loads(path.read_text(encoding="utf-8"))
            self._cache[digest] = record
            return copy.deepcopy(record)

    def put(self, digest: str, record: dict) -> None:
        path = self.path_for(digest)
        with self._lock:
            path.parent.mkdir(parents=True, exist_ok=True)
            tmp = path.with_suffix(".tmp")
            tmp.write_text(
                json.dumps(record, indent=2, sort_keys=True, ensure_ascii=True) + "\n",
                encoding="utf-8",
            )
            tmp.replace(path)
            self._cache[digest] = copy.deepcopy(record)

    def __contains__(self, digest: str) -> bool:
        return self.path_for(digest).exists()


@dataclass
class GatewayConfig:
    mode: str = MODE_REPLAY
    fixtures: Path | None = None
    endpoint: str = ""
    api_key: str = ""
    model: str = ""
    strict_specs: bool = True

    @classmethod
    def from_env(
        cls,
        mode: str | None = None,
        fixtures: Path | str | None = None,
    ) -> "GatewayConfig":
        resolved_mode = mode or os.environ.get(ENV_MODE, MODE_REPLAY)
        if resolved_mode not in (MODE_LIVE, MODE_RECORD, MODE_REPLAY):
            raise GenerationError(f"unknown gateway mode {resolved_mode!r}")
        return cls(
            mode=resolved_mode,
            fixtures=Path(fixtures) if fixtures is not None else None,
            endpoint=os.environ.get(ENV_ENDPOINT, ""),
            api_key=os.environ.get(ENV_KEY, ""),
            model=os.environ.get(ENV_MODEL, ""),
            strict_specs=resolved_mode == MODE_REPLAY,
        )


class LlmGateway:
    """One front door for every model call, in live, record, or replay mode."""

    def __init__(self, config: GatewayConfig):
        if config.mode in (MODE_RECORD, MODE_REPLAY) and config.fixtures is None:
            raise GenerationError(f"{config.mode} mode needs a fixture directory")
        self.config = config
        self.store = FixtureStore(config.fixtures) if config.fixtures is not None else None

    @property
    def mode(self) -> str:
        return self.config.mode

    def complete(
        self,
        kind: PromptKind,
        variables: dict[str, str],
        validator: Callable[[str], T],
    ) -> T:
        """Render, fetch, validate; re-prompt up to twice on invalid output."""
        prompt = build_prompt(kind, variables)
        last_error: Exception | None = None
        for _ in range(1 + MAX_REPROMPTS):
            text = self._fetch(kind, prompt)
            try:
                return validator(text)
            except (IrError, ValueError, KeyError, TypeError) as exc:
                last_error = exc
                log.warning("invalid %s response (%s); re-prompting", kind.value, exc)
                prompt = reprompt_text(prompt, exc)
        raise GenerationError(
            f"{kind.value} response stayed invalid after {MAX_REPROMPTS} re-prompts: {last_error}"
        )

    def _fetch(self, kind: PromptKind, prompt: str) -> str:
        digest = canonical_digest(kind, prompt)
        if self.config.mode == MODE_REPLAY:
            assert self.store is not None
            record = self.store.get(digest)
            if record is None:
                raise FixtureMiss(digest, kind.value)
            return record["response"]
        if self.config.mode == MODE_RECORD:
            assert self.store is not None
            record = self.store.get(digest)
            if record is not None:
                return record["response"]
            response = self._call_endpoint(prompt)
            self.store.put(digest, {"kind": kind.value, "prompt": prompt, "response": response})
            return response
        return self._call_endpoint(prompt)

    def _call_endpoint(self, prompt: str) -> str:
        if not self.config.endpoint:
            raise GenerationError(
                f"no model endpoint configured (set {ENV_ENDPOINT}) - cannot go live"
            )
        headers = {"Content-Type": "application/json"}
        if self.config.api_key:
            headers["Authorization"] = f"Bearer {self.config.api_key}"
        payload: dict[str, Any] = {
            "messages": [{"role": "user", "content": prompt}],
        }
        if self.config.model:
            payload["model"] = self.config.model
        try:
            reply = httpx.post(
                self.config.endpoint, json=payload, headers=headers, timeout=120.0
            )
            reply.raise_for_status()
            body = reply.json()
            return body["choices"][0]["message"]["content"]
        except (httpx.HTTPError, KeyError, IndexError, json.JSONDecodeError) as exc:
            raise GenerationError(f"model endpoint failed: {exc}") from exc


# --- response validators ---------------------------------------------------------


def extract_json(text: str) -> Any:
    """Parse JSON out of a model reply, tolerating code fences and chatter."""
    stripped = text.strip()
    if stripped.startswith("```"):
        stripped = stripped.strip("`")
        if stripped.startswith("json"):
            stripped = stripped[4:]
        stripped = stripped.strip()
    try:
        return json.loads(stripped)
    except json.JSONDecodeError:
        start = stripped.find("{")
        end = stripped.rfind("}")
        if start != -1 and end > start:
            return json.loads(stripped[start : end + 1])
        raise


def validate_sentences(text: str) -> list[str]:
    doc = extract_json(text)
    sentences = doc["sentences"]
    if not isinstance(sentences, list) or not sentences:
        raise ValueError("'sentences' must be a non-empty list")
    if any(not isinstance(s, str) or not s.strip() for s in sentences):
        raise ValueError("every sentence must be a non-empty string")
    return [s.strip() for s in sentences]


def spec_validator(strict: bool = True) -> Callable[[str], ActionSpec]:
    def validate(text: str) -> ActionSpec:
        return parse_action_spec(extract_json(text), strict=strict)

    return validate


def validate_verbs(text: str) -> list[str]:
    doc = extract_json(text)
    verbs = doc["verbs"]
    if not isinstance(verbs, list) or not verbs:
        raise ValueError("'verbs' must be a non-empty list")
    out: list[str] = []
    for verb in verbs:
        if not isinstance(verb, str) or not verb.strip():
            raise ValueError("every verb must be a non-empty string")
        word = verb.strip().lower().split()[0]
        if word not in out:
            out.append(word)
    return out


def validate_attr_default(text: str) -> Any:
    doc = extract_json(text)
    if "default" not in doc:
        raise ValueError("missing 'default'")
    return doc["default"]


def validate_relevance(text: str) -> dict:
    doc = extract_json(text)
    if not isinstance(doc.get("relevant"), bool):
        raise ValueError("'relevant' must be a boolean")
    return {"relevant": doc["relevant"], "required_value": doc.get("required_value")}
