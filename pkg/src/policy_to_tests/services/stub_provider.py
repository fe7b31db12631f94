"""고정 응답(fixture) provider.

fixture 파일 형식:

    {
      "responses": [
        {"digest": "<프롬프트 sha256>", "response": ...},
        {"task": "extract", "contains": "retain logs", "response": ...},
        {"task": "repair", "template": "repair", "responses": [..., ...]}
      ],
      "embeddings": {"<정확한 텍스트>": [0.1, 0.2, ...]}
    }

digest 일치가 우선이고, 그다음 task(+template) 와 부분 문자열이 맞는 첫 항목을
씁니다. `responses` 목록은 호출마다 순서대로 소비하며 마지막 값을 반복합니다.
문자열이 아닌 응답은 JSON 으로 직렬화합니다. 일치 항목이 없으면 strict 가
아닌 한 fallback 응답기에 위임합니다.
"""

from __future__ import annotations

import logging
import threading
from pathlib import Path
from typing import Any

import numpy as np

from policy_to_tests.exceptions import ConfigError, ProviderError
from policy_to_tests.services.base import TextProvider, TextRequest, unit
from policy_to_tests.services.fallback_provider import FallbackProvider
from policy_to_tests.utils.jsonl import dumps, read_json, sha256_text

logger = logging.getLogger(__name__)


class StubProvider(TextProvider):
    provider_id = "stub"
    default_confidence = 1.0

    def __init__(
        self,
        fixtures: dict | None = None,
        strict: bool = False,
        fallback: FallbackProvider | None = None,
        **kwargs: Any,
    ) -> None:
        super().__init__(**kwargs)
        fixtures = fixtures or {}
        entries = fixtures.get("responses", [])
        if not isinstance(entries, list):
            raise ConfigError("stub fixture 의 responses 는 배열이어야 합니다")
        self._entries: list[dict] = [dict(e) for e in entries]
        self._cursor: dict[int, int] = {}
        self._cursor_lock = threading.Lock()
        self._embeddings = {
            text: unit(vector) for text, vector in fixtures.get("embeddings", {}).items()
        }
        self.strict = strict
        self._fallback = fallback or FallbackProvider(cache=self.cache, prompts=self.prompts)

    @classmethod
    def from_file(cls, path: Path, strict: bool = False, **kwargs: Any) -> "StubProvider":
        data = read_json(path)
        if not isinstance(data, dict):
            raise ConfigError(f"stub fixture 파일은 JSON 객체여야 합니다: {path}")
        return cls(fixtures=data, strict=strict, **kwargs)

    def add_response(self, response: Any, task: str = "", contains: str = "", template: str = "") -> None:
        """테스트에서 항목을 하나 추가합니다."""
        entry: dict[str, Any] = {"response": response}
        if task:
            entry["task"] = task
        if contains:
            entry["contains"] = contains
        if template:
            entry["template"] = template
        self._entries.append(entry)

    def _match(self, request: TextRequest) -> tuple[int, dict] | None:
        digest = sha256_text(request.prompt)
        for idx, entry in enumerate(self._entries):
            if entry.get("digest") == digest:
                return idx, entry
        for idx, entry in enumerate(self._entries):
            if "digest" in entry:
                continue
            if entry.get("task") and entry["task"] != request.task_tag:
                continue
            if entry.get("template") and entry["template"] != request.template:
                continue
            if entry.get("contains", "") in request.prompt:
                return idx, entry
        return None

    def _next_response(self, idx: int, entry: dict) -> Any:
        if "responses" not in entry:
            return entry.get("response", "")
        sequence = entry["responses"]
        with self._cursor_lock:
            position = self._cursor.get(idx, 0)
            self._cursor[idx] = position + 1
        return sequence[min(position, len(sequence) - 1)]

    def _complete(self, request: TextRequest) -> tuple[str, int, int]:
        matched = self._match(request)
        if matched is None:
            if self.strict:
                raise ProviderError(
                    f"stub fixture 에 일치하는 응답이 없습니다 ({request.task_tag})",
                    provider_id=self.provider_id,
                )
            logger.debug("stub 미일치 → fallback 응답기 사용 (%s)", request.task_tag)
            text = self._fallback.respond(request)
        else:
            response = self._next_response(*matched)
            text = response if isinstance(response, str) else dumps(response)
        return text, len(request.prompt.split()), len(text.split())

    def embed(self, text: str) -> np.ndarray:
        if text in self._embeddings:
            return self._embeddings[text]
        return super().embed(text)
