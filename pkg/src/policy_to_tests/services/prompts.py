"""프롬프트 템플릿 라이브러리.

템플릿은 `prompts/{name}.txt` 텍스트 파일이며 `$name` 형식의 이름 붙은
자리표시자를 씁니다. 설정의 provider.prompt_dir 로 덮어쓸 수 있습니다.
"""

from __future__ import annotations

import json
import logging
import threading
from importlib import resources
from pathlib import Path
from string import Template
from typing import Any, Mapping

from policy_to_tests.exceptions import ConfigError
from policy_to_tests.utils.jsonl import dumps, read_json

logger = logging.getLogger(__name__)

TEMPLATE_NAMES: tuple[str, ...] = (
    "extract",
    "judge",
    "repair",
    "testability",
    "examples",
    "similarity",
    "paraphrase",
    "judge_violation",
)


def _as_text(value: Any) -> str:
    if isinstance(value, str):
        return value
    return dumps(value)


class PromptLibrary:
    """이름 → 템플릿. 한 번 읽은 템플릿은 메모리에 보관합니다."""

    def __init__(self, directory: Path | None = None) -> None:
        self._directory = Path(directory) if directory else None
        self._templates: dict[str, Template] = {}
        self._lock = threading.Lock()

    def _read(self, name: str) -> str:
        if self._directory is not None:
            override = self._directory / f"{name}.txt"
            if override.exists():
                return override.read_text(encoding="utf-8")
        resource = resources.files("policy_to_tests.prompts").joinpath(f"{name}.txt")
        if not resource.is_file():
            raise ConfigError(f"프롬프트 템플릿을 찾을 수 없습니다: {name}.txt")
        return resource.read_text(encoding="utf-8")

    def template(self, name: str) -> Template:
        with self._lock:
            if name not in self._templates:
                self._templates[name] = Template(self._read(name))
            return self._templates[name]

    def render(self, name: str, payload: Mapping[str, Any]) -> str:
        """템플릿을 payload 로 채웁니다. 누락된 자리표시자는 ConfigError."""
        values = {key: _as_text(value) for key, value in payload.items()}
        try:
            return self.template(name).substitute(values)
        except KeyError as e:
            raise ConfigError(f"프롬프트 '{name}'에 필요한 값이 없습니다: {e}") from e


def load_few_shot(path: Path | None = None) -> list[dict]:
    """few-shot 예시 파일 [{"clause": str, "rules": [...]}, ...] 을 읽습니다."""
    if path is None:
        raw = resources.files("policy_to_tests.prompts").joinpath("few_shot.json").read_text(
            encoding="utf-8"
        )
        data = json.loads(raw)
    else:
        data = read_json(path)

    if not isinstance(data, list) or not all(
        isinstance(e, dict) and "clause" in e and "rules" in e for e in data
    ):
        raise ConfigError("few-shot 파일은 {clause, rules} 객체의 JSON 배열이어야 합니다")
    logger.debug("few-shot 예시 %d개 로드", len(data))
    return data
