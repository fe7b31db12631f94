"""provider 응답 캐시.

키는 (provider_id, 프롬프트 digest, temperature, seed) 의 SHA-256 입니다.
메모리 캐시를 항상 쓰고, 디렉토리가 주어지면 내용 주소 파일
`{dir}/{key[:2]}/{key}.json` 으로도 저장합니다.
"""

from __future__ import annotations

import json
import logging
import threading
from pathlib import Path

from policy_to_tests.utils.jsonl import sha256_text, write_json

logger = logging.getLogger(__name__)


class ResponseCache:
    """동시 읽기 + 단일 writer 삽입을 지원하는 응답 캐시."""

    def __init__(self, directory: Path | None = None) -> None:
        self._directory = Path(directory) if directory else None
        self._memory: dict[str, str] = {}
        self._write_lock = threading.Lock()

    @staticmethod
    def key(provider_id: str, prompt: str, temperature: float, seed: int) -> str:
        material = f"{provider_id}|{sha256_text(prompt)}|{float(temperature)!r}|{int(seed)}"
        return sha256_text(material)

    def _file(self, key: str) -> Path | None:
        if self._directory is None:
            return None
        return self._directory / key[:2] / f"{key}.json"

    def get(self, key: str) -> str | None:
        """캐시된 응답 텍스트. 없으면 None."""
        hit = self._memory.get(key)
        if hit is not None:
            return hit

        path = self._file(key)
        if path is None or not path.exists():
            return None
        try:
            text = json.loads(path.read_text(encoding="utf-8"))["text"]
        except (OSError, ValueError, KeyError) as e:
            logger.warning("손상된 캐시 항목을 무시합니다: %s (%s)", path, e)
            return None
        self._memory.setdefault(key, text)
        return text

    def put(self, key: str, text: str) -> None:
        with self._write_lock:
            if key in self._memory:
                return
            self._memory[key] = text
            path = self._file(key)
            if path is not None:
                write_json(path, {"text": text})

    def __len__(self) -> int:
        return len(self._memory)
