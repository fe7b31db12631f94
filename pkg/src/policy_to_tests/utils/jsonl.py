"""JSON/JSONL 입출력 유틸리티.

모든 산출물은 임시 파일에 쓴 뒤 rename 하여 원자적으로 교체합니다.
직렬화는 키 순서를 보존하고 ASCII 이스케이프를 하지 않아 바이트 단위로 결정적입니다.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from collections.abc import Iterable
from pathlib import Path
from typing import Any

from policy_to_tests.exceptions import InputError


def dumps(obj: Any) -> str:
    """결정적 JSON 한 줄 직렬화."""
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        Path(tmp_name).unlink(missing_ok=True)
        raise


def write_jsonl(path: Path, records: Iterable[dict]) -> Path:
    """레코드를 JSONL로 원자적으로 기록합니다."""
    lines = [dumps(r) for r in records]
    _atomic_write(path, "".join(f"{line}\n" for line in lines))
    return path


def write_json(path: Path, obj: Any) -> Path:
    """JSON 문서를 들여쓰기 2로 원자적으로 기록합니다."""
    _atomic_write(path, json.dumps(obj, ensure_ascii=False, indent=2) + "\n")
    return path


def write_text(path: Path, text: str) -> Path:
    _atomic_write(path, text)
    return path


def read_records(path: Path) -> list[dict]:
    """JSONL 또는 JSON 배열 파일을 읽어 레코드 목록을 반환합니다.

    Raises:
        InputError: 파일을 읽을 수 없거나 JSON이 아닐 때.
    """
    try:
        raw = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise InputError(f"파일을 읽을 수 없습니다: {path} ({e})") from e

    stripped = raw.lstrip()
    if stripped.startswith("["):
        try:
            data = json.loads(raw)
        except json.JSONDecodeError as e:
            raise InputError(f"JSON 배열 파싱 실패: {path} ({e})") from e
        return list(data)

    records: list[dict] = []
    for lineno, line in enumerate(raw.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            records.append(json.loads(line))
        except json.JSONDecodeError as e:
            raise InputError(f"JSONL 파싱 실패: {path}:{lineno} ({e})") from e
    return records


def read_json(path: Path) -> Any:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as e:
        raise InputError(f"JSON 파일을 읽을 수 없습니다: {path} ({e})") from e


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def sha256_text(text: str) -> str:
    return sha256_bytes(text.encode("utf-8"))


def file_digest(path: Path) -> str:
    return sha256_bytes(Path(path).read_bytes())
