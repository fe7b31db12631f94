"""의무 표현(deontic) 어휘집.

clause_miner의 분류 규칙, consistency의 극성 판정, extract의 반사실 프로브가
모두 이 어휘집 하나를 공유합니다. 어휘는 편집 가능한 JSON으로 배포됩니다.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Literal

from policy_to_tests.exceptions import ConfigError
from policy_to_tests.utils.jsonl import read_json

Polarity = Literal["require", "forbid"]

_LEXICON_KEYS = (
    "deontic_negative",
    "deontic_positive",
    "exception_cues",
    "exemption_cues",
    "definition_cues",
    "boilerplate_cues",
    "actors",
)


@lru_cache(maxsize=1024)
def phrase_pattern(phrase: str) -> re.Pattern[str]:
    """단어 경계를 지키는 대소문자 무시 패턴."""
    body = r"\s+".join(re.escape(part) for part in phrase.split())
    return re.compile(rf"(?<!\w){body}(?!\w)", re.IGNORECASE)


def find_phrases(phrases: tuple[str, ...], text: str) -> list[str]:
    """text에 등장하는 phrase 목록 (어휘집 순서 유지)."""
    return [p for p in phrases if phrase_pattern(p).search(text)]


@dataclass(frozen=True)
class DeonticLexicon:
    """마커 어휘집."""

    deontic_negative: tuple[str, ...]
    deontic_positive: tuple[str, ...]
    exception_cues: tuple[str, ...]
    exemption_cues: tuple[str, ...]
    definition_cues: tuple[str, ...]
    boilerplate_cues: tuple[str, ...]
    actors: tuple[str, ...]
    polarity_flips: tuple[tuple[str, str], ...] = ()

    @classmethod
    def from_dict(cls, data: dict) -> "DeonticLexicon":
        missing = [k for k in _LEXICON_KEYS if k not in data]
        if missing:
            raise ConfigError(f"어휘집에 필수 키가 없습니다: {', '.join(missing)}")
        return cls(
            **{k: tuple(str(v) for v in data[k]) for k in _LEXICON_KEYS},
            polarity_flips=tuple(
                (str(src), str(dst)) for src, dst in data.get("polarity_flips", [])
            ),
        )

    @classmethod
    def load(cls, path: Path | None = None) -> "DeonticLexicon":
        """어휘집 JSON을 로드합니다. path가 없으면 패키지 기본값."""
        if path is None:
            return default_lexicon()
        return cls.from_dict(read_json(path))

    # ─── 판정 ────────────────────────────────────────────────────────────

    def negative_markers(self, text: str) -> list[str]:
        return find_phrases(self.deontic_negative, text)

    def positive_markers(self, text: str) -> list[str]:
        return find_phrases(self.deontic_positive, text)

    def has_deontic(self, text: str) -> bool:
        return bool(self.negative_markers(text) or self.positive_markers(text))

    def polarity(self, text: str) -> Polarity | None:
        """부정 의무 표현이 있으면 forbid, 긍정만 있으면 require, 없으면 None."""
        if self.negative_markers(text):
            return "forbid"
        if self.positive_markers(text):
            return "require"
        return None

    def flip_polarity(self, text: str) -> str:
        """의무 표현을 어휘적으로 뒤집은 문장 ("shall" ↔ "shall not" 등).

        긴 표현부터 매칭하므로 "shall not"이 "shall"보다 먼저 치환됩니다.
        """
        if not self.polarity_flips:
            return text
        table = {src.lower(): dst for src, dst in self.polarity_flips}
        ordered = sorted(table, key=len, reverse=True)
        pattern = re.compile(
            r"(?<!\w)(" + "|".join(
                r"\s+".join(re.escape(w) for w in src.split()) for src in ordered
            ) + r")(?!\w)",
            re.IGNORECASE,
        )

        def _swap(match: re.Match[str]) -> str:
            found = match.group(0)
            replacement = table[" ".join(found.lower().split())]
            if found[:1].isupper():
                replacement = replacement[:1].upper() + replacement[1:]
            return replacement

        return pattern.sub(_swap, text)


@lru_cache(maxsize=1)
def default_lexicon() -> DeonticLexicon:
    """패키지에 포함된 기본 어휘집."""
    raw = resources.files("policy_to_tests.data").joinpath("lexicons.json").read_text(
        encoding="utf-8"
    )
    return DeonticLexicon.from_dict(json.loads(raw))
