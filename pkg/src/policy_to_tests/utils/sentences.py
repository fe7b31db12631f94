"""규칙 기반 문장 분리기.

`.?!` 뒤에 공백과 대문자/숫자/여는 따옴표가 오면 경계로 봅니다.
법률 문서에 흔한 약어("e.g.", "C.F.R.", "Art.")는 경계로 보지 않습니다.
"""

from __future__ import annotations

import re

ABBREVIATIONS: frozenset[str] = frozenset(
    {
        "e.g.", "i.e.", "etc.", "cf.", "vs.", "no.", "nos.", "art.", "arts.",
        "sec.", "secs.", "para.", "paras.", "p.", "pp.", "ch.", "vol.", "fig.",
        "mr.", "mrs.", "ms.", "dr.", "inc.", "ltd.", "co.", "corp.", "u.s.",
        "u.s.c.", "c.f.r.", "e.u.", "approx.", "incl.", "st.", "jan.", "feb.",
        "mar.", "apr.", "jun.", "jul.", "aug.", "sep.", "sept.", "oct.", "nov.",
        "dec.",
    }
)

_BOUNDARY_RE = re.compile(r"(?<=[.?!])(?P<close>[\"')\]]?)\s+(?=[\"'(\[]?[A-Z0-9])")
_LAST_WORD_RE = re.compile(r"(\S+)$")


def _ends_with_abbreviation(chunk: str) -> bool:
    match = _LAST_WORD_RE.search(chunk.rstrip("\"')]"))
    if not match:
        return False
    word = match.group(1).lower().lstrip("(\"'[")
    if word in ABBREVIATIONS:
        return True
    # 단일 대문자 이니셜 ("J.")
    return bool(re.fullmatch(r"[a-z]\.", word))


def split_sentences(text: str) -> list[str]:
    """문단 텍스트를 문장 목록으로 나눕니다. 빈 문장은 버립니다."""
    text = text.strip()
    if not text:
        return []

    sentences: list[str] = []
    start = 0
    for match in _BOUNDARY_RE.finditer(text):
        candidate = text[start:match.start()] + match.group("close")
        if _ends_with_abbreviation(candidate):
            continue
        sentences.append(candidate.strip())
        start = match.end()
    sentences.append(text[start:].strip())
    return [s for s in sentences if s]
