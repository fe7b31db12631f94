"""텍스트 정규화 유틸리티.

시그니처, 술어 키, Jaccard 유사도가 모두 같은 정규화를 공유합니다.
"""

from __future__ import annotations

import re

_WS_RE = re.compile(r"\s+")
_WORD_RE = re.compile(r"\w+", re.UNICODE)
_TRAILING_PUNCT = ".;,"

STOPWORDS: frozenset[str] = frozenset(
    {
        "a", "an", "the", "and", "or", "nor", "of", "to", "in", "on", "at",
        "for", "by", "with", "from", "into", "onto", "as", "is", "are", "be",
        "been", "being", "was", "were", "that", "this", "these", "those",
        "it", "its", "their", "any", "all", "each", "every", "such", "which",
        "who", "whom", "whose", "than", "then", "so", "if", "when", "where",
        "under", "per", "via", "upon", "about", "other", "has", "have",
        "had", "do", "does", "did", "also",
    }
)


def normalize_text(text: str) -> str:
    """소문자화, 공백 압축, 끝 구두점(`.;,`) 제거.

    >>> normalize_text("  Must Encrypt   PHI at rest. ")
    'must encrypt phi at rest'
    """
    collapsed = _WS_RE.sub(" ", text.lower()).strip()
    return collapsed.rstrip(_TRAILING_PUNCT).rstrip()


def word_tokens(text: str) -> list[str]:
    """소문자 단어 토큰 목록 (밑줄 포함 `\\w+`)."""
    return _WORD_RE.findall(text.lower())


def token_jaccard(text_a: str, text_b: str) -> float:
    """소문자 단어 토큰 집합의 Jaccard 유사도.

    빈 문자열 둘은 1.0, 한쪽만 빈 경우 0.0.
    """
    set_a = set(word_tokens(text_a))
    set_b = set(word_tokens(text_b))
    if not set_a and not set_b:
        return 1.0
    if not set_a or not set_b:
        return 0.0
    return len(set_a & set_b) / len(set_a | set_b)
