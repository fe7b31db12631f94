"""문서 ID 슬러그 유틸리티.

파일명이나 제목에서 span_id 접두어로 쓸 수 있는 안정적인 슬러그를 만듭니다.
"""

import re

DEFAULT_MAX_LENGTH = 40


def slugify(text: str, max_length: int = DEFAULT_MAX_LENGTH) -> str:
    """텍스트를 span_id-safe 슬러그로 변환합니다.

    영문/숫자만 유지하고, 나머지는 하이픈으로 치환합니다.
    영문/숫자가 하나도 없으면 "doc"을 반환합니다.

    Examples:
        >>> slugify("HIPAA Privacy Rule (Part 164)")
        'hipaa-privacy-rule-part-164'
    """
    slug = text.lower()
    slug = re.sub(r"[^a-z0-9]+", "-", slug)
    slug = slug.strip("-")
    if len(slug) > max_length:
        slug = slug[:max_length].rstrip("-")
    return slug or "doc"
