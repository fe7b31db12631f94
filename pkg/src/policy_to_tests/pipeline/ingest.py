"""문서 로드와 청킹.

정책 원문을 섹션 경로가 붙은 Document 로 읽고, 출처가 있는 Span 으로 나눕니다.

섹션 규칙:
    - markdown: `#` 제목 레벨을 스택으로 쌓아 " > " 로 연결합니다.
      다른 제목보다 먼저 나오는 첫 `#` 제목은 문서 제목이 되고 경로에서 빠집니다.
    - plain_text: (레벨, 정규식) 제목 패턴을 줄 전체에 맞춥니다.
    - 첫 제목 앞의 본문은 "Preamble" 섹션입니다.

정리 규칙:
    - 폼피드(\\f)로 페이지를 나누고, 페이지가 2개 이상일 때
      boilerplate_ratio 초과 비율의 페이지에 반복되는 줄(머리말/꼬리말)을 지웁니다.
    - 쪽 번호 줄("12", "Page 3 of 9", "- 4 -")은 항상 지웁니다.
    - markdown 표는 "cell | cell" 행으로 정규화하고 구분선 행은 지웁니다.
    - 섹션 본문은 문단 사이 빈 줄 하나로 정규화되어, 문단 span 을
      "\\n\\n" 으로 이으면 섹션 본문이 그대로 복원됩니다.
"""

from __future__ import annotations

import logging
import re
from collections import Counter
from pathlib import Path
from typing import Literal

from policy_to_tests.exceptions import IngestError, PreconditionError
from policy_to_tests.models.document import Document, Section, Span, SpanKind
from policy_to_tests.utils.sentences import split_sentences
from policy_to_tests.utils.slug import slugify

logger = logging.getLogger(__name__)

DocFormat = Literal["markdown", "plain_text"]
Strategy = Literal["paragraph", "sentence", "window"]

PREAMBLE = "Preamble"
DEFAULT_HEADING_PATTERNS: tuple[tuple[int, str], ...] = (
    (1, r"(?:PART|Part)\s+\d+\b.*"),
    (1, r"(?:CHAPTER|Chapter)\s+[IVXLC\d]+\b.*"),
    (2, r"(?:SUBPART|Subpart)\s+[A-Z]\b.*"),
    (3, r"(?:ARTICLE|Article)\s+\d+[a-z]?\b.*"),
    (3, r"§\s*\d+(?:\.\d+)*\b.*"),
    (3, r"(?:SECTION|Section)\s+\d+(?:\.\d+)*\b.*"),
    (4, r"\d+(?:\.\d+)+\s+[A-Z][^.]{0,80}"),
)

_MD_HEADING_RE = re.compile(r"^(#{1,6})\s+(.*?)\s*#*\s*$")
_PAGE_NUMBER_RE = re.compile(
    r"^(?:-\s*\d+\s*-|(?:page\s+)?\d+(?:\s*(?:of|/)\s*\d+)?)$", re.IGNORECASE
)
_TABLE_ROW_RE = re.compile(r"^\|.*\|$")
_TABLE_SEPARATOR_RE = re.compile(r"^\|?\s*:?-{2,}:?\s*(?:\|\s*:?-{2,}:?\s*)*\|?$")
_CAPTION_RE = re.compile(r"^(?:Table|Figure|Fig\.)\s+\d+[A-Za-z]?\s*[.:]|^Caption:", re.IGNORECASE)
_BLANK_SPLIT_RE = re.compile(r"\n\s*\n")
_MAX_HEADING_LENGTH = 120


# ─── 로드 ───────────────────────────────────────────────────────────────


def _read_text(path: Path) -> str:
    try:
        raw = Path(path).read_bytes()
    except OSError as e:
        raise IngestError(f"문서를 읽을 수 없습니다: {path} ({e})") from e
    try:
        return raw.decode("utf-8").replace("\r\n", "\n").replace("\r", "\n")
    except UnicodeDecodeError as e:
        raise IngestError(f"UTF-8 문서가 아닙니다: {path} ({e})") from e


def strip_boilerplate(text: str, ratio: float = 0.5) -> str:
    """쪽 번호 줄과 여러 페이지에 반복되는 머리말/꼬리말을 지웁니다."""
    pages = text.split("\f")
    repeated: set[str] = set()
    if len(pages) >= 2:
        counts = Counter(
            line for page in pages for line in {ln.strip() for ln in page.split("\n") if ln.strip()}
        )
        repeated = {line for line, n in counts.items() if n / len(pages) > ratio}
        if repeated:
            logger.debug("반복 줄 %d개를 boilerplate 로 제거", len(repeated))

    kept = []
    for line in "\n".join(pages).split("\n"):
        stripped = line.strip()
        if stripped in repeated or _PAGE_NUMBER_RE.match(stripped):
            continue
        kept.append(line)
    return "\n".join(kept)


def _normalize_table_row(line: str) -> str:
    cells = [c.strip() for c in line.strip().strip("|").split("|")]
    return " | ".join(cells)


def _normalize_body(lines: list[str]) -> str:
    """본문 줄을 문단 단위로 정리합니다 (문단 사이 빈 줄 하나)."""
    cleaned: list[str] = []
    for line in lines:
        stripped = line.strip()
        if _TABLE_SEPARATOR_RE.match(stripped) and "-" in stripped and "|" in stripped:
            continue
        if _TABLE_ROW_RE.match(stripped):
            stripped = _normalize_table_row(stripped)
        cleaned.append(stripped)
    paragraphs = [p.strip() for p in _BLANK_SPLIT_RE.split("\n".join(cleaned))]
    return "\n\n".join(p for p in paragraphs if p)


def _compile_patterns(patterns: tuple[tuple[int, str], ...]) -> list[tuple[int, re.Pattern[str]]]:
    return [(level, re.compile(rf"^(?:{pattern})$")) for level, pattern in patterns]


def _heading(line: str, fmt: DocFormat, patterns) -> tuple[int, str] | None:
    stripped = line.strip()
    if not stripped or len(stripped) > _MAX_HEADING_LENGTH:
        return None
    if fmt == "markdown":
        match = _MD_HEADING_RE.match(stripped)
        if match and match.group(2):
            return len(match.group(1)), match.group(2).strip()
        return None
    for level, pattern in patterns:
        if pattern.match(stripped):
            return level, stripped
    return None


def load_document(
    path: Path,
    fmt: DocFormat = "markdown",
    doc_id: str = "",
    heading_patterns: tuple[tuple[int, str], ...] = (),
    boilerplate_ratio: float = 0.5,
) -> Document:
    """정책 문서를 섹션 단위로 로드합니다.

    Args:
        path: UTF-8 텍스트 파일.
        fmt: "markdown" 또는 "plain_text".
        doc_id: 문서 ID. 비어 있으면 파일명 슬러그.
        heading_patterns: plain_text 제목 패턴 (레벨, 정규식). 비어 있으면 기본값.
        boilerplate_ratio: 반복 줄 판정 비율.

    Raises:
        IngestError: 읽기 불가, UTF-8 아님, 정리 후 빈 문서.
    """
    path = Path(path)
    doc_id = doc_id or slugify(path.stem)
    text = strip_boilerplate(_read_text(path), boilerplate_ratio)
    patterns = _compile_patterns(heading_patterns or DEFAULT_HEADING_PATTERNS)

    title = ""
    stack: list[tuple[int, str]] = []
    current_path = PREAMBLE
    buffer: list[str] = []
    sections: list[Section] = []
    seen_heading = False

    def _flush() -> None:
        body = _normalize_body(buffer)
        if body or current_path != PREAMBLE:
            sections.append(Section(path=current_path, text=body))
        buffer.clear()

    for line in text.split("\n"):
        heading = _heading(line, fmt, patterns)
        if heading is None:
            buffer.append(line)
            continue

        level, name = heading
        if fmt == "markdown" and level == 1 and not seen_heading and not title:
            title = name
            seen_heading = True
            continue
        _flush()
        seen_heading = True
        while stack and stack[-1][0] >= level:
            stack.pop()
        stack.append((level, name))
        current_path = " > ".join(n for _, n in stack)
    _flush()

    if not any(s.text for s in sections):
        raise IngestError(f"empty document: {path}")

    logger.info("문서 로드 완료: %s (섹션 %d개)", doc_id, len(sections))
    return Document(doc_id=doc_id, title=title or doc_id, sections=tuple(sections))


# ─── 청킹 ───────────────────────────────────────────────────────────────


def _paragraph_kind(paragraph: str) -> SpanKind:
    lines = paragraph.split("\n")
    if _CAPTION_RE.match(lines[0]):
        return "caption"
    if all(" | " in ln for ln in lines):
        return "table"
    return "paragraph"


def _flat(text: str) -> str:
    return " ".join(text.split())


def chunk(doc: Document, strategy: Strategy = "paragraph", window_radius: int = 1) -> list[Span]:
    """Document 를 Span 목록으로 나눕니다.

    span_id = "{doc_id}:{섹션 번호:03d}:{청크 번호:03d}", citation = "{section_path} ¶{문단 번호}".
    표와 캡션 문단은 전략과 무관하게 한 span 입니다. window 는 문단 경계를 넘지 않습니다.
    """
    if strategy == "window" and window_radius < 1:
        raise PreconditionError("window 전략에서는 window_radius >= 1 이어야 합니다")

    spans: list[Span] = []
    for sec_idx, section in enumerate(doc.sections, start=1):
        counter = 0
        paragraphs = [p for p in _BLANK_SPLIT_RE.split(section.text) if p.strip()]
        for par_idx, paragraph in enumerate(paragraphs, start=1):
            citation = f"{section.path} ¶{par_idx}"
            kind = _paragraph_kind(paragraph)

            if strategy == "paragraph" or kind != "paragraph":
                pieces: list[tuple[str, SpanKind]] = [(paragraph, kind)]
            else:
                sentences = [_flat(s) for s in split_sentences(paragraph)]
                if strategy == "sentence":
                    pieces = [(s, "sentence") for s in sentences]
                else:
                    pieces = [
                        (
                            " ".join(sentences[max(0, i - window_radius): i + window_radius + 1]),
                            "window",
                        )
                        for i in range(len(sentences))
                    ]

            for text, piece_kind in pieces:
                counter += 1
                spans.append(
                    Span(
                        span_id=f"{doc.doc_id}:{sec_idx:03d}:{counter:03d}",
                        doc_id=doc.doc_id,
                        section_path=section.path,
                        citation=citation,
                        text=text,
                        kind=piece_kind,
                    )
                )

    logger.debug("%s: %s 전략으로 span %d개 생성", doc.doc_id, strategy, len(spans))
    return spans
