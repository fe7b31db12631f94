"""문서 및 span 데이터 모델."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

SpanKind = Literal["paragraph", "sentence", "window", "table", "caption"]


@dataclass(frozen=True)
class Section:
    """섹션 경로와 정리된 본문."""

    path: str
    text: str


@dataclass(frozen=True)
class Document:
    """로드된 정책 문서."""

    doc_id: str
    title: str
    sections: tuple[Section, ...]


@dataclass(frozen=True)
class Span:
    """출처가 붙은 주소 지정 가능한 텍스트 조각."""

    span_id: str
    doc_id: str
    section_path: str
    citation: str
    text: str
    kind: SpanKind = "paragraph"

    @classmethod
    def from_dict(cls, data: dict) -> "Span":
        return cls(
            span_id=data["span_id"],
            doc_id=data["doc_id"],
            section_path=data["section_path"],
            citation=data["citation"],
            text=data["text"],
            kind=data.get("kind", "paragraph"),
        )

    def to_dict(self) -> dict:
        return {
            "span_id": self.span_id,
            "doc_id": self.doc_id,
            "section_path": self.section_path,
            "citation": self.citation,
            "text": self.text,
            "kind": self.kind,
        }
