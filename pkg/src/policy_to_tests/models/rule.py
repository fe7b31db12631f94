"""규칙 DSL 데이터 모델.

JSON 레코드 ↔ dataclass 변환만 담당하며, 스키마 검증은 dsl.schema 가 합니다.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Any

EVIDENCE_SIGNALS: tuple[str, ...] = (
    "io_check",
    "log_check",
    "config_check",
    "ci_gate",
    "data_check",
    "repo_check",
    "access_check",
    "attest_check",
)
SEVERITIES: tuple[str, ...] = ("low", "medium", "high")
DEFAULT_SEVERITY = "medium"


def _strs(values: Any) -> tuple[str, ...]:
    return tuple(str(v) for v in (values or ()))


@dataclass(frozen=True)
class SpanRef:
    """병합으로 흡수된 span의 출처."""

    citation: str
    span_id: str

    def to_dict(self) -> dict:
        return {"citation": self.citation, "span_id": self.span_id}


@dataclass(frozen=True)
class SourceRef:
    """규칙 출처 (doc, citation, span_id) + 병합된 추가 span."""

    doc: str
    citation: str
    span_id: str
    additional_spans: tuple[SpanRef, ...] = ()

    @classmethod
    def from_dict(cls, data: dict) -> "SourceRef":
        return cls(
            doc=data.get("doc", ""),
            citation=data.get("citation", ""),
            span_id=data.get("span_id", ""),
            additional_spans=tuple(
                SpanRef(citation=s.get("citation", ""), span_id=s.get("span_id", ""))
                for s in data.get("additional_spans", [])
            ),
        )

    def to_dict(self) -> dict:
        data: dict[str, Any] = {
            "doc": self.doc,
            "citation": self.citation,
            "span_id": self.span_id,
        }
        if self.additional_spans:
            data["additional_spans"] = [s.to_dict() for s in self.additional_spans]
        return data

    def span_refs(self) -> tuple[SpanRef, ...]:
        """자신의 span을 포함한 전체 출처 span."""
        return (SpanRef(self.citation, self.span_id), *self.additional_spans)

    def provenance_key(self) -> tuple[str, str, str]:
        return (self.doc, self.citation, self.span_id)


@dataclass(frozen=True)
class Scope:
    """적용 범위. 빈 축은 '제한 없음'을 뜻합니다."""

    actor: tuple[str, ...] = ()
    data_domain: tuple[str, ...] = ()
    context: tuple[str, ...] = ()

    @classmethod
    def from_dict(cls, data: dict) -> "Scope":
        return cls(
            actor=_strs(data.get("actor")),
            data_domain=_strs(data.get("data_domain")),
            context=_strs(data.get("context")),
        )

    def to_dict(self) -> dict:
        return {
            "actor": list(self.actor),
            "data_domain": list(self.data_domain),
            "context": list(self.context),
        }

    def is_empty(self) -> bool:
        return not (self.actor or self.data_domain or self.context)


@dataclass(frozen=True)
class Testability:
    """검증 가능성 근거와 증거 채널."""

    evidence_signals: tuple[str, ...] = ()
    reason: str = ""

    @classmethod
    def from_dict(cls, data: dict) -> "Testability":
        return cls(
            evidence_signals=_strs(data.get("evidence_signals")),
            reason=str(data.get("reason", "")),
        )

    def to_dict(self) -> dict:
        return {"evidence_signals": list(self.evidence_signals), "reason": self.reason}


@dataclass(frozen=True)
class Rule:
    """원자 규칙 하나."""

    rule_id: str
    source: SourceRef
    scope: Scope
    requirement: str
    hazard: str = ""
    conditions: tuple[str, ...] = ()
    exceptions: tuple[str, ...] = ()
    evidence: tuple[str, ...] = ()
    severity: str = DEFAULT_SEVERITY
    is_testable: bool = False
    testability: Testability = field(default_factory=Testability)
    confidence: float = 1.0

    @classmethod
    def from_dict(cls, data: dict) -> "Rule":
        """검증된 JSON 레코드에서 Rule 생성."""
        return cls(
            rule_id=str(data.get("rule_id", "")),
            source=SourceRef.from_dict(data.get("source", {})),
            scope=Scope.from_dict(data.get("scope", {})),
            requirement=str(data.get("requirement", "")),
            hazard=str(data.get("hazard", "")),
            conditions=_strs(data.get("conditions")),
            exceptions=_strs(data.get("exceptions")),
            evidence=_strs(data.get("evidence")),
            severity=str(data.get("severity", DEFAULT_SEVERITY)),
            is_testable=bool(data.get("is_testable", False)),
            testability=Testability.from_dict(data.get("testability", {})),
            confidence=float(data.get("confidence", 1.0)),
        )

    def to_dict(self) -> dict:
        """고정된 필드 순서의 JSON 레코드."""
        return {
            "rule_id": self.rule_id,
            "source": self.source.to_dict(),
            "scope": self.scope.to_dict(),
            "hazard": self.hazard,
            "conditions": list(self.conditions),
            "exceptions": list(self.exceptions),
            "requirement": self.requirement,
            "evidence": list(self.evidence),
            "severity": self.severity,
            "is_testable": self.is_testable,
            "testability": self.testability.to_dict(),
            "confidence": self.confidence,
        }

    def replace(self, **changes: Any) -> "Rule":
        return dataclasses.replace(self, **changes)
