"""조항별 감사 추적(trace) 모델."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Literal

IssueCode = Literal[
    "missing_hazard",
    "empty_scope",
    "unverifiable_evidence",
    "requirement_exception_conflict",
    "schema_invalid",
    "other",
]
ISSUE_CODES: tuple[str, ...] = (
    "missing_hazard",
    "empty_scope",
    "unverifiable_evidence",
    "requirement_exception_conflict",
    "schema_invalid",
    "other",
)
GateOutcome = Literal["passed", "failed", "skipped"]
ProbeOutcome = Literal["stable", "fragile", "skipped"]


@dataclass(frozen=True)
class Issue:
    """judge 또는 검증기가 보고한 문제."""

    code: IssueCode
    detail: str

    def __post_init__(self) -> None:
        if self.code not in ISSUE_CODES:
            raise ValueError(f"알 수 없는 issue code: {self.code}")
        if not self.detail:
            raise ValueError("issue detail 은 비어 있을 수 없습니다")

    def to_dict(self) -> dict:
        return {"code": self.code, "detail": self.detail}


@dataclass(frozen=True)
class RepairRecord:
    """repair 한 건의 필드 단위 변경."""

    path: str
    before: Any
    after: Any
    accepted: bool

    def to_dict(self) -> dict:
        return {
            "path": self.path,
            "before": self.before,
            "after": self.after,
            "accepted": self.accepted,
        }


@dataclass
class TraceRecord:
    """조항 하나의 extract→judge→repair→gate→probe 기록."""

    span_id: str
    attempts: int = 0
    issues: list[Issue] = field(default_factory=list)
    repairs: list[RepairRecord] = field(default_factory=list)
    repair_rejections: list[str] = field(default_factory=list)
    gate: GateOutcome = "skipped"
    gated_rule_ids: list[str] = field(default_factory=list)
    probe: ProbeOutcome = "skipped"
    accepted_rule_ids: list[str] = field(default_factory=list)
    confidence: float = 0.0
    scope_flags: list[str] = field(default_factory=list)
    status: Literal["ok", "skipped"] = "ok"
    error: str = ""

    def add_issue(self, code: IssueCode, detail: str) -> None:
        self.issues.append(Issue(code=code, detail=detail))

    def to_dict(self) -> dict:
        return {
            "span_id": self.span_id,
            "status": self.status,
            "attempts": self.attempts,
            "issues": [i.to_dict() for i in self.issues],
            "repairs": [r.to_dict() for r in self.repairs],
            "repair_rejections": list(self.repair_rejections),
            "gate": self.gate,
            "gated_rule_ids": list(self.gated_rule_ids),
            "probe": self.probe,
            "accepted_rule_ids": list(self.accepted_rule_ids),
            "confidence": self.confidence,
            "scope_flags": list(self.scope_flags),
            "error": self.error,
        }
