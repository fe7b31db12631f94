"""평가 입력(골드)과 출력(리포트) 모델."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from policy_to_tests.exceptions import GoldFormatError
from policy_to_tests.models.rule import Rule


@dataclass(frozen=True)
class GoldRecord:
    """사람이 판정한 span 하나와 그 원자 규칙들.

    annotator_labels: 평가자 ID → {"is_rule_span": bool, "is_testable": bool,
    "hazard_label": str, "actors": [str, ...]} (일치도 계산용, 선택).
    """

    span_id: str
    citation: str
    is_rule_span: bool
    gold_rules: tuple[Rule, ...] = ()
    annotator_labels: dict[str, dict[str, Any]] = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data: dict) -> "GoldRecord":
        try:
            span_id = str(data["span_id"])
            is_rule_span = bool(data["is_rule_span"])
        except KeyError as e:
            raise GoldFormatError(f"골드 레코드에 필수 필드가 없습니다: {e}") from e

        citation = str(data.get("citation", ""))
        rules = []
        for idx, raw in enumerate(data.get("gold_rules", [])):
            raw = dict(raw)
            raw.setdefault("rule_id", f"{span_id}#g{idx}")
            raw.setdefault("source", {"doc": "", "citation": citation, "span_id": span_id})
            raw.setdefault("scope", {"actor": []})
            rules.append(Rule.from_dict(raw))

        if bool(rules) != is_rule_span:
            raise GoldFormatError(
                f"골드 span {span_id}: gold_rules 는 is_rule_span 일 때만 비어 있지 않아야 합니다"
            )
        return cls(
            span_id=span_id,
            citation=citation,
            is_rule_span=is_rule_span,
            gold_rules=tuple(rules),
            annotator_labels=dict(data.get("annotator_labels", {})),
        )


Interval = tuple[float, float]


@dataclass(frozen=True)
class MetricsReport:
    """문서 × seed 하나에 대한 추출 품질 지표."""

    coverage: float
    test_acc: float
    span_precision: float
    span_recall: float
    span_f1: float
    span_auprc: float
    se_slot_similarity: float
    evidence_similarity: float
    per_field: dict[str, float] = field(default_factory=dict)
    ci: dict[str, Interval] = field(default_factory=dict)
    gold_spans: int = 0
    predicted_spans: int = 0

    def to_dict(self) -> dict:
        return {
            "gold_spans": self.gold_spans,
            "predicted_spans": self.predicted_spans,
            "coverage": round(self.coverage, 4),
            "test_acc": round(self.test_acc, 4),
            "span_precision": round(self.span_precision, 4),
            "span_recall": round(self.span_recall, 4),
            "span_f1": round(self.span_f1, 4),
            "span_auprc": round(self.span_auprc, 4),
            "se_slot_similarity": round(self.se_slot_similarity, 4),
            "evidence_similarity": round(self.evidence_similarity, 4),
            "per_field": {k: round(v, 4) for k, v in self.per_field.items()},
            "ci": {k: [round(lo, 4), round(hi, 4)] for k, (lo, hi) in self.ci.items()},
        }


@dataclass(frozen=True)
class AgreementReport:
    """평가자 간 일치도."""

    span_kappa: float
    testable_kappa: float
    hazard_kappa: float
    scope_actors_alpha: float
    ci: dict[str, Interval] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "span_kappa": round(self.span_kappa, 4),
            "testable_kappa": round(self.testable_kappa, 4),
            "hazard_kappa": round(self.hazard_kappa, 4),
            "scope_actors_alpha": round(self.scope_actors_alpha, 4),
            "ci": {k: [round(lo, 4), round(hi, 4)] for k, (lo, hi) in self.ci.items()},
        }
