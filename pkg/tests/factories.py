"""테스트용 객체 팩토리."""

from __future__ import annotations

from policy_to_tests.models.document import Span
from policy_to_tests.models.evaluation import GoldRecord
from policy_to_tests.models.rule import Rule, Scope, SourceRef, Testability

# 한 문단에 의무 두 개가 있는 조항.
ARTICLE_10_5 = (
    "Providers shall verify and document that the processing of other data, including synthetic "
    "or anonymised data, would not suffice to detect and correct bias. Providers must ensure that "
    "the records of processing activities state why the processing of special categories of "
    "personal data was strictly necessary."
)


def make_rule(
    rule_id: str = "hipaa-p0001#r1",
    *,
    doc: str = "hipaa",
    citation: str = "Privacy > Uses ¶1",
    span_id: str = "hipaa-p0001",
    actor: tuple[str, ...] = ("covered_entity",),
    data_domain: tuple[str, ...] = ("phi",),
    context: tuple[str, ...] = (),
    requirement: str = "must obtain authorization before disclosing PHI",
    hazard: str = "unauthorized disclosure",
    conditions: tuple[str, ...] = (),
    exceptions: tuple[str, ...] = (),
    evidence: tuple[str, ...] = (),
    severity: str = "medium",
    is_testable: bool = True,
    signals: tuple[str, ...] = ("io_check",),
    reason: str = "",
    confidence: float = 0.9,
) -> Rule:
    return Rule(
        rule_id=rule_id,
        source=SourceRef(doc=doc, citation=citation, span_id=span_id),
        scope=Scope(actor=actor, data_domain=data_domain, context=context),
        requirement=requirement,
        hazard=hazard,
        conditions=conditions,
        exceptions=exceptions,
        evidence=evidence,
        severity=severity,
        is_testable=is_testable,
        testability=Testability(evidence_signals=signals, reason=reason),
        confidence=confidence,
    )


def rule_record(**overrides) -> dict:
    """스키마를 통과하는 최소 JSON 레코드. overrides 로 최상위 필드 교체."""
    record = make_rule().to_dict()
    record.update(overrides)
    return record


def make_span(
    span_id: str = "doc-p0001",
    text: str = "Covered entities must obtain authorization before disclosing PHI.",
    *,
    doc_id: str = "doc",
    citation: str = "Privacy ¶1",
    kind: str = "paragraph",
    section_path: str = "Privacy",
) -> Span:
    return Span.from_dict(
        {
            "span_id": span_id,
            "doc_id": doc_id,
            "section_path": section_path,
            "citation": citation,
            "text": text,
            "kind": kind,
        }
    )


def make_gold(
    span_id: str,
    *,
    is_rule_span: bool = True,
    citation: str = "",
    rules: list[Rule] | None = None,
    annotator_labels: dict | None = None,
) -> GoldRecord:
    return GoldRecord.from_dict(
        {
            "span_id": span_id,
            "citation": citation,
            "is_rule_span": is_rule_span,
            "gold_rules": [r.to_dict() for r in (rules or [])],
            "annotator_labels": annotator_labels or {},
        }
    )
