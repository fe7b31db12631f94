"""예측 span 과 골드 span 의 매칭.

예측 규칙의 모든 출처 span(병합된 additional_spans 포함)이 예측 span 이 됩니다.
매칭은 1:1 이며, span_id 완전 일치를 먼저 잡고 남은 것끼리 citation 꼬리로 맞춥니다.
is_rule_span=false 인 골드 span 은 매칭 대상이 아닙니다.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from policy_to_tests.exceptions import GoldFormatError
from policy_to_tests.models.evaluation import GoldRecord
from policy_to_tests.models.rule import Rule

_TAIL_SPLIT_RE = re.compile(r"[¶§>/]")


def citation_tail(citation: str) -> str:
    """citation 을 ¶ § > / 로 나눈 마지막 비어 있지 않은 조각 (소문자, 공백 압축)."""
    segments = [" ".join(s.lower().split()) for s in _TAIL_SPLIT_RE.split(citation)]
    segments = [s for s in segments if s]
    return segments[-1] if segments else ""


@dataclass
class PredictedSpan:
    """예측 span 하나와 그 span 을 출처로 가진 규칙들."""

    span_id: str
    citation: str
    rules: list[Rule] = field(default_factory=list)

    @property
    def score(self) -> float:
        return max((r.confidence for r in self.rules), default=0.0)


@dataclass
class SpanMatching:
    """매칭 결과. pairs 는 (예측 span_id, 골드 span_id)."""

    predicted: dict[str, PredictedSpan]
    gold: dict[str, GoldRecord]
    pairs: list[tuple[str, str]] = field(default_factory=list)
    unmatched_predicted: list[str] = field(default_factory=list)
    unmatched_gold: list[str] = field(default_factory=list)

    def gold_for(self, pred_span_id: str) -> GoldRecord | None:
        for pred, gold in self.pairs:
            if pred == pred_span_id:
                return self.gold[gold]
        return None

    @property
    def gold_rule_spans(self) -> int:
        return sum(1 for g in self.gold.values() if g.is_rule_span)


def predicted_spans(rules: list[Rule]) -> dict[str, PredictedSpan]:
    spans: dict[str, PredictedSpan] = {}
    for rule in sorted(rules, key=lambda r: r.rule_id):
        for ref in rule.source.span_refs():
            span = spans.setdefault(ref.span_id, PredictedSpan(ref.span_id, ref.citation))
            span.rules.append(rule)
    return dict(sorted(spans.items()))


def index_gold(gold: list[GoldRecord]) -> dict[str, GoldRecord]:
    """span_id → GoldRecord.

    Raises:
        GoldFormatError: span_id 중복.
    """
    indexed: dict[str, GoldRecord] = {}
    for record in gold:
        if record.span_id in indexed:
            raise GoldFormatError(f"골드 span_id 가 중복되었습니다: {record.span_id}")
        indexed[record.span_id] = record
    return indexed


def match_spans(predicted_rules: list[Rule], gold: list[GoldRecord]) -> SpanMatching:
    """span_id 완전 일치 → citation 꼬리 일치 순으로 1:1 매칭합니다."""
    preds = predicted_spans(predicted_rules)
    gold_index = index_gold(gold)
    targets = {sid: g for sid, g in sorted(gold_index.items()) if g.is_rule_span}

    pairs: list[tuple[str, str]] = []
    used_gold: set[str] = set()
    used_pred: set[str] = set()

    for span_id in preds:
        if span_id in targets:
            pairs.append((span_id, span_id))
            used_gold.add(span_id)
            used_pred.add(span_id)

    tails: dict[str, list[str]] = {}
    for span_id, record in targets.items():
        tail = citation_tail(record.citation)
        if span_id not in used_gold and tail:
            tails.setdefault(tail, []).append(span_id)
    for span_id, span in preds.items():
        # 비규칙 골드 span 에 정확히 떨어진 예측은 false positive
        if span_id in used_pred or span_id in gold_index:
            continue
        tail = citation_tail(span.citation)
        candidates = tails.get(tail, []) if tail else []
        if candidates:
            gold_id = candidates.pop(0)
            pairs.append((span_id, gold_id))
            used_gold.add(gold_id)
            used_pred.add(span_id)

    pairs.sort()
    return SpanMatching(
        predicted=preds,
        gold=gold_index,
        pairs=pairs,
        unmatched_predicted=[s for s in preds if s not in used_pred],
        unmatched_gold=sorted(s for s in targets if s not in used_gold),
    )
