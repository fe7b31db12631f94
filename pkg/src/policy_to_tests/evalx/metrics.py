"""추출 품질 지표.

매칭 결과를 span 단위 EvalUnit 목록으로 펼친 뒤 모든 지표를 그 목록에서 계산합니다.
같은 목록을 재표본하면 bootstrap 구간이 됩니다.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from policy_to_tests.evalx.matching import SpanMatching, match_spans
from policy_to_tests.exceptions import MetricUndefinedError
from policy_to_tests.models.evaluation import GoldRecord
from policy_to_tests.models.rule import Rule
from policy_to_tests.services.base import TextProvider
from policy_to_tests.utils.text import normalize_text, token_jaccard

logger = logging.getLogger(__name__)

SET_FIELDS: tuple[str, ...] = ("actor", "data_domain", "context")
TEXT_FIELDS: tuple[str, ...] = ("hazard", "conditions", "exceptions", "requirement", "evidence_signals")
SLOT_FIELDS: tuple[str, ...] = SET_FIELDS + TEXT_FIELDS


# ─── 슬롯 유사도 ────────────────────────────────────────────────────────


def _set_values(rule: Rule, name: str) -> set[str]:
    return {normalize_text(v) for v in getattr(rule.scope, name)}


def _text_value(rule: Rule, name: str) -> str:
    match name:
        case "hazard" | "requirement":
            return getattr(rule, name)
        case "conditions" | "exceptions":
            return "; ".join(getattr(rule, name))
        case "evidence_signals":
            return " ".join(rule.testability.evidence_signals)
    raise KeyError(name)


def slot_similarity(
    pred_rule: Rule, gold_rule: Rule, provider: TextProvider | None = None, seed: int = 0
) -> tuple[dict[str, float], float]:
    """필드별 유사도와 8개 필드의 단순 평균.

    scope 세 축은 한 항목 이상 겹치면 1 (둘 다 비면 1), 나머지는
    provider.score_similarity (provider 가 없으면 토큰 Jaccard).
    """
    per_field: dict[str, float] = {}
    for name in SET_FIELDS:
        pred, gold = _set_values(pred_rule, name), _set_values(gold_rule, name)
        per_field[name] = 1.0 if (pred & gold) or not (pred or gold) else 0.0
    for name in TEXT_FIELDS:
        a, b = _text_value(pred_rule, name), _text_value(gold_rule, name)
        if provider is None:
            per_field[name] = token_jaccard(a, b)
        else:
            per_field[name] = min(1.0, max(0.0, provider.score_similarity(a, b, seed=seed)))
    return per_field, sum(per_field.values()) / len(SLOT_FIELDS)


@dataclass(frozen=True)
class RulePair:
    pred: Rule
    gold: Rule
    per_field: dict[str, float]
    macro: float


def pair_rules(
    preds: list[Rule], golds: list[Rule], provider: TextProvider | None = None, seed: int = 0
) -> tuple[list[RulePair], int]:
    """유사도가 높은 쌍부터 탐욕적으로 짝짓습니다. (짝, 분모 = max(예측 수, 골드 수))."""
    scored = []
    for i, pred in enumerate(preds):
        for j, gold in enumerate(golds):
            per_field, macro = slot_similarity(pred, gold, provider, seed)
            scored.append((macro, i, j, per_field))
    scored.sort(key=lambda s: (-s[0], s[1], s[2]))

    used_pred: set[int] = set()
    used_gold: set[int] = set()
    pairs: list[RulePair] = []
    for macro, i, j, per_field in scored:
        if i in used_pred or j in used_gold:
            continue
        used_pred.add(i)
        used_gold.add(j)
        pairs.append(RulePair(preds[i], golds[j], per_field, macro))
    return pairs, max(len(preds), len(golds))


def testable_accuracy(pairs: list[tuple[Rule, Rule]]) -> float:
    """짝지어진 (예측, 골드) 규칙 중 is_testable 이 같은 비율.

    Raises:
        MetricUndefinedError: 짝이 없을 때.
    """
    if not pairs:
        raise MetricUndefinedError("testable 라벨을 비교할 규칙 쌍이 없습니다")
    return sum(1 for pred, gold in pairs if pred.is_testable == gold.is_testable) / len(pairs)


# ─── span 단위 평가 ─────────────────────────────────────────────────────


@dataclass(frozen=True)
class EvalUnit:
    """재표본 단위 하나: 골드 규칙 span, 예측 span, 또는 매칭된 둘."""

    gold_span_id: str = ""
    pred_span_id: str = ""
    score: float = 0.0
    slot_macro: float = 0.0
    per_field: dict[str, float] = field(default_factory=dict)
    testable_hits: int = 0
    testable_total: int = 0

    @property
    def is_gold(self) -> bool:
        return bool(self.gold_span_id)

    @property
    def is_predicted(self) -> bool:
        return bool(self.pred_span_id)

    @property
    def matched(self) -> bool:
        return self.is_gold and self.is_predicted


def _matched_unit(
    matching: SpanMatching, pred_id: str, gold_id: str, provider: TextProvider | None, seed: int
) -> EvalUnit:
    span = matching.predicted[pred_id]
    gold = matching.gold[gold_id]
    pairs, denominator = pair_rules(span.rules, list(gold.gold_rules), provider, seed)
    per_field = {
        name: sum(p.per_field[name] for p in pairs) / denominator for name in SLOT_FIELDS
    }
    return EvalUnit(
        gold_span_id=gold_id,
        pred_span_id=pred_id,
        score=span.score,
        slot_macro=sum(p.macro for p in pairs) / denominator,
        per_field=per_field,
        testable_hits=sum(1 for p in pairs if p.pred.is_testable == p.gold.is_testable),
        testable_total=len(pairs),
    )


def build_units(
    predicted_rules: list[Rule],
    gold: list[GoldRecord],
    provider: TextProvider | None = None,
    seed: int = 0,
    matching: SpanMatching | None = None,
) -> list[EvalUnit]:
    """매칭 결과를 EvalUnit 목록으로 펼칩니다 (골드 span_id, 예측 span_id 순)."""
    matching = matching or match_spans(predicted_rules, gold)
    units = [_matched_unit(matching, p, g, provider, seed) for p, g in matching.pairs]
    units.extend(EvalUnit(gold_span_id=g) for g in matching.unmatched_gold)
    units.extend(
        EvalUnit(pred_span_id=p, score=matching.predicted[p].score) for p in matching.unmatched_predicted
    )
    return units


def _gold_count(units: list[EvalUnit]) -> int:
    gold = sum(1 for u in units if u.is_gold)
    if gold == 0:
        raise MetricUndefinedError("골드 규칙 span 이 없어 지표를 정의할 수 없습니다")
    return gold


def unit_coverage(units: list[EvalUnit]) -> float:
    return sum(1 for u in units if u.matched) / _gold_count(units)


def unit_prf(units: list[EvalUnit]) -> tuple[float, float, float]:
    tp = sum(1 for u in units if u.matched)
    fp = sum(1 for u in units if u.is_predicted and not u.is_gold)
    fn = sum(1 for u in units if u.is_gold and not u.is_predicted)
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def unit_auprc(units: list[EvalUnit]) -> float:
    """average precision: 점수 내림차순(동점은 span_id), TP 가 나오는 순위마다 ΔR·P."""
    gold = _gold_count(units)
    ranked = sorted((u for u in units if u.is_predicted), key=lambda u: (-u.score, u.pred_span_id))
    ap, tp = 0.0, 0
    for rank, unit in enumerate(ranked, start=1):
        if unit.matched:
            tp += 1
            ap += (1.0 / gold) * (tp / rank)
    return ap


def unit_slot_similarity(units: list[EvalUnit]) -> tuple[float, dict[str, float]]:
    matched = [u for u in units if u.matched]
    if not matched:
        raise MetricUndefinedError("매칭된 span 이 없어 슬롯 유사도를 정의할 수 없습니다")
    per_field = {name: sum(u.per_field[name] for u in matched) / len(matched) for name in SLOT_FIELDS}
    return sum(u.slot_macro for u in matched) / len(matched), per_field


def unit_testable_accuracy(units: list[EvalUnit]) -> float:
    total = sum(u.testable_total for u in units)
    if total == 0:
        raise MetricUndefinedError("testable 라벨을 비교할 규칙 쌍이 없습니다")
    return sum(u.testable_hits for u in units) / total


# ─── 공개 지표 함수 ─────────────────────────────────────────────────────


def coverage(predicted_rules: list[Rule], gold: list[GoldRecord]) -> float:
    """예측 규칙이 하나 이상 있는 골드 규칙 span 의 비율."""
    return unit_coverage(build_units(predicted_rules, gold))


def span_prf(predicted_rules: list[Rule], gold: list[GoldRecord]) -> tuple[float, float, float]:
    return unit_prf(build_units(predicted_rules, gold))


def span_auprc(predicted_rules: list[Rule], gold: list[GoldRecord]) -> float:
    """span 점수(그 span 규칙들의 최대 confidence)로 순위를 매긴 average precision."""
    return unit_auprc(build_units(predicted_rules, gold))
