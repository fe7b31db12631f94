"""문서 × seed 평가 리포트."""

from __future__ import annotations

import logging

from policy_to_tests.evalx.bootstrap import bootstrap_many, widen
from policy_to_tests.evalx.metrics import (
    EvalUnit,
    build_units,
    unit_auprc,
    unit_coverage,
    unit_prf,
    unit_slot_similarity,
    unit_testable_accuracy,
)
from policy_to_tests.exceptions import MetricUndefinedError
from policy_to_tests.models.evaluation import GoldRecord, MetricsReport
from policy_to_tests.models.rule import Rule
from policy_to_tests.services.base import TextProvider

logger = logging.getLogger(__name__)


def _optional(fn, units: list[EvalUnit], default):
    try:
        return fn(units)
    except MetricUndefinedError as e:
        logger.debug("지표 정의 불가, 기본값 사용: %s", e)
        return default


def unit_metrics(units: list[EvalUnit], undefined: float | None = 0.0) -> dict[str, float | None]:
    """EvalUnit 목록 → 지표 dict. 골드 규칙 span 이 없으면 MetricUndefinedError.

    매칭된 규칙이 없어 정의되지 않는 TestAcc/SE/Ev 는 undefined 값으로 채웁니다.
    """
    precision, recall, f1 = unit_prf(units)
    se, per_field = _optional(unit_slot_similarity, units, (undefined, {}))
    return {
        "coverage": unit_coverage(units),
        "test_acc": _optional(unit_testable_accuracy, units, undefined),
        "span_precision": precision,
        "span_recall": recall,
        "span_f1": f1,
        "span_auprc": unit_auprc(units),
        "se_slot_similarity": se,
        "evidence_similarity": per_field.get("evidence_signals", undefined),
    }


def evaluate(
    predicted_rules: list[Rule],
    gold: list[GoldRecord],
    provider: TextProvider | None = None,
    resamples: int = 1000,
    level: float = 0.95,
    seed: int = 0,
) -> MetricsReport:
    """예측 규칙을 골드와 비교해 MetricsReport 를 만듭니다.

    구간은 span 단위 재표본 percentile bootstrap 이며 점 추정값을 포함하도록 넓힙니다.

    Raises:
        MetricUndefinedError: 골드 규칙 span 이 없을 때.
    """
    units = build_units(predicted_rules, gold, provider, seed)
    point = unit_metrics(units)
    _, per_field = _optional(unit_slot_similarity, units, (0.0, {}))
    intervals = bootstrap_many(lambda sample: unit_metrics(sample, undefined=None), units, resamples, level, seed)

    report = MetricsReport(
        **point,
        per_field=per_field,
        ci={name: widen(intervals[name], value) for name, value in point.items() if name in intervals},
        gold_spans=sum(1 for u in units if u.is_gold),
        predicted_spans=sum(1 for u in units if u.is_predicted),
    )
    logger.info(
        "평가: Cov %.2f, F1 %.4f, AUPRC %.4f, SE %.4f, TestAcc %.2f",
        report.coverage, report.span_f1, report.span_auprc, report.se_slot_similarity, report.test_acc,
    )
    return report
