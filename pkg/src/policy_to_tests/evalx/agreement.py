"""평가자 간 일치도: Cohen's κ 와 Krippendorff's α.

κ 는 sklearn 의 cohen_kappa_score, α 는 coincidence 행렬을 numpy 로 직접 셉니다
(누락 항목이 있어도 pairable 값 기준으로 정규화). 거리는 nltk 의 binary_distance,
다중 라벨 항목은 frozenset 라벨의 Jaccard 거리입니다.
"""

from __future__ import annotations

import logging
from collections import defaultdict
from typing import Any, Callable, Hashable, Iterable, Literal, Mapping, Sequence

import numpy as np
from nltk.metrics.distance import binary_distance, jaccard_distance
from sklearn.metrics import cohen_kappa_score

from policy_to_tests.evalx.bootstrap import bootstrap_many, widen
from policy_to_tests.exceptions import InputError, MetricUndefinedError
from policy_to_tests.models.evaluation import AgreementReport, GoldRecord

logger = logging.getLogger(__name__)

Distance = Literal["nominal", "jaccard"]
# rater → item → label (단일 라벨 또는 라벨 집합)
Annotations = Mapping[str, Mapping[str, Any]]


# ─── Cohen's κ ──────────────────────────────────────────────────────────


def cohen_kappa(labels_a: Sequence[Hashable], labels_b: Sequence[Hashable]) -> float:
    """두 평가자의 범주 라벨 κ. 우연 일치가 1 이면 (모두 같은 라벨) 1.0.

    Raises:
        InputError: 길이가 다르거나 비어 있을 때.
    """
    if len(labels_a) != len(labels_b):
        raise InputError(f"라벨 길이가 다릅니다: {len(labels_a)} != {len(labels_b)}")
    if not labels_a:
        raise InputError("κ 를 계산할 라벨이 없습니다")

    a = [str(x) for x in labels_a]
    b = [str(x) for x in labels_b]
    if len(set(a) | set(b)) == 1:
        return 1.0
    return float(cohen_kappa_score(a, b))


# ─── Krippendorff's α ───────────────────────────────────────────────────


def set_distance(a: frozenset, b: frozenset) -> float:
    """1 − |A∩B| / |A∪B|. 둘 다 빈 집합이면 0."""
    if not a and not b:
        return 0.0
    return float(jaccard_distance(set(a), set(b)))


def _label(value: Any, distance: Distance) -> Hashable:
    if isinstance(value, (list, tuple, set, frozenset)):
        return frozenset(str(v) for v in value)
    if distance == "jaccard":
        return frozenset([str(value)])
    return str(value)


def krippendorff_alpha(annotations: Annotations, distance: Distance = "nominal") -> float:
    """rater × item 라벨의 α = 1 − D_o / D_e (coincidence 행렬).

    누락 항목을 허용합니다. 평가가 2개 이상인 항목(pairable)만 행렬에 들어가고,
    항목 u 의 순서쌍은 1/(m_u − 1) 가중치로 셉니다.
    D_e 가 0 이면(짝 지을 수 있는 라벨이 모두 같으면) 1.0.

    Raises:
        InputError: 2개 이상 평가된 항목이 없거나 distance 를 모를 때.
    """
    if distance not in ("nominal", "jaccard"):
        raise InputError(f"알 수 없는 distance: {distance}")
    metric = set_distance if distance == "jaccard" else binary_distance

    units: dict[str, list[Hashable]] = defaultdict(list)
    for _, items in sorted(annotations.items()):
        for item, value in sorted(items.items()):
            if value is not None:
                units[str(item)].append(_label(value, distance))
    pairable = {item: values for item, values in units.items() if len(values) > 1}
    if not pairable:
        raise InputError("α 계산에는 2명 이상이 평가한 항목이 하나 이상 필요합니다")

    labels = sorted({v for values in pairable.values() for v in values}, key=repr)
    if len(labels) == 1:
        return 1.0
    index = {label: i for i, label in enumerate(labels)}

    coincidence = np.zeros((len(labels), len(labels)))
    for values in pairable.values():
        counts = np.bincount([index[v] for v in values], minlength=len(labels)).astype(float)
        coincidence += (np.outer(counts, counts) - np.diag(counts)) / (len(values) - 1)

    delta = np.array([[metric(a, b) for b in labels] for a in labels], dtype=float)
    marginals = coincidence.sum(axis=1)
    n = marginals.sum()
    observed = float((coincidence * delta).sum() / n)
    expected = float((np.outer(marginals, marginals) * delta).sum() / (n * (n - 1)))
    if expected == 0.0:
        return 1.0
    return 1.0 - observed / expected


# ─── 일치도 리포트 ──────────────────────────────────────────────────────


def _raters(gold: Iterable[GoldRecord]) -> list[str]:
    return sorted({rater for record in gold for rater in record.annotator_labels})


def _paired(records: list[GoldRecord], raters: list[str], key: str) -> tuple[list, list]:
    first, second = raters[0], raters[1]
    labels_a, labels_b = [], []
    for record in records:
        a = record.annotator_labels.get(first, {}).get(key)
        b = record.annotator_labels.get(second, {}).get(key)
        if a is not None and b is not None:
            labels_a.append(a)
            labels_b.append(b)
    return labels_a, labels_b


def _kappa_for(records: list[GoldRecord], raters: list[str], key: str) -> float:
    labels_a, labels_b = _paired(records, raters, key)
    if not labels_a:
        raise MetricUndefinedError(f"두 평가자가 모두 '{key}' 를 단 항목이 없습니다")
    return cohen_kappa(labels_a, labels_b)


def _actors_alpha(records: list[GoldRecord], raters: list[str]) -> float:
    annotations: dict[str, dict[str, Any]] = {rater: {} for rater in raters}
    # 재표본에서 같은 레코드가 여러 번 나와도 서로 다른 항목으로 취급
    for idx, record in enumerate(records):
        for rater in raters:
            actors = record.annotator_labels.get(rater, {}).get("actors")
            if actors is not None:
                annotations[rater][f"{idx:06d}"] = actors
    return krippendorff_alpha(annotations, "jaccard")


_STATISTICS: dict[str, Callable[[list[GoldRecord], list[str]], float]] = {
    "span_kappa": lambda records, raters: _kappa_for(records, raters, "is_rule_span"),
    "testable_kappa": lambda records, raters: _kappa_for(records, raters, "is_testable"),
    "hazard_kappa": lambda records, raters: _kappa_for(records, raters, "hazard_label"),
    "scope_actors_alpha": _actors_alpha,
}


def _statistics(records: list[GoldRecord], raters: list[str]) -> dict[str, float]:
    return {name: fn(records, raters) for name, fn in _STATISTICS.items()}


def _resample_statistics(records: list[GoldRecord], raters: list[str]) -> dict[str, float | None]:
    """재표본에서 정의되지 않는 통계는 None."""
    values: dict[str, float | None] = {}
    for name, fn in _STATISTICS.items():
        try:
            values[name] = fn(records, raters)
        except (MetricUndefinedError, InputError):
            values[name] = None
    return values


def compute_agreement(
    gold: list[GoldRecord], resamples: int = 1000, level: float = 0.95, seed: int = 0
) -> AgreementReport:
    """골드의 annotator_labels 로 span/testable/hazard κ 와 actors α 를 계산합니다.

    κ 는 사전순 첫 두 평가자, α 는 모든 평가자를 씁니다.

    Raises:
        MetricUndefinedError: 평가자가 2명 미만이거나 공통 라벨이 없을 때.
    """
    records = [r for r in gold if r.annotator_labels]
    raters = _raters(records)
    if len(raters) < 2:
        raise MetricUndefinedError(f"일치도 계산에는 평가자 2명 이상이 필요합니다 (현재 {len(raters)}명)")

    try:
        point = _statistics(records, raters)
    except InputError as e:
        raise MetricUndefinedError(str(e)) from e
    intervals = bootstrap_many(
        lambda sample: _resample_statistics(sample, raters), records, resamples, level, seed
    )
    report = AgreementReport(
        **point,
        ci={name: widen(intervals[name], point[name]) for name in point if name in intervals},
    )
    logger.info(
        "일치도: span κ=%.4f, testable κ=%.4f, hazard κ=%.4f, actors α=%.4f",
        report.span_kappa, report.testable_kappa, report.hazard_kappa, report.scope_actors_alpha,
    )
    return report
