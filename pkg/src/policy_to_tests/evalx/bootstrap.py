"""percentile bootstrap 신뢰구간."""

from __future__ import annotations

import logging
from typing import Callable, Mapping, Sequence, TypeVar

import numpy as np

from policy_to_tests.exceptions import InputError, MetricUndefinedError, PreconditionError

logger = logging.getLogger(__name__)

T = TypeVar("T")
Interval = tuple[float, float]

MIN_RESAMPLES = 100


def _check(data: Sequence, resamples: int, level: float) -> None:
    if not data:
        raise PreconditionError("bootstrap 할 데이터가 없습니다")
    if resamples < MIN_RESAMPLES:
        raise PreconditionError(f"resamples 는 {MIN_RESAMPLES} 이상이어야 합니다: {resamples}")
    if not 0.0 < level < 1.0:
        raise PreconditionError(f"level 은 (0, 1) 이어야 합니다: {level}")


def _percentiles(values: list[float], level: float) -> Interval:
    tail = (1.0 - level) / 2.0 * 100.0
    low, high = np.percentile(np.asarray(values, dtype=float), [tail, 100.0 - tail])
    return float(low), float(high)


def bootstrap_many(
    metrics: Callable[[list[T]], Mapping[str, float | None]],
    data: Sequence[T],
    resamples: int = 1000,
    level: float = 0.95,
    seed: int = 0,
) -> dict[str, Interval]:
    """여러 지표를 같은 재표본으로 한 번에 계산합니다.

    재표본에서 값이 None 인 지표는 그 지표만 건너뛰고, 호출 자체가
    MetricUndefinedError / InputError 를 내면 그 재표본 전체를 건너뜁니다.
    한 번도 정의되지 않은 지표는 결과에 없습니다.
    """
    _check(data, resamples, level)
    rng = np.random.default_rng(seed)
    items = list(data)
    samples: dict[str, list[float]] = {}
    for indices in rng.integers(0, len(items), size=(resamples, len(items))):
        try:
            values = metrics([items[i] for i in indices])
        except (MetricUndefinedError, InputError):
            continue
        for name, value in values.items():
            if value is not None:
                samples.setdefault(name, []).append(float(value))

    if not samples:
        raise MetricUndefinedError("모든 bootstrap 재표본에서 지표가 정의되지 않았습니다")
    return {name: _percentiles(values, level) for name, values in sorted(samples.items())}


def bootstrap_ci(
    metric: Callable[[list[T]], float],
    data: Sequence[T],
    resamples: int = 1000,
    level: float = 0.95,
    seed: int = 0,
) -> Interval:
    """단일 지표의 (low, high). 같은 seed 면 같은 구간입니다.

    Raises:
        PreconditionError: 빈 데이터, resamples < 100, level 범위 밖.
    """
    return bootstrap_many(lambda sample: {"value": metric(sample)}, data, resamples, level, seed)["value"]


def widen(interval: Interval, point: float) -> Interval:
    """점 추정값을 포함하도록 구간을 넓힙니다."""
    low, high = interval
    return min(low, point), max(high, point)
