#!/usr/bin/env python3
"""
Krippendorff alpha 검증용 독립 구현 (coincidence matrix 를 직접 세는 방식)

라이브러리 구현과 비교하기 위한 기준값을 만듭니다.
입력 JSON: {"평가자": {"항목": 라벨, ...}, ...}. 리스트 라벨은 집합으로 봅니다.

Usage: python scripts/alpha_oracle.py annotations.json [--distance nominal|jaccard]
"""

from __future__ import annotations

import argparse
import itertools
import json
import sys
from collections import defaultdict
from pathlib import Path


def _freeze(label, distance: str):
    if isinstance(label, (list, tuple, set, frozenset)):
        return frozenset(str(v) for v in label)
    if distance == "jaccard":
        return frozenset([str(label)])
    return str(label)


def nominal(a, b) -> float:
    return 0.0 if a == b else 1.0


def jaccard(a: frozenset, b: frozenset) -> float:
    union = a | b
    if not union:
        return 0.0
    return 1.0 - len(a & b) / len(union)


def coincidences(annotations: dict[str, dict[str, object]], distance: str = "nominal") -> dict:
    """(c, k) → o_ck. 평가가 2개 이상인 항목만 셉니다."""
    by_item: dict[str, list] = defaultdict(list)
    for rater in sorted(annotations):
        for item, label in annotations[rater].items():
            if label is None:
                continue
            by_item[str(item)].append(_freeze(label, distance))

    matrix: dict[tuple, float] = defaultdict(float)
    for values in by_item.values():
        m = len(values)
        if m < 2:
            continue
        for i, j in itertools.permutations(range(m), 2):
            matrix[(values[i], values[j])] += 1.0 / (m - 1)
    return dict(matrix)


def alpha(annotations: dict[str, dict[str, object]], distance: str = "nominal") -> float:
    delta = {"nominal": nominal, "jaccard": jaccard}[distance]
    matrix = coincidences(annotations, distance)
    if not matrix:
        raise ValueError("평가가 2개 이상인 항목이 없습니다")

    marginals: dict[object, float] = defaultdict(float)
    for (c, _k), weight in matrix.items():
        marginals[c] += weight
    n = sum(marginals.values())

    observed = sum(w * delta(c, k) for (c, k), w in matrix.items()) / n
    expected = sum(
        marginals[c] * marginals[k] * delta(c, k) for c in marginals for k in marginals
    ) / (n * (n - 1))
    if expected == 0:
        return 1.0
    return 1.0 - observed / expected


def main() -> None:
    parser = argparse.ArgumentParser(description="Krippendorff alpha 기준값")
    parser.add_argument("path", type=Path)
    parser.add_argument("--distance", choices=["nominal", "jaccard"], default="nominal")
    args = parser.parse_args()

    try:
        data = json.loads(args.path.read_text(encoding="utf-8"))
        print(f"{alpha(data, args.distance):.12f}")
    except (OSError, ValueError) as e:
        print(f"❌ {e}", file=sys.stderr)
        sys.exit(1)


if __name__ == "__main__":
    main()
