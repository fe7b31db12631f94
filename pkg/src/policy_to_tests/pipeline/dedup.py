"""규칙 중복 제거.

1단계(구조): canonical_signature 가 같은 규칙을 묶습니다.
2단계(의미): (문서, 정렬된 actor 목록) 블록 안에서 임베딩 코사인 유사도가
임계값 이상인 쌍을 유사도 내림차순으로 union-find 병합합니다.

두 단계 모두 그룹의 가장 작은 rule_id 가 살아남고, 흡수된 규칙의 출처 span 은
생존 규칙의 source.additional_spans 로 모입니다.
"""

from __future__ import annotations

import dataclasses
import itertools
import logging
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from policy_to_tests.dsl.signature import canonical_signature
from policy_to_tests.exceptions import PreconditionError
from policy_to_tests.models.results import DedupReport, Merge
from policy_to_tests.models.rule import Rule, SpanRef
from policy_to_tests.services.base import TextProvider, cosine

logger = logging.getLogger(__name__)

DEFAULT_THRESHOLD = 0.90
_EPSILON = 1e-12


# ─── 병합 ───────────────────────────────────────────────────────────────


def _absorb(survivor: Rule, absorbed: list[Rule]) -> Rule:
    """출처 span, evidence, confidence 를 생존 규칙으로 모읍니다."""
    own = survivor.source.span_id
    refs: dict[str, SpanRef] = {}
    for rule in (survivor, *absorbed):
        for ref in rule.source.span_refs():
            if ref.span_id != own:
                refs.setdefault(ref.span_id, ref)

    evidence = list(survivor.evidence)
    for rule in absorbed:
        evidence.extend(e for e in rule.evidence if e not in evidence)

    source = dataclasses.replace(
        survivor.source, additional_spans=tuple(refs[k] for k in sorted(refs))
    )
    return survivor.replace(
        source=source,
        evidence=tuple(evidence),
        confidence=max(r.confidence for r in (survivor, *absorbed)),
    )


def structural_dedup(rules: list[Rule]) -> tuple[list[Rule], list[Merge]]:
    """구조 시그니처가 같은 규칙을 하나로 합칩니다. 결과는 rule_id 순."""
    groups: dict[str, list[Rule]] = defaultdict(list)
    for rule in rules:
        groups[canonical_signature(rule)].append(rule)

    kept: list[Rule] = []
    merges: list[Merge] = []
    for members in groups.values():
        members.sort(key=lambda r: r.rule_id)
        survivor, absorbed = members[0], members[1:]
        if not absorbed:
            kept.append(survivor)
            continue
        kept.append(_absorb(survivor, absorbed))
        merges.append(
            Merge(
                kept_rule_id=survivor.rule_id,
                absorbed_rule_ids=tuple(r.rule_id for r in absorbed),
                method="structural",
                similarity=1.0,
            )
        )

    kept.sort(key=lambda r: r.rule_id)
    merges.sort(key=lambda m: m.kept_rule_id)
    logger.debug("구조 중복 제거: %d → %d", len(rules), len(kept))
    return kept, merges


# ─── 의미 중복 제거 ─────────────────────────────────────────────────────


class _UnionFind:
    def __init__(self, items: list[str]) -> None:
        self.parent = {item: item for item in items}

    def find(self, item: str) -> str:
        root = item
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[item] != root:
            self.parent[item], item = root, self.parent[item]
        return root

    def union(self, a: str, b: str) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        # 작은 id 가 루트
        if rb < ra:
            ra, rb = rb, ra
        self.parent[rb] = ra
        return True


def embedding_text(rule: Rule) -> str:
    parts = [rule.hazard, rule.requirement, *rule.conditions, *rule.exceptions]
    text = " ".join(p.strip() for p in parts if p.strip())
    return text or rule.requirement


def _block_key(rule: Rule) -> tuple[str, tuple[str, ...]]:
    return rule.source.doc, tuple(sorted(rule.scope.actor))


def semantic_dedup(
    rules: list[Rule],
    threshold: float = DEFAULT_THRESHOLD,
    provider: TextProvider | None = None,
    workers: int = 4,
) -> tuple[list[Rule], list[Merge]]:
    """블록 안에서 임베딩 유사도가 threshold 이상인 규칙을 병합합니다.

    Raises:
        PreconditionError: threshold 가 [0, 1] 밖이거나 provider 가 없을 때.
    """
    if not 0.0 <= threshold <= 1.0:
        raise PreconditionError(f"threshold 는 [0, 1] 이어야 합니다: {threshold}")
    if provider is None:
        raise PreconditionError("의미 중복 제거에는 provider 가 필요합니다")

    ordered = sorted(rules, key=lambda r: r.rule_id)
    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        vectors: list[np.ndarray] = list(
            executor.map(lambda r: provider.embed(embedding_text(r)), ordered)
        )
    by_id = {r.rule_id: (r, v) for r, v in zip(ordered, vectors)}

    blocks: dict[tuple[str, tuple[str, ...]], list[str]] = defaultdict(list)
    for rule in ordered:
        blocks[_block_key(rule)].append(rule.rule_id)

    kept: list[Rule] = []
    merges: list[Merge] = []
    for ids in blocks.values():
        pairs = []
        for a, b in itertools.combinations(ids, 2):
            sim = cosine(by_id[a][1], by_id[b][1])
            if sim >= threshold - _EPSILON:
                pairs.append((sim, a, b))
        pairs.sort(key=lambda p: (-p[0], p[1], p[2]))

        uf = _UnionFind(ids)
        weakest: dict[str, float] = {}
        for sim, a, b in pairs:
            ra, rb = uf.find(a), uf.find(b)
            if not uf.union(a, b):
                continue
            root = uf.find(a)
            weakest[root] = min(sim, weakest.pop(ra, sim), weakest.pop(rb, sim))

        clusters: dict[str, list[Rule]] = defaultdict(list)
        for rule_id in ids:
            clusters[uf.find(rule_id)].append(by_id[rule_id][0])
        for root, members in clusters.items():
            members.sort(key=lambda r: r.rule_id)
            survivor, absorbed = members[0], members[1:]
            if not absorbed:
                kept.append(survivor)
                continue
            kept.append(_absorb(survivor, absorbed))
            merges.append(
                Merge(
                    kept_rule_id=survivor.rule_id,
                    absorbed_rule_ids=tuple(r.rule_id for r in absorbed),
                    method="semantic",
                    similarity=float(weakest.get(root, threshold)),
                )
            )

    kept.sort(key=lambda r: r.rule_id)
    merges.sort(key=lambda m: m.kept_rule_id)
    logger.debug("의미 중복 제거 (임계값 %.2f): %d → %d", threshold, len(rules), len(kept))
    return kept, merges


# ─── DupIdx ─────────────────────────────────────────────────────────────


def dup_index(kept: int, removed: int) -> float:
    """removed / (kept + removed). 둘 다 0 이면 0.

    Raises:
        PreconditionError: 음수 입력.
    """
    if kept < 0 or removed < 0:
        raise PreconditionError(f"kept/removed 는 음수일 수 없습니다: {kept}, {removed}")
    total = kept + removed
    return removed / total if total else 0.0


def run_dedup(
    rules: list[Rule],
    provider: TextProvider | None = None,
    semantic: bool = True,
    threshold: float = DEFAULT_THRESHOLD,
    workers: int = 4,
) -> tuple[list[Rule], DedupReport]:
    """구조 → (선택) 의미 중복 제거를 실행하고 DedupReport 를 만듭니다."""
    kept, merges = structural_dedup(rules)
    if semantic:
        kept, semantic_merges = semantic_dedup(kept, threshold, provider, workers)
        merges = merges + semantic_merges

    removed = len(rules) - len(kept)
    report = DedupReport(
        kept=len(kept),
        removed=removed,
        dup_idx=dup_index(len(kept), removed),
        merges=tuple(merges),
    )
    logger.info(
        "중복 제거: %d → %d (DupIdx %.4f, 병합 %d건)", len(rules), len(kept), report.dup_idx, len(merges)
    )
    return kept, report
