"""단계 산출물 모델 (일관성 검사, 중복 제거, 예시 생성)."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

from policy_to_tests.models.rule import Scope


@dataclass(frozen=True)
class PredicateKey:
    """요구사항의 내용 토큰 집합과 극성."""

    tokens: frozenset[str]
    polarity: Literal["require", "forbid"]

    def sorted_tokens(self) -> list[str]:
        return sorted(self.tokens)


@dataclass(frozen=True)
class Conflict:
    """겹치는 범위에서 같은 술어를 요구하고 동시에 금지하는 규칙 쌍."""

    rule_a: str
    rule_b: str
    shared_scope: Scope
    predicate: tuple[str, ...]
    kind: Literal["direct_contradiction"] = "direct_contradiction"

    def to_dict(self) -> dict:
        return {
            "rule_a": self.rule_a,
            "rule_b": self.rule_b,
            "shared_scope": self.shared_scope.to_dict(),
            "predicate": list(self.predicate),
            "kind": self.kind,
        }


@dataclass(frozen=True)
class Merge:
    """중복 제거 병합 한 건."""

    kept_rule_id: str
    absorbed_rule_ids: tuple[str, ...]
    method: Literal["structural", "semantic"]
    similarity: float

    def to_dict(self) -> dict:
        return {
            "kept_rule_id": self.kept_rule_id,
            "absorbed_rule_ids": list(self.absorbed_rule_ids),
            "method": self.method,
            "similarity": round(self.similarity, 4),
        }


@dataclass(frozen=True)
class DedupReport:
    """중복 제거 요약과 DupIdx."""

    kept: int
    removed: int
    dup_idx: float
    merges: tuple[Merge, ...] = ()

    def to_dict(self) -> dict:
        structural = sum(len(m.absorbed_rule_ids) for m in self.merges if m.method == "structural")
        semantic = sum(len(m.absorbed_rule_ids) for m in self.merges if m.method == "semantic")
        return {
            "kept": self.kept,
            "removed": self.removed,
            "dup_idx": round(self.dup_idx, 4),
            "removed_structural": structural,
            "removed_semantic": semantic,
            "merges": [m.to_dict() for m in self.merges],
        }


@dataclass(frozen=True)
class ExampleSet:
    """I/O 검증 가능한 규칙의 benign/adversarial 프롬프트 묶음."""

    rule_id: str
    benign: tuple[str, ...]
    adversarial: tuple[str, ...]
    generator_seed: int

    def to_dict(self) -> dict:
        return {
            "rule_id": self.rule_id,
            "benign": list(self.benign),
            "adversarial": list(self.adversarial),
            "generator_seed": self.generator_seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ExampleSet":
        return cls(
            rule_id=data["rule_id"],
            benign=tuple(data.get("benign", [])),
            adversarial=tuple(data.get("adversarial", [])),
            generator_seed=int(data.get("generator_seed", 0)),
        )


@dataclass
class TaggingFlags:
    """testability 태깅 중 남긴 경고."""

    untagged_rule_ids: list[str] = field(default_factory=list)
    dropped_signals: dict[str, list[str]] = field(default_factory=dict)

    def to_records(self) -> list[dict]:
        records: list[dict] = [
            {"rule_id": rid, "flag": "untagged"} for rid in self.untagged_rule_ids
        ]
        records.extend(
            {"rule_id": rid, "flag": "dropped_signals", "signals": signals}
            for rid, signals in sorted(self.dropped_signals.items())
        )
        return records
