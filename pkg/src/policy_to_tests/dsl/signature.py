"""규칙의 정규 구조 시그니처.

(scope 세 축, hazard, conditions, exceptions, requirement, severity) 튜플을
정규화한 뒤 SHA-256으로 해시합니다. rule_id, source, confidence, testability 는
시그니처에 포함되지 않습니다.
"""

from __future__ import annotations

import hashlib
import json

from policy_to_tests.models.rule import Rule
from policy_to_tests.utils.text import normalize_text


def _norm_list(values: tuple[str, ...]) -> list[str]:
    return sorted(normalize_text(v) for v in values)


def signature_tuple(rule: Rule) -> list:
    """해시 직전의 정규화 튜플 (디버깅/테스트용)."""
    return [
        _norm_list(rule.scope.actor),
        _norm_list(rule.scope.data_domain),
        _norm_list(rule.scope.context),
        normalize_text(rule.hazard),
        _norm_list(rule.conditions),
        _norm_list(rule.exceptions),
        normalize_text(rule.requirement),
        normalize_text(rule.severity),
    ]


def canonical_signature(rule: Rule) -> str:
    """플랫폼에 무관하게 안정적인 256비트 16진 시그니처."""
    payload = json.dumps(signature_tuple(rule), ensure_ascii=False, separators=(",", ":"))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()
