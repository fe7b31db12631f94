"""규칙 DSL: 스키마 검증, scope 정규화, 구조 시그니처."""

from policy_to_tests.dsl.schema import RULE_SCHEMA, ValidationResult, Violation, validate_rule
from policy_to_tests.dsl.scope import ScopeVocabulary, normalize_scope, normalize_scope_with_flags
from policy_to_tests.dsl.signature import canonical_signature

__all__ = [
    "RULE_SCHEMA",
    "ScopeVocabulary",
    "ValidationResult",
    "Violation",
    "canonical_signature",
    "normalize_scope",
    "normalize_scope_with_flags",
    "validate_rule",
]
