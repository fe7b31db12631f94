"""규칙 DSL JSON Schema 와 검증.

필수 필드(rule_id, source, scope, requirement, is_testable, testability)에
conditions/exceptions/evidence/confidence 와 병합 출처(source.additional_spans)를
선택 필드로 둔 스키마입니다.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Any, Literal

from jsonschema import Draft202012Validator
from jsonschema.exceptions import ValidationError

from policy_to_tests.models.rule import EVIDENCE_SIGNALS, SEVERITIES

ViolationKind = Literal[
    "missing-required",
    "unknown-field",
    "wrong-type",
    "enum-violation",
    "constraint-violation",
]

_STR_ARRAY = {"type": "array", "items": {"type": "string"}}

RULE_SCHEMA: dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "policy_to_tests rule",
    "type": "object",
    "additionalProperties": False,
    "required": ["rule_id", "source", "scope", "requirement", "is_testable", "testability"],
    "properties": {
        "rule_id": {"type": "string", "minLength": 1},
        "source": {
            "type": "object",
            "additionalProperties": False,
            "required": ["doc", "citation", "span_id"],
            "properties": {
                "doc": {"type": "string", "minLength": 1},
                "citation": {"type": "string", "minLength": 1},
                "span_id": {"type": "string", "minLength": 1},
                "additional_spans": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "additionalProperties": False,
                        "required": ["citation", "span_id"],
                        "properties": {
                            "citation": {"type": "string"},
                            "span_id": {"type": "string", "minLength": 1},
                        },
                    },
                },
            },
        },
        "scope": {
            "type": "object",
            "additionalProperties": False,
            "required": ["actor"],
            "properties": {
                "actor": _STR_ARRAY,
                "data_domain": _STR_ARRAY,
                "context": _STR_ARRAY,
            },
        },
        "hazard": {"type": "string"},
        "conditions": _STR_ARRAY,
        "exceptions": _STR_ARRAY,
        "requirement": {"type": "string", "minLength": 1},
        "evidence": _STR_ARRAY,
        "severity": {"type": "string", "enum": list(SEVERITIES)},
        "is_testable": {"type": "boolean"},
        "testability": {
            "type": "object",
            "additionalProperties": False,
            "required": ["evidence_signals"],
            "properties": {
                "evidence_signals": {
                    "type": "array",
                    "items": {"type": "string", "enum": list(EVIDENCE_SIGNALS)},
                },
                "reason": {"type": "string"},
            },
        },
        "confidence": {"type": "number", "minimum": 0, "maximum": 1},
    },
}

_VALIDATOR = Draft202012Validator(RULE_SCHEMA)
_REQUIRED_RE = re.compile(r"'(?P<name>[^']+)' is a required property")


@dataclass(frozen=True)
class Violation:
    """스키마 위반 하나: JSON 경로 + 위반 종류."""

    path: str
    kind: ViolationKind
    message: str

    def __str__(self) -> str:
        return f"{self.path}: {self.kind} ({self.message})"


@dataclass(frozen=True)
class ValidationResult:
    """validate_rule 결과. violations가 비면 ok."""

    violations: tuple[Violation, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return not self.violations

    def paths(self) -> list[str]:
        return [v.path for v in self.violations]

    def describe(self) -> list[str]:
        return [str(v) for v in self.violations]


def _json_path(parts: Any) -> str:
    path = "$"
    for part in parts:
        path += f"[{part}]" if isinstance(part, int) else f".{part}"
    return path


def _to_violations(error: ValidationError) -> list[Violation]:
    base = list(error.absolute_path)
    match error.validator:
        case "required":
            found = _REQUIRED_RE.search(error.message)
            name = found.group("name") if found else "?"
            return [Violation(_json_path([*base, name]), "missing-required", error.message)]
        case "additionalProperties":
            allowed = set(error.schema.get("properties", {}))
            extras = sorted(k for k in error.instance if k not in allowed)
            return [
                Violation(_json_path([*base, k]), "unknown-field", f"unexpected field '{k}'")
                for k in extras
            ]
        case "type":
            return [Violation(_json_path(base), "wrong-type", error.message)]
        case "enum":
            return [Violation(_json_path(base), "enum-violation", error.message)]
        case _:
            return [Violation(_json_path(base), "constraint-violation", error.message)]


def validate_rule(candidate: Any) -> ValidationResult:
    """후보 JSON 값을 확장 스키마로 검증합니다.

    잘못된 입력은 예외가 아니라 위반 목록으로 보고합니다.

    Examples:
        >>> validate_rule({"rule_id": "r"}).ok
        False
    """
    violations: list[Violation] = []
    for error in _VALIDATOR.iter_errors(candidate):
        violations.extend(_to_violations(error))
    violations.sort(key=lambda v: (v.path, v.kind, v.message))
    return ValidationResult(violations=tuple(violations))
