"""범위(scope) 어휘 정규화.

문서 계열별로 편집 가능한 JSON 맵 {변형: 표준형} 을 씁니다. 키는 대소문자를
구분하지 않으며, 표준형은 자기 자신으로도 매핑되어 정규화가 멱등입니다.
"""

from __future__ import annotations

import json
import re
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from types import MappingProxyType

from policy_to_tests.exceptions import ConfigError
from policy_to_tests.models.rule import Rule, Scope
from policy_to_tests.utils.jsonl import read_json

SCOPE_AXES: tuple[str, ...] = ("actor", "data_domain", "context")

_WS_RE = re.compile(r"\s+")


def _key(term: str) -> str:
    return _WS_RE.sub(" ", term.strip()).casefold()


def _singular_forms(key: str) -> list[str]:
    forms = [key]
    if key.endswith("ies") and len(key) > 4:
        forms.append(key[:-3] + "y")
    if key.endswith("s") and not key.endswith(("ss", "us", "is")) and len(key) > 3:
        forms.append(key[:-1])
    return forms


def _base_form(term: str) -> str:
    """소문자 단수형. 복수 접미사가 없으면 키 그대로."""
    forms = _singular_forms(_key(term))
    return forms[1] if len(forms) > 1 else forms[0]


@dataclass(frozen=True)
class ScopeVocabulary:
    """대소문자 무시 변형 → 표준형 맵. 로드 후 읽기 전용."""

    mapping: Mapping[str, str] = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data: Mapping[str, str]) -> "ScopeVocabulary":
        if not isinstance(data, Mapping):
            raise ConfigError("scope 어휘 파일은 {변형: 표준형} JSON 객체여야 합니다")
        table: dict[str, str] = {}
        for variant, canonical in data.items():
            table[_key(str(variant))] = str(canonical)
        for canonical in list(table.values()):
            table.setdefault(_key(canonical), canonical)
        return cls(mapping=MappingProxyType(table))

    @classmethod
    def load(cls, path: Path | None = None) -> "ScopeVocabulary":
        """어휘 파일을 로드합니다. path가 없으면 패키지 기본 어휘."""
        if path is None:
            raw = resources.files("policy_to_tests.data").joinpath("scope_vocab.json")
            return cls.from_dict(json.loads(raw.read_text(encoding="utf-8")))
        return cls.from_dict(read_json(path))

    @classmethod
    def identity(cls) -> "ScopeVocabulary":
        return cls(mapping=MappingProxyType({}))

    def lookup(self, term: str) -> str | None:
        """표준형을 찾습니다. 없으면 None."""
        for form in _singular_forms(_key(term)):
            if form in self.mapping:
                return self.mapping[form]
        return None


def _normalize_axis(
    values: Iterable[str], vocab: ScopeVocabulary, unmapped: list[str]
) -> tuple[str, ...]:
    out: set[str] = set()
    # 어휘에 없는 항목은 대소문자·단수형 키로 묶습니다.
    spellings: dict[str, list[str]] = {}
    for raw in values:
        term = raw.strip()
        if not term:
            continue
        canonical = vocab.lookup(term)
        if canonical is not None:
            out.add(canonical)
            continue
        unmapped.append(term)
        group = spellings.setdefault(_base_form(term), [])
        if term not in group:
            group.append(term)
    for base, group in spellings.items():
        # 표기가 하나면 원문 그대로, 여럿이면 소문자 단수형 하나로 합칩니다.
        out.add(group[0] if len(group) == 1 else base)
    return tuple(sorted(out))


def normalize_scope_with_flags(rule: Rule, vocab: ScopeVocabulary) -> tuple[Rule, list[str]]:
    """normalize_scope 와 같지만 어휘에 없는 항목 목록도 함께 반환합니다."""
    unmapped: list[str] = []
    scope = Scope(
        actor=_normalize_axis(rule.scope.actor, vocab, unmapped),
        data_domain=_normalize_axis(rule.scope.data_domain, vocab, unmapped),
        context=_normalize_axis(rule.scope.context, vocab, unmapped),
    )
    return rule.replace(scope=scope), sorted(set(unmapped))


def normalize_scope(rule: Rule, vocab: ScopeVocabulary) -> Rule:
    """모든 scope 항목을 표준형으로 치환하고 정렬·중복 제거합니다.

    어휘에 없는 항목은 원문 그대로 두되, 대소문자나 복수형만 다른 표기가
    여럿이면 소문자 단수형 하나로 합칩니다(추적 기록은 호출자 몫).
    """
    normalized, _ = normalize_scope_with_flags(rule, vocab)
    return normalized
