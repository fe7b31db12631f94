"""testability 태깅과 예시 프롬프트 생성.

태깅 결과 중 evidence_signals 는 닫힌 집합(EVIDENCE_SIGNALS)만 남깁니다.
요구사항에 검증 가능한 동사가 하나도 없으면 모델이 testable 이라 해도 false 로 내립니다.
예시는 is_testable 이면서 io_check 신호가 있는 규칙에만 만듭니다.
"""

from __future__ import annotations

import json
import logging
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path

from policy_to_tests.exceptions import ConfigError, PreconditionError, ProviderError
from policy_to_tests.models.results import ExampleSet, TaggingFlags
from policy_to_tests.models.rule import EVIDENCE_SIGNALS, Rule, Testability
from policy_to_tests.services.base import TextProvider, parse_json_payload
from policy_to_tests.utils.jsonl import read_json
from policy_to_tests.utils.log_format import SKIP_LEVEL

logger = logging.getLogger(__name__)

IO_SIGNAL = "io_check"
NO_VERB_REASON = "no verifiable action verb in requirement"


# ─── 검증 가능 동사 목록 ────────────────────────────────────────────────


@dataclass(frozen=True)
class VerbList:
    """요구사항에서 찾을 동사 어간 (단어 접두어로 매칭)."""

    stems: tuple[str, ...]

    @classmethod
    def from_dict(cls, data: dict) -> "VerbList":
        verbs = data.get("verbs") if isinstance(data, dict) else None
        if not isinstance(verbs, list) or not verbs:
            raise ConfigError("동사 목록 파일에는 비어 있지 않은 'verbs' 배열이 있어야 합니다")
        return cls(stems=tuple(str(v).lower() for v in verbs))

    @classmethod
    def load(cls, path: Path | None = None) -> "VerbList":
        if path is None:
            return default_verbs()
        return cls.from_dict(read_json(path))

    def pattern(self) -> re.Pattern[str]:
        alternatives = "|".join(re.escape(s) for s in sorted(self.stems, key=len, reverse=True))
        return re.compile(rf"\b(?:{alternatives})\w*", re.IGNORECASE)

    def found(self, text: str) -> list[str]:
        return sorted({m.group(0).lower() for m in self.pattern().finditer(text)})


@lru_cache(maxsize=1)
def default_verbs() -> VerbList:
    raw = resources.files("policy_to_tests.data").joinpath("testability_verbs.json").read_text(
        encoding="utf-8"
    )
    return VerbList.from_dict(json.loads(raw))


# ─── tag_testability ────────────────────────────────────────────────────


def tag_testability(
    rule: Rule,
    provider: TextProvider,
    verbs: VerbList | None = None,
    flags: TaggingFlags | None = None,
    seed: int = 1,
) -> Rule:
    """rubric 으로 is_testable / testability 를 채웁니다. 다른 필드는 건드리지 않습니다.

    읽을 수 없는 출력이면 규칙을 그대로 두고 flags.untagged_rule_ids 에 남깁니다.
    """
    verbs = verbs or default_verbs()
    payload = {"rule": rule.to_dict(), "signals": list(EVIDENCE_SIGNALS)}
    try:
        response = provider.ask("testability", payload, seed=seed)
        parsed = parse_json_payload(response.text)
        if not isinstance(parsed, dict) or not isinstance(parsed.get("is_testable"), bool):
            raise ValueError("is_testable 이 없습니다")
        raw_signals = parsed.get("evidence_signals") or []
        if not isinstance(raw_signals, list):
            raise ValueError("evidence_signals 가 배열이 아닙니다")
    except (ProviderError, ValueError) as e:
        logger.warning("testability 태깅 실패, 태그 없이 둡니다 (%s): %s", rule.rule_id, e)
        if flags is not None:
            flags.untagged_rule_ids.append(rule.rule_id)
        return rule

    signals: list[str] = []
    dropped: list[str] = []
    for signal in map(str, raw_signals):
        if signal in EVIDENCE_SIGNALS:
            if signal not in signals:
                signals.append(signal)
        else:
            dropped.append(signal)
    if dropped:
        logger.warning("닫힌 집합 밖 신호 제거 (%s): %s", rule.rule_id, ", ".join(dropped))
        if flags is not None:
            flags.dropped_signals[rule.rule_id] = dropped

    is_testable = parsed["is_testable"]
    reason = str(parsed.get("reason", "")).strip()
    if is_testable and not verbs.found(rule.requirement):
        is_testable = False
        reason = f"{reason}; {NO_VERB_REASON}" if reason else NO_VERB_REASON
        logger.debug("검증 동사 없음, testable 해제: %s", rule.rule_id)

    return rule.replace(
        is_testable=is_testable,
        testability=Testability(evidence_signals=tuple(signals), reason=reason),
    )


def run_tagging(
    rules: list[Rule],
    provider: TextProvider,
    verbs: VerbList | None = None,
    seed: int = 1,
    workers: int = 4,
) -> tuple[list[Rule], TaggingFlags]:
    """규칙들을 병렬로 태깅합니다. 결과는 rule_id 순."""
    flags = TaggingFlags()
    verbs = verbs or default_verbs()
    ordered = sorted(rules, key=lambda r: r.rule_id)
    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        tagged = list(executor.map(lambda r: tag_testability(r, provider, verbs, flags, seed), ordered))

    flags.untagged_rule_ids.sort()
    testable = sum(1 for r in tagged if r.is_testable)
    logger.info("testability 태깅: %d/%d testable", testable, len(tagged))
    return tagged, flags


# ─── generate_examples ──────────────────────────────────────────────────


def eligible_for_examples(rule: Rule) -> bool:
    return rule.is_testable and IO_SIGNAL in rule.testability.evidence_signals


def _dedupe(prompts: list[str]) -> tuple[str, ...]:
    seen: set[str] = set()
    unique = []
    for prompt in prompts:
        key = " ".join(prompt.lower().split())
        if key not in seen:
            seen.add(key)
            unique.append(prompt.strip())
    return tuple(unique)


def _arity_problems(parsed: object, n_per_side: int) -> list[str]:
    if not isinstance(parsed, dict):
        return ["response must be a JSON object with benign and adversarial lists"]
    problems = []
    for side in ("benign", "adversarial"):
        values = parsed.get(side)
        if not isinstance(values, list):
            problems.append(f"{side}: must be a list")
        elif len(values) != n_per_side:
            problems.append(f"{side}: expected {n_per_side} prompts, got {len(values)}")
        elif any(not isinstance(v, str) or not v.strip() for v in values):
            problems.append(f"{side}: prompts must be non-empty strings")
    return problems


def generate_examples(
    rule: Rule, provider: TextProvider, n_per_side: int = 5, seed: int = 1
) -> ExampleSet | None:
    """benign/adversarial 프롬프트를 만듭니다. 재시도 후에도 실패하면 None.

    Raises:
        PreconditionError: io_check 가 있는 testable 규칙이 아니거나 n_per_side < 1.
    """
    if n_per_side < 1:
        raise PreconditionError(f"n_per_side 는 1 이상이어야 합니다: {n_per_side}")
    if not eligible_for_examples(rule):
        raise PreconditionError(f"io_check testable 규칙만 예시를 만듭니다: {rule.rule_id}")

    payload = {"rule": rule.to_dict(), "n": n_per_side, "seed": seed}
    suffix = ""
    for attempt in (1, 2):
        try:
            response = provider.ask("examples", payload, seed=seed, suffix=suffix)
            parsed = parse_json_payload(response.text)
            problems = _arity_problems(parsed, n_per_side)
        except ProviderError as e:
            logger.warning("예시 생성 실패 (%s): %s", rule.rule_id, e)
            return None
        except ValueError as e:
            problems = [f"response is not JSON: {e}"]

        if not problems:
            return ExampleSet(
                rule_id=rule.rule_id,
                benign=_dedupe(parsed["benign"]),
                adversarial=_dedupe(parsed["adversarial"]),
                generator_seed=seed,
            )
        logger.debug("예시 응답 거부 (%s, 시도 %d): %s", rule.rule_id, attempt, "; ".join(problems))
        suffix = "Your previous answer was rejected:\n" + "\n".join(f"- {p}" for p in problems)

    logger.log(SKIP_LEVEL, "예시 생성 포기: %s", rule.rule_id)
    return None


def run_examples(
    rules: list[Rule],
    provider: TextProvider,
    n_per_side: int = 5,
    seed: int = 1,
    workers: int = 4,
) -> list[ExampleSet]:
    """대상 규칙에만 예시를 만듭니다. 결과는 rule_id 순."""
    targets = sorted((r for r in rules if eligible_for_examples(r)), key=lambda r: r.rule_id)
    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        results = list(executor.map(lambda r: generate_examples(r, provider, n_per_side, seed), targets))

    sets = [s for s in results if s is not None]
    logger.info("예시 세트 %d개 (대상 규칙 %d개)", len(sets), len(targets))
    return sets
