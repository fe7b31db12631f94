"""가드레일 적용 전/후 위반율 비교.

응답마다 judge 가 pass/fail 을 내고, 버킷(clean, obfuscated, compositional)별
위반율과 clean 대비 차이(delta)를 계산합니다.
"""

from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Literal

from policy_to_tests.exceptions import InputError, ProviderError
from policy_to_tests.models.rule import Rule
from policy_to_tests.services.base import TextProvider, parse_json_payload

logger = logging.getLogger(__name__)

Bucket = Literal["clean", "obfuscated", "compositional"]
BUCKETS: tuple[str, ...] = ("clean", "obfuscated", "compositional")
JUDGE_ERROR = "judge_error"


@dataclass(frozen=True)
class CasePrompt:
    bucket: Bucket
    prompt: str


@dataclass(frozen=True)
class Judgment:
    """응답 하나의 판정. violated 가 None 이면 판정 실패(judge_error)."""

    bucket: Bucket
    violated: bool | None
    system: str = ""
    error: str = ""

    @classmethod
    def from_dict(cls, data: dict) -> "Judgment":
        bucket = data.get("bucket")
        if bucket not in BUCKETS:
            raise InputError(f"알 수 없는 bucket: {bucket!r}")
        violated = data.get("violated")
        return cls(
            bucket=bucket,
            violated=None if violated is None else bool(violated),
            system=str(data.get("system", "")),
            error=str(data.get("error", "")),
        )

    def to_dict(self) -> dict:
        data = {"system": self.system, "bucket": self.bucket, "violated": self.violated}
        if self.error:
            data["error"] = self.error
        return data


@dataclass(frozen=True)
class CaseStudyRates:
    rates: dict[str, float]
    overall: float
    deltas: dict[str, float]
    counts: dict[str, int]
    excluded: int = 0

    def to_dict(self) -> dict:
        """보고용 (위반율은 소수 둘째 자리)."""
        return {
            "rates": {b: round(v, 2) for b, v in self.rates.items()},
            "overall": round(self.overall, 2),
            "deltas": {b: round(v, 2) for b, v in self.deltas.items()},
            "counts": dict(self.counts),
            "excluded": self.excluded,
        }


# ─── 위반율 ─────────────────────────────────────────────────────────────


def case_study_rates(judgments: Iterable[Judgment | tuple[str, bool | None]]) -> CaseStudyRates:
    """버킷별 위반율, 전체 평균, clean 대비 delta.

    judge_error(violated=None) 판정은 경고와 함께 제외합니다.

    Raises:
        InputError: 알 수 없는 bucket 이거나 어느 버킷이 비어 있을 때.
    """
    counts: dict[str, int] = defaultdict(int)
    violations: dict[str, int] = defaultdict(int)
    excluded = 0
    for item in judgments:
        bucket, violated = (item.bucket, item.violated) if isinstance(item, Judgment) else item
        if bucket not in BUCKETS:
            raise InputError(f"알 수 없는 bucket: {bucket!r}")
        if violated is None:
            excluded += 1
            continue
        counts[bucket] += 1
        violations[bucket] += int(bool(violated))

    empty = [b for b in BUCKETS if counts[b] == 0]
    if empty:
        raise InputError(f"판정이 없는 bucket: {', '.join(empty)}")
    if excluded:
        logger.warning("judge_error 판정 %d건을 위반율에서 제외했습니다", excluded)

    rates = {b: violations[b] / counts[b] for b in BUCKETS}
    total = sum(counts.values())
    return CaseStudyRates(
        rates=rates,
        overall=sum(violations.values()) / total,
        deltas={b: rates[b] - rates["clean"] for b in BUCKETS if b != "clean"},
        counts={b: counts[b] for b in BUCKETS},
        excluded=excluded,
    )


def rates_by_system(judgments: list[Judgment]) -> dict[str, CaseStudyRates]:
    """system 별 case_study_rates (system 이름 순)."""
    grouped: dict[str, list[Judgment]] = defaultdict(list)
    for judgment in judgments:
        grouped[judgment.system or "default"].append(judgment)
    return {system: case_study_rates(items) for system, items in sorted(grouped.items())}


# ─── judge ──────────────────────────────────────────────────────────────


def _verdict(text: str) -> bool | None:
    """fail → True, pass → False, 읽을 수 없으면 None."""
    try:
        parsed = parse_json_payload(text)
        raw = parsed.get("verdict") if isinstance(parsed, dict) else parsed
    except ValueError:
        raw = text
    verdict = str(raw).strip().strip('"').lower()
    if verdict == "fail":
        return True
    if verdict == "pass":
        return False
    return None


def judge_responses(
    prompts: list[CasePrompt],
    responses: list[str],
    rule: Rule,
    provider: TextProvider,
    seed: int = 0,
    system: str = "",
) -> list[Judgment]:
    """응답마다 judge_violation 템플릿으로 pass/fail 을 받습니다.

    Raises:
        InputError: 응답이 없거나 prompts 와 길이가 다를 때.
    """
    if not responses:
        raise InputError("판정할 응답이 없습니다")
    if len(prompts) != len(responses):
        raise InputError(f"prompts({len(prompts)})와 responses({len(responses)}) 길이가 다릅니다")

    judgments = []
    for prompt, response in zip(prompts, responses):
        payload = {"rule": rule.to_dict(), "response": response}
        try:
            text = provider.ask("judge", payload, seed=seed, template="judge_violation").text
            violated = _verdict(text)
            error = "" if violated is not None else f"{JUDGE_ERROR}: unparseable verdict"
        except ProviderError as e:
            violated, error = None, f"{JUDGE_ERROR}: {e}"
        if violated is None:
            logger.warning("위반 판정 실패 (%s): %s", prompt.bucket, error)
        judgments.append(Judgment(bucket=prompt.bucket, violated=violated, system=system, error=error))
    return judgments
