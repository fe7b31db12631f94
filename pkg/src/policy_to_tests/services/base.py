"""텍스트 생성/임베딩 provider 공통 계약.

모든 의미 처리 단계(추출, judge, repair, testability, 예시 생성, 유사도,
의미 중복 제거)는 TextProvider 를 통해서만 백엔드를 호출합니다.
캐시와 사용량 집계는 이 기반 클래스가 담당하고, 하위 클래스는
`_complete` 만 구현합니다.
"""

from __future__ import annotations

import hashlib
import json
import logging
import re
import threading
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Literal, Mapping

import numpy as np

from policy_to_tests.exceptions import InputError, ProviderError
from policy_to_tests.services.cache import ResponseCache
from policy_to_tests.services.prompts import PromptLibrary
from policy_to_tests.utils.text import token_jaccard, word_tokens

logger = logging.getLogger(__name__)

TaskTag = Literal["extract", "judge", "repair", "testability", "examples", "similarity", "paraphrase"]
TASK_TAGS: tuple[str, ...] = (
    "extract",
    "judge",
    "repair",
    "testability",
    "examples",
    "similarity",
    "paraphrase",
)
EMBEDDING_DIM = 256
KEY_LOCK_STRIPES = 64

_DECIMAL_RE = re.compile(r"(?<![\d.])(\d+(?:\.\d+)?|\.\d+)")
_FENCE_RE = re.compile(r"```(?:json)?\s*(.*?)```", re.DOTALL)


# ─── 요청/응답 ───────────────────────────────────────────────────────────


@dataclass(frozen=True)
class TextRequest:
    """생성 요청 하나.

    template/payload 는 프롬프트를 만든 템플릿 이름과 그 변수입니다.
    오프라인 응답기는 payload 로 구조적으로 답합니다.
    """

    task_tag: TaskTag
    prompt: str
    schema_hint: Mapping[str, Any] | None = field(default=None, compare=False)
    temperature: float = 0.0
    seed: int = 0
    template: str = ""
    payload: Mapping[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        if self.task_tag not in TASK_TAGS:
            raise ValueError(f"알 수 없는 task_tag: {self.task_tag}")
        if self.temperature < 0:
            raise ValueError("temperature 는 0 이상이어야 합니다")


@dataclass(frozen=True)
class TextResponse:
    text: str
    token_counts: tuple[int, int]
    provider_id: str
    cached: bool = False


@dataclass
class UsageMeter:
    """작업 단위 토큰/캐시 사용량."""

    input_tokens: int = 0
    output_tokens: int = 0
    calls: int = 0
    cache_hits: int = 0
    cache_misses: int = 0
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def record(self, response: TextResponse) -> None:
        with self._lock:
            self.calls += 1
            if response.cached:
                self.cache_hits += 1
                return
            self.cache_misses += 1
            self.input_tokens += response.token_counts[0]
            self.output_tokens += response.token_counts[1]

    def to_dict(self) -> dict:
        return {
            "input_tokens": self.input_tokens,
            "output_tokens": self.output_tokens,
            "calls": self.calls,
            "cache_hits": self.cache_hits,
            "cache_misses": self.cache_misses,
        }


# ─── 벡터 유틸 ───────────────────────────────────────────────────────────


def hashed_embedding(text: str, dim: int = EMBEDDING_DIM) -> np.ndarray:
    """해시 bag-of-tokens 임베딩 (토큰 → sha256 mod dim 버킷, 빈도, L2 정규화)."""
    tokens = word_tokens(text) or [text.strip().lower()]
    vector = np.zeros(dim, dtype=np.float64)
    for token in tokens:
        bucket = int(hashlib.sha256(token.encode("utf-8")).hexdigest()[:16], 16) % dim
        vector[bucket] += 1.0
    return vector / np.linalg.norm(vector)


def unit(vector: Any) -> np.ndarray:
    array = np.asarray(vector, dtype=np.float64)
    norm = np.linalg.norm(array)
    if norm == 0:
        raise ProviderError("임베딩 벡터의 norm 이 0 입니다")
    return array / norm


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """단위 벡터 간 코사인 유사도 ([-1, 1] 로 클립)."""
    return float(np.clip(np.dot(a, b), -1.0, 1.0))


# ─── 응답 파싱 ───────────────────────────────────────────────────────────


def parse_json_payload(text: str) -> Any:
    """모델 응답에서 JSON 값을 꺼냅니다. 코드 펜스를 허용합니다.

    Raises:
        ValueError: JSON 을 찾지 못했을 때.
    """
    fenced = _FENCE_RE.search(text)
    candidate = (fenced.group(1) if fenced else text).strip()
    try:
        return json.loads(candidate)
    except json.JSONDecodeError:
        pass

    starts = [i for i in (candidate.find("["), candidate.find("{")) if i >= 0]
    if not starts:
        raise ValueError("응답에 JSON 이 없습니다")
    start = min(starts)
    closer = "]" if candidate[start] == "[" else "}"
    end = candidate.rfind(closer)
    if end <= start:
        raise ValueError("응답의 JSON 이 닫히지 않았습니다")
    try:
        return json.loads(candidate[start:end + 1])
    except json.JSONDecodeError as e:
        raise ValueError(f"응답 JSON 파싱 실패: {e}") from e


def parse_unit_interval(text: str) -> float | None:
    """첫 번째 10진수가 [0,1] 이면 그 값, 아니면 None."""
    match = _DECIMAL_RE.search(text)
    if not match:
        return None
    value = float(match.group(1))
    return value if 0.0 <= value <= 1.0 else None


# ─── Provider ────────────────────────────────────────────────────────────


class TextProvider(ABC):
    """생성 + 임베딩 백엔드.

    하위 클래스는 `_complete(request) -> (text, input_tokens, output_tokens)` 를 구현합니다.
    """

    provider_id: str = "provider"
    default_confidence: float = 0.5
    supports_similarity: bool = True

    def __init__(
        self,
        cache: ResponseCache | None = None,
        prompts: PromptLibrary | None = None,
        temperature: float = 0.0,
    ) -> None:
        self.cache = cache or ResponseCache()
        self.prompts = prompts or PromptLibrary()
        self.temperature = temperature
        self.usage = UsageMeter()
        self._key_locks = tuple(threading.Lock() for _ in range(KEY_LOCK_STRIPES))

    @abstractmethod
    def _complete(self, request: TextRequest) -> tuple[str, int, int]:
        """캐시 미스 시 실제 생성."""

    # ─── 생성 ───────────────────────────────────────────────────────────

    def generate(self, request: TextRequest) -> TextResponse:
        """요청을 처리합니다. 같은 요청의 반복은 캐시에서 바이트 동일하게 응답합니다.

        Raises:
            ProviderError: 재시도 후에도 백엔드 호출이 실패했을 때.
        """
        key = self.cache.key(self.provider_id, request.prompt, request.temperature, request.seed)
        # 같은 키는 동시에 들어와도 한 번만 생성합니다. 락은 키 해시로 고른 고정 묶음입니다.
        key_lock = self._key_locks[int(key[:8], 16) % KEY_LOCK_STRIPES]
        with key_lock:
            cached = self.cache.get(key)
            if cached is not None:
                response = TextResponse(
                    text=cached,
                    token_counts=(0, 0),
                    provider_id=self.provider_id,
                    cached=True,
                )
                logger.debug("캐시 적중: %s (%s)", request.task_tag, key[:12])
            else:
                text, tokens_in, tokens_out = self._complete(request)
                self.cache.put(key, text)
                response = TextResponse(
                    text=text,
                    token_counts=(max(0, tokens_in), max(0, tokens_out)),
                    provider_id=self.provider_id,
                    cached=False,
                )
        self.usage.record(response)
        return response

    def ask(
        self,
        task_tag: TaskTag,
        payload: Mapping[str, Any],
        seed: int = 0,
        template: str | None = None,
        schema_hint: Mapping[str, Any] | None = None,
        suffix: str = "",
    ) -> TextResponse:
        """템플릿을 렌더링해 generate 를 호출하는 단축 경로."""
        name = template or task_tag
        prompt = self.prompts.render(name, payload)
        if suffix:
            prompt = f"{prompt}\n\n{suffix}"
        request = TextRequest(
            task_tag=task_tag,
            prompt=prompt,
            schema_hint=schema_hint,
            temperature=self.temperature,
            seed=seed,
            template=name,
            payload=dict(payload),
        )
        return self.generate(request)

    # ─── 임베딩 ─────────────────────────────────────────────────────────

    def embed(self, text: str) -> np.ndarray:
        """고정 차원 단위 벡터. 기본은 해시 bag-of-tokens.

        Raises:
            InputError: 빈 텍스트.
        """
        if not text or not text.strip():
            raise InputError("빈 텍스트는 임베딩할 수 없습니다")
        return hashed_embedding(text)

    # ─── 유사도 ─────────────────────────────────────────────────────────

    def score_similarity(self, text_a: str, text_b: str, seed: int = 0) -> float:
        """[0,1] 유사도. 모델 응답을 못 읽으면 토큰 Jaccard 로 대체합니다."""
        if not text_a.strip() or not text_b.strip():
            return token_jaccard(text_a, text_b)
        if not self.supports_similarity:
            return token_jaccard(text_a, text_b)

        try:
            response = self.ask("similarity", {"text_a": text_a, "text_b": text_b}, seed=seed)
        except ProviderError as e:
            logger.warning("유사도 호출 실패, Jaccard 로 대체합니다: %s", e)
            return token_jaccard(text_a, text_b)

        value = parse_unit_interval(response.text)
        if value is None:
            logger.debug("유사도 응답 파싱 실패, Jaccard 로 대체: %r", response.text[:80])
            return token_jaccard(text_a, text_b)
        return value
