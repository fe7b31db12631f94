"""원격 JSON-over-HTTP provider.

chat-completion 형식 본문 {model, messages, temperature, seed} 을 보내고
`choices[0].message.content` 를 읽습니다. endpoint/model 이름은 설정으로만 받습니다.
일시적 실패(429/5xx, 연결 오류)는 지수 백오프로 최대 max_attempts 회 시도합니다.
"""

from __future__ import annotations

import logging
import threading
import time

import numpy as np
import requests
from requests.adapters import HTTPAdapter
from urllib3.util.retry import Retry

from policy_to_tests.config import ProviderConfig
from policy_to_tests.exceptions import (
    InputError,
    ProviderAuthError,
    ProviderError,
    ProviderResponseTooLarge,
)
from policy_to_tests.services.base import TextProvider, TextRequest, hashed_embedding, unit
from policy_to_tests.services.cache import ResponseCache
from policy_to_tests.services.prompts import PromptLibrary

logger = logging.getLogger(__name__)

_RETRY_STATUSES = (429, 500, 502, 503, 504)


class RemoteProvider(TextProvider):
    """원격 생성/임베딩 API 를 캡슐화하는 provider."""

    default_confidence = 0.5

    def __init__(
        self,
        config: ProviderConfig,
        cache: ResponseCache | None = None,
        prompts: PromptLibrary | None = None,
    ) -> None:
        super().__init__(cache=cache, prompts=prompts, temperature=config.temperature)
        self._config = config
        self.provider_id = f"remote:{config.model or 'default'}"
        self._session = self._build_session()
        self._slots = threading.BoundedSemaphore(config.parallelism)
        self._pace_lock = threading.Lock()
        self._last_call = 0.0

    def _build_session(self) -> requests.Session:
        """인증 헤더와 재시도 어댑터가 설정된 HTTP 세션을 생성합니다."""
        retry = Retry(
            total=max(0, self._config.max_attempts - 1),
            backoff_factor=0.5,
            status_forcelist=_RETRY_STATUSES,
            allowed_methods=frozenset({"POST"}),
            raise_on_status=False,
        )
        adapter = HTTPAdapter(max_retries=retry)
        session = requests.Session()
        session.headers.update({
            "Authorization": f"Bearer {self._config.api_key}",
            "Accept": "application/json",
            "Content-Type": "application/json",
        })
        session.mount("http://", adapter)
        session.mount("https://", adapter)
        return session

    def _pace(self) -> None:
        """호출 간 최소 간격(min_interval)을 지킵니다."""
        if self._config.min_interval <= 0:
            return
        with self._pace_lock:
            wait = self._last_call + self._config.min_interval - time.monotonic()
            if wait > 0:
                time.sleep(wait)
            self._last_call = time.monotonic()

    def _post(self, url: str, body: dict) -> dict:
        """POST 요청을 수행하고, 에러를 처리합니다."""
        logger.debug("POST %s", url)
        with self._slots:
            self._pace()
            try:
                resp = self._session.post(url, json=body, timeout=self._config.timeout)
            except requests.ConnectionError as e:
                raise ProviderError(
                    f"provider 서버 연결 실패: {e}", provider_id=self.provider_id
                ) from e
            except requests.Timeout as e:
                raise ProviderError(
                    f"provider 요청 시간 초과 ({self._config.timeout:g}초)",
                    provider_id=self.provider_id,
                ) from e
            except requests.RequestException as e:
                raise ProviderError(
                    f"provider 요청 실패: {e}", provider_id=self.provider_id
                ) from e

        if resp.status_code in (401, 403):
            raise ProviderAuthError(
                f"provider 인증 실패 (HTTP {resp.status_code}): P2T_API_KEY 를 확인하세요",
                provider_id=self.provider_id,
                status_code=resp.status_code,
            )
        if not resp.ok:
            raise ProviderError(
                f"provider API 오류 (HTTP {resp.status_code}): {resp.text[:200]}",
                provider_id=self.provider_id,
                status_code=resp.status_code,
            )
        if len(resp.content) > self._config.max_response_bytes:
            raise ProviderResponseTooLarge(
                f"provider 응답이 상한을 초과했습니다: {len(resp.content)} > "
                f"{self._config.max_response_bytes} bytes",
                provider_id=self.provider_id,
                status_code=resp.status_code,
            )
        try:
            return resp.json()
        except ValueError as e:
            raise ProviderError(
                f"provider 응답이 JSON 이 아닙니다: {resp.text[:200]}",
                provider_id=self.provider_id,
                status_code=resp.status_code,
            ) from e

    # ─── 생성 ───────────────────────────────────────────────────────────

    def _complete(self, request: TextRequest) -> tuple[str, int, int]:
        body = {
            "model": self._config.model,
            "messages": [{"role": "user", "content": request.prompt}],
            "temperature": request.temperature,
            "seed": request.seed,
        }
        data = self._post(self._config.endpoint, body)
        try:
            text = data["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as e:
            raise ProviderError(
                f"provider 응답 형식이 예상과 다릅니다: {str(data)[:200]}",
                provider_id=self.provider_id,
            ) from e

        usage = data.get("usage") or {}
        tokens_in = int(usage.get("prompt_tokens", len(request.prompt.split())))
        tokens_out = int(usage.get("completion_tokens", len(str(text).split())))
        logger.debug("%s 응답 수신 (in=%d, out=%d)", request.task_tag, tokens_in, tokens_out)
        return str(text), tokens_in, tokens_out

    # ─── 임베딩 ─────────────────────────────────────────────────────────

    def embed(self, text: str) -> np.ndarray:
        """embedding_endpoint 가 없으면 해시 bag-of-tokens 로 대체합니다."""
        if not text or not text.strip():
            raise InputError("빈 텍스트는 임베딩할 수 없습니다")
        if not self._config.embedding_endpoint:
            return hashed_embedding(text)
        data = self._post(
            self._config.embedding_endpoint,
            {"model": self._config.embedding_model or self._config.model, "input": text},
        )
        try:
            return unit(data["data"][0]["embedding"])
        except (KeyError, IndexError, TypeError) as e:
            raise ProviderError(
                f"임베딩 응답 형식이 예상과 다릅니다: {str(data)[:200]}",
                provider_id=self.provider_id,
            ) from e
