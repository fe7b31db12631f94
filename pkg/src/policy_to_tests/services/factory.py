"""ProviderConfig → TextProvider."""

from __future__ import annotations

import logging

from policy_to_tests.config import ProviderConfig
from policy_to_tests.exceptions import ConfigError
from policy_to_tests.services.base import TextProvider
from policy_to_tests.services.cache import ResponseCache
from policy_to_tests.services.fallback_provider import FallbackProvider
from policy_to_tests.services.prompts import PromptLibrary
from policy_to_tests.services.remote_provider import RemoteProvider
from policy_to_tests.services.stub_provider import StubProvider

logger = logging.getLogger(__name__)


def build_provider(config: ProviderConfig, cache: ResponseCache | None = None) -> TextProvider:
    """설정된 종류의 provider 를 만듭니다.

    작업(문서 × seed)마다 새 인스턴스를 만들어 사용량을 따로 집계하고,
    캐시는 인자로 받아 공유할 수 있습니다.
    """
    cache = cache or ResponseCache(config.cache_dir)
    prompts = PromptLibrary(config.prompt_dir)

    match config.kind:
        case "remote":
            if not config.endpoint:
                raise ConfigError("remote provider 에는 provider.endpoint 가 필요합니다")
            provider: TextProvider = RemoteProvider(config, cache=cache, prompts=prompts)
        case "stub":
            fallback = FallbackProvider(cache=cache, prompts=prompts, temperature=config.temperature)
            if config.stub_fixtures:
                provider = StubProvider.from_file(
                    config.stub_fixtures,
                    strict=config.stub_strict,
                    fallback=fallback,
                    cache=cache,
                    prompts=prompts,
                    temperature=config.temperature,
                )
            else:
                provider = StubProvider(
                    strict=config.stub_strict,
                    fallback=fallback,
                    cache=cache,
                    prompts=prompts,
                    temperature=config.temperature,
                )
        case "fallback":
            provider = FallbackProvider(cache=cache, prompts=prompts, temperature=config.temperature)
        case _:
            raise ConfigError(f"알 수 없는 provider.kind: {config.kind}")

    logger.debug("provider 생성: %s", provider.provider_id)
    return provider
