"""텍스트 생성/임베딩 백엔드 서비스."""

from policy_to_tests.services.base import (
    TextProvider,
    TextRequest,
    TextResponse,
    UsageMeter,
    cosine,
    hashed_embedding,
    parse_json_payload,
)
from policy_to_tests.services.cache import ResponseCache
from policy_to_tests.services.factory import build_provider
from policy_to_tests.services.fallback_provider import FallbackProvider
from policy_to_tests.services.prompts import PromptLibrary, load_few_shot
from policy_to_tests.services.remote_provider import RemoteProvider
from policy_to_tests.services.stub_provider import StubProvider

__all__ = [
    "FallbackProvider",
    "PromptLibrary",
    "RemoteProvider",
    "ResponseCache",
    "StubProvider",
    "TextProvider",
    "TextRequest",
    "TextResponse",
    "UsageMeter",
    "build_provider",
    "cosine",
    "hashed_embedding",
    "load_few_shot",
    "parse_json_payload",
]
