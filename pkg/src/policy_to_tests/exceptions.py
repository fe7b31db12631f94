"""커스텀 예외 정의."""


class P2TError(Exception):
    """프로젝트 최상위 예외."""


class ConfigError(P2TError):
    """설정 관련 오류."""


class InputError(P2TError):
    """입력 파일/데이터 오류."""


class IngestError(InputError):
    """문서 로드 실패 (읽기 불가, UTF-8 아님, 빈 문서)."""


class GoldFormatError(InputError):
    """골드 파일 형식 오류 (중복 span_id 등)."""


class PreconditionError(InputError):
    """연산의 사전 조건 위반."""


class MetricUndefinedError(P2TError):
    """지표를 정의할 수 없는 입력 (분모 0 등)."""


class StageError(P2TError):
    """파이프라인 단계 실행 실패."""

    def __init__(self, message: str, stage: str = "") -> None:
        self.stage = stage
        super().__init__(message)


class ProviderError(P2TError):
    """텍스트 생성/임베딩 백엔드 호출 실패."""

    def __init__(
        self,
        message: str,
        provider_id: str = "",
        status_code: int | None = None,
    ) -> None:
        self.provider_id = provider_id
        self.status_code = status_code
        super().__init__(message)


class ProviderAuthError(ProviderError):
    """백엔드 인증 실패."""


class ProviderResponseTooLarge(ProviderError):
    """응답 크기가 설정된 상한을 초과."""
