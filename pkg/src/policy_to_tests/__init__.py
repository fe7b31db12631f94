"""Policy-to-Tests - 정책 문서를 실행 가능한 원자 규칙으로 변환하는 파이프라인."""

__version__ = "1.0.0"
