"""독립 검증 스크립트."""
