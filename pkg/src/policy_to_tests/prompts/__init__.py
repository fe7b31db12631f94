"""프롬프트 템플릿 패키지."""
