"""기본 어휘집/설정 데이터."""
