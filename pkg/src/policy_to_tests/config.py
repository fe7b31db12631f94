"""설정 관리 모듈.

단일 JSON 설정 파일에서 파이프라인 설정을 로드합니다.
문자열 값은 ${VAR} / ${VAR:-default} 형식의 환경변수 치환을 지원하며,
상대 경로는 설정 파일 위치 기준으로 해석합니다.

환경변수:
    P2T_API_KEY    원격 provider 자격증명 (provider.kind=remote 일 때 필수)
    P2T_CACHE_DIR  응답 캐시 디렉토리 (기본: 없음 → 메모리 캐시만)
    P2T_LOG_DIR    파일 로그 디렉토리 (선택)
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any

from policy_to_tests.exceptions import ConfigError
from policy_to_tests.utils.jsonl import read_json

PROVIDER_KINDS = ("remote", "stub", "fallback")
CHUNK_STRATEGIES = ("paragraph", "sentence", "window")
DOC_FORMATS = ("markdown", "plain_text")
CONDITION_MODES = ("ignore", "strict")

_ENV_RE = re.compile(r"\$\{(?P<name>[A-Za-z_][A-Za-z0-9_]*)(?::-(?P<default>[^}]*))?\}")


@dataclass(frozen=True)
class ProviderConfig:
    """텍스트 생성/임베딩 백엔드 설정."""

    kind: str = "fallback"
    endpoint: str = ""
    model: str = ""
    embedding_endpoint: str = ""
    embedding_model: str = ""
    api_key: str = ""
    temperature: float = 0.0
    parallelism: int = 4
    min_interval: float = 0.0
    timeout: float = 60.0
    max_attempts: int = 3
    max_response_bytes: int = 1_000_000
    cache_dir: Path | None = None
    prompt_dir: Path | None = None
    stub_fixtures: Path | None = None
    stub_strict: bool = False


@dataclass(frozen=True)
class ChunkingConfig:
    """ingest 청킹 설정."""

    strategy: str = "paragraph"
    window_radius: int = 1
    heading_patterns: tuple[tuple[int, str], ...] = ()
    boilerplate_ratio: float = 0.5


@dataclass(frozen=True)
class MinerSettings:
    """clause_miner 설정 (bypass 면 모든 span 이 other 로 통과)."""

    bypass: bool = False
    config_path: Path | None = None


@dataclass(frozen=True)
class StageToggles:
    """단계 on/off. base → +judge+repair → +dedup 절제 사다리를 표현합니다."""

    judge: bool = True
    repair: bool = True
    gate: bool = True
    probe: bool = True
    dedup: bool = True
    tag: bool = True
    examples: bool = True
    check: bool = True
    eval: bool = True


@dataclass(frozen=True)
class ExtractSettings:
    """구조화 추출 설정."""

    few_shot: Path | None = None
    scope_vocab: Path | None = None
    max_retries: int = 2
    repair_rounds: int = 1
    max_edit_fields: int = 3
    trusted_evidence: tuple[str, ...] = ()
    keep_gated: bool = False


@dataclass(frozen=True)
class DedupSettings:
    semantic: bool = True
    threshold: float = 0.90


@dataclass(frozen=True)
class EnrichSettings:
    n_per_side: int = 5
    verb_list: Path | None = None


@dataclass(frozen=True)
class ConsistencySettings:
    condition_mode: str = "ignore"


@dataclass(frozen=True)
class EvalSettings:
    bootstrap: int = 1000
    level: float = 0.95


@dataclass(frozen=True)
class DocumentSpec:
    """입력 문서 하나."""

    path: Path
    format: str = "markdown"
    doc_id: str = ""
    gold: Path | None = None


@dataclass(frozen=True)
class PipelineConfig:
    """파이프라인 전체 설정."""

    documents: tuple[DocumentSpec, ...] = ()
    seeds: tuple[int, ...] = (1,)
    output_dir: Path = Path("out")
    workers: int = 2
    chunking: ChunkingConfig = ChunkingConfig()
    miner: MinerSettings = MinerSettings()
    provider: ProviderConfig = ProviderConfig()
    stages: StageToggles = StageToggles()
    extract: ExtractSettings = ExtractSettings()
    dedup: DedupSettings = DedupSettings()
    enrich: EnrichSettings = EnrichSettings()
    consistency: ConsistencySettings = ConsistencySettings()
    evaluation: EvalSettings = EvalSettings()
    extra: dict[str, Any] = field(default_factory=dict)


# ─── 로더 헬퍼 ───────────────────────────────────────────────────────────


def _interpolate(value: Any) -> Any:
    """문자열 안의 ${VAR} / ${VAR:-default} 를 환경변수로 치환합니다."""
    if isinstance(value, str):

        def _sub(match: re.Match[str]) -> str:
            name = match.group("name")
            env = os.environ.get(name)
            if env is not None:
                return env
            if match.group("default") is not None:
                return match.group("default")
            raise ConfigError(
                f"설정이 참조하는 환경변수 '{name}'이 설정되지 않았습니다.\n"
                f"  export {name}=\"your-value\""
            )

        return _ENV_RE.sub(_sub, value)
    if isinstance(value, list):
        return [_interpolate(v) for v in value]
    if isinstance(value, dict):
        return {k: _interpolate(v) for k, v in value.items()}
    return value


def _path(value: Any, base: Path) -> Path | None:
    if value in (None, ""):
        return None
    p = Path(str(value)).expanduser()
    return p if p.is_absolute() else (base / p)


def _section(cls: type, data: dict | None, base: Path, section: str) -> Any:
    """dict 를 frozen dataclass 로 변환합니다. 모르는 키는 ConfigError."""
    data = dict(data or {})
    known = {f.name: f for f in fields(cls)}
    unknown = sorted(set(data) - set(known))
    if unknown:
        raise ConfigError(f"설정 '{section}'에 알 수 없는 키가 있습니다: {', '.join(unknown)}")
    kwargs: dict[str, Any] = {}
    for name, value in data.items():
        annotation = str(known[name].type)
        if "Path" in annotation:
            kwargs[name] = _path(value, base)
        elif annotation.startswith("tuple"):
            kwargs[name] = tuple(tuple(v) if isinstance(v, list) else v for v in value)
        else:
            kwargs[name] = value
    try:
        return cls(**kwargs)
    except TypeError as e:
        raise ConfigError(f"설정 '{section}' 형식 오류: {e}") from e


def _validate(config: PipelineConfig) -> None:
    if not config.seeds:
        raise ConfigError("seeds 는 최소 1개 이상이어야 합니다")
    if config.provider.kind not in PROVIDER_KINDS:
        raise ConfigError(f"알 수 없는 provider.kind: {config.provider.kind} ({'|'.join(PROVIDER_KINDS)})")
    if config.chunking.strategy not in CHUNK_STRATEGIES:
        raise ConfigError(f"알 수 없는 chunking.strategy: {config.chunking.strategy}")
    if config.chunking.strategy == "window" and config.chunking.window_radius < 1:
        raise ConfigError("window 전략에서는 window_radius >= 1 이어야 합니다")
    if not 0.0 <= config.dedup.threshold <= 1.0:
        raise ConfigError("dedup.threshold 는 [0, 1] 범위여야 합니다")
    if config.enrich.n_per_side < 1:
        raise ConfigError("enrich.n_per_side 는 1 이상이어야 합니다")
    if config.evaluation.bootstrap < 100:
        raise ConfigError("evaluation.bootstrap 은 100 이상이어야 합니다")
    if config.consistency.condition_mode not in CONDITION_MODES:
        raise ConfigError(f"알 수 없는 consistency.condition_mode: {config.consistency.condition_mode}")
    if config.provider.parallelism < 1 or config.workers < 1:
        raise ConfigError("parallelism / workers 는 1 이상이어야 합니다")
    for doc in config.documents:
        if doc.format not in DOC_FORMATS:
            raise ConfigError(f"알 수 없는 문서 형식: {doc.format} ({doc.path})")
    if config.provider.kind == "remote" and not config.provider.api_key:
        raise ConfigError(
            "원격 provider 에는 자격증명이 필요합니다.\n"
            "  export P2T_API_KEY=\"your-value\""
        )


def _apply_offline(provider: ProviderConfig) -> ProviderConfig:
    if provider.kind == "remote":
        return ProviderConfig(
            **{f.name: getattr(provider, f.name) for f in fields(ProviderConfig) if f.name != "kind"},
            kind="fallback",
        )
    return provider


# ─── 공개 API ────────────────────────────────────────────────────────────


def load_config(path: Path | None = None, offline: bool = False) -> PipelineConfig:
    """설정 파일을 로드합니다. path 가 없으면 기본값 + 환경변수.

    Args:
        path: JSON 설정 파일 경로.
        offline: True면 remote provider 를 fallback 으로 강제합니다.

    Raises:
        ConfigError: 파일 형식 오류, 알 수 없는 키, 범위 위반, 환경변수 누락.
    """
    if path is None:
        raw: dict[str, Any] = {}
        base = Path.cwd()
    else:
        data = read_json(path)
        if not isinstance(data, dict):
            raise ConfigError(f"설정 파일 최상위는 JSON 객체여야 합니다: {path}")
        raw = _interpolate(data)
        base = Path(path).resolve().parent

    provider_raw = dict(raw.get("provider", {}))
    provider_raw.setdefault("api_key", os.environ.get("P2T_API_KEY", ""))
    if "cache_dir" not in provider_raw and os.environ.get("P2T_CACHE_DIR"):
        provider_raw["cache_dir"] = os.environ["P2T_CACHE_DIR"]
    provider = _section(ProviderConfig, provider_raw, base, "provider")
    if offline:
        provider = _apply_offline(provider)

    documents = tuple(
        _section(DocumentSpec, d, base, "documents") for d in raw.get("documents", [])
    )
    top_unknown = sorted(
        set(raw) - {
            "documents", "seeds", "output_dir", "workers", "chunking", "miner", "provider",
            "stages", "extract", "dedup", "enrich", "consistency", "evaluation", "extra",
        }
    )
    if top_unknown:
        raise ConfigError(f"설정에 알 수 없는 최상위 키가 있습니다: {', '.join(top_unknown)}")

    config = PipelineConfig(
        documents=documents,
        seeds=tuple(int(s) for s in raw.get("seeds", [1])),
        output_dir=_path(raw.get("output_dir", "out"), base) or base / "out",
        workers=int(raw.get("workers", 2)),
        chunking=_section(ChunkingConfig, raw.get("chunking"), base, "chunking"),
        miner=_section(MinerSettings, raw.get("miner"), base, "miner"),
        provider=provider,
        stages=_section(StageToggles, raw.get("stages"), base, "stages"),
        extract=_section(ExtractSettings, raw.get("extract"), base, "extract"),
        dedup=_section(DedupSettings, raw.get("dedup"), base, "dedup"),
        enrich=_section(EnrichSettings, raw.get("enrich"), base, "enrich"),
        consistency=_section(ConsistencySettings, raw.get("consistency"), base, "consistency"),
        evaluation=_section(EvalSettings, raw.get("evaluation"), base, "evaluation"),
        extra=dict(raw.get("extra", {})),
    )
    _validate(config)
    return config
