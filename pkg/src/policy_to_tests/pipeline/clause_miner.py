"""후보 조항 추출 (clause mining).

의무 표현, 예외 단서, 행위자, 기한/수치 지표, 상호 참조를 찾아 가중치 합으로
점수를 매기고, 임계값 이상인 span 만 Clause 로 남깁니다. 정의문과 상투 문구는
음수 가중치로 내립니다.

기본 가중치:
    deontic +3, actor +1, quantitative/temporal +1, cross_ref +1,
    exception +1, definition -3, boilerplate -3, threshold 3
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field, fields
from pathlib import Path

from policy_to_tests.exceptions import ConfigError, PreconditionError
from policy_to_tests.models.clause import Clause, ClauseType
from policy_to_tests.models.document import Span
from policy_to_tests.utils.deontic import DeonticLexicon, default_lexicon, find_phrases
from policy_to_tests.utils.jsonl import read_json

logger = logging.getLogger(__name__)

_NUMBER_WORDS = (
    r"(?:\d+|one|two|three|four|five|six|seven|eight|nine|ten|eleven|twelve|"
    r"fifteen|twenty|thirty|forty-five|sixty|ninety)"
)
_UNIT = r"(?:calendar\s+|business\s+|working\s+)?(?:hours?|days?|weeks?|months?|years?)"
_MONTHS = r"(?:January|February|March|April|May|June|July|August|September|October|November|December)"

DEADLINE_RE = re.compile(
    rf"\b(?:within|no later than|not later than|for a period of(?:\s+at least)?|at least|"
    rf"not less than|not more than|every|each)\s+{_NUMBER_WORDS}\s+{_UNIT}\b"
    rf"|\b(?:no|not) later than\s+{_MONTHS}\s+\d{{1,2}},\s+\d{{4}}"
    rf"|\bby\s+{_MONTHS}\s+\d{{1,2}},\s+\d{{4}}"
    rf"|\b(?:annually|quarterly|monthly)\b",
    re.IGNORECASE,
)
THRESHOLD_RE = re.compile(
    rf"\b(?:at least|at most|more than|less than|fewer than|greater than|not less than|"
    rf"not more than|up to|exceeding|minimum of|maximum of)\s+\d+(?:[.,]\d+)?(?!\d)"
    rf"(?:\s*(?:%|percent\b|per cent\b))?(?!\s*{_UNIT}\b)"
    rf"|(?<![\d.,])\d+(?:\.\d+)?\s*(?:%|percent\b|per cent\b)",
    re.IGNORECASE,
)
CROSS_REF_RE = re.compile(
    r"\bArticles?\s+\d+[a-z]?(?:\(\d+\))*(?:\([a-z]\))*"
    r"|\b\d+\s+C\.?F\.?R\.?\s*(?:(?:Part|§+)\s*)?\d+(?:\.\d+)*(?:\([a-z0-9]+\))*"
    r"|\b\d+\s+U\.S\.C\.\s*§*\s*\d+\w*"
    r"|§+\s*\d+(?:\.\d+)*(?:\([a-z0-9]+\))*"
    r"|\b(?:Section|Sec\.)\s+\d+(?:\.\d+)*(?:\([a-z0-9]+\))*"
    r"|\bAnnex\s+[IVXLC]+\b",
)


@dataclass(frozen=True)
class MinerWeights:
    deontic: float = 3.0
    actor: float = 1.0
    quantitative: float = 1.0
    cross_ref: float = 1.0
    exception: float = 1.0
    definition: float = -3.0
    boilerplate: float = -3.0


@dataclass(frozen=True)
class MinerConfig:
    """임계값, 가중치, 어휘집. bypass 면 점수와 무관하게 모든 span 을 통과시킵니다."""

    threshold: float = 3.0
    weights: MinerWeights = field(default_factory=MinerWeights)
    lexicon: DeonticLexicon = field(default_factory=default_lexicon)
    bypass: bool = False

    @classmethod
    def load(cls, path: Path | None = None, bypass: bool = False) -> "MinerConfig":
        """miner.json {"threshold", "weights", "lexicon"} 을 읽습니다.

        lexicon 은 어휘집 파일 경로(설정 파일 기준 상대 경로) 또는 인라인 객체입니다.
        """
        if path is None:
            return cls(bypass=bypass)
        data = read_json(path)
        if not isinstance(data, dict):
            raise ConfigError(f"miner 설정은 JSON 객체여야 합니다: {path}")

        known = {f.name for f in fields(MinerWeights)}
        raw_weights = data.get("weights", {})
        unknown = sorted(set(raw_weights) - known)
        if unknown:
            raise ConfigError(f"알 수 없는 miner 가중치: {', '.join(unknown)}")

        lexicon_ref = data.get("lexicon")
        if isinstance(lexicon_ref, dict):
            lexicon = DeonticLexicon.from_dict(lexicon_ref)
        elif isinstance(lexicon_ref, str):
            lexicon = DeonticLexicon.load(Path(path).parent / lexicon_ref)
        else:
            lexicon = default_lexicon()

        return cls(
            threshold=float(data.get("threshold", 3.0)),
            weights=MinerWeights(**{k: float(v) for k, v in raw_weights.items()}),
            lexicon=lexicon,
            bypass=bool(data.get("bypass", bypass)),
        )


# ─── 지표 / 분류 ────────────────────────────────────────────────────────


def _matches(pattern: re.Pattern[str], text: str) -> list[str]:
    found: list[str] = []
    for match in pattern.finditer(text):
        value = match.group(0).strip().rstrip(".,;")
        if value and value not in found:
            found.append(value)
    return found


def extract_indicators(span: Span | str) -> tuple[list[str], list[str], list[str]]:
    """(deadlines, thresholds, cross_refs)."""
    text = span.text if isinstance(span, Span) else span
    return _matches(DEADLINE_RE, text), _matches(THRESHOLD_RE, text), _matches(CROSS_REF_RE, text)


def classify_clause(span: Span | str, lexicon: DeonticLexicon | None = None) -> ClauseType:
    """우선순위 규칙으로 조항 유형 하나를 고릅니다.

    prohibition > exception(단서 + 의무) > exemption > obligation > definition > other
    """
    lex = lexicon or default_lexicon()
    text = span.text if isinstance(span, Span) else span
    negative = lex.negative_markers(text)
    positive = lex.positive_markers(text)

    if negative:
        return "prohibition"
    if find_phrases(lex.exception_cues, text) and positive:
        return "exception"
    if find_phrases(lex.exemption_cues, text):
        return "exemption"
    if positive:
        return "obligation"
    if find_phrases(lex.definition_cues, text):
        return "definition"
    return "other"


def score_span(
    span: Span, weights: MinerWeights | None = None, lexicon: DeonticLexicon | None = None
) -> tuple[float, dict[str, list[str]]]:
    """가중치 합 점수와 특징별 매치.

    Raises:
        PreconditionError: 빈 span.
    """
    if not span.text.strip():
        raise PreconditionError(f"빈 span 은 점수를 매길 수 없습니다: {span.span_id}")
    w = weights or MinerWeights()
    lex = lexicon or default_lexicon()
    text = span.text

    deadlines, thresholds, cross_refs = extract_indicators(text)
    hits: dict[str, list[str]] = {
        "deontic": lex.negative_markers(text) + lex.positive_markers(text),
        "actor": find_phrases(lex.actors, text),
        "quantitative": deadlines + thresholds,
        "cross_ref": cross_refs,
        "exception": find_phrases(lex.exception_cues, text) + find_phrases(lex.exemption_cues, text),
        "definition": find_phrases(lex.definition_cues, text),
        "boilerplate": find_phrases(lex.boilerplate_cues, text),
    }
    score = sum(getattr(w, feature) for feature, found in hits.items() if found)
    return float(score), hits


def _markers(hits: dict[str, list[str]]) -> tuple[str, ...]:
    ordered: list[str] = []
    for feature in ("deontic", "exception", "definition", "boilerplate"):
        for marker in hits[feature]:
            if marker not in ordered:
                ordered.append(marker)
    return tuple(ordered)


# ─── mine ───────────────────────────────────────────────────────────────


def mine(spans: list[Span], config: MinerConfig | None = None) -> list[Clause]:
    """후보 조항을 고릅니다. 결과는 span_id 순으로 정렬됩니다.

    bypass 모드에서는 모든 span 이 clause_type "other" 로 통과합니다.
    """
    config = config or MinerConfig()
    clauses: list[Clause] = []
    seen_texts: set[str] = set()

    for span in sorted(spans, key=lambda s: s.span_id):
        score, hits = score_span(span, config.weights, config.lexicon)
        deadlines, thresholds, cross_refs = extract_indicators(span)

        if config.bypass:
            clause_type: ClauseType = "other"
        else:
            if score < config.threshold:
                continue
            if span.text in seen_texts:
                logger.debug("중복 텍스트 span 제외: %s", span.span_id)
                continue
            seen_texts.add(span.text)
            clause_type = classify_clause(span, config.lexicon)

        clauses.append(
            Clause(
                span=span,
                clause_type=clause_type,
                markers=_markers(hits),
                deadlines=tuple(deadlines),
                thresholds=tuple(thresholds),
                cross_refs=tuple(cross_refs),
                score=max(0.0, score),
            )
        )

    logger.info(
        "후보 조항 %d개 / span %d개%s",
        len(clauses),
        len(spans),
        " (bypass)" if config.bypass else "",
    )
    return clauses
