"""후보 조항 데이터 모델."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

from policy_to_tests.models.document import Span

ClauseType = Literal["obligation", "prohibition", "exception", "exemption", "definition", "other"]
CLAUSE_TYPES: tuple[str, ...] = (
    "obligation",
    "prohibition",
    "exception",
    "exemption",
    "definition",
    "other",
)


@dataclass(frozen=True)
class Clause:
    """태그와 지표가 붙은 후보 조항."""

    span: Span
    clause_type: ClauseType
    markers: tuple[str, ...] = ()
    deadlines: tuple[str, ...] = ()
    thresholds: tuple[str, ...] = ()
    cross_refs: tuple[str, ...] = ()
    score: float = 0.0

    @property
    def span_id(self) -> str:
        return self.span.span_id

    @classmethod
    def from_dict(cls, data: dict) -> "Clause":
        return cls(
            span=Span.from_dict(data["span"]),
            clause_type=data.get("clause_type", "other"),
            markers=tuple(data.get("markers", [])),
            deadlines=tuple(data.get("deadlines", [])),
            thresholds=tuple(data.get("thresholds", [])),
            cross_refs=tuple(data.get("cross_refs", [])),
            score=float(data.get("score", 0.0)),
        )

    def to_dict(self) -> dict:
        return {
            "span": self.span.to_dict(),
            "clause_type": self.clause_type,
            "markers": list(self.markers),
            "deadlines": list(self.deadlines),
            "thresholds": list(self.thresholds),
            "cross_refs": list(self.cross_refs),
            "score": self.score,
        }
