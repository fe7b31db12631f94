"""데이터 모델 패키지."""

from policy_to_tests.models.clause import Clause
from policy_to_tests.models.document import Document, Section, Span
from policy_to_tests.models.evaluation import AgreementReport, GoldRecord, MetricsReport
from policy_to_tests.models.results import Conflict, DedupReport, ExampleSet, Merge, PredicateKey
from policy_to_tests.models.rule import Rule, Scope, SourceRef, SpanRef, Testability
from policy_to_tests.models.trace import Issue, RepairRecord, TraceRecord

__all__ = [
    "AgreementReport",
    "Clause",
    "Conflict",
    "DedupReport",
    "Document",
    "ExampleSet",
    "GoldRecord",
    "Issue",
    "Merge",
    "MetricsReport",
    "PredicateKey",
    "RepairRecord",
    "Rule",
    "Scope",
    "Section",
    "SourceRef",
    "Span",
    "SpanRef",
    "Testability",
    "TraceRecord",
]
