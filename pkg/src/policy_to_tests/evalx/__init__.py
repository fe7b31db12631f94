"""평가 하네스: 매칭, 지표, 일치도, bootstrap, 위반율 사례 연구."""

from policy_to_tests.evalx.agreement import cohen_kappa, compute_agreement, krippendorff_alpha
from policy_to_tests.evalx.bootstrap import bootstrap_ci
from policy_to_tests.evalx.casestudy import case_study_rates, judge_responses
from policy_to_tests.evalx.matching import match_spans
from policy_to_tests.evalx.metrics import (
    coverage,
    slot_similarity,
    span_auprc,
    span_prf,
    testable_accuracy,
)
from policy_to_tests.evalx.report import evaluate

__all__ = [
    "bootstrap_ci",
    "case_study_rates",
    "cohen_kappa",
    "compute_agreement",
    "coverage",
    "evaluate",
    "judge_responses",
    "krippendorff_alpha",
    "match_spans",
    "slot_similarity",
    "span_auprc",
    "span_prf",
    "testable_accuracy",
]
