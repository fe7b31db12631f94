"""후보 조항 추출 테스트."""

import json
import tempfile
import unittest
from pathlib import Path

from policy_to_tests.exceptions import ConfigError, PreconditionError
from policy_to_tests.pipeline.clause_miner import (
    MinerConfig,
    classify_clause,
    extract_indicators,
    mine,
    score_span,
)
from tests.factories import make_span

SPANS = [
    make_span("d:001:001", "Intro text before any section."),
    make_span("d:002:001", "Covered entities must obtain authorization before disclosing PHI."),
    make_span("d:002:002", "Business associates shall not sell PHI."),
    make_span("d:002:003", "Covered entities must disclose PHI unless the individual objects."),
    make_span("d:003:001", "Protected health information means individually identifiable health information."),
    make_span("d:003:002", "This subpart does not apply to health plans."),
    make_span("d:004:001", "Providers should keep records within 30 days, see Article 12(1)."),
    make_span("d:004:002", "Copyright 2024. All rights reserved."),
]


class TestClassifyClause(unittest.TestCase):
    """classify_clause 함수 테스트."""

    def test_precedence(self) -> None:
        cases = {
            "Covered entities must obtain authorization.": "obligation",
            "Business associates shall not sell PHI.": "prohibition",
            "Entities must disclose PHI unless the individual objects.": "exception",
            "This subpart does not apply to health plans.": "exemption",
            "Protected health information means identifiable data.": "definition",
            "Intro text.": "other",
        }
        for text, expected in cases.items():
            with self.subTest(text):
                self.assertEqual(classify_clause(text), expected)


class TestIndicators(unittest.TestCase):
    """extract_indicators 함수 테스트."""

    def test_deadlines_and_cross_refs(self) -> None:
        deadlines, thresholds, refs = extract_indicators(
            "Providers must notify within 60 days and retain logs for at least six years, "
            "see Article 12(1) and 45 CFR 164.530."
        )
        self.assertEqual(deadlines, ["within 60 days", "at least six years"])
        self.assertEqual(thresholds, [])
        self.assertEqual(refs, ["Article 12(1)", "45 CFR 164.530"])

    def test_thresholds(self) -> None:
        _, thresholds, _ = extract_indicators("Fines of up to 4% of annual turnover apply.")
        self.assertEqual(thresholds, ["up to 4%"])


class TestMine(unittest.TestCase):
    """mine 함수 테스트."""

    def test_default_threshold_selection(self) -> None:
        clauses = mine(SPANS)
        self.assertEqual(
            [(c.span_id, c.clause_type) for c in clauses],
            [
                ("d:002:001", "obligation"),
                ("d:002:002", "prohibition"),
                ("d:002:003", "exception"),
                ("d:004:001", "obligation"),
            ],
        )

    def test_indicators_attached(self) -> None:
        clause = [c for c in mine(SPANS) if c.span_id == "d:004:001"][0]
        self.assertEqual(clause.deadlines, ("within 30 days",))
        self.assertEqual(clause.cross_refs, ("Article 12(1)",))
        self.assertIn("should", clause.markers)

    def test_threshold_monotonicity(self) -> None:
        previous = None
        for threshold in (-5.0, 0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 9.0):
            kept = {c.span_id for c in mine(SPANS, MinerConfig(threshold=threshold))}
            if previous is not None:
                self.assertLessEqual(kept, previous)
            previous = kept

    def test_bypass_keeps_everything_as_other(self) -> None:
        clauses = mine(SPANS, MinerConfig(bypass=True))
        self.assertEqual(len(clauses), len(SPANS))
        self.assertEqual({c.clause_type for c in clauses}, {"other"})

    def test_duplicate_text_dropped(self) -> None:
        text = "Vendors must log access."
        clauses = mine([make_span("d:009:002", text), make_span("d:009:001", text)])
        self.assertEqual([c.span_id for c in clauses], ["d:009:001"])

    def test_output_sorted_by_span_id(self) -> None:
        clauses = mine(list(reversed(SPANS)))
        ids = [c.span_id for c in clauses]
        self.assertEqual(ids, sorted(ids))

    def test_empty_span_precondition(self) -> None:
        with self.assertRaises(PreconditionError):
            score_span(make_span("d:001:001", "   "))

    def test_score_weights(self) -> None:
        score, hits = score_span(SPANS[1])
        self.assertEqual(score, 4.0)
        self.assertEqual(hits["deontic"], ["must"])
        self.assertEqual(hits["actor"], ["covered entities"])


class TestMinerConfig(unittest.TestCase):
    """MinerConfig.load 테스트."""

    def test_load_from_file(self) -> None:
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "miner.json"
            path.write_text(json.dumps({"threshold": 4, "weights": {"actor": 2}}), encoding="utf-8")
            config = MinerConfig.load(path)
        self.assertEqual(config.threshold, 4.0)
        self.assertEqual(config.weights.actor, 2.0)
        self.assertEqual(config.weights.deontic, 3.0)

    def test_unknown_weight(self) -> None:
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "miner.json"
            path.write_text(json.dumps({"weights": {"verbs": 1}}), encoding="utf-8")
            with self.assertRaises(ConfigError):
                MinerConfig.load(path)


if __name__ == "__main__":
    unittest.main()
