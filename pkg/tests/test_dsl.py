"""DSL 스키마 검증, 정규 시그니처, scope 정규화 테스트."""

import copy
import random
import unittest

from policy_to_tests.dsl.schema import validate_rule
from policy_to_tests.dsl.scope import ScopeVocabulary, normalize_scope, normalize_scope_with_flags
from policy_to_tests.dsl.signature import canonical_signature
from policy_to_tests.models.rule import Scope
from tests.factories import make_rule, rule_record


def _without(path: list[str]) -> dict:
    record = rule_record()
    target = record
    for key in path[:-1]:
        target = target[key]
    del target[path[-1]]
    return record


def _with(path: list[str], value) -> dict:
    record = rule_record()
    target = record
    for key in path[:-1]:
        target = target[key]
    target[path[-1]] = value
    return record


def _with_merge(spans) -> dict:
    record = rule_record()
    record["source"]["additional_spans"] = spans
    return record


# (이름, 후보, 기대 경로, 기대 종류)
INVALID_CASES = [
    ("missing rule_id", _without(["rule_id"]), "$.rule_id", "missing-required"),
    ("missing source", _without(["source"]), "$.source", "missing-required"),
    ("missing scope", _without(["scope"]), "$.scope", "missing-required"),
    ("missing requirement", _without(["requirement"]), "$.requirement", "missing-required"),
    ("missing is_testable", _without(["is_testable"]), "$.is_testable", "missing-required"),
    ("missing testability", _without(["testability"]), "$.testability", "missing-required"),
    ("missing source.doc", _without(["source", "doc"]), "$.source.doc", "missing-required"),
    ("missing source.citation", _without(["source", "citation"]), "$.source.citation", "missing-required"),
    ("missing source.span_id", _without(["source", "span_id"]), "$.source.span_id", "missing-required"),
    ("missing scope.actor", _without(["scope", "actor"]), "$.scope.actor", "missing-required"),
    (
        "missing evidence_signals",
        _without(["testability", "evidence_signals"]),
        "$.testability.evidence_signals",
        "missing-required",
    ),
    ("unknown top-level field", _with(["priority"], "p1"), "$.priority", "unknown-field"),
    ("unknown scope field", _with(["scope", "region"], ["eu"]), "$.scope.region", "unknown-field"),
    ("unknown source field", _with(["source", "page"], "3"), "$.source.page", "unknown-field"),
    ("unknown testability field", _with(["testability", "score"], 1), "$.testability.score", "unknown-field"),
    ("bad severity", _with(["severity"], "critical"), "$.severity", "enum-violation"),
    (
        "bad evidence signal",
        _with(["testability", "evidence_signals"], ["unit_test"]),
        "$.testability.evidence_signals[0]",
        "enum-violation",
    ),
    ("is_testable not boolean", _with(["is_testable"], "yes"), "$.is_testable", "wrong-type"),
    ("actor not array", _with(["scope", "actor"], "covered_entity"), "$.scope.actor", "wrong-type"),
    ("conditions not array", _with(["conditions"], "if requested"), "$.conditions", "wrong-type"),
    ("confidence above 1", _with(["confidence"], 1.5), "$.confidence", "constraint-violation"),
    ("empty requirement", _with(["requirement"], ""), "$.requirement", "constraint-violation"),
    ("rule_id not string", _with(["rule_id"], 42), "$.rule_id", "wrong-type"),
    (
        "merged span without span_id",
        _with_merge([{"citation": "A ¶2"}]),
        "$.source.additional_spans[0].span_id",
        "missing-required",
    ),
    ("evidence item not string", _with(["evidence"], [1]), "$.evidence[0]", "wrong-type"),
]


class TestValidateRule(unittest.TestCase):
    """validate_rule 함수 테스트."""

    def test_valid_rule(self) -> None:
        result = validate_rule(rule_record())
        self.assertTrue(result.ok, result.describe())

    def test_minimal_required_fields_only(self) -> None:
        record = {
            "rule_id": "r1",
            "source": {"doc": "d", "citation": "c", "span_id": "s"},
            "scope": {"actor": []},
            "requirement": "must log access",
            "is_testable": False,
            "testability": {"evidence_signals": []},
        }
        self.assertTrue(validate_rule(record).ok)

    def test_invalid_cases(self) -> None:
        self.assertEqual(len(INVALID_CASES), 25)
        for name, candidate, path, kind in INVALID_CASES:
            with self.subTest(name):
                result = validate_rule(candidate)
                self.assertFalse(result.ok)
                self.assertEqual(result.paths(), [path])
                self.assertEqual(result.violations[0].kind, kind)

    def test_non_object_reports_instead_of_raising(self) -> None:
        result = validate_rule(["not", "a", "rule"])
        self.assertFalse(result.ok)
        self.assertEqual(result.violations[0].kind, "wrong-type")

    def test_multiple_violations_sorted_by_path(self) -> None:
        record = rule_record(severity="urgent", priority="p1")
        self.assertEqual(validate_rule(record).paths(), ["$.priority", "$.severity"])

    def test_emitted_record_round_trips(self) -> None:
        rule = make_rule(conditions=("if requested",), evidence=("access log",))
        self.assertTrue(validate_rule(rule.to_dict()).ok)


class TestCanonicalSignature(unittest.TestCase):
    """canonical_signature 함수 테스트."""

    def test_excludes_identity_and_provenance(self) -> None:
        a = make_rule("a#r1", span_id="a", citation="A ¶1", confidence=0.2, signals=())
        b = make_rule("b#r1", span_id="b", citation="B ¶9", confidence=0.9, signals=("log_check",))
        self.assertEqual(canonical_signature(a), canonical_signature(b))

    def test_requirement_change_changes_signature(self) -> None:
        a = make_rule(requirement="must encrypt PHI at rest")
        b = make_rule(requirement="must encrypt PHI in transit")
        self.assertNotEqual(canonical_signature(a), canonical_signature(b))

    def test_case_whitespace_and_trailing_punctuation(self) -> None:
        a = make_rule(requirement="Must   Encrypt PHI at rest.")
        b = make_rule(requirement="must encrypt phi at rest")
        self.assertEqual(canonical_signature(a), canonical_signature(b))

    def test_signature_is_hex_sha256(self) -> None:
        signature = canonical_signature(make_rule())
        self.assertEqual(len(signature), 64)
        int(signature, 16)

    def test_order_invariance_randomized(self) -> None:
        rng = random.Random(20240611)
        words = ["phi", "logs", "vendor", "if requested", "for treatment", "in writing", "minors"]
        for _ in range(10_000):
            actor = tuple(rng.sample(words, rng.randint(0, 3)))
            domain = tuple(rng.sample(words, rng.randint(0, 3)))
            context = tuple(rng.sample(words, rng.randint(0, 3)))
            conditions = tuple(rng.sample(words, rng.randint(0, 4)))
            exceptions = tuple(rng.sample(words, rng.randint(0, 4)))
            original = make_rule(
                actor=actor, data_domain=domain, context=context,
                conditions=conditions, exceptions=exceptions,
            )
            shuffled = make_rule(
                "other#r2",
                actor=tuple(rng.sample(actor, len(actor))),
                data_domain=tuple(rng.sample(domain, len(domain))),
                context=tuple(rng.sample(context, len(context))),
                conditions=tuple(rng.sample(conditions, len(conditions))),
                exceptions=tuple(v.upper() + " " for v in rng.sample(exceptions, len(exceptions))),
            )
            self.assertEqual(canonical_signature(original), canonical_signature(shuffled))


class TestNormalizeScope(unittest.TestCase):
    """normalize_scope 함수 테스트."""

    def setUp(self) -> None:
        self.vocab = ScopeVocabulary.load()

    def test_maps_variants_and_sorts(self) -> None:
        rule = make_rule(actor=("Covered Entities", "business associate", "covered entity"))
        normalized = normalize_scope(rule, self.vocab)
        self.assertEqual(normalized.scope.actor, ("business_associate", "covered_entity"))

    def test_idempotent(self) -> None:
        rule = make_rule(
            actor=("Covered Entities", "Hospital"),
            data_domain=("Protected Health Information",),
            context=("Marketing",),
        )
        once = normalize_scope(rule, self.vocab)
        self.assertEqual(normalize_scope(once, self.vocab), once)

    def test_unmapped_terms_kept_and_flagged(self) -> None:
        rule = make_rule(actor=("Hospital",), data_domain=("phi",))
        normalized, unmapped = normalize_scope_with_flags(rule, self.vocab)
        self.assertEqual(normalized.scope.actor, ("Hospital",))
        self.assertEqual(unmapped, ["Hospital"])

    def test_empty_scope_stays_empty(self) -> None:
        rule = make_rule(actor=(), data_domain=(), context=())
        self.assertTrue(normalize_scope(rule, self.vocab).scope.is_empty())
        self.assertEqual(normalize_scope(rule, self.vocab).scope, Scope())

    def test_identity_vocabulary_only_dedups(self) -> None:
        rule = make_rule(actor=("b", "a", "b"))
        normalized = normalize_scope(rule, ScopeVocabulary.identity())
        self.assertEqual(normalized.scope.actor, ("a", "b"))

    def test_identity_vocabulary_folds_case_and_plural(self) -> None:
        rule = make_rule(actor=("Providers", "provider"))
        normalized, unmapped = normalize_scope_with_flags(rule, ScopeVocabulary.identity())
        self.assertEqual(normalized.scope.actor, ("provider",))
        self.assertEqual(unmapped, ["Providers", "provider"])
        self.assertEqual(normalize_scope(normalized, ScopeVocabulary.identity()), normalized)

    def test_case_variants_share_signature_after_normalization(self) -> None:
        vocab = ScopeVocabulary.identity()
        a = normalize_scope(make_rule("a#r1", actor=("Deployers", "deployer")), vocab)
        b = normalize_scope(make_rule("b#r1", actor=("deployer",)), vocab)
        self.assertEqual(canonical_signature(a), canonical_signature(b))

    def test_custom_vocabulary(self) -> None:
        vocab = ScopeVocabulary.from_dict({"Clinic": "health_care_provider"})
        rule = make_rule(actor=("clinics",))
        self.assertEqual(normalize_scope(rule, vocab).scope.actor, ("health_care_provider",))

    def test_input_rule_not_mutated(self) -> None:
        rule = make_rule(actor=("Covered Entities",))
        before = copy.deepcopy(rule.to_dict())
        normalize_scope(rule, self.vocab)
        self.assertEqual(rule.to_dict(), before)


if __name__ == "__main__":
    unittest.main()
