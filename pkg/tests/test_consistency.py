"""모순 검사 테스트."""

import random
import sys
import unittest
from unittest import mock

from policy_to_tests.exceptions import PreconditionError
from policy_to_tests.models.rule import Scope
from policy_to_tests.pipeline.consistency import (
    export_smtlib,
    find_conflicts,
    requirement_predicate,
    scopes_overlap,
    shared_scope,
    solve_pair,
)
from tests.factories import make_rule

FILLER_OBJECTS = (
    "invoices", "badges", "laptops", "contracts", "tickets", "firmware", "vouchers", "keys",
    "manifests", "receipts", "payroll", "schedules", "licenses", "certificates", "routers",
    "printers", "backups", "passwords", "tokens", "roles", "budgets", "forms", "templates",
    "dashboards", "alerts", "sensors", "cameras", "kiosks", "pagers", "phones", "tablets",
    "servers", "switches", "cables", "lockers", "vehicles", "uniforms", "visitors", "drills",
    "audits", "surveys", "minutes", "agendas", "memos",
)


def _planted_fixture() -> list:
    """50개 규칙: require/forbid 쌍 3개(그중 하나는 actor 가 달라 막힘) + require 44개."""
    rules = [
        make_rule("c-p0001#r1", requirement="must encrypt PHI at rest"),
        make_rule("c-p0002#r1", requirement="must not encrypt PHI at rest"),
        make_rule("c-p0003#r1", actor=("vendor",), data_domain=(), requirement="shall retain audit logs"),
        make_rule("c-p0004#r1", actor=("vendor",), data_domain=("logs",), requirement="shall not retain audit logs"),
        make_rule("c-p0005#r1", actor=("covered_entity",), requirement="must share incident reports"),
        make_rule("c-p0006#r1", actor=("business_associate",), requirement="must not share incident reports"),
    ]
    rules += [
        make_rule(f"f-p{n:04d}#r1", requirement=f"must inventory {obj}")
        for n, obj in enumerate(FILLER_OBJECTS, start=1)
    ]
    return rules


class TestScopeHelpers(unittest.TestCase):
    """범위 교집합 테스트."""

    def test_empty_axis_is_unrestricted(self) -> None:
        a = Scope(actor=("vendor",), data_domain=(), context=())
        b = Scope(actor=("vendor", "provider"), data_domain=("logs",), context=("cloud",))
        self.assertTrue(scopes_overlap(a, b))
        self.assertEqual(shared_scope(a, b), Scope(actor=("vendor",), data_domain=("logs",), context=("cloud",)))

    def test_disjoint_axis(self) -> None:
        self.assertFalse(scopes_overlap(Scope(actor=("vendor",)), Scope(actor=("provider",))))


class TestRequirementPredicate(unittest.TestCase):
    """술어 추출 테스트."""

    def test_polarity_and_tokens(self) -> None:
        require = requirement_predicate(make_rule(requirement="Must encrypt PHI at rest."))
        noisy = requirement_predicate(make_rule(requirement="shall never encrypt PHI at rest, not ever"))
        self.assertEqual(require.polarity, "require")
        self.assertEqual(require.tokens, frozenset({"encrypt", "phi", "rest"}))
        self.assertEqual(requirement_predicate(make_rule(requirement="must not encrypt PHI at rest")).polarity, "forbid")
        self.assertEqual(noisy.tokens, frozenset({"encrypt", "phi", "rest", "ever"}))

    def test_modal_only_requirement(self) -> None:
        with self.assertRaises(PreconditionError):
            requirement_predicate(make_rule(requirement="must not"))


class TestFindConflicts(unittest.TestCase):
    """find_conflicts 테스트."""

    def test_direct_negation(self) -> None:
        rules = [
            make_rule("a#r1", requirement="must encrypt PHI at rest"),
            make_rule("b#r1", requirement="must not encrypt PHI at rest"),
        ]
        conflicts = find_conflicts(rules)
        self.assertEqual(len(conflicts), 1)
        self.assertEqual((conflicts[0].rule_a, conflicts[0].rule_b), ("a#r1", "b#r1"))
        self.assertEqual(conflicts[0].predicate, ("encrypt", "phi", "rest"))
        self.assertEqual(conflicts[0].shared_scope, Scope(actor=("covered_entity",), data_domain=("phi",)))

    def test_disjoint_actors(self) -> None:
        rules = [
            make_rule("a#r1", actor=("vendor",), requirement="must encrypt PHI at rest"),
            make_rule("b#r1", actor=("provider",), requirement="must not encrypt PHI at rest"),
        ]
        self.assertEqual(find_conflicts(rules), [])

    def test_strict_mode_respects_guards(self) -> None:
        rules = [
            make_rule("a#r1", requirement="must disclose PHI", conditions=("emergency treatment",)),
            make_rule("b#r1", requirement="must not disclose PHI"),
        ]
        self.assertEqual(len(find_conflicts(rules, condition_mode="ignore")), 1)
        self.assertEqual(find_conflicts(rules, condition_mode="strict"), [])

    def test_unknown_condition_mode(self) -> None:
        with self.assertRaises(PreconditionError):
            find_conflicts([], condition_mode="lenient")

    def test_planted_fixture(self) -> None:
        rules = _planted_fixture()
        self.assertEqual(len(rules), 50)

        conflicts = find_conflicts(rules)

        self.assertEqual(
            [(c.rule_a, c.rule_b) for c in conflicts],
            [("c-p0001#r1", "c-p0002#r1"), ("c-p0003#r1", "c-p0004#r1")],
        )
        self.assertEqual(conflicts[1].shared_scope, Scope(actor=("vendor",), data_domain=("logs",)))

    def test_order_independent(self) -> None:
        rules = _planted_fixture()
        expected = [c.to_dict() for c in find_conflicts(rules)]
        rng = random.Random(7)
        for _ in range(5):
            rng.shuffle(rules)
            self.assertEqual([c.to_dict() for c in find_conflicts(rules)], expected)

    def test_all_require_has_no_conflicts(self) -> None:
        rules = [r for r in _planted_fixture() if "not" not in r.requirement.split()]
        rules.append(make_rule("x#r1", requirement="must encrypt PHI at rest"))
        self.assertEqual(find_conflicts(rules), [])
        self.assertEqual(find_conflicts(rules, condition_mode="strict"), [])

    def test_modal_only_rule_is_skipped(self) -> None:
        rules = [make_rule("a#r1", requirement="must not"), make_rule("b#r1", requirement="must")]
        self.assertEqual(find_conflicts(rules), [])


class TestSmt(unittest.TestCase):
    """SMT-LIB2 내보내기와 만족 가능성 판정 테스트."""

    def setUp(self) -> None:
        self.guarded = [
            make_rule("a#r1", requirement="must disclose PHI", conditions=("emergency treatment",)),
            make_rule("b#r1", requirement="must not disclose PHI"),
        ]
        self.conflict = find_conflicts(self.guarded)[0]

    def test_export(self) -> None:
        text = export_smtlib(self.conflict, self.guarded)
        self.assertIn("(set-logic QF_UF)", text)
        self.assertIn("(declare-const g1 Bool) ; emergency treatment", text)
        self.assertIn("(assert (=> g1 p)) ; a#r1", text)
        self.assertIn("(assert (=> true (not p))) ; b#r1", text)
        self.assertTrue(text.endswith("(check-sat)\n"))

    def test_export_unknown_rule(self) -> None:
        with self.assertRaises(PreconditionError):
            export_smtlib(self.conflict, self.guarded[:1])

    def test_guarded_pair_can_be_jointly_in_force(self) -> None:
        self.assertTrue(solve_pair(self.conflict, self.guarded))
        with mock.patch.dict(sys.modules, {"z3": None}):
            self.assertTrue(solve_pair(self.conflict, self.guarded))

    def test_exception_excludes_condition(self) -> None:
        rules = [
            make_rule("a#r1", requirement="must disclose PHI", conditions=("emergency treatment",)),
            make_rule("b#r1", requirement="must not disclose PHI", exceptions=("emergency treatment",)),
        ]
        conflict = find_conflicts(rules)[0]
        self.assertFalse(solve_pair(conflict, rules))
        with mock.patch.dict(sys.modules, {"z3": None}):
            self.assertFalse(solve_pair(conflict, rules))


if __name__ == "__main__":
    unittest.main()
