"""규칙 간 모순 검사.

겹치는 범위에서 같은 술어를 한 규칙은 요구(require)하고 다른 규칙은
금지(forbid)하는 쌍을 찾습니다. 판정 자체는 결정 가능한 조각
(범위 교집합 + 술어 토큰 동일 + 극성 반대)으로 하고, 외부 solver 용으로
쌍을 SMT-LIB2 문제로 내보내는 훅을 둡니다.
"""

from __future__ import annotations

import itertools
import logging
from collections import defaultdict
from typing import Literal

from policy_to_tests.exceptions import PreconditionError
from policy_to_tests.models.results import Conflict, PredicateKey
from policy_to_tests.models.rule import Rule, Scope
from policy_to_tests.utils.deontic import DeonticLexicon, default_lexicon, phrase_pattern
from policy_to_tests.utils.text import STOPWORDS, normalize_text, word_tokens

logger = logging.getLogger(__name__)

ConditionMode = Literal["ignore", "strict"]

NEGATION_PARTICLES: frozenset[str] = frozenset({"not", "no", "never", "nor", "cannot"})
MODAL_WORDS: frozenset[str] = frozenset(
    {"shall", "must", "may", "should", "will", "required", "prohibited", "forbidden"}
)


# ─── 범위 / 술어 ────────────────────────────────────────────────────────


def _axis_overlap(a: tuple[str, ...], b: tuple[str, ...]) -> bool:
    return not a or not b or bool(set(a) & set(b))


def scopes_overlap(a: Scope, b: Scope) -> bool:
    """세 축이 모두 겹치면 True. 빈 축은 '제한 없음'입니다."""
    return (
        _axis_overlap(a.actor, b.actor)
        and _axis_overlap(a.data_domain, b.data_domain)
        and _axis_overlap(a.context, b.context)
    )


def _axis_intersection(a: tuple[str, ...], b: tuple[str, ...]) -> tuple[str, ...]:
    if not a:
        return tuple(sorted(set(b)))
    if not b:
        return tuple(sorted(set(a)))
    return tuple(sorted(set(a) & set(b)))


def shared_scope(a: Scope, b: Scope) -> Scope:
    return Scope(
        actor=_axis_intersection(a.actor, b.actor),
        data_domain=_axis_intersection(a.data_domain, b.data_domain),
        context=_axis_intersection(a.context, b.context),
    )


def requirement_predicate(rule: Rule, lexicon: DeonticLexicon | None = None) -> PredicateKey:
    """요구사항의 (극성, 내용 토큰).

    Raises:
        PreconditionError: 의무 표현/불용어/부정어를 빼고 남는 토큰이 없을 때.
    """
    lex = lexicon or default_lexicon()
    text = normalize_text(rule.requirement)
    polarity = "forbid" if lex.negative_markers(text) else "require"

    for marker in sorted((*lex.deontic_negative, *lex.deontic_positive), key=len, reverse=True):
        text = phrase_pattern(marker).sub(" ", text)
    tokens = frozenset(
        t for t in word_tokens(text)
        if t not in STOPWORDS and t not in NEGATION_PARTICLES and t not in MODAL_WORDS
    )
    if not tokens:
        raise PreconditionError(f"요구사항에 내용 토큰이 없습니다: {rule.rule_id}")
    return PredicateKey(tokens=tokens, polarity=polarity)


def _guards(rule: Rule) -> frozenset[str]:
    return frozenset(normalize_text(g) for g in (*rule.conditions, *rule.exceptions))


# ─── find_conflicts ─────────────────────────────────────────────────────


def find_conflicts(
    rules: list[Rule],
    condition_mode: ConditionMode = "ignore",
    lexicon: DeonticLexicon | None = None,
) -> list[Conflict]:
    """require/forbid 모순 쌍. 결과는 (rule_a, rule_b) 순으로 정렬됩니다.

    strict 모드에서는 두 규칙의 conditions+exceptions 집합이 다르면 건너뜁니다.
    술어 토큰 집합으로 블록을 나눠 블록 안에서만 쌍을 봅니다.
    """
    if condition_mode not in ("ignore", "strict"):
        raise PreconditionError(f"알 수 없는 condition_mode: {condition_mode}")

    blocks: dict[frozenset[str], list[tuple[Rule, PredicateKey]]] = defaultdict(list)
    for rule in sorted(rules, key=lambda r: r.rule_id):
        try:
            key = requirement_predicate(rule, lexicon)
        except PreconditionError as e:
            logger.warning("모순 검사에서 제외: %s", e)
            continue
        blocks[key.tokens].append((rule, key))

    conflicts: list[Conflict] = []
    for tokens, members in blocks.items():
        for (rule_a, key_a), (rule_b, key_b) in itertools.combinations(members, 2):
            if key_a.polarity == key_b.polarity:
                continue
            if not scopes_overlap(rule_a.scope, rule_b.scope):
                continue
            if condition_mode == "strict" and _guards(rule_a) != _guards(rule_b):
                logger.debug("strict: 조건이 달라 건너뜀 %s / %s", rule_a.rule_id, rule_b.rule_id)
                continue
            shared = shared_scope(rule_a.scope, rule_b.scope)
            if shared.is_empty():
                continue
            conflicts.append(
                Conflict(
                    rule_a=rule_a.rule_id,
                    rule_b=rule_b.rule_id,
                    shared_scope=shared,
                    predicate=tuple(sorted(tokens)),
                )
            )

    conflicts.sort(key=lambda c: (c.rule_a, c.rule_b))
    logger.info("모순 %d건 (규칙 %d개, %s 모드)", len(conflicts), len(rules), condition_mode)
    return conflicts


# ─── SMT 내보내기 ───────────────────────────────────────────────────────


def _guard_atoms(rule_a: Rule, rule_b: Rule) -> dict[str, str]:
    names: dict[str, str] = {}
    for text in (*rule_a.conditions, *rule_a.exceptions, *rule_b.conditions, *rule_b.exceptions):
        key = normalize_text(text)
        names.setdefault(key, f"g{len(names) + 1}")
    return names


def _in_force(rule: Rule, atoms: dict[str, str]) -> list[tuple[str, bool]]:
    """규칙이 적용되는 조건: 모든 condition 참, 모든 exception 거짓."""
    literals = [(atoms[normalize_text(c)], True) for c in rule.conditions]
    literals += [(atoms[normalize_text(e)], False) for e in rule.exceptions]
    return literals


def _smt_literal(name: str, positive: bool) -> str:
    return name if positive else f"(not {name})"


def _smt_and(literals: list[tuple[str, bool]]) -> str:
    if not literals:
        return "true"
    if len(literals) == 1:
        return _smt_literal(*literals[0])
    return "(and " + " ".join(_smt_literal(*lit) for lit in literals) + ")"


def _pair(conflict: Conflict, rules: list[Rule]) -> tuple[Rule, Rule]:
    by_id = {r.rule_id: r for r in rules}
    try:
        return by_id[conflict.rule_a], by_id[conflict.rule_b]
    except KeyError as e:
        raise PreconditionError(f"모순 쌍의 규칙을 찾을 수 없습니다: {e}") from e


def export_smtlib(conflict: Conflict, rules: list[Rule], lexicon: DeonticLexicon | None = None) -> str:
    """모순 쌍을 SMT-LIB2 문제로 렌더링합니다.

    술어 p 하나와 조건/예외 문구마다 불리언 g1.. 를 선언하고, 두 규칙이 동시에
    적용되는 상황에서 p 와 (not p) 가 함께 요구되는지 묻습니다. unsat 이면 모순입니다.
    """
    rule_a, rule_b = _pair(conflict, rules)
    atoms = _guard_atoms(rule_a, rule_b)
    lex = lexicon or default_lexicon()

    lines = [
        f"; conflict {conflict.rule_a} vs {conflict.rule_b}",
        f"; predicate: {' '.join(conflict.predicate)}",
        "(set-logic QF_UF)",
        "(declare-const p Bool)",
    ]
    for text, name in atoms.items():
        lines.append(f"(declare-const {name} Bool) ; {text}")
    for rule in (rule_a, rule_b):
        head = "p" if requirement_predicate(rule, lex).polarity == "require" else "(not p)"
        lines.append(f"(assert (=> {_smt_and(_in_force(rule, atoms))} {head})) ; {rule.rule_id}")
    both = _in_force(rule_a, atoms) + _in_force(rule_b, atoms)
    lines.append(f"(assert {_smt_and(both)})")
    lines.append("(check-sat)")
    return "\n".join(lines) + "\n"


def _jointly_in_force_truth_table(literals: list[tuple[str, bool]]) -> bool:
    names = sorted({name for name, _ in literals})
    for values in itertools.product((False, True), repeat=len(names)):
        assignment = dict(zip(names, values))
        if all(assignment[name] == positive for name, positive in literals):
            return True
    return False


def solve_pair(conflict: Conflict, rules: list[Rule], lexicon: DeonticLexicon | None = None) -> bool:
    """두 규칙이 동시에 적용될 수 있으면(= p 와 not p 가 함께 강제되면) True.

    z3 가 설치되어 있으면 z3 로, 아니면 조건 불리언 전수 진리표로 판정합니다.
    """
    rule_a, rule_b = _pair(conflict, rules)
    lex = lexicon or default_lexicon()
    atoms = _guard_atoms(rule_a, rule_b)
    literals = _in_force(rule_a, atoms) + _in_force(rule_b, atoms)

    try:
        import z3
    except ImportError:
        return _jointly_in_force_truth_table(literals)

    p = z3.Bool("p")
    variables = {name: z3.Bool(name) for name in atoms.values()}

    def _active(rule: Rule) -> z3.BoolRef:
        terms = [variables[n] if pos else z3.Not(variables[n]) for n, pos in _in_force(rule, atoms)]
        return z3.And(*terms) if terms else z3.BoolVal(True)

    solver = z3.Solver()
    solver.add(_active(rule_a), _active(rule_b))
    if solver.check() != z3.sat:
        return False
    for rule in (rule_a, rule_b):
        head = p if requirement_predicate(rule, lex).polarity == "require" else z3.Not(p)
        solver.add(z3.Implies(_active(rule), head))
    return solver.check() == z3.unsat
