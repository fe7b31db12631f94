"""스키마 기반 규칙 추출.

조항마다 extract → judge → repair → evidence gate → counterfactual probe 를
순서대로 실행하고, 조항별 TraceRecord 를 남깁니다.

- 모델이 준 provenance(rule_id, source)는 항상 버리고 파이프라인 값으로 덮어씁니다.
- 스키마 위반이면 위반 경로를 프롬프트에 붙여 최대 max_retries 번 다시 요청합니다.
- repair 는 스키마 통과 + source 동일 + 변경 필드 수 ≤ max_edit_fields 일 때만 채택합니다.
- judge 결과는 repair 만 유발하고 그 자체로 규칙을 거르지 않습니다.
- gate 실패 규칙은 trace 에 표시하고 기본적으로 하위 단계에서 제외합니다.
"""

from __future__ import annotations

import dataclasses
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fnmatch import fnmatch
from typing import Any

from policy_to_tests.dsl.schema import RULE_SCHEMA, validate_rule
from policy_to_tests.dsl.scope import ScopeVocabulary, normalize_scope_with_flags
from policy_to_tests.exceptions import PreconditionError, ProviderError, StageError
from policy_to_tests.models.clause import Clause
from policy_to_tests.models.rule import Rule
from policy_to_tests.models.trace import ISSUE_CODES, Issue, ProbeOutcome, RepairRecord, TraceRecord
from policy_to_tests.services.base import TextProvider, parse_json_payload
from policy_to_tests.utils.deontic import DeonticLexicon, default_lexicon
from policy_to_tests.utils.jsonl import dumps
from policy_to_tests.utils.log_format import SKIP_LEVEL

logger = logging.getLogger(__name__)

NO_EVIDENCE_SIGNAL = "no evidence signal"


@dataclass(frozen=True)
class GateConfig:
    enabled: bool = True
    trusted_evidence: tuple[str, ...] = ()


@dataclass(frozen=True)
class ExtractOptions:
    """단계 토글과 한도."""

    judge: bool = True
    repair: bool = True
    probe: bool = True
    gate: GateConfig = field(default_factory=GateConfig)
    keep_gated: bool = False
    max_retries: int = 2
    repair_rounds: int = 1
    max_edit_fields: int = 3
    seed: int = 1
    model_paraphrases: bool = False


@dataclass
class ExtractOutput:
    """extract 단계 산출물 (span_id 순)."""

    rules: list[Rule] = field(default_factory=list)
    gated: list[Rule] = field(default_factory=list)
    traces: list[TraceRecord] = field(default_factory=list)


# ─── extract_rules ──────────────────────────────────────────────────────


def _provenance(clause: Clause) -> dict:
    span = clause.span
    return {"doc": span.doc_id, "citation": span.citation, "span_id": span.span_id}


def _candidates(text: str) -> tuple[list[Any], list[str]]:
    """응답을 후보 목록으로 바꿉니다. 실패하면 (빈 목록, 위반 설명)."""
    try:
        parsed = parse_json_payload(text)
    except ValueError as e:
        return [], [f"$: wrong-type (response is not JSON: {e})"]
    if isinstance(parsed, dict):
        parsed = [parsed]
    if not isinstance(parsed, list):
        return [], ["$: wrong-type (response must be a JSON array of rules)"]
    return parsed, []


def extract_rules(
    clause: Clause,
    provider: TextProvider,
    few_shot: list[dict],
    vocab: ScopeVocabulary | None = None,
    seed: int = 1,
    max_retries: int = 2,
    context: str = "",
) -> tuple[list[Rule], TraceRecord]:
    """조항 하나에서 원자 규칙을 추출합니다.

    provider 실패 시 예외 대신 trace.status = "skipped" 로 표시하고 빈 목록을 반환합니다.
    """
    vocab = vocab or ScopeVocabulary.identity()
    trace = TraceRecord(span_id=clause.span_id)
    payload = {
        "schema": RULE_SCHEMA,
        "few_shot": few_shot,
        "clause": clause.span.text,
        "context": context or "(none)",
        "clause_type": clause.clause_type,
    }

    suffix = ""
    valid: list[dict] = []
    for attempt in range(1, max_retries + 2):
        trace.attempts = attempt
        try:
            response = provider.ask("extract", payload, seed=seed, suffix=suffix)
        except ProviderError as e:
            logger.warning("조항 %s 추출 실패, 건너뜁니다: %s", clause.span_id, e)
            trace.status = "skipped"
            trace.error = str(e)
            return [], trace

        candidates, problems = _candidates(response.text)
        valid = []
        for n, candidate in enumerate(candidates, start=1):
            if not isinstance(candidate, dict):
                problems.append(f"$[{n}]: wrong-type (rule must be a JSON object)")
                continue
            record = dict(candidate)
            record["rule_id"] = f"{clause.span_id}#r{n}"
            record["source"] = _provenance(clause)
            record.setdefault("confidence", provider.default_confidence)
            result = validate_rule(record)
            if result.ok:
                valid.append(record)
            else:
                problems.extend(f"rule {n} {v}" for v in result.violations)

        if not problems:
            break
        trace.add_issue("schema_invalid", "; ".join(problems))
        suffix = "Your previous answer violated the schema. Fix these problems:\n" + "\n".join(
            f"- {p}" for p in problems
        )
        logger.debug("조항 %s 스키마 위반 %d건 (시도 %d)", clause.span_id, len(problems), attempt)

    rules: list[Rule] = []
    for record in valid:
        rule, unmapped = normalize_scope_with_flags(Rule.from_dict(record), vocab)
        rules.append(rule)
        trace.scope_flags.extend(u for u in unmapped if u not in trace.scope_flags)
    return rules, trace


# ─── judge / repair ─────────────────────────────────────────────────────


def precheck_issues(rule: Rule) -> list[Issue]:
    """모델 호출 없이 판정하는 결정적 검사."""
    issues = []
    if not rule.hazard.strip():
        issues.append(Issue("missing_hazard", f"{rule.rule_id}: hazard is empty"))
    if rule.scope.is_empty():
        issues.append(Issue("empty_scope", f"{rule.rule_id}: actor, data_domain and context are all empty"))
    if rule.is_testable and not rule.testability.evidence_signals:
        issues.append(
            Issue("unverifiable_evidence", f"{rule.rule_id}: testable rule without evidence signals")
        )
    return issues


def judge_rule(rule: Rule, clause: Clause, provider: TextProvider, seed: int = 1) -> list[Issue]:
    """결정적 사전 검사 + 모델 judge. 읽을 수 없는 judge 출력은 모델 issue 0건으로 봅니다."""
    issues = precheck_issues(rule)
    seen = {i.code for i in issues}
    try:
        response = provider.ask("judge", {"rule": rule.to_dict(), "clause": clause.span.text}, seed=seed)
        parsed = parse_json_payload(response.text)
    except ProviderError as e:
        logger.warning("judge 호출 실패 (%s): %s", rule.rule_id, e)
        return issues
    except ValueError:
        logger.warning("judge 출력을 읽을 수 없어 무시합니다 (%s)", rule.rule_id)
        return issues

    if isinstance(parsed, dict):
        parsed = parsed.get("issues", [parsed])
    for item in parsed if isinstance(parsed, list) else []:
        if not isinstance(item, dict):
            continue
        code, detail = item.get("code"), str(item.get("detail", "")).strip()
        if code not in ISSUE_CODES or not detail or code in seen:
            continue
        issues.append(Issue(code, detail))
        seen.add(code)
    return issues


def _reject(trace: TraceRecord | None, rule: Rule, reason: str) -> Rule:
    logger.log(SKIP_LEVEL, "repair 거부 (%s): %s", rule.rule_id, reason)
    if trace is not None:
        trace.repair_rejections.append(f"{rule.rule_id}: {reason}")
    return rule


def repair_rule(
    rule: Rule,
    issues: list[Issue],
    clause: Clause,
    provider: TextProvider,
    seed: int = 1,
    max_edit_fields: int = 3,
    trace: TraceRecord | None = None,
) -> Rule:
    """최소 수정 repair. 채택 조건을 어기면 원본을 그대로 반환합니다.

    Raises:
        PreconditionError: issues 가 비었을 때.
    """
    if not issues:
        raise PreconditionError("repair 에는 issue 가 하나 이상 필요합니다")

    def _attempt_record() -> None:
        if trace is not None:
            trace.repairs.append(RepairRecord(path="$", before=None, after=None, accepted=False))

    payload = {
        "rule": rule.to_dict(),
        "issues": [i.to_dict() for i in issues],
        "clause": clause.span.text,
        "max_edit_fields": max_edit_fields,
    }
    try:
        response = provider.ask("repair", payload, seed=seed)
        candidate = parse_json_payload(response.text)
    except ProviderError as e:
        _attempt_record()
        return _reject(trace, rule, f"provider error: {e}")
    except ValueError:
        _attempt_record()
        return _reject(trace, rule, "unparseable repair output")

    if not isinstance(candidate, dict):
        _attempt_record()
        return _reject(trace, rule, "repair output is not a JSON object")

    result = validate_rule(candidate)
    if not result.ok:
        _attempt_record()
        return _reject(trace, rule, "schema-invalid: " + "; ".join(result.describe()))

    original = rule.to_dict()
    repaired = Rule.from_dict(candidate).to_dict()
    changed = [key for key in original if original[key] != repaired[key]]
    provenance_ok = (
        dumps(candidate.get("source")) == dumps(original["source"])
        and candidate.get("rule_id") == rule.rule_id
    )
    accepted = provenance_ok and 0 < len(changed) <= max_edit_fields

    if trace is not None:
        if changed:
            trace.repairs.extend(
                RepairRecord(path=f"$.{key}", before=original[key], after=repaired[key], accepted=accepted)
                for key in changed
            )
        else:
            _attempt_record()

    if not provenance_ok:
        return _reject(trace, rule, "provenance changed")
    if not changed:
        return _reject(trace, rule, "no change")
    if len(changed) > max_edit_fields:
        return _reject(trace, rule, f"edit budget exceeded ({len(changed)} > {max_edit_fields})")

    logger.debug("repair 채택 (%s): %s", rule.rule_id, ", ".join(changed))
    return Rule.from_dict(candidate)


# ─── evidence gate ──────────────────────────────────────────────────────


def evidence_gate(rule: Rule, config: GateConfig) -> tuple[bool, str]:
    """검증 가능성 게이트. (통과 여부, 사유)."""
    if not config.enabled:
        return True, "gate disabled"
    if rule.is_testable and not rule.testability.evidence_signals:
        return False, NO_EVIDENCE_SIGNAL
    if config.trusted_evidence:
        for artifact in rule.evidence:
            if not any(fnmatch(artifact.lower(), p.lower()) for p in config.trusted_evidence):
                return False, f"untrusted evidence: {artifact}"
    return True, "ok"


# ─── counterfactual probe ───────────────────────────────────────────────


def _flipped(clause: Clause, text: str) -> Clause:
    return dataclasses.replace(clause, span=dataclasses.replace(clause.span, text=text))


def counterfactual_probe(
    clause: Clause,
    rule: Rule,
    provider: TextProvider,
    few_shot: list[dict] | None = None,
    seed: int = 1,
    lexicon: DeonticLexicon | None = None,
    model_paraphrases: bool = False,
) -> ProbeOutcome:
    """극성을 뒤집은 조항을 다시 추출해 규칙 극성도 뒤집히는지 봅니다.

    의무 표현이 없으면 "skipped". 재추출 규칙 중 하나라도 요구사항 극성이
    원래 규칙과 다르면 "stable", 아니면 "fragile".
    model_paraphrases 면 뒤집은 조항의 모델 paraphrase 도 모두 뒤집혀야 stable 입니다.
    """
    lex = lexicon or default_lexicon()
    if not lex.has_deontic(clause.span.text):
        return "skipped"

    original = lex.polarity(rule.requirement) or lex.polarity(clause.span.text)
    variants = [lex.flip_polarity(clause.span.text)]
    if model_paraphrases:
        try:
            response = provider.ask("paraphrase", {"clause": variants[0]}, seed=seed)
            parsed = parse_json_payload(response.text)
            variants.extend(
                str(p) for p in (parsed.get("paraphrases", []) if isinstance(parsed, dict) else parsed)
            )
        except (ProviderError, ValueError) as e:
            logger.debug("paraphrase 생략 (%s): %s", clause.span_id, e)

    for text in variants:
        rules, trace = extract_rules(_flipped(clause, text), provider, few_shot or [], seed=seed, max_retries=0)
        if trace.status == "skipped":
            return "skipped"
        if not any(lex.polarity(r.requirement) != original for r in rules):
            return "fragile"
    return "stable"


# ─── 조항 단위 실행 ─────────────────────────────────────────────────────


def _assert_provenance(rules: list[Rule], clause: Clause) -> None:
    expected = (clause.span.doc_id, clause.span.citation, clause.span_id)
    for rule in rules:
        if rule.source.provenance_key() != expected:
            raise StageError(f"provenance 불일치: {rule.rule_id} ({rule.source.provenance_key()})", stage="extract")


def process_clause(
    clause: Clause,
    provider: TextProvider,
    options: ExtractOptions,
    few_shot: list[dict],
    vocab: ScopeVocabulary | None = None,
    context: str = "",
) -> tuple[list[Rule], list[Rule], TraceRecord]:
    """extract → judge → repair → gate → probe. (채택 규칙, gate 실패 규칙, trace)."""
    vocab = vocab or ScopeVocabulary.identity()
    rules, trace = extract_rules(
        clause, provider, few_shot, vocab, seed=options.seed, max_retries=options.max_retries, context=context
    )
    if trace.status == "skipped":
        return [], [], trace

    checked: list[Rule] = []
    for rule in rules:
        if options.judge:
            for _ in range(max(1, options.repair_rounds)):
                issues = judge_rule(rule, clause, provider, seed=options.seed)
                trace.issues.extend(issues)
                if not (options.repair and issues):
                    break
                rule = repair_rule(
                    rule, issues, clause, provider,
                    seed=options.seed, max_edit_fields=options.max_edit_fields, trace=trace,
                )
                rule, unmapped = normalize_scope_with_flags(rule, vocab)
                trace.scope_flags.extend(u for u in unmapped if u not in trace.scope_flags)
                if options.repair_rounds <= 1:
                    break
        checked.append(rule)
    _assert_provenance(checked, clause)

    accepted: list[Rule] = []
    gated: list[Rule] = []
    if options.gate.enabled and checked:
        trace.gate = "passed"
    for rule in checked:
        passed, reason = evidence_gate(rule, options.gate)
        if passed:
            accepted.append(rule)
            continue
        trace.gate = "failed"
        trace.gated_rule_ids.append(rule.rule_id)
        trace.add_issue("unverifiable_evidence", f"gate: {reason} ({rule.rule_id})")
        logger.log(SKIP_LEVEL, "gate 실패 규칙 표시: %s (%s)", rule.rule_id, reason)
        (accepted if options.keep_gated else gated).append(rule)

    if options.probe and checked:
        trace.probe = counterfactual_probe(
            clause, checked[0], provider, few_shot,
            seed=options.seed, model_paraphrases=options.model_paraphrases,
        )

    trace.accepted_rule_ids = [r.rule_id for r in accepted]
    trace.confidence = max((r.confidence for r in accepted), default=0.0)
    return accepted, gated, trace


def _neighbor_context(clauses: list[Clause], idx: int) -> str:
    current = clauses[idx]
    texts = [
        clauses[j].span.text
        for j in (idx - 1, idx + 1)
        if 0 <= j < len(clauses) and clauses[j].span.section_path == current.span.section_path
        and clauses[j].span.doc_id == current.span.doc_id
    ]
    return "\n".join(texts)


def run_extract(
    clauses: list[Clause],
    provider: TextProvider,
    options: ExtractOptions,
    few_shot: list[dict],
    vocab: ScopeVocabulary | None = None,
    workers: int = 4,
) -> ExtractOutput:
    """조항들을 제한된 워커 풀로 처리하고 span_id 순으로 다시 정렬합니다."""
    ordered = sorted(clauses, key=lambda c: c.span_id)

    def _job(idx: int) -> tuple[list[Rule], list[Rule], TraceRecord]:
        return process_clause(
            ordered[idx], provider, options, few_shot, vocab, context=_neighbor_context(ordered, idx)
        )

    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        results = list(executor.map(_job, range(len(ordered))))

    output = ExtractOutput()
    for accepted, gated, trace in results:
        output.rules.extend(accepted)
        output.gated.extend(gated)
        output.traces.append(trace)
    output.rules.sort(key=lambda r: r.rule_id)
    output.gated.sort(key=lambda r: r.rule_id)
    output.traces.sort(key=lambda t: t.span_id)

    skipped = sum(1 for t in output.traces if t.status == "skipped")
    logger.info(
        "규칙 %d개 추출 (조항 %d개, gate 제외 %d개, 건너뜀 %d개)",
        len(output.rules), len(ordered), len(output.gated), skipped,
    )
    return output
