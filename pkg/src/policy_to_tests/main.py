"""policy-to-tests - CLI 진입점.

사용법:
    p2t run --config p2t.json                          # 전체 파이프라인 (문서 × seed)
    p2t report --config p2t.json                       # manifest 로 요약 표 출력 + summary.csv
    p2t ingest --in policy.md --out spans.jsonl        # 문서 → span
    p2t mine --in spans.jsonl --out clauses.jsonl      # span → 후보 조항
    p2t extract --in clauses.jsonl --out rules.jsonl --trace trace.jsonl
    p2t dedup --in rules.jsonl --out rules.unique.jsonl --report dedup.json
    p2t tag --in rules.unique.jsonl --out rules.tagged.jsonl
    p2t examples --in rules.tagged.jsonl --out examples.jsonl --n 5
    p2t check --in rules.tagged.jsonl --out conflicts.json
    p2t eval --pred rules.jsonl --gold gold.jsonl --out report.json
    p2t agree --gold gold.jsonl --out agreement.json
    p2t casestudy --judgments judgments.jsonl --out rates.json

종료 코드: 0 성공, 1 입력/설정 오류, 2 provider 오류, 3 그 밖의 오류, 130 중단.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

from policy_to_tests.config import DocumentSpec, PipelineConfig, load_config
from policy_to_tests.evalx.agreement import compute_agreement
from policy_to_tests.evalx.casestudy import Judgment, rates_by_system
from policy_to_tests.exceptions import (
    ConfigError,
    InputError,
    MetricUndefinedError,
    P2TError,
    ProviderError,
)
from policy_to_tests.facades.pipeline_facade import PipelineFacade, load_gold, load_rules
from policy_to_tests.models.clause import Clause
from policy_to_tests.models.document import Span
from policy_to_tests.pipeline.consistency import export_smtlib
from policy_to_tests.utils.jsonl import read_records, write_json, write_jsonl, write_text
from policy_to_tests.utils.log_format import OK_LEVEL, setup_logging

logger = logging.getLogger("policy_to_tests")

FORMATS = {"md": "markdown", "markdown": "markdown", "txt": "plain_text", "plain_text": "plain_text"}


def _on_off(value: str) -> bool:
    if value not in ("on", "off"):
        raise argparse.ArgumentTypeError(f"on 또는 off 여야 합니다: {value!r}")
    return value == "on"


def _override(config: PipelineConfig, section: str, **changes) -> PipelineConfig:
    """None 이 아닌 값만 설정 섹션에 덮어씁니다."""
    changes = {k: v for k, v in changes.items() if v is not None}
    if not changes:
        return config
    return dataclasses.replace(config, **{section: dataclasses.replace(getattr(config, section), **changes)})


def _done(message: str, path: Path) -> None:
    logger.log(OK_LEVEL, "%s → %s", message, path)


# ─── 서브커맨드 핸들러 ────────────────────────────────────────────────────


def _handle_ingest(config: PipelineConfig, args: argparse.Namespace) -> None:
    """문서 → span JSONL."""
    config = _override(
        config, "chunking", strategy=args.strategy, window_radius=args.window_radius
    )
    facade = PipelineFacade(config)
    spec = DocumentSpec(path=args.input, format=FORMATS[args.format], doc_id=args.doc_id or "")
    spans = facade.ingest(spec)
    write_jsonl(args.out, [s.to_dict() for s in spans])
    _done(f"span {len(spans)}개", args.out)


def _handle_mine(config: PipelineConfig, args: argparse.Namespace) -> None:
    """span → 후보 조항 JSONL."""
    config = _override(config, "miner", config_path=args.miner_config, bypass=args.bypass or None)
    facade = PipelineFacade(config)
    spans = [Span.from_dict(r) for r in read_records(args.input)]
    clauses = facade.mine(spans)
    write_jsonl(args.out, [c.to_dict() for c in clauses])
    _done(f"후보 조항 {len(clauses)}개 (span {len(spans)}개 중)", args.out)


def _handle_extract(config: PipelineConfig, args: argparse.Namespace) -> None:
    """후보 조항 → 규칙 JSONL + trace."""
    config = _override(config, "stages", gate=args.gate, probe=args.probe, judge=args.judge, repair=args.repair)
    facade = PipelineFacade(config)
    clauses = [Clause.from_dict(r) for r in read_records(args.input)]
    output = facade.extract(clauses, facade.new_provider(), args.seed)
    write_jsonl(args.out, [r.to_dict() for r in output.rules])
    if args.trace:
        write_jsonl(args.trace, [t.to_dict() for t in output.traces])
    if output.gated:
        gated_path = args.out.with_name(args.out.stem + ".gated.jsonl")
        write_jsonl(gated_path, [r.to_dict() for r in output.gated])
    _done(f"규칙 {len(output.rules)}개 (gate 보류 {len(output.gated)}개)", args.out)


def _handle_dedup(config: PipelineConfig, args: argparse.Namespace) -> None:
    """규칙 중복 제거."""
    semantic = False if args.structural_only else None
    config = _override(config, "dedup", threshold=args.threshold, semantic=semantic)
    facade = PipelineFacade(config)
    rules, report = facade.dedup(load_rules(args.input), facade.new_provider())
    write_jsonl(args.out, [r.to_dict() for r in rules])
    if args.report:
        write_json(args.report, report.to_dict())
    _done(f"고유 규칙 {len(rules)}개", args.out)


def _handle_tag(config: PipelineConfig, args: argparse.Namespace) -> None:
    """testability 태깅 (+ flags 사이드카)."""
    config = _override(config, "enrich", verb_list=args.verbs)
    facade = PipelineFacade(config)
    rules, flags = facade.tag(load_rules(args.input), facade.new_provider(), args.seed)
    write_jsonl(args.out, [r.to_dict() for r in rules])
    write_jsonl(args.out.with_name(args.out.stem + ".flags.jsonl"), flags.to_records())
    testable = sum(1 for r in rules if r.is_testable)
    _done(f"testable {testable}/{len(rules)}", args.out)


def _handle_examples(config: PipelineConfig, args: argparse.Namespace) -> None:
    """testable 규칙마다 준수/위반 예시 프롬프트."""
    config = _override(config, "enrich", n_per_side=args.n)
    facade = PipelineFacade(config)
    sets = facade.examples(load_rules(args.input), facade.new_provider(), args.seed)
    write_jsonl(args.out, [s.to_dict() for s in sets])
    _done(f"예시 세트 {len(sets)}개", args.out)


def _handle_check(config: PipelineConfig, args: argparse.Namespace) -> None:
    """require/forbid 충돌 검사."""
    config = _override(config, "consistency", condition_mode=args.condition_mode)
    facade = PipelineFacade(config)
    rules = load_rules(args.input)
    conflicts = facade.check(rules)
    write_json(args.out, [c.to_dict() for c in conflicts])
    if args.smt:
        write_text(args.smt, "\n".join(export_smtlib(c, rules) for c in conflicts))
    _done(f"충돌 {len(conflicts)}건", args.out)


def _handle_eval(config: PipelineConfig, args: argparse.Namespace) -> None:
    """예측 규칙을 골드와 비교."""
    config = _override(config, "evaluation", bootstrap=args.bootstrap)
    facade = PipelineFacade(config)
    provider = None if args.lexical else facade.new_provider()
    report = facade.evaluate(load_rules(args.pred), load_gold(args.gold), provider, args.seed)
    write_json(args.out, report.to_dict())
    print(
        f"\n📊 Cov {report.coverage:.2f}  F1 {report.span_f1:.4f}  AUPRC {report.span_auprc:.4f}"
        f"  SE {report.se_slot_similarity:.4f}  Ev {report.evidence_similarity:.4f}"
        f"  TestAcc {report.test_acc:.2f}"
    )
    _done("평가 리포트", args.out)


def _handle_agree(config: PipelineConfig, args: argparse.Namespace) -> None:
    """골드 annotator_labels 로 평가자 간 일치도."""
    settings = config.evaluation
    report = compute_agreement(
        load_gold(args.gold), args.bootstrap or settings.bootstrap, settings.level, args.seed
    )
    write_json(args.out, report.to_dict())
    _done("일치도 리포트", args.out)


def _handle_casestudy(config: PipelineConfig, args: argparse.Namespace) -> None:
    """판정 기록 → system 별 버킷 위반율."""
    judgments = [Judgment.from_dict(r) for r in read_records(args.judgments)]
    if not judgments:
        raise InputError(f"판정 기록이 없습니다: {args.judgments}")
    rates = rates_by_system(judgments)
    write_json(args.out, {system: r.to_dict() for system, r in rates.items()})
    for system, r in rates.items():
        cells = "  ".join(f"{b} {v:.2f}" for b, v in r.rates.items())
        print(f"  {system}: {cells}  overall {r.overall:.2f}")
    _done("위반율", args.out)


def _handle_run(config: PipelineConfig, args: argparse.Namespace) -> None:
    """설정의 문서 × seed 전체 실행 후 요약 표 출력."""
    facade = PipelineFacade(config)
    manifest = facade.run(force=args.force)
    table = facade.report(manifest)
    print()
    print(table.render())
    print(f"\n🔢 토큰 합계: {manifest.token_totals()}")


def _handle_report(config: PipelineConfig, args: argparse.Namespace) -> None:
    """기존 manifest 로 요약 표 출력 + summary.csv."""
    facade = PipelineFacade(config)
    table = facade.report()
    print()
    print(table.render())


# ─── CLI 파서 ────────────────────────────────────────────────────────────


def _build_parser() -> argparse.ArgumentParser:
    """CLI 인자 파서를 구성합니다."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", "-c", type=Path, default=None, help="JSON 설정 파일")
    common.add_argument("--offline", action="store_true", help="remote provider 대신 fallback 사용")
    common.add_argument("-v", "--verbose", action="store_true", help="상세 로그 출력")

    parser = argparse.ArgumentParser(
        prog="p2t",
        description="정책 문서 → 실행 가능한 JSON 규칙 컴파일 파이프라인",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def _add(name: str, help_text: str) -> argparse.ArgumentParser:
        return sub.add_parser(name, help=help_text, parents=[common])

    p = _add("ingest", "문서 → span")
    p.add_argument("--in", dest="input", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--format", choices=sorted(FORMATS), default="md")
    p.add_argument("--strategy", choices=["paragraph", "sentence", "window"], default=None)
    p.add_argument("--window-radius", type=int, default=None)
    p.add_argument("--doc-id", default=None)

    p = _add("mine", "span → 후보 조항")
    p.add_argument("--in", dest="input", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--miner-config", type=Path, default=None, help="MinerConfig JSON")
    p.add_argument("--bypass", action="store_true", help="모든 span 통과")

    p = _add("extract", "후보 조항 → 규칙")
    p.add_argument("--in", dest="input", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--trace", type=Path, default=None)
    p.add_argument("--seed", type=int, default=1)
    for toggle in ("gate", "probe", "judge", "repair"):
        p.add_argument(f"--{toggle}", type=_on_off, default=None, metavar="on|off")

    p = _add("dedup", "구조/의미 중복 제거")
    p.add_argument("--in", dest="input", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--report", type=Path, default=None)
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--structural-only", action="store_true")

    p = _add("tag", "testability 태깅")
    p.add_argument("--in", dest="input", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--verbs", type=Path, default=None, help="동사 목록 JSON")
    p.add_argument("--seed", type=int, default=1)

    p = _add("examples", "준수/위반 예시 생성")
    p.add_argument("--in", dest="input", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--n", type=int, default=None, help="쪽마다 예시 수")
    p.add_argument("--seed", type=int, default=1)

    p = _add("check", "충돌 검사")
    p.add_argument("--in", dest="input", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--condition-mode", choices=["ignore", "strict"], default=None)
    p.add_argument("--smt", type=Path, default=None, help="SMT-LIB2 내보내기 경로")

    p = _add("eval", "골드 대비 평가")
    p.add_argument("--pred", type=Path, required=True)
    p.add_argument("--gold", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--bootstrap", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lexical", action="store_true", help="provider 없이 토큰 Jaccard 유사도")

    p = _add("agree", "평가자 간 일치도")
    p.add_argument("--gold", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--bootstrap", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)

    p = _add("casestudy", "가드레일 위반율")
    p.add_argument("--judgments", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)

    p = _add("run", "전체 파이프라인 실행")
    p.add_argument("--force", action="store_true", help="입력이 같아도 다시 실행")

    _add("report", "요약 표")

    return parser


# ─── 메인 ────────────────────────────────────────────────────────────────


def _exit_code(error: P2TError) -> int:
    if isinstance(error, (InputError, ConfigError, MetricUndefinedError)):
        return 1
    if isinstance(error, ProviderError):
        return 2
    return 3


HANDLERS = {
    "ingest": _handle_ingest,
    "mine": _handle_mine,
    "extract": _handle_extract,
    "dedup": _handle_dedup,
    "tag": _handle_tag,
    "examples": _handle_examples,
    "check": _handle_check,
    "eval": _handle_eval,
    "agree": _handle_agree,
    "casestudy": _handle_casestudy,
    "run": _handle_run,
    "report": _handle_report,
}


def main(argv: list[str] | None = None) -> None:
    """CLI 메인 함수."""
    parser = _build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.verbose)

    try:
        config = load_config(args.config, offline=args.offline)
        HANDLERS[args.command](config, args)
    except P2TError as e:
        print(f"\n❌ {e}", file=sys.stderr)
        sys.exit(_exit_code(e))
    except KeyboardInterrupt:
        print("\n👋 중단되었습니다.")
        sys.exit(130)
    except Exception as e:
        logger.debug("예상하지 못한 오류", exc_info=True)
        print(f"\n❌ 내부 오류: {e}", file=sys.stderr)
        sys.exit(3)


if __name__ == "__main__":
    main()
