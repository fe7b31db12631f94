"""파이프라인 Facade.

provider 와 단계 모듈을 조합해 고수준 워크플로우를 제공합니다.

주요 워크플로우:
    1. run: 문서 × seed 마다 ingest → mine → extract → dedup → tag → examples → check → eval
    2. report: manifest 의 산출물로 요약 표(CSV + 콘솔)를 만듭니다.

산출물 배치:
    {output_dir}/{doc_id}/{seed}/{stage}.jsonl
    {output_dir}/manifest.json   입력 digest, 산출물 경로와 digest, 건수, 토큰 합계 (결정적)
    {output_dir}/timings.json    단계별 실행 시간과 fresh/skipped 상태
"""

from __future__ import annotations

import csv
import dataclasses
import io
import logging
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, TypeVar

from policy_to_tests import __version__
from policy_to_tests.config import DocumentSpec, PipelineConfig
from policy_to_tests.dsl.scope import ScopeVocabulary
from policy_to_tests.evalx.report import evaluate
from policy_to_tests.exceptions import InputError, P2TError, StageError
from policy_to_tests.models.clause import Clause
from policy_to_tests.models.evaluation import GoldRecord, MetricsReport
from policy_to_tests.models.results import Conflict, DedupReport, ExampleSet
from policy_to_tests.models.rule import Rule
from policy_to_tests.models.document import Span
from policy_to_tests.pipeline.clause_miner import MinerConfig, mine
from policy_to_tests.pipeline.consistency import export_smtlib, find_conflicts
from policy_to_tests.pipeline.dedup import dup_index, run_dedup
from policy_to_tests.pipeline.enrich import VerbList, run_examples, run_tagging
from policy_to_tests.pipeline.extract import ExtractOptions, ExtractOutput, GateConfig, run_extract
from policy_to_tests.pipeline.ingest import chunk, load_document
from policy_to_tests.services.base import TextProvider
from policy_to_tests.services.factory import build_provider
from policy_to_tests.services.prompts import load_few_shot
from policy_to_tests.utils.jsonl import (
    dumps,
    file_digest,
    read_json,
    read_records,
    sha256_text,
    write_json,
    write_jsonl,
    write_text,
)
from policy_to_tests.utils.log_format import OK_LEVEL, SKIP_LEVEL
from policy_to_tests.utils.slug import slugify

logger = logging.getLogger(__name__)

T = TypeVar("T")

MANIFEST_NAME = "manifest.json"
TIMINGS_NAME = "timings.json"
SUMMARY_NAME = "summary.csv"
SUMMARY_COLUMNS: tuple[str, ...] = (
    "doc_id", "seed", "Cand", "Ext", "Uniq", "Test%", "ExIO",
    "Cov", "TestAcc", "F1", "AUPRC", "SE", "Ev", "DupIdx",
)


# ─── manifest ──────────────────────────────────────────────────────────


@dataclass(frozen=True)
class JobResult:
    """문서 × seed 작업 하나의 manifest 항목. 경로는 output_dir 기준 상대 경로."""

    doc_id: str
    seed: int
    inputs: dict[str, str]
    artifacts: dict[str, dict[str, str]]
    counts: dict[str, int]
    tokens: dict[str, int]

    @property
    def key(self) -> tuple[str, int]:
        return self.doc_id, self.seed

    def to_dict(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "seed": self.seed,
            "inputs": dict(sorted(self.inputs.items())),
            "artifacts": {k: dict(v) for k, v in sorted(self.artifacts.items())},
            "counts": dict(self.counts),
            "tokens": dict(self.tokens),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "JobResult":
        return cls(
            doc_id=str(data["doc_id"]),
            seed=int(data["seed"]),
            inputs=dict(data.get("inputs", {})),
            artifacts={k: dict(v) for k, v in data.get("artifacts", {}).items()},
            counts=dict(data.get("counts", {})),
            tokens=dict(data.get("tokens", {})),
        )


@dataclass
class RunManifest:
    """실행 하나의 산출물 목록과 토큰 합계."""

    output_dir: Path
    jobs: list[JobResult] = field(default_factory=list)
    timings: dict[str, dict[str, Any]] = field(default_factory=dict)

    def token_totals(self) -> dict[str, int]:
        totals: dict[str, int] = {}
        for job in self.jobs:
            for name, value in job.tokens.items():
                totals[name] = totals.get(name, 0) + int(value)
        return dict(sorted(totals.items()))

    def to_dict(self) -> dict:
        return {
            "version": __version__,
            "jobs": [j.to_dict() for j in sorted(self.jobs, key=lambda j: j.key)],
            "tokens": self.token_totals(),
        }

    def path_of(self, job: JobResult, stage: str) -> Path | None:
        entry = job.artifacts.get(stage)
        return self.output_dir / entry["path"] if entry else None

    @classmethod
    def load(cls, path: Path) -> "RunManifest":
        data = read_json(path)
        if not isinstance(data, dict) or not isinstance(data.get("jobs"), list):
            raise InputError(f"manifest 형식이 아닙니다: {path}")
        return cls(output_dir=Path(path).parent, jobs=[JobResult.from_dict(j) for j in data["jobs"]])

    def write(self) -> Path:
        write_json(self.output_dir / TIMINGS_NAME, {k: self.timings[k] for k in sorted(self.timings)})
        return write_json(self.output_dir / MANIFEST_NAME, self.to_dict())


@dataclass(frozen=True)
class SummaryTable:
    rows: list[dict[str, Any]]

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.DictWriter(buffer, fieldnames=list(SUMMARY_COLUMNS), lineterminator="\n")
        writer.writeheader()
        writer.writerows(self.rows)
        return buffer.getvalue()

    def render(self) -> str:
        cells = [list(SUMMARY_COLUMNS)] + [[str(row.get(c, "")) for c in SUMMARY_COLUMNS] for row in self.rows]
        widths = [max(len(r[i]) for r in cells) for i in range(len(SUMMARY_COLUMNS))]
        lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in cells]
        lines.insert(1, "  ".join("-" * w for w in widths))
        return "\n".join(lines)


# ─── Facade ────────────────────────────────────────────────────────────


class PipelineFacade:
    """설정 하나로 단계 실행과 전체 run/report 를 제공하는 Facade.

    작업(문서 × seed)마다 provider 를 새로 만들어 토큰 사용량을 따로 집계합니다.
    """

    def __init__(self, config: PipelineConfig) -> None:
        self._config = config
        self._few_shot = load_few_shot(config.extract.few_shot)
        self._vocab = ScopeVocabulary.load(config.extract.scope_vocab)
        self._miner = MinerConfig.load(config.miner.config_path, bypass=config.miner.bypass)
        self._verbs = VerbList.load(config.enrich.verb_list)

    @property
    def config(self) -> PipelineConfig:
        return self._config

    def new_provider(self) -> TextProvider:
        return build_provider(self._config.provider)

    # ─── 단계 ───────────────────────────────────────────────────────────

    def ingest(self, spec: DocumentSpec) -> list[Span]:
        chunking = self._config.chunking
        doc = load_document(
            spec.path,
            spec.format,  # type: ignore[arg-type]
            doc_id=spec.doc_id,
            heading_patterns=chunking.heading_patterns,
            boilerplate_ratio=chunking.boilerplate_ratio,
        )
        return chunk(doc, chunking.strategy, chunking.window_radius)  # type: ignore[arg-type]

    def mine(self, spans: list[Span]) -> list[Clause]:
        return mine(spans, self._miner)

    def extract_options(self, seed: int) -> ExtractOptions:
        stages, settings = self._config.stages, self._config.extract
        return ExtractOptions(
            judge=stages.judge,
            repair=stages.repair,
            probe=stages.probe,
            gate=GateConfig(enabled=stages.gate, trusted_evidence=settings.trusted_evidence),
            keep_gated=settings.keep_gated,
            max_retries=settings.max_retries,
            repair_rounds=settings.repair_rounds,
            max_edit_fields=settings.max_edit_fields,
            seed=seed,
        )

    def extract(self, clauses: list[Clause], provider: TextProvider, seed: int) -> ExtractOutput:
        return run_extract(
            clauses, provider, self.extract_options(seed), self._few_shot, self._vocab,
            workers=self._config.provider.parallelism,
        )

    def dedup(self, rules: list[Rule], provider: TextProvider) -> tuple[list[Rule], DedupReport]:
        settings = self._config.dedup
        return run_dedup(
            rules, provider, semantic=settings.semantic, threshold=settings.threshold,
            workers=self._config.provider.parallelism,
        )

    def tag(self, rules: list[Rule], provider: TextProvider, seed: int):
        return run_tagging(rules, provider, self._verbs, seed=seed, workers=self._config.provider.parallelism)

    def examples(self, rules: list[Rule], provider: TextProvider, seed: int) -> list[ExampleSet]:
        return run_examples(
            rules, provider, self._config.enrich.n_per_side, seed,
            workers=self._config.provider.parallelism,
        )

    def check(self, rules: list[Rule]) -> list[Conflict]:
        return find_conflicts(rules, self._config.consistency.condition_mode)  # type: ignore[arg-type]

    def evaluate(
        self, rules: list[Rule], gold: list[GoldRecord], provider: TextProvider | None, seed: int
    ) -> MetricsReport:
        settings = self._config.evaluation
        return evaluate(rules, gold, provider, settings.bootstrap, settings.level, seed)

    # ─── run ────────────────────────────────────────────────────────────

    def _settings_digest(self) -> str:
        """산출물에 영향을 주는 설정의 digest. 경로는 파일 내용 digest 로 바꿉니다."""

        def _portable(value: Any) -> Any:
            if isinstance(value, Path):
                return file_digest(value) if value.is_file() else value.name
            if isinstance(value, dict):
                return {k: _portable(v) for k, v in sorted(value.items())}
            if isinstance(value, (list, tuple)):
                return [_portable(v) for v in value]
            return value

        config = self._config
        provider = dataclasses.asdict(config.provider)
        for private in ("api_key", "cache_dir", "endpoint", "embedding_endpoint", "parallelism", "timeout"):
            provider.pop(private, None)
        settings = {
            "version": __version__,
            "chunking": dataclasses.asdict(config.chunking),
            "miner": dataclasses.asdict(config.miner),
            "provider": provider,
            "stages": dataclasses.asdict(config.stages),
            "extract": dataclasses.asdict(config.extract),
            "dedup": dataclasses.asdict(config.dedup),
            "enrich": dataclasses.asdict(config.enrich),
            "consistency": dataclasses.asdict(config.consistency),
            "evaluation": dataclasses.asdict(config.evaluation),
        }
        return sha256_text(dumps(_portable(settings)))

    def _job_inputs(self, spec: DocumentSpec) -> dict[str, str]:
        inputs = {"document": file_digest(spec.path), "settings": self._settings_digest()}
        if spec.gold is not None and self._config.stages.eval:
            inputs["gold"] = file_digest(spec.gold)
        return inputs

    def _reusable(self, previous: JobResult | None, inputs: dict[str, str]) -> bool:
        if previous is None or previous.inputs != inputs:
            return False
        for entry in previous.artifacts.values():
            path = self._config.output_dir / entry["path"]
            if not path.is_file() or file_digest(path) != entry["sha256"]:
                return False
        return True

    def _run_job(
        self, spec: DocumentSpec, doc_id: str, seed: int, previous: JobResult | None, force: bool
    ) -> tuple[JobResult, dict[str, Any]]:
        inputs = self._job_inputs(spec)
        if not force and self._reusable(previous, inputs):
            logger.log(SKIP_LEVEL, "입력이 같아 건너뜁니다: %s seed=%d", doc_id, seed)
            return previous, {"status": "skipped", "stages": {}}

        stages = self._config.stages
        out_dir = self._config.output_dir / doc_id / str(seed)
        provider = self.new_provider()
        timings: dict[str, float] = {}
        artifacts: dict[str, dict[str, str]] = {}
        counts: dict[str, int] = {}

        def _stage(name: str, fn: Callable[[], T]) -> T:
            started = time.perf_counter()
            try:
                result = fn()
            except P2TError:
                raise
            except Exception as e:
                raise StageError(f"{doc_id} seed={seed} {name} 단계 실패: {e}", stage=name) from e
            timings[name] = round(time.perf_counter() - started, 4)
            logger.log(OK_LEVEL, "%s seed=%d %s 완료 (%.2fs)", doc_id, seed, name, timings[name])
            return result

        def _save(stage: str, path: Path) -> None:
            artifacts[stage] = {
                "path": path.relative_to(self._config.output_dir).as_posix(),
                "sha256": file_digest(path),
            }

        def _jsonl(stage: str, records: list[dict]) -> None:
            _save(stage, write_jsonl(out_dir / f"{stage}.jsonl", records))

        spans = _stage("ingest", lambda: self.ingest(dataclasses.replace(spec, doc_id=doc_id)))
        _jsonl("spans", [s.to_dict() for s in spans])

        clauses = _stage("mine", lambda: self.mine(spans))
        _jsonl("clauses", [c.to_dict() for c in clauses])
        counts["cand"] = len(clauses)

        extracted = _stage("extract", lambda: self.extract(clauses, provider, seed))
        _jsonl("rules", [r.to_dict() for r in extracted.rules])
        _jsonl("rules.gated", [r.to_dict() for r in extracted.gated])
        _jsonl("trace", [t.to_dict() for t in extracted.traces])
        counts["ext"] = len(extracted.rules)
        rules = extracted.rules

        if stages.dedup:
            rules, dedup_report = _stage("dedup", lambda: self.dedup(rules, provider))
            _jsonl("rules.unique", [r.to_dict() for r in rules])
            _save("dedup", write_json(out_dir / "dedup.json", dedup_report.to_dict()))
        counts["uniq"] = len(rules)

        if stages.tag:
            rules, flags = _stage("tag", lambda: self.tag(rules, provider, seed))
            _jsonl("rules.tagged", [r.to_dict() for r in rules])
            _jsonl("rules.tagged.flags", flags.to_records())
        counts["testable"] = sum(1 for r in rules if r.is_testable)

        if stages.examples:
            example_sets = _stage("examples", lambda: self.examples(rules, provider, seed))
            _jsonl("examples", [s.to_dict() for s in example_sets])
            counts["ex_io"] = len(example_sets)

        if stages.check:
            conflicts = _stage("check", lambda: self.check(rules))
            _jsonl("conflicts", [c.to_dict() for c in conflicts])
            if conflicts:
                smt = "\n".join(export_smtlib(c, rules) for c in conflicts)
                _save("conflicts.smt2", write_text(out_dir / "conflicts.smt2", smt))
            counts["conflicts"] = len(conflicts)

        if stages.eval and spec.gold is not None:
            gold = load_gold(spec.gold)
            report = _stage("eval", lambda: self.evaluate(rules, gold, provider, seed))
            _save("report", write_json(out_dir / "report.json", report.to_dict()))

        job = JobResult(
            doc_id=doc_id,
            seed=seed,
            inputs=inputs,
            artifacts=artifacts,
            counts=counts,
            tokens={k: v for k, v in provider.usage.to_dict().items() if k.endswith("_tokens")},
        )
        return job, {"status": "fresh", "stages": timings}

    def run(self, force: bool = False) -> RunManifest:
        """활성 단계를 문서 × seed 마다 실행합니다.

        입력 digest 가 이전 manifest 와 같고 산출물이 그대로면 그 작업은 건너뜁니다.
        어느 작업이 실패하면 완료된 작업만 담은 manifest 를 남기고 예외를 다시 올립니다.
        """
        config = self._config
        manifest_path = config.output_dir / MANIFEST_NAME
        previous: dict[tuple[str, int], JobResult] = {}
        if manifest_path.is_file():
            try:
                previous = {j.key: j for j in RunManifest.load(manifest_path).jobs}
            except (InputError, KeyError, TypeError, ValueError) as e:
                logger.warning("이전 manifest 를 읽지 못해 전체를 다시 실행합니다: %s", e)

        doc_ids = [spec.doc_id or _default_doc_id(spec.path) for spec in config.documents]
        duplicates = sorted({d for d in doc_ids if doc_ids.count(d) > 1})
        if duplicates:
            raise InputError(f"doc_id 가 중복되었습니다: {', '.join(duplicates)}")

        manifest = RunManifest(output_dir=config.output_dir)
        failure: BaseException | None = None
        started = time.perf_counter()
        with ThreadPoolExecutor(max_workers=config.workers) as executor:
            futures = {
                executor.submit(
                    self._run_job, spec, doc_id, seed, previous.get((doc_id, seed)), force
                ): (doc_id, seed)
                for spec, doc_id in zip(config.documents, doc_ids)
                for seed in config.seeds
            }
            for future in as_completed(futures):
                doc_id, seed = futures[future]
                try:
                    job, timing = future.result()
                except BaseException as e:
                    logger.error("작업 실패: %s seed=%d: %s", doc_id, seed, e)
                    failure = failure or e
                    continue
                manifest.jobs.append(job)
                manifest.timings[f"{doc_id}/{seed}"] = timing

        manifest.jobs.sort(key=lambda j: j.key)
        manifest.write()
        if failure is not None:
            if isinstance(failure, P2TError):
                raise failure
            raise StageError(f"작업 실행 실패: {failure}", stage="run") from failure

        fresh = sum(1 for t in manifest.timings.values() if t["status"] == "fresh")
        logger.log(
            OK_LEVEL,
            "실행 완료: 작업 %d개 (새로 실행 %d, 건너뜀 %d), %.2fs",
            len(manifest.jobs), fresh, len(manifest.jobs) - fresh, time.perf_counter() - started,
        )
        return manifest

    # ─── report ─────────────────────────────────────────────────────────

    def report(self, manifest: RunManifest | None = None, write: bool = True) -> SummaryTable:
        """manifest 의 산출물로 요약 표를 만들고 summary.csv 로 씁니다."""
        manifest = manifest or RunManifest.load(self._config.output_dir / MANIFEST_NAME)
        table = summarize(manifest)
        if write:
            write_text(manifest.output_dir / SUMMARY_NAME, table.to_csv())
        return table


# ─── 헬퍼 ──────────────────────────────────────────────────────────────


def _default_doc_id(path: Path) -> str:
    return slugify(Path(path).stem)


def load_rules(path: Path) -> list[Rule]:
    return [Rule.from_dict(r) for r in read_records(path)]


def load_gold(path: Path) -> list[GoldRecord]:
    return [GoldRecord.from_dict(r) for r in read_records(path)]


def _count(manifest: RunManifest, job: JobResult, stage: str) -> list[dict] | None:
    path = manifest.path_of(job, stage)
    if path is None:
        return None
    if not path.is_file():
        raise InputError(f"산출물이 없습니다: {path}")
    return read_records(path)


def summarize(manifest: RunManifest) -> SummaryTable:
    """작업마다 Cand/Ext/Uniq/Test%/ExIO 건수와 평가 지표 한 행.

    건수는 manifest 가 가리키는 산출물 파일에서 다시 셉니다.

    Raises:
        InputError: manifest 가 가리키는 산출물이 없을 때.
    """
    rows = []
    for job in sorted(manifest.jobs, key=lambda j: j.key):
        clauses = _count(manifest, job, "clauses") or []
        extracted = _count(manifest, job, "rules") or []
        unique = _count(manifest, job, "rules.unique")
        tagged = _count(manifest, job, "rules.tagged")
        examples = _count(manifest, job, "examples")
        final = tagged if tagged is not None else (unique if unique is not None else extracted)
        uniq = len(unique if unique is not None else extracted)
        testable = sum(1 for r in final if r.get("is_testable"))

        row: dict[str, Any] = {
            "doc_id": job.doc_id,
            "seed": job.seed,
            "Cand": len(clauses),
            "Ext": len(extracted),
            "Uniq": uniq,
            "Test%": round(100.0 * testable / len(final), 1) if final else 0.0,
            "ExIO": len(examples) if examples is not None else "",
            "DupIdx": f"{dup_index(uniq, len(extracted) - uniq):.4f}",
        }
        report_path = manifest.path_of(job, "report")
        if report_path is not None:
            if not report_path.is_file():
                raise InputError(f"산출물이 없습니다: {report_path}")
            metrics = read_json(report_path)
            row.update(
                {
                    "Cov": f"{metrics['coverage']:.2f}",
                    "TestAcc": f"{metrics['test_acc']:.2f}",
                    "F1": f"{metrics['span_f1']:.4f}",
                    "AUPRC": f"{metrics['span_auprc']:.4f}",
                    "SE": f"{metrics['se_slot_similarity']:.4f}",
                    "Ev": f"{metrics['evidence_similarity']:.4f}",
                }
            )
        rows.append(row)
    return SummaryTable(rows=rows)
