"""PipelineFacade 테스트: 오프라인 전체 실행, 재실행 건너뛰기, 요약 표."""

import dataclasses
import json
import tempfile
import unittest
from pathlib import Path

from policy_to_tests.config import (
    DedupSettings,
    DocumentSpec,
    EvalSettings,
    PipelineConfig,
    ProviderConfig,
    StageToggles,
)
from policy_to_tests.dsl import validate_rule
from policy_to_tests.exceptions import InputError
from policy_to_tests.facades import PipelineFacade, RunManifest
from policy_to_tests.facades.pipeline_facade import MANIFEST_NAME, SUMMARY_COLUMNS, SUMMARY_NAME, TIMINGS_NAME
from policy_to_tests.utils.jsonl import file_digest, read_json, read_records, write_jsonl

FIXTURES = Path(__file__).parent / "fixtures"

GOLD = [
    {
        "span_id": "sample:002:001",
        "citation": "Uses and Disclosures ¶1",
        "is_rule_span": True,
        "gold_rules": [
            {
                "scope": {"actor": ["covered_entity"], "data_domain": ["phi"], "context": []},
                "requirement": "must obtain authorization before disclosing PHI",
                "is_testable": True,
                "testability": {"evidence_signals": ["io_check"], "reason": ""},
            }
        ],
    },
    {
        "span_id": "sample:002:002",
        "citation": "Uses and Disclosures ¶2",
        "is_rule_span": True,
        "gold_rules": [
            {
                "scope": {"actor": ["business_associate"], "data_domain": ["phi"], "context": []},
                "requirement": "shall not sell PHI",
                "is_testable": True,
                "testability": {"evidence_signals": ["io_check"], "reason": ""},
            }
        ],
    },
    {"span_id": "sample:004:001", "citation": "Definitions ¶1", "is_rule_span": False},
]


class TestPipelineFacade(unittest.TestCase):
    """오프라인(fallback provider) 전체 실행 테스트."""

    def setUp(self) -> None:
        tmp = tempfile.TemporaryDirectory()
        self.addCleanup(tmp.cleanup)
        self.root = Path(tmp.name)
        self.gold_path = write_jsonl(self.root / "gold.jsonl", GOLD)

    def _config(self, name: str = "out", **changes) -> PipelineConfig:
        config = PipelineConfig(
            documents=(
                DocumentSpec(path=FIXTURES / "policy_small.md", format="markdown", doc_id="sample", gold=self.gold_path),
            ),
            seeds=(1, 2),
            output_dir=self.root / name,
            workers=2,
            provider=ProviderConfig(kind="fallback", parallelism=1),
            evaluation=EvalSettings(bootstrap=100),
        )
        return dataclasses.replace(config, **changes)

    def test_run_writes_artifacts_and_manifest(self) -> None:
        config = self._config()

        manifest = PipelineFacade(config).run()

        self.assertEqual([job.key for job in manifest.jobs], [("sample", 1), ("sample", 2)])
        job = manifest.jobs[0]
        for stage in (
            "spans", "clauses", "rules", "rules.gated", "trace", "rules.unique", "dedup",
            "rules.tagged", "rules.tagged.flags", "examples", "conflicts", "report",
        ):
            self.assertIn(stage, job.artifacts)
            path = manifest.path_of(job, stage)
            self.assertTrue(path.is_file(), stage)
            self.assertEqual(file_digest(path), job.artifacts[stage]["sha256"])
        self.assertEqual(job.artifacts["rules"]["path"], "sample/1/rules.jsonl")
        self.assertGreaterEqual(job.counts["cand"], 2)
        self.assertGreaterEqual(job.counts["ext"], job.counts["uniq"])
        self.assertEqual(set(job.inputs), {"document", "settings", "gold"})
        self.assertTrue((config.output_dir / TIMINGS_NAME).is_file())

        saved = read_json(config.output_dir / MANIFEST_NAME)
        self.assertEqual(len(saved["jobs"]), 2)
        self.assertIn("input_tokens", saved["tokens"])

    def test_rerun_skips_unchanged_jobs(self) -> None:
        config = self._config()
        PipelineFacade(config).run()
        first = (config.output_dir / MANIFEST_NAME).read_text(encoding="utf-8")

        PipelineFacade(config).run()

        timings = read_json(config.output_dir / TIMINGS_NAME)
        self.assertEqual({t["status"] for t in timings.values()}, {"skipped"})
        self.assertEqual((config.output_dir / MANIFEST_NAME).read_text(encoding="utf-8"), first)

        PipelineFacade(config).run(force=True)
        timings = read_json(config.output_dir / TIMINGS_NAME)
        self.assertEqual({t["status"] for t in timings.values()}, {"fresh"})

    def test_changed_settings_rerun(self) -> None:
        PipelineFacade(self._config()).run()

        PipelineFacade(self._config(dedup=DedupSettings(threshold=0.95))).run()

        timings = read_json(self.root / "out" / TIMINGS_NAME)
        self.assertEqual({t["status"] for t in timings.values()}, {"fresh"})

    def test_tampered_artifact_reruns(self) -> None:
        config = self._config()
        PipelineFacade(config).run()
        (config.output_dir / "sample" / "1" / "rules.jsonl").write_text("", encoding="utf-8")

        PipelineFacade(config).run()

        timings = read_json(config.output_dir / TIMINGS_NAME)
        self.assertEqual(timings["sample/1"]["status"], "fresh")
        self.assertEqual(timings["sample/2"]["status"], "skipped")

    def test_manifest_is_deterministic(self) -> None:
        PipelineFacade(self._config("a")).run()
        PipelineFacade(self._config("b")).run()

        self.assertEqual(
            (self.root / "a" / MANIFEST_NAME).read_text(encoding="utf-8"),
            (self.root / "b" / MANIFEST_NAME).read_text(encoding="utf-8"),
        )

    def test_report_rows(self) -> None:
        config = self._config()
        facade = PipelineFacade(config)
        manifest = facade.run()

        table = facade.report()

        self.assertEqual(len(table.rows), 2)
        row = table.rows[0]
        job = manifest.jobs[0]
        self.assertEqual((row["doc_id"], row["seed"]), ("sample", 1))
        self.assertEqual(row["Cand"], job.counts["cand"])
        self.assertEqual(row["Ext"], job.counts["ext"])
        self.assertEqual(row["Uniq"], job.counts["uniq"])
        self.assertEqual(row["ExIO"], job.counts["ex_io"])
        for column in ("Cov", "TestAcc", "F1", "AUPRC", "SE", "Ev", "DupIdx"):
            self.assertIn(column, row)
        csv_text = (config.output_dir / SUMMARY_NAME).read_text(encoding="utf-8")
        self.assertEqual(csv_text.splitlines()[0], ",".join(SUMMARY_COLUMNS))
        self.assertEqual(len(csv_text.splitlines()), 3)
        self.assertIn("DupIdx", table.render().splitlines()[0])

    def test_disabled_stages(self) -> None:
        stages = StageToggles(dedup=False, tag=False, examples=False, check=False, eval=False)
        facade = PipelineFacade(self._config(stages=stages, seeds=(1,)))

        manifest = facade.run()

        job = manifest.jobs[0]
        self.assertNotIn("rules.unique", job.artifacts)
        self.assertNotIn("report", job.artifacts)
        self.assertNotIn("gold", job.inputs)
        row = facade.report().rows[0]
        self.assertEqual(row["Uniq"], row["Ext"])
        self.assertEqual(row["ExIO"], "")
        self.assertEqual(row["DupIdx"], "0.0000")
        self.assertNotIn("Cov", row)

    def test_empty_corpus(self) -> None:
        facade = PipelineFacade(self._config(documents=()))

        manifest = facade.run()

        self.assertEqual(manifest.jobs, [])
        self.assertEqual(facade.report().rows, [])
        self.assertEqual(json.loads((self.root / "out" / MANIFEST_NAME).read_text())["jobs"], [])

    def test_duplicate_doc_ids(self) -> None:
        spec = DocumentSpec(path=FIXTURES / "policy_small.md", format="markdown", doc_id="same")
        with self.assertRaises(InputError):
            PipelineFacade(self._config(documents=(spec, spec))).run()

    def test_missing_artifact_fails_report(self) -> None:
        config = self._config(seeds=(1,))
        PipelineFacade(config).run()
        (config.output_dir / "sample" / "1" / "rules.jsonl").unlink()

        with self.assertRaises(InputError):
            PipelineFacade(config).report(RunManifest.load(config.output_dir / MANIFEST_NAME))


class TestOfflineCorpus(unittest.TestCase):
    """문서 세 개 × seed 두 개 오프라인 실행의 재현성."""

    RULE_STAGES = ("rules", "rules.gated", "rules.unique", "rules.tagged")

    def setUp(self) -> None:
        tmp = tempfile.TemporaryDirectory()
        self.addCleanup(tmp.cleanup)
        self.root = Path(tmp.name)
        gold = write_jsonl(self.root / "gold.jsonl", GOLD)
        self.documents = (
            DocumentSpec(path=FIXTURES / "policy_small.md", format="markdown", doc_id="sample", gold=gold),
            DocumentSpec(path=FIXTURES / "policy_paged.txt", format="plain_text", doc_id="paged"),
            DocumentSpec(path=FIXTURES / "policy_articles.txt", format="plain_text", doc_id="articles"),
        )

    def _run(self, name: str) -> tuple[RunManifest, dict[str, bytes]]:
        config = PipelineConfig(
            documents=self.documents,
            seeds=(1, 2),
            output_dir=self.root / name,
            workers=3,
            evaluation=EvalSettings(bootstrap=100),
        )
        manifest = PipelineFacade(config).run()
        files = {
            path.relative_to(config.output_dir).as_posix(): path.read_bytes()
            for path in sorted(config.output_dir.rglob("*"))
            if path.is_file() and path.name != TIMINGS_NAME
        }
        return manifest, files

    def test_artifacts_are_byte_identical(self) -> None:
        _, first = self._run("a")
        _, second = self._run("b")

        self.assertEqual(sorted(first), sorted(second))
        for name in first:
            self.assertEqual(first[name], second[name], name)
        self.assertIn("articles/2/rules.tagged.jsonl", first)

    def test_emitted_rules_are_schema_valid(self) -> None:
        manifest, _ = self._run("out")

        self.assertEqual(len(manifest.jobs), 6)
        emitted = 0
        for job in manifest.jobs:
            for stage in self.RULE_STAGES:
                for record in read_records(manifest.path_of(job, stage)):
                    result = validate_rule(record)
                    self.assertTrue(result.ok, result.describe())
                    emitted += 1
        self.assertGreater(emitted, 0)
        self.assertGreater(sum(job.counts["ext"] for job in manifest.jobs if job.doc_id == "articles"), 0)


if __name__ == "__main__":
    unittest.main()
