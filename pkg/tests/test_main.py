"""CLI 테스트: 서브커맨드 연결과 종료 코드."""

import contextlib
import io
import json
import os
import tempfile
import unittest
from pathlib import Path
from unittest import mock

import requests

from policy_to_tests.main import main
from policy_to_tests.utils.jsonl import read_json, read_records, write_jsonl
from tests.factories import make_rule

FIXTURES = Path(__file__).parent / "fixtures"


class TestMain(unittest.TestCase):
    """main(argv) 테스트. 로깅 설정은 테스트 러너 핸들러를 건드리지 않게 막습니다."""

    def setUp(self) -> None:
        tmp = tempfile.TemporaryDirectory()
        self.addCleanup(tmp.cleanup)
        self.root = Path(tmp.name)
        patcher = mock.patch("policy_to_tests.main.setup_logging")
        patcher.start()
        self.addCleanup(patcher.stop)
        env = mock.patch.dict(os.environ, {}, clear=True)
        env.start()
        self.addCleanup(env.stop)

    def _main(self, *argv: str) -> int:
        """종료 코드를 반환합니다 (정상 종료는 0)."""
        with contextlib.redirect_stdout(io.StringIO()), contextlib.redirect_stderr(io.StringIO()):
            try:
                main(list(argv))
            except SystemExit as e:
                return int(e.code or 0)
        return 0

    def _config(self, data: dict) -> Path:
        path = self.root / "p2t.json"
        path.write_text(json.dumps(data), encoding="utf-8")
        return path

    def test_offline_stage_chain(self) -> None:
        spans = self.root / "spans.jsonl"
        clauses = self.root / "clauses.jsonl"
        rules = self.root / "rules.jsonl"
        unique = self.root / "rules.unique.jsonl"
        tagged = self.root / "rules.tagged.jsonl"
        conflicts = self.root / "conflicts.json"

        self.assertEqual(self._main("ingest", "--in", str(FIXTURES / "policy_small.md"), "--out", str(spans)), 0)
        self.assertEqual(self._main("mine", "--in", str(spans), "--out", str(clauses)), 0)
        self.assertEqual(
            self._main("extract", "--in", str(clauses), "--out", str(rules), "--trace", str(self.root / "t.jsonl")), 0
        )
        self.assertEqual(
            self._main("dedup", "--in", str(rules), "--out", str(unique), "--report", str(self.root / "d.json")), 0
        )
        self.assertEqual(self._main("tag", "--in", str(unique), "--out", str(tagged)), 0)
        self.assertEqual(self._main("check", "--in", str(tagged), "--out", str(conflicts)), 0)

        self.assertGreaterEqual(len(read_records(spans)), len(read_records(clauses)))
        self.assertTrue(read_records(rules))
        self.assertTrue((self.root / "rules.tagged.flags.jsonl").is_file())
        self.assertEqual(read_json(self.root / "d.json")["kept"], len(read_records(unique)))
        self.assertIsInstance(read_json(conflicts), list)

    def test_check_writes_smt(self) -> None:
        rules = write_jsonl(
            self.root / "rules.jsonl",
            [
                make_rule("a#r1", requirement="must encrypt PHI at rest").to_dict(),
                make_rule("b#r1", requirement="must not encrypt PHI at rest").to_dict(),
            ],
        )
        smt = self.root / "conflicts.smt2"

        code = self._main("check", "--in", str(rules), "--out", str(self.root / "c.json"), "--smt", str(smt))

        self.assertEqual(code, 0)
        self.assertEqual(len(read_json(self.root / "c.json")), 1)
        self.assertIn("(check-sat)", smt.read_text(encoding="utf-8"))

    def test_run_and_report(self) -> None:
        config = self._config(
            {
                "documents": [{"path": str(FIXTURES / "policy_small.md"), "doc_id": "sample"}],
                "output_dir": "out",
                "evaluation": {"bootstrap": 100},
            }
        )

        self.assertEqual(self._main("run", "--config", str(config)), 0)
        self.assertEqual(self._main("report", "--config", str(config)), 0)

        summary = (self.root / "out" / "summary.csv").read_text(encoding="utf-8").splitlines()
        self.assertEqual(len(summary), 2)
        self.assertTrue(summary[1].startswith("sample,1,"))

    def test_casestudy(self) -> None:
        out = self.root / "rates.json"

        code = self._main("casestudy", "--judgments", str(FIXTURES / "casestudy_judgments.jsonl"), "--out", str(out))

        self.assertEqual(code, 0)
        rates = read_json(out)
        self.assertEqual(set(rates), {"baseline", "guarded"})
        self.assertAlmostEqual(rates["baseline"]["overall"], 0.34)

    def test_missing_input_exits_1(self) -> None:
        code = self._main("ingest", "--in", str(self.root / "missing.md"), "--out", str(self.root / "s.jsonl"))
        self.assertEqual(code, 1)

    def test_empty_judgments_exit_1(self) -> None:
        empty = self.root / "empty.jsonl"
        empty.write_text("", encoding="utf-8")
        self.assertEqual(self._main("casestudy", "--judgments", str(empty), "--out", str(self.root / "r.json")), 1)

    def test_config_errors_exit_1(self) -> None:
        self.assertEqual(self._main("report", "--config", str(self._config({"unknown": 1}))), 1)
        self.assertEqual(self._main("report", "--config", str(self._config({"provider": {"kind": "remote"}}))), 1)

    def test_missing_manifest_exits_1(self) -> None:
        config = self._config({"output_dir": "nowhere"})
        self.assertEqual(self._main("report", "--config", str(config)), 1)

    def test_provider_error_exits_2(self) -> None:
        config = self._config(
            {
                "provider": {
                    "kind": "remote",
                    "endpoint": "https://llm.example/v1/complete",
                    "embedding_endpoint": "https://llm.example/v1/embed",
                    "api_key": "test-key",
                }
            }
        )
        rules = write_jsonl(
            self.root / "rules.jsonl",
            [make_rule("a#r1").to_dict(), make_rule("b#r1", requirement="must log PHI access").to_dict()],
        )

        with mock.patch.object(requests.Session, "post", side_effect=requests.ConnectionError("refused")):
            code = self._main("dedup", "--config", str(config), "--in", str(rules), "--out", str(self.root / "u.jsonl"))

        self.assertEqual(code, 2)

    def test_offline_flag_avoids_network(self) -> None:
        config = self._config(
            {"provider": {"kind": "remote", "endpoint": "https://llm.example/v1/complete", "api_key": "test-key"}}
        )
        rules = write_jsonl(self.root / "rules.jsonl", [make_rule().to_dict()])

        with mock.patch.object(requests.Session, "post", side_effect=AssertionError("network used")):
            code = self._main(
                "tag", "--config", str(config), "--offline", "--in", str(rules), "--out", str(self.root / "t.jsonl")
            )

        self.assertEqual(code, 0)

    def test_invalid_toggle_is_usage_error(self) -> None:
        code = self._main("extract", "--in", "x", "--out", "y", "--gate", "maybe")
        self.assertEqual(code, 2)


if __name__ == "__main__":
    unittest.main()
