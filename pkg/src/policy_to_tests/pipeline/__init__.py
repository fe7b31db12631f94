"""파이프라인 단계: ingest → mine → extract → dedup → tag → examples → check."""

from policy_to_tests.pipeline.clause_miner import MinerConfig, MinerWeights, mine
from policy_to_tests.pipeline.consistency import find_conflicts
from policy_to_tests.pipeline.dedup import dup_index, run_dedup
from policy_to_tests.pipeline.enrich import run_examples, run_tagging
from policy_to_tests.pipeline.extract import ExtractOptions, GateConfig, run_extract
from policy_to_tests.pipeline.ingest import chunk, load_document

__all__ = [
    "ExtractOptions",
    "GateConfig",
    "MinerConfig",
    "MinerWeights",
    "chunk",
    "dup_index",
    "find_conflicts",
    "load_document",
    "mine",
    "run_dedup",
    "run_examples",
    "run_extract",
    "run_tagging",
]
