"""Facade 패키지."""

from policy_to_tests.facades.pipeline_facade import JobResult, PipelineFacade, RunManifest, SummaryTable

__all__ = ["JobResult", "PipelineFacade", "RunManifest", "SummaryTable"]
