"""Persona and rubric guided critique-and-refine for personalized stories."""

import json as _json

from . import _core
from ._core import (
    PrefineError,
    approx_token_count,
    average_rank,
    capabilities,
    correct,
    count_tokens,
    describe,
    kendall,
    method_names,
    parse_pairwise_reply,
    parse_quality_reply,
    parse_score_reply,
    pearson,
    register_tokenizer,
    unregister_tokenizer,
    sample_text,
    spearman,
    wilcoxon,
)

__all__ = [
    "PrefineError",
    "approx_token_count",
    "average_rank",
    "capabilities",
    "cli",
    "correct",
    "count_tokens",
    "describe",
    "kendall",
    "method_names",
    "parse_pairwise_reply",
    "parse_quality_reply",
    "parse_score_reply",
    "pearson",
    "register_tokenizer",
    "run_record",
    "sample_records",
    "sample_text",
    "spearman",
    "unregister_tokenizer",
    "wilcoxon",
]


def sample_records(dataset):
    """Bundled sample records of `dataset` ("perdoc" or "permpst") as dicts."""
    text = sample_text(f"sample_{dataset.lower()}.jsonl")
    return [_json.loads(line) for line in text.splitlines() if line.strip()]


def run_record(record, dataset, method, **kwargs):
    """Run one method on one record; returns the trace as a dict.

    `record` may be a dict or a JSON line.
    """
    line = record if isinstance(record, str) else _json.dumps(record)
    return _json.loads(_core.run_record(line, dataset, method, **kwargs))


def cli(*args):
    """Run a command-line verb in-process; returns (status, stdout, stderr)."""
    return _core.cli([str(a) for a in args])
