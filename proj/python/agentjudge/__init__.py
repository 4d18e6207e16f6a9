"""Python bindings for the agentjudge C++ core (mock backend only)."""

import json
import os
from pathlib import Path

_resources = Path(__file__).resolve().parent / "resources"
if "AGENTJUDGE_DATA_DIR" not in os.environ and (_resources / "templates").is_dir():
    os.environ["AGENTJUDGE_DATA_DIR"] = str(_resources)

from . import _core  # noqa: E402
from ._core import AgentJudgeError, chunk_log, token_count  # noqa: E402

__all__ = [
    "AgentJudgeError",
    "chunk_log",
    "parse_report",
    "render_metrics_table",
    "run_baseline",
    "run_judge",
    "score_alignment",
    "serialize_report",
    "token_count",
]


def parse_report(text):
    """Validate an evaluation report and return it as a dict."""
    return json.loads(_core.normalize_report(text))


def serialize_report(report, indent=4):
    if not isinstance(report, str):
        report = json.dumps(report)
    return _core.normalize_report(report, indent)


def score_alignment(predictions, dataset):
    """predictions: mapping or pairs of task_id -> "yes"/"no"."""
    if isinstance(predictions, dict):
        predictions = list(predictions.items())
    return json.loads(_core.score_alignment(list(predictions), str(dataset)))


def render_metrics_table(table):
    if not isinstance(table, str):
        table = json.dumps(table)
    return _core.render_metrics_table(table)


def run_judge(dataset, log_dir, output, mock_rules, parallelism=1, verdict_mode="llm"):
    """Judge every task in the dataset with the mock backend; returns the manifest."""
    return json.loads(
        _core.run_judge(str(dataset), str(log_dir), str(output), str(mock_rules),
                        parallelism, verdict_mode))


def run_baseline(dataset, output, mock_rules):
    return json.loads(_core.run_baseline(str(dataset), str(output), str(mock_rules)))
