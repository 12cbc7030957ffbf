"""Retrieval quality metrics and grouped aggregation over repeated runs.

Recall and precision are overlap-duration ratios against manually annotated
ground truth:

    recall    = overlap(retrieved, truth) / measure(truth)
    precision = overlap(retrieved, truth) / measure(retrieved)

with the empty-set conventions: an empty truth scores recall 1.0 only when
nothing was retrieved, and an empty retrieval scores precision 1.0 only when
the truth is empty too.

Aggregation mirrors the best-of-N reporting style: per query, the single run
maximising recall + precision is "best"; groups report the mean of those
best values, plus the mean over queries of the per-query population standard
deviation across runs.
"""

from __future__ import annotations

import logging
import statistics
from dataclasses import dataclass
from pathlib import Path

import yaml

from .intervals import Interval, overlap_duration, total_length

logger = logging.getLogger(__name__)

BUCKET_LT3 = "<3"
BUCKET_3TO5 = "[3,5]"
BUCKET_GT5 = ">5"

GROUP_OVERALL = "overall"


def segment_bucket(segment_count: int) -> str:
    if segment_count < 3:
        return BUCKET_LT3
    if segment_count <= 5:
        return BUCKET_3TO5
    return BUCKET_GT5


@dataclass(frozen=True)
class QueryTags:
    genre: str
    content_type: str  # conceptual | sequential
    query_type: str  # conceptual | procedural
    segment_bucket: str

    def group_keys(self) -> list[str]:
        return [
            GROUP_OVERALL,
            f"genre:{self.genre}",
            f"content:{self.content_type}",
            f"query:{self.query_type}",
            f"segments:{self.segment_bucket}",
        ]


@dataclass(frozen=True)
class GroundTruthQuery:
    text: str
    query_type: str
    intervals: tuple[Interval, ...]


@dataclass(frozen=True)
class GroundTruth:
    video_id: str
    genre: str
    content_type: str
    duration: float
    queries: tuple[GroundTruthQuery, ...]


def load_ground_truth(path: Path) -> GroundTruth:
    """One human-editable YAML file per video; intervals are [start, end) pairs."""
    data = yaml.safe_load(path.read_text(encoding="utf-8"))
    duration = float(data["duration"])
    queries = []
    for q in data["queries"]:
        intervals = tuple(Interval(float(s), float(e)) for s, e in q["intervals"])
        for iv in intervals:
            if iv.end > duration:
                raise ValueError(
                    f"{path}: truth interval {iv} exceeds video duration {duration}"
                )
        for a, b in zip(intervals, intervals[1:]):
            if b.start < a.end:
                raise ValueError(f"{path}: truth intervals overlap near {b}")
        queries.append(GroundTruthQuery(
            text=q["text"],
            query_type=q.get("query_type", "conceptual"),
            intervals=intervals,
        ))
    return GroundTruth(
        video_id=data["video_id"],
        genre=data.get("genre", "unknown"),
        content_type=data.get("content_type", "conceptual"),
        duration=duration,
        queries=tuple(queries),
    )


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------


def recall(retrieved: list[Interval], truth: list[Interval]) -> float:
    if not truth:
        return 1.0 if not retrieved else 0.0
    return overlap_duration(retrieved, truth) / total_length(truth)


def precision(retrieved: list[Interval], truth: list[Interval]) -> float:
    if not retrieved:
        return 1.0 if not truth else 0.0
    return overlap_duration(retrieved, truth) / total_length(retrieved)


@dataclass(frozen=True)
class RunMetrics:
    recall: float
    precision: float


def evaluate_runs(
    truth: list[Interval], runs: list[list[Interval]]
) -> list[RunMetrics]:
    return [RunMetrics(recall(r, truth), precision(r, truth)) for r in runs]


# ---------------------------------------------------------------------------
# Aggregation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QueryEval:
    video_id: str
    query_text: str
    tags: QueryTags
    runs: tuple[RunMetrics, ...]

    def best_run(self) -> RunMetrics:
        # first run wins ties, so repeated evaluation stays deterministic
        return max(self.runs, key=lambda m: m.recall + m.precision)

    def recall_std(self) -> float:
        return statistics.pstdev(m.recall for m in self.runs)

    def precision_std(self) -> float:
        return statistics.pstdev(m.precision for m in self.runs)


@dataclass(frozen=True)
class GroupStats:
    observations: int
    best_recall: float
    best_precision: float
    avg_recall_std: float
    avg_precision_std: float


@dataclass(frozen=True)
class EvalReport:
    groups: dict[str, GroupStats]


def aggregate(query_evals: list[QueryEval]) -> EvalReport:
    if not query_evals:
        logger.warning("no query evaluations to aggregate")
        return EvalReport(groups={})
    for qe in query_evals:
        if not qe.runs:
            raise ValueError(f"query {qe.query_text!r} has no runs")

    members: dict[str, list[QueryEval]] = {}
    for qe in query_evals:
        for key in qe.tags.group_keys():
            members.setdefault(key, []).append(qe)

    groups: dict[str, GroupStats] = {}
    for key, qes in members.items():
        bests = [qe.best_run() for qe in qes]
        groups[key] = GroupStats(
            observations=len(qes),
            best_recall=statistics.fmean(b.recall for b in bests),
            best_precision=statistics.fmean(b.precision for b in bests),
            avg_recall_std=statistics.fmean(qe.recall_std() for qe in qes),
            avg_precision_std=statistics.fmean(qe.precision_std() for qe in qes),
        )
    return EvalReport(groups=groups)


def report_to_dict(report: EvalReport) -> dict:
    return {
        "groups": {
            key: {
                "observations": stats.observations,
                "best_recall": stats.best_recall,
                "best_precision": stats.best_precision,
                "avg_recall_std": stats.avg_recall_std,
                "avg_precision_std": stats.avg_precision_std,
            }
            for key, stats in sorted(report.groups.items())
        }
    }


def report_from_dict(data: dict) -> EvalReport:
    return EvalReport(groups={
        key: GroupStats(**stats) for key, stats in data["groups"].items()
    })


_ROWS = (
    ("Observations", "observations", "{:d}"),
    ("Best Recall", "best_recall", "{:.3f}"),
    ("Best Precision", "best_precision", "{:.3f}"),
    ("Avg Recall Std", "avg_recall_std", "{:.3f}"),
    ("Avg Precision Std", "avg_precision_std", "{:.3f}"),
)

_SECTIONS = (
    ("By Video Genre", "genre:"),
    ("By Video Content", "content:"),
    ("By Query Type", "query:"),
    ("By Segment Number", "segments:"),
)


def render_report_table(report: EvalReport) -> str:
    """Text tables, one per grouping dimension, with an Overall column."""
    lines: list[str] = []
    overall = report.groups.get(GROUP_OVERALL)
    for section, prefix in _SECTIONS:
        keys = sorted(k for k in report.groups if k.startswith(prefix))
        if not keys:
            continue
        headers = ["Criteria", "Overall"] + [k.split(":", 1)[1] for k in keys]
        columns = [overall] + [report.groups[k] for k in keys] if overall else [
            report.groups[k] for k in keys
        ]
        table = [headers]
        for label, attr, fmt in _ROWS:
            row = [label] + [fmt.format(getattr(stats, attr)) for stats in columns]
            table.append(row)
        widths = [max(len(row[i]) for row in table) for i in range(len(headers))]
        lines.append(section)
        for row in table:
            lines.append("  " + "  ".join(cell.ljust(w) for cell, w in zip(row, widths)))
        lines.append("")
    return "\n".join(lines).rstrip() + "\n"
