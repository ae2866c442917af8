"""On-disk formats: CSV matrices, JSONL trajectories, summary dicts.

Exact scalars travel as "p/q" strings, floats as shortest round-trip
decimals, so both regimes survive a write/read cycle unchanged.  JSON
objects are written with sorted keys and fixed separators; a rerun of
the same configuration therefore reproduces files byte for byte.
Agents and topics are 1-based in every external format.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Optional, Union

from .analysis import OutcomeReport
from .core import (
    MODEL_AVE,
    NumericPolicy,
    OpinionMatrix,
    Scalar,
    topic_range,
)
from .sim import Trajectory

PathLike = Union[str, Path]


def scalar_token(value: Scalar, exact: bool) -> Union[str, float]:
    """JSON-ready form of one scalar: "p/q" string when exact, else float."""
    if exact:
        return str(Fraction(value))
    return float(value)


def csv_token(value: Scalar, exact: bool) -> str:
    if exact:
        return str(Fraction(value))
    return repr(float(value))


def matrix_tokens(x: OpinionMatrix, exact: bool) -> list[list[Union[str, float]]]:
    return [[scalar_token(v, exact) for v in row] for row in x.entries]


def write_matrix_csv(path: PathLike, x: OpinionMatrix, exact: bool) -> None:
    """Headerless CSV, one agent per row, one topic per column."""
    lines = [",".join(csv_token(v, exact) for v in row) for row in x.entries]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_matrix_csv(path: PathLike, policy: NumericPolicy) -> OpinionMatrix:
    rows = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line:
            continue
        rows.append(tuple(policy.coerce(tok.strip()) for tok in line.split(",")))
    if not rows:
        raise ValueError(f"no rows in {path}")
    return OpinionMatrix(tuple(rows))


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def trajectory_lines(traj: Trajectory) -> list[str]:
    """JSONL records: one per step with diagnostics, then the final state.

    Step records carry the pre-step state, 1-based neighbor lists, the
    per-topic ranges of that state, and (average-based model only) the
    contraction factor of the step's averaging matrix.
    """
    exact = traj.config.policy.is_exact
    lines = []
    for t, report in enumerate(traj.reports):
        state = traj.states[t]
        record = {
            "step": t,
            "state": matrix_tokens(state, exact),
            "influence": [
                [k + 1 for k in report.influence.neighbors(i)]
                for i in range(state.n_agents)
            ],
            "topic_ranges": [
                scalar_token(topic_range(state, j), exact)
                for j in range(state.n_topics)
            ],
        }
        if traj.config.model == MODEL_AVE:
            record["gamma"] = scalar_token(report.gamma, exact)
        lines.append(_dump(record))
    lines.append(
        _dump(
            {
                "step": traj.n_steps,
                "state": matrix_tokens(traj.final_state, exact),
            }
        )
    )
    return lines


def write_trajectory_jsonl(path: PathLike, traj: Trajectory) -> None:
    Path(path).write_text("\n".join(trajectory_lines(traj)) + "\n", encoding="utf-8")


@dataclass(frozen=True)
class StepRecord:
    """One deserialized JSONL step: pre-step state plus diagnostics."""

    step: int
    state: OpinionMatrix
    influence_lists: Optional[tuple[tuple[int, ...], ...]]
    topic_ranges: Optional[tuple[Scalar, ...]]
    gamma: Optional[Scalar]


def read_trajectory_jsonl(path: PathLike, policy: NumericPolicy) -> list[StepRecord]:
    """Parse a trajectory file; neighbor lists come back 0-based."""
    records = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line:
            continue
        raw = json.loads(line)
        influence = None
        if "influence" in raw:
            influence = tuple(
                tuple(k - 1 for k in nbrs) for nbrs in raw["influence"]
            )
        ranges = None
        if "topic_ranges" in raw:
            ranges = tuple(policy.coerce(v) for v in raw["topic_ranges"])
        gamma = policy.coerce(raw["gamma"]) if "gamma" in raw else None
        records.append(
            StepRecord(
                step=int(raw["step"]),
                state=OpinionMatrix(policy.coerce_rows(raw["state"])),
                influence_lists=influence,
                topic_ranges=ranges,
                gamma=gamma,
            )
        )
    if not records:
        raise ValueError(f"no records in {path}")
    return records


def partition_lists(partition) -> list[list[int]]:
    """Agent groups as 1-based lists; accepts a Partition or raw blocks."""
    blocks = getattr(partition, "blocks", partition)
    return [[i + 1 for i in block] for block in blocks]


def outcome_to_dict(report: OutcomeReport, exact: bool) -> dict:
    """Summary dict for an outcome report (agents 1-based, scalars tokenized)."""
    out = {
        "model": report.model,
        "outcome": report.outcome,
        "terminated": report.terminated,
        "termination_step": report.termination_step,
        "n_clusters": None,
        "partition": None,
        "cluster_matrix": None,
        "cluster_averages": None,
        "average_partition": None,
        "partitions_agree": report.partitions_agree,
        "min_average_separation": None,
    }
    if report.partition is not None:
        out["n_clusters"] = report.partition.n_blocks
        out["partition"] = partition_lists(report.partition.blocks)
    if report.cluster_matrix is not None:
        out["cluster_matrix"] = matrix_tokens(report.cluster_matrix, exact)
    if report.cluster_averages is not None:
        out["cluster_averages"] = [scalar_token(v, exact) for v in report.cluster_averages]
    if report.average_partition is not None:
        out["average_partition"] = partition_lists(report.average_partition.blocks)
    if report.min_average_separation is not None:
        out["min_average_separation"] = scalar_token(report.min_average_separation, exact)
    return out


def write_json(path: PathLike, obj) -> None:
    Path(path).write_text(_dump(obj) + "\n", encoding="utf-8")


def read_json(path: PathLike):
    return json.loads(Path(path).read_text(encoding="utf-8"))
