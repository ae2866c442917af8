"""Uniform-affinity bounded-confidence dynamics.

Agents compare full opinion rows: i listens to k only when they are
within the confidence bound on EVERY topic (max-distance between rows
at most epsilon).  The update is the same neighbor averaging as the
average-based model; only the neighbor test differs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .core import (
    InfluenceMatrix,
    OpinionMatrix,
    RowStochasticMatrix,
    Scalar,
    check_epsilon,
    global_range,
    neighbor_means,
    row_normalize,
    rows_use_floats,
)


@dataclass(frozen=True)
class UniformStepReport:
    """One synchronous update plus order and range diagnostics.

    ``influence``, ``averaging_matrix``, ``global_range_before`` and
    ``per_topic_orderings`` describe the pre-step state;
    ``per_topic_orderings[j]`` lists agents sorted ascending by topic j
    (ties by index).
    """

    next_state: OpinionMatrix
    influence: InfluenceMatrix
    averaging_matrix: RowStochasticMatrix
    global_range_before: Scalar
    global_range_after: Scalar
    per_topic_orderings: tuple[tuple[int, ...], ...]


def _row_distance(a: tuple[Scalar, ...], b: tuple[Scalar, ...]) -> Scalar:
    return max(abs(p - q) for p, q in zip(a, b))


def linf_neighbors(x: OpinionMatrix, epsilon: Scalar) -> InfluenceMatrix:
    """Influence matrix: neighbors iff within epsilon on every topic."""
    check_epsilon(epsilon)
    rows = x.entries
    n = x.n_agents
    out = tuple(
        tuple(1 if _row_distance(rows[i], rows[k]) <= epsilon else 0 for k in range(n))
        for i in range(n)
    )
    return InfluenceMatrix(out)


def uniform_step(x: OpinionMatrix, epsilon: Scalar) -> UniformStepReport:
    """One synchronous step of the uniform-affinity model."""
    check_epsilon(epsilon)
    influence = linf_neighbors(x, epsilon)
    averaging_matrix = row_normalize(influence, exact=not rows_use_floats(x.entries))
    next_state = neighbor_means(x, influence)
    orderings = tuple(
        tuple(sorted(range(x.n_agents), key=lambda i: (x.entries[i][j], i)))
        for j in range(x.n_topics)
    )
    return UniformStepReport(
        next_state=next_state,
        influence=influence,
        averaging_matrix=averaging_matrix,
        global_range_before=global_range(x),
        global_range_after=global_range(next_state),
        per_topic_orderings=orderings,
    )


def one_step_preservation_hypothesis(x: OpinionMatrix, epsilon: Scalar) -> bool:
    """True when every non-neighbor pair disagrees by more than epsilon on ALL topics.

    Under this condition a single step cannot swap the relative order of
    any two agents on any topic.  Pairs that are far on one topic but
    close on another (non-neighbors all the same) are exactly the ones
    that can swap.
    """
    check_epsilon(epsilon)
    rows = x.entries
    n = x.n_agents
    for i in range(n):
        for k in range(i + 1, n):
            if _row_distance(rows[i], rows[k]) <= epsilon:
                continue
            if any(abs(p - q) <= epsilon for p, q in zip(rows[i], rows[k])):
                return False
    return True


def globally_ordered(x: OpinionMatrix) -> Optional[tuple[int, ...]]:
    """Permutation sorting every topic column at once, or None.

    Such a permutation exists iff the rows form a chain under the
    entrywise order, in which case sorting rows lexicographically
    (ties by index) realizes it.  When one exists the dynamics keep
    every column sorted under the same permutation forever.
    """
    order = sorted(range(x.n_agents), key=lambda i: (x.entries[i], i))
    for j in range(x.n_topics):
        col = [x.entries[i][j] for i in order]
        if any(a > b for a, b in zip(col, col[1:])):
            return None
    return tuple(order)
