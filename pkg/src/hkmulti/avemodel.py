"""Average-based bounded-confidence dynamics.

Agents compare mean opinions: i listens to k when their per-agent means
differ by at most the confidence bound.  One step replaces each opinion
row with the mean of the neighbors' rows, so the whole multi-topic
process projects onto a one-dimensional process on the means.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import (
    AverageVector,
    InfluenceMatrix,
    OpinionMatrix,
    RowStochasticMatrix,
    Scalar,
    check_epsilon,
    disagreement_seminorm,
    induced_disagreement_seminorm,
    neighbor_means,
    row_average,
    row_normalize,
    rows_use_floats,
    topic_range,
)


@dataclass(frozen=True)
class AveStepReport:
    """One synchronous update plus the quantities the analysis layer reads.

    ``averages``, ``influence``, ``averaging_matrix``, ``gamma`` and
    ``topic_ranges`` all describe the state the step was taken FROM;
    only ``next_state`` is post-step.
    """

    next_state: OpinionMatrix
    averages: AverageVector
    influence: InfluenceMatrix
    averaging_matrix: RowStochasticMatrix
    gamma: Scalar
    topic_ranges: tuple[Scalar, ...]


def _neighbors_from_averages(values: tuple[Scalar, ...], epsilon: Scalar) -> InfluenceMatrix:
    n = len(values)
    rows = tuple(
        tuple(1 if abs(values[i] - values[k]) <= epsilon else 0 for k in range(n))
        for i in range(n)
    )
    return InfluenceMatrix(rows)


def ave_neighbors(x: OpinionMatrix, epsilon: Scalar) -> InfluenceMatrix:
    """Influence matrix: agents are neighbors when their means are within epsilon."""
    check_epsilon(epsilon)
    return _neighbors_from_averages(row_average(x).values, epsilon)


def ave_step(x: OpinionMatrix, epsilon: Scalar) -> AveStepReport:
    """One synchronous step of the average-based model."""
    check_epsilon(epsilon)
    averages = row_average(x)
    influence = _neighbors_from_averages(averages.values, epsilon)
    averaging_matrix = row_normalize(influence, exact=not rows_use_floats(x.entries))
    return AveStepReport(
        next_state=neighbor_means(x, influence),
        averages=averages,
        influence=influence,
        averaging_matrix=averaging_matrix,
        gamma=induced_disagreement_seminorm(averaging_matrix),
        topic_ranges=tuple(topic_range(x, j) for j in range(x.n_topics)),
    )


def max_average_gap(averages: AverageVector) -> Scalar:
    """Largest pairwise gap between agent means; 0 for a single agent.

    Same as the disagreement seminorm of the mean vector.  Once this
    quantity repeats across two consecutive steps it stays fixed forever
    (both extremes freeze), so a repeated positive value rules out
    consensus.
    """
    return disagreement_seminorm(averages.values)


def is_epsilon_chain(averages: AverageVector, epsilon: Scalar) -> bool:
    """True when consecutive sorted means never jump by more than epsilon.

    Equivalent to the interaction graph on means being connected.
    """
    check_epsilon(epsilon)
    vals = sorted(averages.values)
    return all(b - a <= epsilon for a, b in zip(vals, vals[1:]))
