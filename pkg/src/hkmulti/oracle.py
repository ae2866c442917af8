"""Independent reference implementations used to cross-check the fast paths.

Everything here recomputes results from first principles with plain
loops and no shared helpers, deliberately duplicating logic that exists
elsewhere in the package.  Do not "simplify" these into calls to the
production code; the duplication is the point.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .core import MODEL_AVE, MODEL_KINDS, OpinionMatrix, Scalar, check_epsilon


def induced_seminorm_bruteforce(rows: Sequence[Sequence[Scalar]]) -> Scalar:
    """Induced disagreement seminorm via the defining pairwise form.

    For row-stochastic A this equals max over row pairs of half the L1
    distance between the rows, which is what is computed here.
    """
    mat = [tuple(row) for row in rows]
    best: Scalar = 0
    for i in range(len(mat)):
        for j in range(i + 1, len(mat)):
            dist = 0
            for p, q in zip(mat[i], mat[j]):
                dist += abs(p - q)
            half = dist / Fraction(2)
            if half > best:
                best = half
    return best


def scalar_hk_step(values: Sequence[Scalar], epsilon: Scalar) -> tuple[Scalar, ...]:
    """One bounded-confidence step on a plain vector of scalar opinions."""
    check_epsilon(epsilon)
    vals = tuple(values)
    out = []
    for i, vi in enumerate(vals):
        total: Scalar = 0
        count = 0
        for vk in vals:
            if abs(vi - vk) <= epsilon:
                total += vk
                count += 1
        out.append(total / Fraction(count))
    return tuple(out)


def naive_model_step(x: OpinionMatrix, epsilon: Scalar, model: str) -> OpinionMatrix:
    """One step of either model, written as bare quadruple loops.

    Neighbor tests and averaging follow the definitions directly; the
    result must match the production step bit for bit in either
    arithmetic mode.
    """
    check_epsilon(epsilon)
    if model not in MODEL_KINDS:
        raise ValueError(f"unknown model {model!r}")
    rows = x.entries
    n = x.n_agents
    m = x.n_topics

    if model == MODEL_AVE:
        means = []
        for row in rows:
            total: Scalar = 0
            for v in row:
                total += v
            means.append(total / Fraction(m))

        def adjacent(i: int, k: int) -> bool:
            return abs(means[i] - means[k]) <= epsilon

    else:

        def adjacent(i: int, k: int) -> bool:
            worst: Scalar = 0
            for j in range(m):
                gap = abs(rows[i][j] - rows[k][j])
                if gap > worst:
                    worst = gap
            return worst <= epsilon

    out = []
    for i in range(n):
        nbrs = [k for k in range(n) if adjacent(i, k)]
        row = []
        for j in range(m):
            total = 0
            for k in nbrs:
                total += rows[k][j]
            row.append(total / Fraction(len(nbrs)))
        out.append(tuple(row))
    return OpinionMatrix(tuple(out))
