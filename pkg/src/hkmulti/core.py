"""Matrix and seminorm primitives shared by both bounded-confidence models.

All containers are immutable tuples and every operation is a pure function
of its inputs, so values are safe to share between threads.

Two scalar regimes coexist: exact arithmetic on ints and
:class:`fractions.Fraction`, and IEEE floats.  Arithmetic follows the
scalar type of the data (dividing by ``Fraction(count)`` keeps exact
inputs exact while float inputs stay float); :class:`NumericPolicy`
decides how external inputs are coerced and which tolerances
comparisons use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

Scalar = Union[int, float, Fraction]

MODE_EXACT = "exact"
MODE_FLOAT = "float"

MODEL_AVE = "ave"
MODEL_UNIFORM = "uniform"
MODEL_KINDS = (MODEL_AVE, MODEL_UNIFORM)

DEFAULT_TAU_FIX = 1e-12
DEFAULT_TAU_CLUSTER = 1e-9
DEFAULT_TAU_ROW = 1e-9


class PropertyViolation(AssertionError):
    """A structural guarantee of the dynamics failed to hold on actual data."""


def check_epsilon(epsilon: Scalar) -> None:
    if not is_finite(epsilon) or epsilon <= 0:
        raise ValueError("confidence bound must be positive and finite")


def is_finite(value: Scalar) -> bool:
    """ints and Fractions are always finite; floats must pass isfinite."""
    return not isinstance(value, float) or math.isfinite(value)


def rows_use_floats(rows: Iterable[Iterable[Scalar]]) -> bool:
    return any(isinstance(v, float) for row in rows for v in row)


@dataclass(frozen=True)
class NumericPolicy:
    """Arithmetic mode plus the tolerances used by comparisons.

    ``tau_fix`` bounds the max-abs state difference that still counts as a
    fixed point, ``tau_cluster`` the difference that still counts as equal
    opinions, ``tau_row`` the row-sum slack accepted for row-stochastic
    matrices.  Exact mode forces all three to zero.
    """

    mode: str
    tau_fix: Scalar = 0
    tau_cluster: Scalar = 0
    tau_row: Scalar = 0

    def __post_init__(self) -> None:
        if self.mode not in (MODE_EXACT, MODE_FLOAT):
            raise ValueError(f"unknown numeric mode {self.mode!r}")
        for name in ("tau_fix", "tau_cluster", "tau_row"):
            value = getattr(self, name)
            if not is_finite(value) or value < 0:
                raise ValueError(f"{name} must be finite and nonnegative")
            if self.mode == MODE_EXACT and value != 0:
                raise ValueError("exact mode requires zero tolerances")

    @classmethod
    def exact(cls) -> "NumericPolicy":
        return cls(MODE_EXACT)

    @classmethod
    def floating(
        cls,
        tau_fix: float = DEFAULT_TAU_FIX,
        tau_cluster: float = DEFAULT_TAU_CLUSTER,
        tau_row: float = DEFAULT_TAU_ROW,
    ) -> "NumericPolicy":
        return cls(MODE_FLOAT, tau_fix, tau_cluster, tau_row)

    @property
    def is_exact(self) -> bool:
        return self.mode == MODE_EXACT

    def coerce(self, value: Union[Scalar, str]) -> Scalar:
        """Convert a number or numeric string to this policy's scalar type.

        Exact mode maps floats to their exact binary value and parses
        strings ("0.25", "1/3") exactly; float mode rounds to double.
        """
        if self.is_exact:
            return Fraction(value)
        if isinstance(value, str):
            return float(Fraction(value))
        return float(value)

    def coerce_rows(
        self, rows: Iterable[Iterable[Union[Scalar, str]]]
    ) -> tuple[tuple[Scalar, ...], ...]:
        return tuple(tuple(self.coerce(v) for v in row) for row in rows)


@dataclass(frozen=True)
class OpinionMatrix:
    """N x m matrix; row i holds agent i's opinions on the m topics."""

    entries: tuple[tuple[Scalar, ...], ...]

    def __post_init__(self) -> None:
        rows = tuple(tuple(row) for row in self.entries)
        object.__setattr__(self, "entries", rows)
        if not rows or not rows[0]:
            raise ValueError("need at least one agent and one topic")
        width = len(rows[0])
        for row in rows:
            if len(row) != width:
                raise ValueError("ragged opinion matrix")
            for v in row:
                if not is_finite(v):
                    raise ValueError("opinion entries must be finite")

    @property
    def n_agents(self) -> int:
        return len(self.entries)

    @property
    def n_topics(self) -> int:
        return len(self.entries[0])

    def row(self, i: int) -> tuple[Scalar, ...]:
        return self.entries[i]

    def column(self, j: int) -> tuple[Scalar, ...]:
        return tuple(row[j] for row in self.entries)


@dataclass(frozen=True)
class AverageVector:
    """Length-N vector of per-agent mean opinions."""

    values: tuple[Scalar, ...]

    def __post_init__(self) -> None:
        vals = tuple(self.values)
        object.__setattr__(self, "values", vals)
        if not vals:
            raise ValueError("empty average vector")
        if any(not is_finite(v) for v in vals):
            raise ValueError("average entries must be finite")

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class InfluenceMatrix:
    """Binary adjacency of the interaction graph: reflexive and symmetric."""

    entries: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        rows = tuple(tuple(row) for row in self.entries)
        object.__setattr__(self, "entries", rows)
        n = len(rows)
        if n == 0:
            raise ValueError("empty influence matrix")
        for i, row in enumerate(rows):
            if len(row) != n:
                raise ValueError("influence matrix must be square")
            if any(v not in (0, 1) for v in row):
                raise ValueError("influence entries must be 0 or 1")
            if row[i] != 1:
                raise ValueError("every agent must be its own neighbor")
        for i in range(n):
            for k in range(i + 1, n):
                if rows[i][k] != rows[k][i]:
                    raise ValueError("influence matrix must be symmetric")

    @property
    def n_agents(self) -> int:
        return len(self.entries)

    def neighbors(self, i: int) -> tuple[int, ...]:
        return tuple(k for k, v in enumerate(self.entries[i]) if v)

    def degree(self, i: int) -> int:
        return sum(self.entries[i])


@dataclass(frozen=True)
class RowStochasticMatrix:
    """Square nonnegative matrix with unit row sums.

    Row sums are checked at construction: exactly for int/Fraction entries,
    within ``row_tol`` (default 1e-9) when any entry is a float.  Inputs
    that fail are rejected rather than renormalized.
    """

    entries: tuple[tuple[Scalar, ...], ...]
    row_tol: Optional[Scalar] = field(default=None, repr=False, compare=False)

    def __post_init__(self) -> None:
        rows = tuple(tuple(row) for row in self.entries)
        object.__setattr__(self, "entries", rows)
        n = len(rows)
        if n == 0:
            raise ValueError("empty matrix")
        tol = self.row_tol
        if tol is None:
            tol = DEFAULT_TAU_ROW if rows_use_floats(rows) else 0
        for row in rows:
            if len(row) != n:
                raise ValueError("row-stochastic matrix must be square")
            if any(not is_finite(v) or v < 0 for v in row):
                raise ValueError("entries must be finite and nonnegative")
            if abs(sum(row) - 1) > tol:
                raise ValueError(f"row sum {sum(row)} outside tolerance {tol}")

    @property
    def n_agents(self) -> int:
        return len(self.entries)


def row_average(x: OpinionMatrix) -> AverageVector:
    """Per-agent mean opinion across topics."""
    m = Fraction(x.n_topics)
    return AverageVector(tuple(sum(row) / m for row in x.entries))


def disagreement_seminorm(values: Sequence[Scalar]) -> Scalar:
    """Largest pairwise gap max_{i,j} |v_i - v_j|; zero for a single value.

    Vanishes exactly on constant vectors, which is why it measures
    disagreement rather than magnitude.
    """
    if not values:
        raise ValueError("empty vector")
    return max(values) - min(values)


def induced_disagreement_seminorm(
    a: Union[RowStochasticMatrix, Sequence[Sequence[Scalar]]],
) -> Scalar:
    """Disagreement seminorm induced on a row-stochastic matrix.

    Computed by the closed form 1 - min over row pairs of the overlap
    sum_k min(A_ik, A_jk).  Lies in [0, 1] and equals 0 iff all rows
    coincide.  Non-row-stochastic input is rejected.
    """
    if not isinstance(a, RowStochasticMatrix):
        a = RowStochasticMatrix(tuple(tuple(row) for row in a))
    rows = a.entries
    n = len(rows)
    least = None
    for i in range(n):
        for j in range(i + 1, n):
            overlap = sum(min(p, q) for p, q in zip(rows[i], rows[j]))
            if least is None or overlap < least:
                least = overlap
    if least is None:
        return 0
    return 1 - least


def row_normalize(phi: InfluenceMatrix, exact: bool = True) -> RowStochasticMatrix:
    """Divide each row of a binary influence matrix by its degree.

    Reflexivity guarantees positive degrees; an all-zero row signals a
    broken invariant upstream and raises.
    """
    rows = []
    for i in range(phi.n_agents):
        deg = phi.degree(i)
        if deg == 0:
            raise ValueError(f"agent {i} has no neighbors")
        weight = Fraction(1, deg) if exact else 1.0 / deg
        rows.append(tuple(weight * v for v in phi.entries[i]))
    return RowStochasticMatrix(tuple(rows))


def topic_range(x: OpinionMatrix, topic: int) -> Scalar:
    """Opinion range on one topic: disagreement seminorm of that column."""
    if not 0 <= topic < x.n_topics:
        raise IndexError(f"topic {topic} out of range for {x.n_topics} topics")
    return disagreement_seminorm(x.column(topic))


def global_range(x: OpinionMatrix) -> Scalar:
    """Largest per-topic opinion range."""
    return max(topic_range(x, j) for j in range(x.n_topics))


def neighbor_means(x: OpinionMatrix, influence: InfluenceMatrix) -> OpinionMatrix:
    """Replace each row by the mean of its neighbors' rows."""
    if influence.n_agents != x.n_agents:
        raise ValueError("influence matrix does not match agent count")
    rows = []
    for i in range(x.n_agents):
        nbrs = influence.neighbors(i)
        deg = Fraction(len(nbrs))
        rows.append(
            tuple(
                sum(x.entries[k][j] for k in nbrs) / deg for j in range(x.n_topics)
            )
        )
    return OpinionMatrix(tuple(rows))


def matrix_apply(a: RowStochasticMatrix, x: OpinionMatrix) -> OpinionMatrix:
    """Matrix product A @ X (row-wise convex combinations)."""
    if a.n_agents != x.n_agents:
        raise ValueError("matrix sizes do not match")
    rows = []
    for i in range(x.n_agents):
        arow = a.entries[i]
        rows.append(
            tuple(
                sum(arow[k] * x.entries[k][j] for k in range(x.n_agents))
                for j in range(x.n_topics)
            )
        )
    return OpinionMatrix(tuple(rows))


def matrices_close(x: OpinionMatrix, y: OpinionMatrix, tol: Scalar) -> bool:
    """Max-abs entry difference at most tol (exact equality when tol is 0)."""
    if x.n_agents != y.n_agents or x.n_topics != y.n_topics:
        raise ValueError("matrix shapes differ")
    return all(
        abs(p - q) <= tol for xr, yr in zip(x.entries, y.entries) for p, q in zip(xr, yr)
    )


def values_close(xs: Sequence[Scalar], ys: Sequence[Scalar], tol: Scalar) -> bool:
    if len(xs) != len(ys):
        raise ValueError("vector lengths differ")
    return all(abs(p - q) <= tol for p, q in zip(xs, ys))
