"""Named invariant checks over trajectories.

Each check returns a list of human-readable violation strings (empty
means the invariant held), so callers can aggregate across checks and
steps.  The verify subcommand and the test suite both run these; a
violation on real data means the implementation, not the data, is
wrong.

Strict inequalities are checked as stated on exact data and with a
1e-12 slack on float data; checks that are only meaningful in exact
arithmetic skip float trajectories.
"""

from __future__ import annotations

from typing import Callable, Optional, Sequence

from .analysis import (
    OUTCOME_CONSENSUS,
    classify_outcome,
    opinion_partition,
    per_topic_partition,
    refines,
)
from .avemodel import ave_neighbors, is_epsilon_chain, max_average_gap
from .core import (
    MODEL_AVE,
    PropertyViolation,
    Scalar,
    disagreement_seminorm,
    matrices_close,
    row_average,
    row_normalize,
)
from .oracle import scalar_hk_step
from .sim import Trajectory
from .uniform import linf_neighbors

FLOAT_SLACK = 1e-12
FLOAT_REDUCTION_TOL = 1e-9


def _slack(traj: Trajectory) -> Scalar:
    return 0 if traj.config.policy.is_exact else FLOAT_SLACK


def check_influence(traj: Trajectory) -> list[str]:
    """Recorded neighbor matrices match the model's neighbor rule."""
    rule = ave_neighbors if traj.config.model == MODEL_AVE else linf_neighbors
    out = []
    for t, report in enumerate(traj.reports):
        if rule(traj.states[t], traj.config.epsilon) != report.influence:
            out.append(f"step {t}: influence matrix disagrees with neighbor rule")
    return out


def check_averaging_matrix(traj: Trajectory) -> list[str]:
    """Recorded averaging matrices are the degree-normalized influence."""
    exact = traj.config.policy.is_exact
    out = []
    for t, report in enumerate(traj.reports):
        expected = row_normalize(report.influence, exact=exact)
        if expected.entries != report.averaging_matrix.entries:
            out.append(f"step {t}: averaging matrix is not normalized influence")
    return out


def check_states_chain(traj: Trajectory) -> list[str]:
    """states[t+1] is exactly the next_state of report t."""
    out = []
    for t, report in enumerate(traj.reports):
        if report.next_state.entries != traj.states[t + 1].entries:
            out.append(f"step {t}: recorded state differs from step output")
    return out


def check_contraction(traj: Trajectory) -> list[str]:
    """Per-topic disagreement shrinks by at least the matrix seminorm factor."""
    if traj.config.model != MODEL_AVE:
        return []
    slack = _slack(traj)
    out = []
    for t, report in enumerate(traj.reports):
        before = traj.states[t]
        after = traj.states[t + 1]
        for j in range(before.n_topics):
            lhs = disagreement_seminorm(after.column(j))
            rhs = report.gamma * disagreement_seminorm(before.column(j))
            if lhs > rhs + slack:
                out.append(f"step {t} topic {j}: spread {lhs} exceeds bound {rhs}")
    return out


def check_range_monotone(traj: Trajectory) -> list[str]:
    """Per-topic opinion ranges never grow."""
    slack = _slack(traj)
    out = []
    for t in range(traj.n_steps):
        before = traj.states[t]
        after = traj.states[t + 1]
        for j in range(before.n_topics):
            b = disagreement_seminorm(before.column(j))
            a = disagreement_seminorm(after.column(j))
            if a > b + slack:
                out.append(f"step {t} topic {j}: range grew from {b} to {a}")
    return out


def check_box_confinement(traj: Trajectory) -> list[str]:
    """Per-topic min/max envelopes never widen (steps are convex mixes)."""
    slack = _slack(traj)
    out = []
    for t in range(traj.n_steps):
        before = traj.states[t]
        after = traj.states[t + 1]
        for j in range(before.n_topics):
            bcol = before.column(j)
            acol = after.column(j)
            if min(acol) < min(bcol) - slack or max(acol) > max(bcol) + slack:
                out.append(f"step {t} topic {j}: opinions left the previous hull")
    return out


def check_average_order(traj: Trajectory) -> list[str]:
    """Mean opinions never swap relative order (average-based model)."""
    if traj.config.model != MODEL_AVE:
        return []
    slack = _slack(traj)
    out = []
    for t, report in enumerate(traj.reports):
        before = report.averages.values
        after = row_average(traj.states[t + 1]).values
        order = sorted(range(len(before)), key=lambda i: (before[i], i))
        prev = None
        for i in order:
            if prev is not None and after[i] < after[prev] - slack:
                out.append(f"step {t}: agents {prev + 1} and {i + 1} swapped mean order")
                break
            prev = i
    return out


def check_average_reduction(traj: Trajectory) -> list[str]:
    """Means evolve by the one-dimensional dynamics on means (average-based model)."""
    if traj.config.model != MODEL_AVE:
        return []
    exact = traj.config.policy.is_exact
    tol = 0 if exact else FLOAT_REDUCTION_TOL
    out = []
    for t, report in enumerate(traj.reports):
        expected = scalar_hk_step(report.averages.values, traj.config.epsilon)
        got = row_average(traj.states[t + 1]).values
        if any(abs(p - q) > tol for p, q in zip(expected, got)):
            out.append(f"step {t}: means do not follow the scalar dynamics")
    return out


def check_max_gap_stationary(traj: Trajectory) -> list[str]:
    """A repeated spread of the means stays fixed forever (exact, average-based).

    The spread is the largest pairwise mean gap; when it repeats across
    consecutive steps both extreme means are frozen.  A repeated positive
    value also rules out consensus at termination.
    """
    if traj.config.model != MODEL_AVE or not traj.config.policy.is_exact:
        return []
    gaps = [max_average_gap(row_average(s)) for s in traj.states]
    out = []
    frozen_at: Optional[int] = None
    for t in range(len(gaps) - 1):
        if gaps[t] == gaps[t + 1]:
            frozen_at = t
            break
    if frozen_at is not None:
        for t in range(frozen_at, len(gaps)):
            if gaps[t] != gaps[frozen_at]:
                out.append(
                    f"max mean gap repeated at step {frozen_at} but changed at step {t}"
                )
                break
        if not out and gaps[frozen_at] > 0 and traj.terminated:
            report = classify_outcome(
                traj.final_state,
                traj.config.epsilon,
                traj.config.policy,
                traj.config.model,
                traj.termination_step,
            )
            if report.outcome == OUTCOME_CONSENSUS:
                out.append("positive stationary mean gap but consensus was reached")
    return out


def check_epsilon_chain_link(traj: Trajectory) -> list[str]:
    """Chained means characterize consensus (exact, average-based, terminated).

    The run ends in consensus iff the sorted means stay within epsilon of
    their neighbors at every step, iff they do so at the terminal state.
    """
    if (
        traj.config.model != MODEL_AVE
        or not traj.config.policy.is_exact
        or not traj.terminated
    ):
        return []
    eps = traj.config.epsilon
    report = classify_outcome(
        traj.final_state, eps, traj.config.policy, traj.config.model, traj.termination_step
    )
    consensus = report.outcome == OUTCOME_CONSENSUS
    chains = [is_epsilon_chain(row_average(s), eps) for s in traj.states]
    out = []
    if consensus != chains[-1]:
        out.append("terminal chain test disagrees with consensus outcome")
    if consensus != all(chains):
        out.append("per-step chain tests disagree with consensus outcome")
    if any(chains[t] and not chains[t - 1] for t in range(1, len(chains))):
        out.append("a broken chain reconnected")
    return out


def check_terminal_classification(traj: Trajectory) -> list[str]:
    """Terminated runs end in a state the classifier accepts as terminal."""
    if not traj.terminated:
        return []
    out = []
    if not matrices_close(traj.states[-1], traj.states[-2], traj.config.policy.tau_fix):
        out.append("terminated flag set but last two states differ")
    try:
        report = classify_outcome(
            traj.final_state,
            traj.config.epsilon,
            traj.config.policy,
            traj.config.model,
            traj.termination_step,
        )
    except PropertyViolation as exc:
        return out + [str(exc)]
    if not report.terminated:
        out.append("classifier does not accept the final state as a fixed point")
    return out


def check_per_topic_refinement(traj: Trajectory) -> list[str]:
    """At a terminal state, per-topic groups are unions of full-row groups."""
    if not traj.terminated:
        return []
    policy = traj.config.policy
    final = traj.final_state
    full = opinion_partition(final, policy)
    out = []
    for j in range(final.n_topics):
        topicwise = per_topic_partition(final, j, policy)
        if not refines(full, topicwise):
            out.append(f"topic {j}: row clusters split across a per-topic group")
        if topicwise.n_blocks > full.n_blocks:
            out.append(f"topic {j}: more per-topic groups than row clusters")
    return out


ALL_CHECKS: dict[str, Callable[[Trajectory], list[str]]] = {
    "influence": check_influence,
    "averaging-matrix": check_averaging_matrix,
    "states-chain": check_states_chain,
    "contraction": check_contraction,
    "range-monotone": check_range_monotone,
    "box-confinement": check_box_confinement,
    "average-order": check_average_order,
    "average-reduction": check_average_reduction,
    "max-gap-stationary": check_max_gap_stationary,
    "epsilon-chain-link": check_epsilon_chain_link,
    "terminal-classification": check_terminal_classification,
    "per-topic-refinement": check_per_topic_refinement,
}


def check_trajectory(
    traj: Trajectory, names: Optional[Sequence[str]] = None
) -> list[str]:
    """Run the named checks (default: all) and collect every violation."""
    selected = list(ALL_CHECKS) if names is None else list(names)
    out = []
    for name in selected:
        try:
            fn = ALL_CHECKS[name]
        except KeyError:
            raise ValueError(f"unknown check {name!r}")
        out.extend(f"{name}: {msg}" for msg in fn(traj))
    return out
