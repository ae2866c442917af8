"""Trajectory engine: run either model to a fixed point or a step budget.

Runs are pure functions of (config, initial state), and initial states
drawn from a box are pure functions of the seed, so any trajectory can
be reproduced bit for bit from those ingredients.
"""

from __future__ import annotations

import os
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence, Union

from .avemodel import AveStepReport, ave_step
from .core import (
    MODEL_AVE,
    MODEL_KINDS,
    NumericPolicy,
    OpinionMatrix,
    Scalar,
    check_epsilon,
    is_finite,
    matrices_close,
)
from .uniform import UniformStepReport, uniform_step

StepReport = Union[AveStepReport, UniformStepReport]

MAX_THREADS_ENV = "HK_MAX_THREADS"

# name recorded in manifests for the box sampler below
GENERATOR_NAME = "python-random-mt19937"


@dataclass(frozen=True)
class SimulationConfig:
    model: str
    epsilon: Scalar
    max_steps: int
    policy: NumericPolicy

    def __post_init__(self) -> None:
        if self.model not in MODEL_KINDS:
            raise ValueError(f"unknown model {self.model!r}")
        check_epsilon(self.epsilon)
        if self.max_steps < 0:
            raise ValueError("max_steps must be nonnegative")


@dataclass(frozen=True)
class Trajectory:
    """States visited plus the per-step reports that produced them.

    ``states[t+1]`` is ``reports[t].next_state``.  When the run reaches a
    fixed point the duplicate terminal state is kept, so
    ``termination_step`` is the first index t with
    ``states[t+1] == states[t]`` (within tau_fix).
    """

    config: SimulationConfig
    states: tuple[OpinionMatrix, ...]
    reports: tuple[StepReport, ...]
    terminated: bool
    termination_step: Optional[int]

    @property
    def n_steps(self) -> int:
        return len(self.reports)

    @property
    def final_state(self) -> OpinionMatrix:
        return self.states[-1]


def run(config: SimulationConfig, initial: OpinionMatrix) -> Trajectory:
    """Iterate the configured model from ``initial``.

    The initial state is re-coerced under the config's numeric policy so
    the whole trajectory lives in one arithmetic regime.  Stops at the
    first fixed point or after max_steps updates, whichever comes first.
    """
    step = ave_step if config.model == MODEL_AVE else uniform_step
    policy = config.policy
    states = [OpinionMatrix(policy.coerce_rows(initial.entries))]
    reports: list[StepReport] = []
    terminated = False
    termination_step: Optional[int] = None
    for t in range(config.max_steps):
        report = step(states[-1], config.epsilon)
        reports.append(report)
        states.append(report.next_state)
        if matrices_close(states[-1], states[-2], policy.tau_fix):
            terminated = True
            termination_step = t
            break
    return Trajectory(
        config=config,
        states=tuple(states),
        reports=tuple(reports),
        terminated=terminated,
        termination_step=termination_step,
    )


def sample_initial(
    n_agents: int,
    n_topics: int,
    box: Sequence,
    seed: int,
    policy: NumericPolicy,
) -> OpinionMatrix:
    """Draw an initial state uniformly from a per-topic box.

    ``box`` is one (lo, hi) pair applied to every topic, or one pair per
    topic.  Sampling always runs in float row-major order from a seeded
    Mersenne Twister stream and is coerced under the policy afterwards,
    so exact and float runs from the same seed start from the same
    (dyadic) values.
    """
    if n_agents < 1 or n_topics < 1:
        raise ValueError("need at least one agent and one topic")
    bounds = normalize_box(box, n_topics)
    rng = random.Random(seed)
    rows = []
    for _ in range(n_agents):
        row = []
        for lo, hi in bounds:
            row.append(lo + (hi - lo) * rng.random())
        rows.append(tuple(row))
    return OpinionMatrix(policy.coerce_rows(rows))


def normalize_box(box: Sequence, n_topics: int) -> tuple[tuple[float, float], ...]:
    """Expand a box spec to one float (lo, hi) pair per topic."""
    items = list(box)
    if len(items) == 2 and all(isinstance(v, (int, float)) for v in items):
        items = [items] * n_topics
    if len(items) != n_topics:
        raise ValueError(f"expected {n_topics} (lo, hi) pairs, got {len(items)}")
    bounds = []
    for pair in items:
        lo, hi = (float(v) for v in pair)
        if not (is_finite(lo) and is_finite(hi)) or lo > hi:
            raise ValueError(f"bad interval ({lo}, {hi})")
        bounds.append((lo, hi))
    return tuple(bounds)


def batch_run(
    jobs: Sequence[tuple[SimulationConfig, OpinionMatrix]],
    max_threads: Optional[int] = None,
) -> tuple[Trajectory, ...]:
    """Run independent jobs on a thread pool, results in job order.

    Pool width: ``max_threads`` argument, else the HK_MAX_THREADS
    environment variable, else the CPU count.
    """
    if not jobs:
        return ()
    limit = max_threads
    if limit is None:
        env = os.environ.get(MAX_THREADS_ENV, "").strip()
        if env:
            try:
                limit = int(env)
            except ValueError:
                raise ValueError(f"{MAX_THREADS_ENV} must be an integer, got {env!r}")
    if limit is None:
        limit = os.cpu_count() or 1
    if limit < 1:
        raise ValueError("thread limit must be at least 1")
    limit = min(limit, len(jobs))
    with ThreadPoolExecutor(max_workers=limit) as pool:
        return tuple(pool.map(lambda job: run(job[0], job[1]), jobs))
