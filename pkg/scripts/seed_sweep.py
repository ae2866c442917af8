# Sweep a block of seeds at one configuration and tabulate how runs end:
# termination-step histogram, outcome counts, and cluster-count counts.
# Optionally dumps one CSV row per seed for external analysis.

import argparse
import csv
import sys
from collections import Counter

from hkmulti import (
    NumericPolicy,
    SimulationConfig,
    batch_run,
    classify_outcome,
    sample_initial,
)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--model", choices=("ave", "uniform"), default="uniform")
    ap.add_argument("--agents", type=int, default=10)
    ap.add_argument("--topics", type=int, default=2)
    ap.add_argument("--epsilon", type=float, default=0.8)
    ap.add_argument("--seeds", type=int, default=100, help="runs seeds 0..N-1")
    ap.add_argument("--box", type=float, nargs=2, default=(-1.0, 1.0))
    ap.add_argument("--max-steps", type=int, default=200)
    ap.add_argument("--mode", choices=("exact", "float"), default="float")
    ap.add_argument("--threads", type=int, default=None)
    ap.add_argument("--out", default=None, help="optional per-seed CSV path")
    args = ap.parse_args()

    policy = NumericPolicy.exact() if args.mode == "exact" else NumericPolicy.floating()
    config = SimulationConfig(args.model, args.epsilon, args.max_steps, policy)
    jobs = [
        (config, sample_initial(args.agents, args.topics, tuple(args.box), seed, policy))
        for seed in range(args.seeds)
    ]
    trajectories = batch_run(jobs, max_threads=args.threads)

    rows = []
    steps = Counter()
    outcomes = Counter()
    cluster_counts = Counter()
    for seed, traj in enumerate(trajectories):
        report = classify_outcome(
            traj.final_state, args.epsilon, policy, args.model, traj.termination_step
        )
        n_clusters = report.partition.n_blocks if report.partition is not None else None
        outcomes[report.outcome] += 1
        if traj.terminated:
            steps[traj.termination_step] += 1
        if n_clusters is not None:
            cluster_counts[n_clusters] += 1
        rows.append(
            {
                "seed": seed,
                "terminated": traj.terminated,
                "termination_step": traj.termination_step,
                "n_steps": traj.n_steps,
                "outcome": report.outcome,
                "n_clusters": n_clusters,
            }
        )

    print(
        f"{args.seeds} runs, {args.model} model, epsilon {args.epsilon}, "
        f"{args.agents} agents, {args.topics} topics, {args.mode} mode"
    )
    print("outcomes:", dict(sorted(outcomes.items())))
    print("termination steps:", dict(sorted(steps.items())))
    print("cluster counts:", dict(sorted(cluster_counts.items())))

    if args.out:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
            writer.writeheader()
            writer.writerows(rows)
        print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
