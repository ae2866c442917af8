import json
from fractions import Fraction

import pytest

from hkmulti import (
    NumericPolicy,
    OpinionMatrix,
    SimulationConfig,
    classify_outcome,
    run,
)
from hkmulti.serialize import (
    csv_token,
    matrix_tokens,
    outcome_to_dict,
    read_matrix_csv,
    read_trajectory_jsonl,
    scalar_token,
    trajectory_lines,
    write_matrix_csv,
    write_trajectory_jsonl,
)

EXACT = NumericPolicy.exact()
FLOAT = NumericPolicy.floating()


def test_scalar_tokens():
    assert scalar_token(Fraction(3, 4), exact=True) == "3/4"
    assert scalar_token(Fraction(5, 1), exact=True) == "5"
    assert scalar_token(0.1, exact=False) == 0.1
    assert csv_token(Fraction(-1, 3), exact=True) == "-1/3"
    assert csv_token(0.1, exact=False) == "0.1"


def test_token_round_trip_is_exact():
    for value in (Fraction(1, 3), Fraction(-7, 20), Fraction(2)):
        assert EXACT.coerce(csv_token(value, True)) == value
    for value in (0.1, -0.25, 1 / 3, 1e-17):
        assert FLOAT.coerce(csv_token(value, False)) == value


def test_matrix_csv_round_trip(tmp_path):
    x = OpinionMatrix(((Fraction(1, 3), 2), (Fraction(-1, 4), Fraction(7, 10))))
    path = tmp_path / "state.csv"
    write_matrix_csv(path, x, exact=True)
    assert read_matrix_csv(path, EXACT).entries == x.entries
    # the same file parses into floats under a float policy
    y = read_matrix_csv(path, FLOAT)
    assert y.entries[0][0] == 1 / 3

    f = OpinionMatrix(((0.1, 0.2), (0.3, 0.4)))
    write_matrix_csv(path, f, exact=False)
    assert read_matrix_csv(path, FLOAT).entries == f.entries


def test_matrix_csv_rejects_empty(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("\n")
    with pytest.raises(ValueError):
        read_matrix_csv(path, EXACT)


def test_trajectory_jsonl_exact_round_trip(tmp_path):
    config = SimulationConfig("ave", 1, 50, EXACT)
    traj = run(config, OpinionMatrix(((0, 0), (1, 1), (3, 3))))
    path = tmp_path / "traj.jsonl"
    write_trajectory_jsonl(path, traj)

    records = read_trajectory_jsonl(path, EXACT)
    assert len(records) == traj.n_steps + 1
    for t, record in enumerate(records):
        assert record.step == t
        assert record.state.entries == traj.states[t].entries
    # final record carries no diagnostics
    assert records[-1].influence_lists is None
    assert records[-1].gamma is None
    # step records carry 0-based neighbor lists after parsing
    assert records[0].influence_lists == ((0, 1), (0, 1), (2,))
    assert records[0].gamma == traj.reports[0].gamma
    assert records[0].topic_ranges == (3, 3)


def test_trajectory_jsonl_uses_one_based_agents(tmp_path):
    config = SimulationConfig("uniform", 1.0, 20, FLOAT)
    traj = run(config, OpinionMatrix(((0.0, 1.0), (0.5, 0.5), (2.0, 0.0))))
    lines = trajectory_lines(traj)
    first = json.loads(lines[0])
    assert first["influence"] == [[1, 2], [1, 2], [3]]
    assert "gamma" not in first


def test_trajectory_lines_deterministic():
    config = SimulationConfig("ave", Fraction(1, 2), 50, EXACT)
    x = OpinionMatrix(((Fraction(1, 10), 0), (Fraction(2, 5), 1)))
    a = trajectory_lines(run(config, x))
    b = trajectory_lines(run(config, x))
    assert a == b


def test_outcome_dict_is_one_based_and_tokenized():
    x = OpinionMatrix(((1, 1), (1, 1), (3, 0), (3, 0)))
    report = classify_outcome(x, Fraction(3, 10), EXACT, "ave", termination_step=2)
    out = outcome_to_dict(report, exact=True)
    assert out["outcome"] == "clustering"
    assert out["partition"] == [[1, 2], [3, 4]]
    assert out["average_partition"] == [[1, 2], [3, 4]]
    assert out["cluster_matrix"] == [["1", "1"], ["3", "0"]]
    assert out["cluster_averages"] == ["1", "3/2"]
    assert out["min_average_separation"] == "1/2"
    assert out["termination_step"] == 2
    assert out["n_clusters"] == 2
    json.dumps(out)


def test_outcome_dict_not_terminated():
    report = classify_outcome(OpinionMatrix(((0.0,), (0.1,))), 1.0, FLOAT, "ave")
    out = outcome_to_dict(report, exact=False)
    assert out["outcome"] == "not-terminated"
    assert out["partition"] is None
    assert out["n_clusters"] is None
    json.dumps(out)
