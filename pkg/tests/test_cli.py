import json
import subprocess
import sys
from fractions import Fraction

import pytest

from hkmulti.cli import RunManifest, main
from hkmulti.serialize import read_json, read_matrix_csv
from hkmulti import NumericPolicy

EXACT = NumericPolicy.exact()


def write_lines(path, text):
    path.write_text(text, encoding="utf-8")


@pytest.fixture
def three_agents(tmp_path):
    init = tmp_path / "init.csv"
    write_lines(init, "0,0\n1,1\n3,3\n")
    return init


def test_run_from_csv_and_verify(tmp_path, three_agents, capsys):
    out_dir = tmp_path / "out"
    code = main(
        [
            "run",
            "--model",
            "ave",
            "--epsilon",
            "1",
            "--mode",
            "exact",
            "--init",
            str(three_agents),
            "--max-steps",
            "50",
            "--out-dir",
            str(out_dir),
        ]
    )
    assert code == 0
    for name in ("manifest.json", "trajectory.jsonl", "summary.json", "final.csv"):
        assert (out_dir / name).exists()

    summary = read_json(out_dir / "summary.json")
    assert summary["terminated"] is True
    assert summary["termination_step"] == 1
    assert summary["outcome"] == "clustering"
    assert summary["partition"] == [[1, 2], [3]]
    assert summary["cluster_averages"] == ["1/2", "3"]
    assert summary["n_steps"] == 2

    final = read_matrix_csv(out_dir / "final.csv", EXACT)
    assert final.entries[0] == (Fraction(1, 2), Fraction(1, 2))
    assert final.entries[2] == (3, 3)

    capsys.readouterr()
    assert main(["verify", "--run-dir", str(out_dir)]) == 0
    assert "ok" in capsys.readouterr().out


def test_run_budget_exhaustion_exits_2(tmp_path):
    # [[0],[1],[2]] at epsilon 1 needs three steps; one step lands mid-flight
    init = tmp_path / "line.csv"
    write_lines(init, "0\n1\n2\n")
    code = main(
        [
            "run",
            "--model",
            "ave",
            "--epsilon",
            "1",
            "--mode",
            "exact",
            "--init",
            str(init),
            "--max-steps",
            "1",
            "--out-dir",
            str(tmp_path / "short"),
        ]
    )
    assert code == 2
    summary = read_json(tmp_path / "short" / "summary.json")
    assert summary["terminated"] is False
    assert summary["outcome"] == "not-terminated"


def test_run_budget_hits_fixed_point_without_observing_it(tmp_path, three_agents):
    # one step reaches the fixed point, but confirming it needs a second
    # step, so the run exits 2 while the snapshot classifies as clustering
    code = main(
        [
            "run",
            "--model",
            "ave",
            "--epsilon",
            "1",
            "--mode",
            "exact",
            "--init",
            str(three_agents),
            "--max-steps",
            "1",
            "--out-dir",
            str(tmp_path / "short"),
        ]
    )
    assert code == 2
    summary = read_json(tmp_path / "short" / "summary.json")
    assert summary["terminated"] is False
    assert summary["outcome"] == "clustering"


def test_run_is_reproducible_byte_for_byte(tmp_path):
    args = [
        "run",
        "--model",
        "uniform",
        "--epsilon",
        "4/5",
        "--mode",
        "exact",
        "--agents",
        "6",
        "--topics",
        "2",
        "--box",
        "-1",
        "1",
        "--seed",
        "13",
        "--max-steps",
        "100",
    ]
    assert main(args + ["--out-dir", str(tmp_path / "a")]) == 0
    assert main(args + ["--out-dir", str(tmp_path / "b")]) == 0
    for name in ("manifest.json", "trajectory.jsonl", "summary.json", "final.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (
            tmp_path / "b" / name
        ).read_bytes()


def test_usage_errors_exit_1(tmp_path, three_agents):
    assert main([]) == 1
    assert main(["frobnicate"]) == 1
    assert main(["run", "--model", "ave"]) == 1
    assert main(["run", "--model", "nope", "--epsilon", "1", "--out-dir", "x"]) == 1
    # --init conflicts with sampling flags
    assert (
        main(
            [
                "run",
                "--model",
                "ave",
                "--epsilon",
                "1",
                "--init",
                str(three_agents),
                "--agents",
                "3",
                "--out-dir",
                str(tmp_path / "x"),
            ]
        )
        == 1
    )
    # sampling needs agents, topics and seed
    assert (
        main(
            [
                "run",
                "--model",
                "ave",
                "--epsilon",
                "1",
                "--agents",
                "3",
                "--out-dir",
                str(tmp_path / "x"),
            ]
        )
        == 1
    )
    assert (
        main(
            [
                "run",
                "--model",
                "ave",
                "--epsilon",
                "0",
                "--init",
                str(three_agents),
                "--out-dir",
                str(tmp_path / "x"),
            ]
        )
        == 1
    )
    # exact mode refuses tolerance overrides
    assert (
        main(
            [
                "run",
                "--model",
                "ave",
                "--epsilon",
                "1",
                "--mode",
                "exact",
                "--tau-fix",
                "1e-9",
                "--init",
                str(three_agents),
                "--out-dir",
                str(tmp_path / "x"),
            ]
        )
        == 1
    )
    # missing input file
    assert (
        main(
            [
                "run",
                "--model",
                "ave",
                "--epsilon",
                "1",
                "--init",
                str(tmp_path / "absent.csv"),
                "--out-dir",
                str(tmp_path / "x"),
            ]
        )
        == 1
    )
    assert main(["verify"]) == 1
    assert main(["verify", "--run-dir", str(tmp_path / "nowhere")]) == 1


def test_classify_stdout_and_file(tmp_path, capsys):
    state = tmp_path / "state.csv"
    write_lines(state, "1,1\n1,1\n3,0\n3,0\n")
    code = main(
        [
            "classify",
            "--model",
            "ave",
            "--epsilon",
            "3/10",
            "--mode",
            "exact",
            "--state",
            str(state),
        ]
    )
    assert code == 0
    out = json.loads(capsys.readouterr().out)
    assert out["outcome"] == "clustering"
    assert out["partition"] == [[1, 2], [3, 4]]
    assert out["min_average_separation"] == "1/2"

    target = tmp_path / "summary.json"
    code = main(
        [
            "classify",
            "--model",
            "uniform",
            "--epsilon",
            "0.3",
            "--state",
            str(state),
            "--out",
            str(target),
        ]
    )
    assert code == 0
    assert read_json(target)["outcome"] == "clustering"


def test_classify_violation_exits_3(tmp_path, capsys):
    # oversized fixed-point tolerance lets a non-terminal state through,
    # tripping the separation guarantee of the average-based model
    state = tmp_path / "state.csv"
    write_lines(state, "0\n0.4\n")
    code = main(
        [
            "classify",
            "--model",
            "ave",
            "--epsilon",
            "0.45",
            "--tau-fix",
            "0.5",
            "--state",
            str(state),
        ]
    )
    assert code == 3
    assert "property violation" in capsys.readouterr().err


def test_verify_detects_tampering(tmp_path, capsys):
    out_dir = tmp_path / "out"
    assert (
        main(
            [
                "run",
                "--model",
                "ave",
                "--epsilon",
                "1/2",
                "--mode",
                "exact",
                "--agents",
                "5",
                "--topics",
                "2",
                "--seed",
                "3",
                "--max-steps",
                "50",
                "--out-dir",
                str(out_dir),
            ]
        )
        == 0
    )
    path = out_dir / "trajectory.jsonl"
    lines = path.read_text().splitlines()
    first = json.loads(lines[0])
    first["state"][0][0] = "9/1"
    lines[0] = json.dumps(first, sort_keys=True, separators=(",", ":"))
    path.write_text("\n".join(lines) + "\n")

    capsys.readouterr()
    assert main(["verify", "--run-dir", str(out_dir)]) == 3
    err = capsys.readouterr().err
    assert "state differs from replay" in err


def test_verify_rejects_unknown_manifest_revision(tmp_path):
    out_dir = tmp_path / "out"
    assert (
        main(
            [
                "run",
                "--model",
                "ave",
                "--epsilon",
                "1",
                "--mode",
                "exact",
                "--agents",
                "3",
                "--topics",
                "1",
                "--seed",
                "1",
                "--out-dir",
                str(out_dir),
            ]
        )
        == 0
    )
    manifest = read_json(out_dir / "manifest.json")
    manifest["format_revision"] = 99
    (out_dir / "manifest.json").write_text(json.dumps(manifest))
    assert main(["verify", "--run-dir", str(out_dir)]) == 1


def test_batch_sweep(tmp_path, monkeypatch):
    target = tmp_path / "batch.json"
    monkeypatch.setenv("HK_MAX_THREADS", "2")
    code = main(
        [
            "batch",
            "--model",
            "uniform",
            "--epsilon",
            "0.8",
            "--agents",
            "10",
            "--topics",
            "2",
            "--box",
            "-1",
            "1",
            "--seeds",
            "0:8",
            "--max-steps",
            "100",
            "--out",
            str(target),
        ]
    )
    assert code == 0
    payload = read_json(target)
    assert payload["all_terminated"] is True
    assert [row["seed"] for row in payload["jobs"]] == list(range(8))
    assert [row["index"] for row in payload["jobs"]] == list(range(8))
    assert all(row["termination_step"] is not None for row in payload["jobs"])
    assert payload["n_agents"] == 10


def test_batch_comma_seeds_and_budget(tmp_path):
    target = tmp_path / "batch.json"
    code = main(
        [
            "batch",
            "--model",
            "ave",
            "--epsilon",
            "0.5",
            "--agents",
            "8",
            "--topics",
            "2",
            "--seeds",
            "3,5,9",
            "--max-steps",
            "0",
            "--threads",
            "2",
            "--out",
            str(target),
        ]
    )
    assert code == 2
    payload = read_json(target)
    assert payload["all_terminated"] is False
    assert [row["seed"] for row in payload["jobs"]] == [3, 5, 9]
    assert all(row["outcome"] == "not-terminated" for row in payload["jobs"])


def test_batch_bad_seeds(tmp_path):
    for bad in ("", "a:b", "5:5", ","):
        assert (
            main(
                [
                    "batch",
                    "--model",
                    "ave",
                    "--epsilon",
                    "1",
                    "--agents",
                    "2",
                    "--topics",
                    "1",
                    "--seeds",
                    bad,
                    "--out",
                    str(tmp_path / "b.json"),
                ]
            )
            == 1
        )


def test_plotdata(tmp_path, three_agents):
    out_dir = tmp_path / "out"
    assert (
        main(
            [
                "run",
                "--model",
                "ave",
                "--epsilon",
                "1",
                "--mode",
                "float",
                "--init",
                str(three_agents),
                "--max-steps",
                "50",
                "--out-dir",
                str(out_dir),
            ]
        )
        == 0
    )
    plot_dir = tmp_path / "plot"
    assert (
        main(
            [
                "plotdata",
                "--trajectory",
                str(out_dir / "trajectory.jsonl"),
                "--out-dir",
                str(plot_dir),
            ]
        )
        == 0
    )
    for name in ("topic_1.csv", "topic_2.csv", "averages.csv"):
        lines = (plot_dir / name).read_text().splitlines()
        assert len(lines) == 3
        cells = lines[0].split(",")
        assert cells[0] == "0" and len(cells) == 4


def test_version_smoke(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "hkmulti.cli", "--version"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert proc.stdout.strip() == "0.1.0"


def test_manifest_round_trip():
    manifest = RunManifest(
        model="uniform",
        mode="exact",
        epsilon=Fraction(4, 5),
        max_steps=100,
        tau_fix=0.0,
        tau_cluster=0.0,
        tau_row=0.0,
        init={
            "kind": "box",
            "n_agents": 4,
            "n_topics": 2,
            "box": [[-1.0, 1.0], [-1.0, 1.0]],
            "seed": 7,
            "generator": "python-random-mt19937",
        },
    )
    raw = json.loads(json.dumps(manifest.to_dict()))
    back = RunManifest.from_dict(raw)
    assert back.epsilon == Fraction(4, 5)
    assert back.config().model == "uniform"
    assert back.initial_state().entries == manifest.initial_state().entries
    with pytest.raises(ValueError):
        RunManifest.from_dict({**raw, "format_revision": 2})
    bad = dict(raw)
    bad["init"] = {**raw["init"], "generator": "other"}
    with pytest.raises(ValueError):
        RunManifest.from_dict(bad).initial_state()
