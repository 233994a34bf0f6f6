"""End-to-end tests for the command-line entry point."""

import csv
import json

import pytest

from main import build_parser, main
from src.commands.bench import BenchHandler
from src.core.config import ConfigManager


@pytest.fixture(autouse=True)
def _single_thread(monkeypatch):
    monkeypatch.setenv("ACM_THREADS", "1")


@pytest.fixture
def small_config(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(
        json.dumps(
            {
                "engine": {"max_depth": 8},
                "resection1d": {"n_points": 40},
                "planar2d": {"n_points": 30},
                "reg3d_corr": {"n_points": 40, "noise_sigma": 0.0, "eps": 0.05},
                "reg3d_corrless": {"n_points": 20, "keep": 60, "eps": 0.01},
            }
        )
    )
    return str(path)


@pytest.mark.parametrize(
    "problem,expected",
    [
        ("resection1d", {"corrs.csv", "truth.json"}),
        ("planar2d", {"corrs.csv", "planar_gt.csv", "truth.json"}),
        ("reg3d-corr", {"corrs.csv", "truth.json"}),
        ("reg3d-corrless", {"source.ply", "target.ply", "truth.json"}),
    ],
)
def test_gen_then_solve(tmp_path, small_config, capsys, problem, expected):
    out_dir = tmp_path / "instance"
    code = main(
        ["gen", problem, "--ratio", "0.7", "--out-dir", str(out_dir), "--seed", "3",
         "--config", small_config]
    )
    assert code == 0
    assert {p.name for p in out_dir.iterdir()} == expected

    truth = json.loads((out_dir / "truth.json").read_text(encoding="utf-8"))
    assert truth["problem"] == problem
    assert truth["seed"] == 3

    if problem == "reg3d-corrless":
        args = [str(out_dir / "source.ply"), "--target", str(out_dir / "target.ply")]
    else:
        args = [str(out_dir / "corrs.csv")]
    for method in ("acm", "plain"):
        code = main(
            ["solve", problem, *args, "--method", method, "--truth", str(out_dir / "truth.json"),
             "--config", small_config]
        )
        assert code == 0
    assert "最大一致集" in capsys.readouterr().out


def test_resection_solve_requires_prior(tmp_path, small_config):
    out_dir = tmp_path / "instance"
    main(["gen", "resection1d", "--out-dir", str(out_dir), "--config", small_config])
    code = main(["solve", "resection1d", str(out_dir / "corrs.csv"), "--config", small_config])
    assert code == 2
    code = main(
        ["solve", "resection1d", str(out_dir / "corrs.csv"), "--prior", "0.1", "-0.2",
         "--config", small_config]
    )
    assert code == 0


def test_corrless_solve_requires_target(tmp_path, small_config):
    out_dir = tmp_path / "instance"
    main(["gen", "reg3d-corrless", "--out-dir", str(out_dir), "--config", small_config])
    code = main(["solve", "reg3d-corrless", str(out_dir / "source.ply"), "--config", small_config])
    assert code == 2


def test_solve_missing_input(tmp_path):
    assert main(["solve", "planar2d", str(tmp_path / "absent.csv")]) == 1


def test_bench_writes_outputs(tmp_path, small_config, capsys):
    out = tmp_path / "results.csv"
    summary = tmp_path / "summary.json"
    trace = tmp_path / "trace.csv"
    code = main(
        ["bench", "planar2d", "--sweep", "0.3,0.6", "--trials", "2", "--out", str(out),
         "--summary", str(summary), "--trace", str(trace), "--config", small_config]
    )
    assert code == 0

    with open(out, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 2 * 2 * 2
    assert {row["method"] for row in rows} == {"plain", "acm"}
    assert all(row["error"] == "" for row in rows)

    data = json.loads(summary.read_text(encoding="utf-8"))
    assert data["schema_version"] == 1
    assert [row["sweep_value"] for row in data["rows"]] == [0.3, 0.6]

    with open(trace, newline="", encoding="utf-8") as fh:
        trace_rows = list(csv.DictReader(fh))
    assert {row["method"] for row in trace_rows} == {"plain", "acm"}
    assert "加速比" in capsys.readouterr().out


def test_bench_single_method(tmp_path, small_config):
    out = tmp_path / "results.csv"
    code = main(
        ["bench", "resection1d", "--method", "acm", "--sweep", "0.5", "--trials", "1",
         "--points", "25", "--out", str(out), "--config", small_config]
    )
    assert code == 0
    with open(out, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    assert [row["method"] for row in rows] == ["acm"]
    assert int(rows[0]["n_constraints"]) <= 24


def test_bench_bad_sweep(tmp_path, small_config):
    code = main(
        ["bench", "planar2d", "--sweep", "0.5:0.1:0.1", "--out", str(tmp_path / "r.csv"),
         "--config", small_config]
    )
    assert code == 2


def test_bad_config_file(tmp_path):
    path = tmp_path / "config.json"
    path.write_text("{oops")
    code = main(["bench", "planar2d", "--config", str(path), "--out", str(tmp_path / "r.csv")])
    assert code == 2


def test_collect_overrides():
    args = build_parser().parse_args(
        ["bench", "reg3d-corrless", "--points", "50", "--eps", "0.002", "--tau-frac", "0.2"]
    )
    overrides = BenchHandler.collect_overrides(args.problem, args)
    assert overrides == {
        "reg3d_corrless.n_points": 50,
        "reg3d_corrless.eps": 0.002,
        "reg3d_corrless.tau_frac": 0.2,
    }


def test_resolve_methods():
    assert BenchHandler.resolve_methods("both") == ("plain", "acm")
    assert BenchHandler(ConfigManager()).resolve_methods("plain") == ("plain",)


def test_planar_solve_with_truth_csv(tmp_path, small_config, capsys):
    out_dir = tmp_path / "instance"
    main(["gen", "planar2d", "--ratio", "0.2", "--out-dir", str(out_dir), "--config", small_config])
    capsys.readouterr()
    code = main(
        ["solve", "planar2d", str(out_dir / "corrs.csv"), "--truth", str(out_dir / "planar_gt.csv"),
         "--config", small_config]
    )
    assert code == 0
    assert "误差 θ" in capsys.readouterr().out
