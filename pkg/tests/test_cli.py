"""
Tests for the doflab command line.
"""

import json
from pathlib import Path

import pytest

from dof_lab import SEED_ENV
from dof_linalg import RankDeficient
from dof_regions import InvalidConfig
from dof_schemes import CausalityViolation
from doflab_cli import EXIT_OK, EXIT_RANK, EXIT_USAGE, EXIT_VIOLATION, exit_code_for, main


def _run_json(capsys: pytest.CaptureFixture[str], argv: list[str]) -> tuple[int, dict]:
    code = main(argv)
    return code, json.loads(capsys.readouterr().out)


def test_region_prints_exact_vertices(capsys: pytest.CaptureFixture[str]) -> None:
    code, document = _run_json(capsys, ["region", "6", "2", "4", "3", "--family", "d_csit"])

    assert code == EXIT_OK
    assert ["5/3", "2"] in document["vertices"]
    assert document["config"] == [6, 2, 4, 3]


def test_region_csv(capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["region", "6", "2", "4", "3", "--format", "csv"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()

    assert lines[0] == "kind,d1,d2,a1,a2,b"
    assert "vertex,2,2,,," in lines
    assert sum(line.startswith("vertex,") for line in lines) == 4


def test_classify(capsys: pytest.CaptureFixture[str]) -> None:
    code, document = _run_json(capsys, ["classify", "8", "4", "6", "5"])

    assert code == EXIT_OK
    assert document["tag"] == "CaseB"
    assert document["witness"] == {
        "lhs": "8",
        "rhs": "10",
        "ordered": True,
        "condition_1": True,
    }


def test_plan_writes_output_file(tmp_path: Path) -> None:
    target = tmp_path / "out" / "plan.json"

    assert main(["plan", "8", "4", "6", "5", "--point", "p2", "--output", str(target)]) == EXIT_OK
    document = json.loads(target.read_text())

    assert document["claimed_dof"] == ["8/3", "10/3"]
    assert not target.with_suffix(".json.tmp").exists()


def test_simulate_confirms_corner(capsys: pytest.CaptureFixture[str]) -> None:
    code, document = _run_json(
        capsys, ["simulate", "6", "2", "4", "3", "--point", "p0", "--trials", "5", "--seed", "3"]
    )

    assert code == EXIT_OK
    assert document["delivered_dof"] == ["2", "2"]
    assert document["successes"] == 5
    assert document["hermetic"] is True


def test_simulate_seed_from_environment(
    capsys: pytest.CaptureFixture[str], monkeypatch: pytest.MonkeyPatch
) -> None:
    monkeypatch.setenv(SEED_ENV, "99")

    code, document = _run_json(
        capsys, ["simulate", "8", "4", "6", "5", "--point", "p1", "--trials", "2"]
    )

    assert code == EXIT_OK
    assert document["seed"] == 99


def test_simulate_equal_delayed_is_usage_error(capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["simulate", "2", "2", "2", "2", "--point", "p0"]) == EXIT_USAGE
    assert "EqualDelayed" in capsys.readouterr().err


def test_share(capsys: pytest.CaptureFixture[str]) -> None:
    code, document = _run_json(capsys, ["share", "8", "4", "6", "5", "--theta", "3/5"])

    assert code == EXIT_OK
    assert document["point"] == ["152/75", "56/15"]


def test_sweep_single_antenna(capsys: pytest.CaptureFixture[str]) -> None:
    code, document = _run_json(capsys, ["sweep", "1"])

    assert code == EXIT_OK
    assert document["configs"] == 1
    assert document["ok"] is True


def test_sweep_csv(capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["sweep", "2", "--checks", "inclusions", "--format", "csv"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()

    assert lines[0] == "M1,M2,N1,N2,tag,swapped,violations"
    assert len(lines) == 17


def test_usage_errors(capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["sweep", "2", "--checks", "bogus"]) == EXIT_USAGE
    assert main(["region", "8", "4", "6", "5", "--family", "no_csit_fixture"]) == EXIT_USAGE
    assert main(["region", "0", "4", "6", "5"]) == EXIT_USAGE
    assert main(["plot", "6", "2", "4", "3", "--format", "png"]) == EXIT_USAGE
    assert capsys.readouterr().err.count("error:") == 4


def test_exit_codes_for_errors() -> None:
    assert exit_code_for(RankDeficient("rx2", 3, 4)) == EXIT_RANK
    assert exit_code_for(InvalidConfig("bad")) == EXIT_USAGE
    assert exit_code_for(CausalityViolation("late", slot=2)) == EXIT_VIOLATION


def test_plot_svg_is_deterministic(tmp_path: Path) -> None:
    first, second = tmp_path / "a.svg", tmp_path / "b.svg"
    argv = ["plot", "6", "2", "4", "3", "--families", "no_csit_fixture,d_csit,fb_dcsit"]

    assert main([*argv, "--output", str(first)]) == EXIT_OK
    assert main([*argv, "--output", str(second)]) == EXIT_OK

    svg = first.read_text()
    assert svg.startswith("<svg")
    assert svg.count("<polygon") == 3
    assert first.read_bytes() == second.read_bytes()


def test_plot_trivial_config_draws_one_triangle(capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["plot", "1", "1", "1", "1"]) == EXIT_OK
    polygons = [
        line.split('points="')[1].split('"')[0]
        for line in capsys.readouterr().out.splitlines()
        if line.startswith("<polygon")
    ]

    assert len(polygons) == 3
    assert len(set(polygons)) == 1
    assert len(polygons[0].split()) == 3


def test_plot_png(tmp_path: Path) -> None:
    pytest.importorskip("PIL")
    target = tmp_path / "regions.png"

    assert main(["plot", "8", "4", "6", "5", "--format", "png", "--output", str(target)]) == EXIT_OK
    assert target.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
