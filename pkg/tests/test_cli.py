import json

import pytest
from click.testing import CliRunner

from fmkit.cli import main

from conftest import CAR_UVL


@pytest.fixture()
def runner():
    return CliRunner()


@pytest.fixture()
def car_file(tmp_path):
    path = tmp_path / "car.uvl"
    path.write_text(CAR_UVL)
    return str(path)


def test_convert_uvl_to_xml_and_back(runner, car_file, tmp_path):
    result = runner.invoke(main, ["convert", "--to", "xml", car_file])
    assert result.exit_code == 0
    assert "<featureModel>" in result.output

    xml_path = tmp_path / "car.xml"
    xml_path.write_text(result.output)
    back = runner.invoke(main, ["convert", "--from", "xml", "--to", "uvl", str(xml_path)])
    assert back.exit_code == 0
    assert back.output.startswith("features\n")
    assert "Radio => Electric" in back.output


def test_convert_to_dimacs(runner, car_file):
    result = runner.invoke(main, ["convert", "--to", "dimacs", car_file])
    assert result.exit_code == 0
    lines = result.output.splitlines()
    assert lines[0] == "c 1 Car"
    assert "p cnf 5 9" in lines


def test_convert_reads_stdin(runner):
    result = runner.invoke(main, ["convert", "--to", "uvl"], input=CAR_UVL)
    assert result.exit_code == 0
    assert "Electric" in result.output


def test_convert_out_file(runner, car_file, tmp_path):
    out = tmp_path / "out.xml"
    result = runner.invoke(main, ["convert", "--to", "xml", "--out", str(out), car_file])
    assert result.exit_code == 0
    assert result.output == ""
    assert "<featureModel>" in out.read_text()


def test_analyze_json_and_pretty(runner, car_file):
    result = runner.invoke(main, ["analyze", car_file])
    assert result.exit_code == 0
    data = json.loads(result.output)
    assert data["void"] is False
    assert data["core"] == ["Car", "Engine"]

    pretty = runner.invoke(main, ["analyze", "--pretty", car_file])
    assert pretty.exit_code == 0
    assert "core:           Car, Engine" in pretty.output


def test_propagate(runner, car_file):
    result = runner.invoke(main, ["propagate", "--select", "Radio", car_file])
    assert result.exit_code == 0
    data = json.loads(result.output)
    assert data["valid"] is True
    assert data["states"]["Electric"] == {"state": "selected", "provenance": "implied"}
    assert data["states"]["Gas"] == {"state": "deselected", "provenance": "implied"}

    conflict = runner.invoke(
        main, ["propagate", "--select", "Radio", "--select", "Gas", car_file]
    )
    assert conflict.exit_code == 0
    assert json.loads(conflict.output)["valid"] is False


def test_slice(runner, car_file):
    result = runner.invoke(main, ["slice", "--remove", "Electric", car_file])
    assert result.exit_code == 0
    data = json.loads(result.output)
    assert "Electric" not in data["model"]
    assert data["derivedConstraints"] == ["!Gas | !Radio"]


def test_sample_deterministic(runner, car_file):
    args = ["sample", "--t", "2", "--seed", "5", car_file]
    first = runner.invoke(main, args)
    second = runner.invoke(main, args)
    assert first.exit_code == 0
    assert first.output == second.output
    data = json.loads(first.output)
    assert data["coverage"]["ratio"] == 1.0
    assert len(data["configurations"]) == 3


def test_count(runner, car_file):
    result = runner.invoke(main, ["count", car_file])
    assert result.exit_code == 0
    assert json.loads(result.output) == {"count": 3}

    pretty = runner.invoke(main, ["count", "--pretty", car_file])
    assert pretty.output == "count: 3\n"


def test_domain_errors_exit_1(runner, car_file, tmp_path):
    bad = tmp_path / "bad.uvl"
    bad.write_text("features\n\tA\n  B\n")
    result = runner.invoke(main, ["analyze", str(bad)])
    assert result.exit_code == 1
    assert "3:" in result.output  # line number in the diagnostic

    missing = runner.invoke(main, ["analyze", str(tmp_path / "nope.uvl")])
    assert missing.exit_code == 1

    ghost = runner.invoke(main, ["slice", "--remove", "Ghost", car_file])
    assert ghost.exit_code == 1

    void = tmp_path / "void.uvl"
    void.write_text('features\n\tR\n\t\tmandatory\n\t\t\tA\nconstraints\n\t!A\n')
    sample = runner.invoke(main, ["sample", str(void)])
    assert sample.exit_code == 1


def test_usage_errors_exit_2(runner, car_file):
    assert runner.invoke(main, ["convert", car_file]).exit_code == 2  # missing --to
    assert runner.invoke(main, ["convert", "--to", "png", car_file]).exit_code == 2
    assert runner.invoke(main, ["sample", "--t", "9", car_file]).exit_code == 2
    assert runner.invoke(main, ["bogus"]).exit_code == 2
