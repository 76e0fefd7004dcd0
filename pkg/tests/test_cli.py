"""CLI contract tests: exit codes, artifacts, bundled suite."""

import json
from importlib import resources

import numpy as np
import pytest
from click.testing import CliRunner

from balk1 import serialize
from balk1.balanced import BalancedPair, random_balanced_pair
from balk1.cli import main
from balk1.loops import standard_symbol_pair
from balk1.starpoly import suites


@pytest.fixture()
def runner():
    return CliRunner()


@pytest.fixture()
def pair_file(tmp_path):
    pair = random_balanced_pair(3, 5)
    path = tmp_path / "pair.json"
    serialize.dump_json(serialize.pair_to_dict(pair), str(path))
    return str(path)


def test_check_pair_passes(runner, pair_file):
    result = runner.invoke(main, ["check-pair", pair_file])
    assert result.exit_code == 0


def test_check_pair_fails_on_unbalanced(runner, tmp_path):
    bad = BalancedPair(np.diag([1.0, 0.5]).astype(complex),
                       np.diag([0.5, 1.0]).astype(complex))
    path = tmp_path / "bad.json"
    serialize.dump_json(serialize.pair_to_dict(bad), str(path))
    result = runner.invoke(main, ["check-pair", str(path)])
    assert result.exit_code == 1


def test_check_pair_missing_file(runner):
    result = runner.invoke(main, ["check-pair", "/nonexistent/pair.json"])
    assert result.exit_code == 2


def test_check_pair_malformed_json(runner, tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    result = runner.invoke(main, ["check-pair", str(path)])
    assert result.exit_code == 2


def test_homotopy_command(runner, pair_file, tmp_path):
    out = tmp_path / "path.json"
    result = runner.invoke(main, ["homotopy", "swap", pair_file,
                                  "--grid", "21", "--out", str(out)])
    assert result.exit_code == 0
    payload = json.loads(out.read_text())
    assert payload["ok"] and payload["grid"] == 21


def test_loop_pair_command(runner, tmp_path):
    out = tmp_path / "lp.json"
    result = runner.invoke(main, ["loop-pair", "--p", "1", "--q", "0",
                                  "--grid", "128", "--out", str(out)])
    assert result.exit_code == 0
    lp = serialize.loop_pair_from_dict(serialize.load_json(str(out)))
    assert lp.grid == 128 and lp.dim == 2
    assert lp.max_pointwise_residual() <= 1e-10


def test_verify_identities_subset(runner, tmp_path):
    entries = [e for e in suites.default_suite() if e.name.startswith("carry")]
    suite_path = tmp_path / "suite.txt"
    suite_path.write_text(suites.format_suite(entries))
    out = tmp_path / "report.json"
    result = runner.invoke(main, ["verify-identities", str(suite_path),
                                  "--out", str(out)])
    assert result.exit_code == 0
    payload = json.loads(out.read_text())
    assert payload["ok"]


def test_verify_identities_uncertifiable_entry(runner, tmp_path):
    suite_path = tmp_path / "suite.txt"
    suite_path.write_text("name: difference\nideal: rel1\nbound: 6\ntarget: a - b\n")
    result = runner.invoke(main, ["verify-identities", str(suite_path)])
    assert result.exit_code == 1


def test_verify_identities_missing_file(runner):
    result = runner.invoke(main, ["verify-identities", "/nonexistent.txt"])
    assert result.exit_code == 2


def test_bundled_suite_matches_builtin():
    text = resources.files("balk1").joinpath("data/default_suite.txt").read_text()
    parsed = suites.parse_suite(text)
    built = suites.default_suite()
    assert len(parsed) == len(built)
    for a, b in zip(parsed, built):
        assert a.name == b.name and a.target == b.target


def test_index_requires_input_or_sweep(runner):
    result = runner.invoke(main, ["index"])
    assert result.exit_code == 2


def test_index_trivial_symbol_pair(runner, tmp_path):
    sp = standard_symbol_pair(0, 0, 512)
    path = tmp_path / "sp.json"
    serialize.dump_json(serialize.symbol_pair_to_dict(sp), str(path))
    out = tmp_path / "report.json"
    result = runner.invoke(main, ["index", str(path), "--modes", "32",
                                  "--out", str(out)])
    assert result.exit_code == 0, result.output
    payload = json.loads(out.read_text())
    assert payload["verdict"] and payload["topological"] == 0


def test_index_undersampled_loop_fails_at_quantize(runner, tmp_path):
    sp = standard_symbol_pair(0, 0, 64)
    path = tmp_path / "sp.json"
    serialize.dump_json(serialize.symbol_pair_to_dict(sp), str(path))
    result = runner.invoke(main, ["index", str(path), "--modes", "64"])
    assert result.exit_code == 1
    assert "quantize" in result.output


def test_make_pair_commands(runner, tmp_path):
    out = tmp_path / "pair.json"
    result = runner.invoke(main, ["make-pair", "--dim", "4", "--seed", "7",
                                  "--out", str(out)])
    assert result.exit_code == 0
    check = runner.invoke(main, ["check-pair", str(out)])
    assert check.exit_code == 0
    unital = tmp_path / "unital.json"
    result = runner.invoke(main, ["make-pair", "--dim", "3", "--seed", "2",
                                  "--delta", "0.2", "--out", str(unital)])
    assert result.exit_code == 0
    check = runner.invoke(main, ["check-pair", str(unital), "--tol", "1e-8"])
    assert check.exit_code == 0


def test_make_pair_rejects_bad_delta(runner, tmp_path):
    result = runner.invoke(main, ["make-pair", "--delta", "0.9",
                                  "--out", str(tmp_path / "x.json")])
    assert result.exit_code == 2


def test_index_sweep_csv(runner, tmp_path):
    out = tmp_path / "sweep.csv"
    result = runner.invoke(main, ["index", "--sweep", "0:0,0:0",
                                  "--modes", "32", "--grid", "512",
                                  "--out", str(out)])
    assert result.exit_code == 0, result.output
    rows = out.read_text().strip().splitlines()
    assert rows[0].startswith("p,q,analytic")
    assert len(rows) == 2
