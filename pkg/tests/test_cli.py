import json
import math
from pathlib import Path

import pytest

from morandim.cli import main
from morandim.config import InputError, parse_config

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

CANTOR_HEAD = """\
schema_version: 1
construction:
  ratios:
    period: [["1/3", "1/3"]]
"""


def write(tmp_path, text, name="run.yaml"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def cfg(name):
    return str(CONFIGS / name)


class TestValidate:
    def test_cantor_exit_zero(self, capsys):
        code, out, _ = run(capsys, "validate", "--config", cfg("cantor_p05.yaml"), "--format", "doc")
        assert code == 0
        doc = json.loads(out)
        assert doc["result"]["exact_failures"] == []
        assert doc["schema_version"] == 1 and doc["command"] == "validate"

    def test_overlap_exit_one_with_witness(self, capsys):
        code, out, _ = run(capsys, "validate", "--config", cfg("overlap.yaml"), "--format", "doc")
        assert code == 1
        m3 = json.loads(out)["result"]["geometry"]["conditions"]["M3"]
        assert m3["status"] == "fails" and m3["witness"] == ["0", "1"]

    def test_bad_probability_exit_two(self, capsys):
        code, _, err = run(capsys, "validate", "--config", cfg("bad_probability.yaml"))
        assert code == 2
        assert "measure.period[0]" in err and "0.9" in err

    def test_csv_columns(self, capsys):
        code, out, _ = run(capsys, "validate", "--config", cfg("cantor_p05.yaml"), "--format", "csv")
        lines = out.splitlines()
        assert lines[0] == "condition,status,depth,trend"
        names = [line.split(",")[0] for line in lines[1:]]
        assert names == ["M1", "M2", "M3", "M4", "M5", "M6", "M7", "M8", "F1", "F2", "F3", "F4"]

    def test_doubly_exponential_trend_only(self, capsys):
        code, out, _ = run(capsys, "validate", "--config", cfg("doubly_exponential.yaml"), "--format", "doc")
        res = json.loads(out)["result"]
        assert code == 0
        assert {"M5", "F3"} <= set(res["trend_violations"])


class TestCordim:
    def test_moran_value(self, capsys):
        code, out, err = run(capsys, "cordim", "--config", cfg("cantor_p05.yaml"), "--route", "moran", "--format", "csv")
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "n,sum_log,denom_log,a_n"
        assert len(lines) == 31
        assert abs(json.loads(err)["value"] - 0.6309297536) < 1e-9

    def test_route_all(self, capsys):
        code, out, _ = run(
            capsys, "cordim", "--config", cfg("cantor_p03.yaml"), "--route", "all", "--format", "doc", "--samples", "20000"
        )
        assert code == 0
        vals = json.loads(out)["result"]["values"]
        assert max(vals.values()) - min(vals.values()) < 0.05

    def test_route_all_csv_route_column(self, capsys):
        code, out, _ = run(
            capsys, "cordim", "--config", cfg("cantor_p05.yaml"), "--route", "all", "--format", "csv", "--samples", "20000"
        )
        lines = out.splitlines()
        assert lines[0] == "route,n,sum_log,denom_log,a_n"
        assert {line.split(",")[0] for line in lines[1:]} == {"moran", "filtration", "paircount"}

    @pytest.mark.parametrize("route", ["moran", "filtration", "paircount"])
    def test_dirac_zero(self, capsys, route):
        code, out, _ = run(
            capsys, "cordim", "--config", cfg("single_child.yaml"), "--route", route, "--format", "doc", "--samples", "2000"
        )
        assert code == 0 and json.loads(out)["result"]["value"] == 0.0

    def test_overrides_reach_budgets(self, capsys):
        code, out, _ = run(
            capsys, "cordim", "--config", cfg("cantor_p03.yaml"), "--n-max", "12", "--tail-window", "3", "--seed", "4", "--format", "doc"
        )
        doc = json.loads(out)
        assert doc["budgets"]["n_max"] == 12 and doc["budgets"]["tail_window"] == 3 and doc["seed"] == 4
        assert len(doc["result"]["estimate"]["a_n"]) == 12

    def test_failure_exit_one(self, capsys, monkeypatch):
        from morandim import dimension as dim

        monkeypatch.setitem(dim.ROUTE_TOLERANCE, ("moran", "filtration"), 1e-6)
        code, _, err = run(
            capsys, "cordim", "--config", cfg("cantor_p03.yaml"), "--route", "all", "--samples", "20000", "--format", "doc"
        )
        assert code == 1 and "consistency failure" in err and "moran" in err

    def test_output_file(self, capsys, tmp_path):
        out = tmp_path / "a.csv"
        code, stdout, _ = run(capsys, "cordim", "--config", cfg("cantor_p02.yaml"), "--format", "csv", "--out", str(out))
        assert code == 0 and stdout == ""
        assert out.read_text().startswith("n,sum_log,denom_log,a_n\n")


class TestLocalDim:
    def test_explicit_path(self, capsys, tmp_path):
        text = CANTOR_HEAD + "measure:\n  period: [[0.3, 0.7]]\nlocaldim:\n  path: \"0\"\n  periodic: true\nbudgets:\n  depth: 200\n"
        code, out, _ = run(capsys, "localdim", "--config", write(tmp_path, text), "--format", "csv")
        assert code == 0
        header, row = out.splitlines()
        assert header == "path_digest,lower,upper"
        _, lo, up = row.split(",")
        assert float(lo) == pytest.approx(1.095904, abs=1e-6) and float(up) == pytest.approx(1.095904, abs=1e-6)

    def test_uniform_rows_constant(self, capsys, tmp_path):
        text = CANTOR_HEAD + "measure:\n  uniform: true\nbudgets:\n  paths: 10\n  depth: 500\n"
        code, out, err = run(capsys, "localdim", "--config", write(tmp_path, text), "--format", "csv")
        rows = [line.split(",") for line in out.splitlines()[1:]]
        assert len(rows) == 10
        for _, lo, up in rows:
            assert abs(float(lo) - math.log(2) / math.log(3)) < 1e-6
            assert abs(float(up) - float(lo)) < 1e-6
        assert "essinf" in json.loads(err)


class TestEnergy:
    def test_s_zero_exact(self, capsys):
        code, out, _ = run(capsys, "energy", "--config", cfg("cantor_energy.yaml"), "--s", "0", "--samples", "2000", "--format", "csv")
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "epsilon,value,stderr,excluded_fraction"
        assert all(float(line.split(",")[1]) == 1.0 for line in lines[1:])

    def test_short_ladder_exit_two(self, capsys, tmp_path):
        text = CANTOR_HEAD + "measure:\n  uniform: true\nenergy:\n  s: 0.5\n  epsilon_ladder: [0.1, 0.01, 0.001]\n"
        code, _, err = run(capsys, "energy", "--config", write(tmp_path, text))
        assert code == 2 and "4" in err

    def test_bisect_flag(self, capsys):
        code, out, _ = run(
            capsys, "energy", "--config", cfg("cantor_energy.yaml"), "--bisect", "0.5", "0.7", "--tol", "0.1", "--format", "doc"
        )
        br = json.loads(out)["result"]["bracket"]
        assert code == 0 and br["lo"] <= 0.6309 <= br["hi"]

    def test_potential_mode(self, capsys, tmp_path):
        text = CANTOR_HEAD + "measure:\n  uniform: true\nenergy:\n  s: 0.5\n  x: 0\nbudgets:\n  samples: 5000\n"
        code, out, _ = run(capsys, "energy", "--config", write(tmp_path, text), "--format", "csv")
        assert code == 0 and out.splitlines()[0] == "epsilon,value,stderr,excluded"

    def test_needs_exponent(self, capsys, tmp_path):
        text = CANTOR_HEAD + "measure:\n  uniform: true\n"
        code, _, err = run(capsys, "energy", "--config", write(tmp_path, text))
        assert code == 2 and "energy.s" in err


class TestCluster:
    def test_cantor_bounded(self, capsys):
        code, out, err = run(capsys, "cluster", "--config", cfg("cantor_p05.yaml"), "--format", "csv")
        assert code == 0 and out.splitlines()[0] == "k,r,max_count"
        assert json.loads(err)["sup_estimate"] <= 4

    def test_single_child(self, capsys):
        code, out, _ = run(capsys, "cluster", "--config", cfg("single_child.yaml"), "--format", "csv")
        assert {line.split(",")[2] for line in out.splitlines()[1:]} == {"1"}

    def test_overlap_still_runs(self, capsys):
        code, _, err = run(capsys, "cluster", "--config", cfg("overlap.yaml"), "--format", "csv")
        assert code == 0 and json.loads(err)["sup_estimate"] >= 1


class TestConfigErrors:
    def test_unknown_field(self, capsys, tmp_path):
        text = CANTOR_HEAD + "measure:\n  uniform: true\nbudgets:\n  sample: 10\n"
        code, _, err = run(capsys, "cordim", "--config", write(tmp_path, text))
        assert code == 2 and "budgets" in err and "sample" in err

    def test_yaml_syntax_has_line(self, capsys, tmp_path):
        code, _, err = run(capsys, "cordim", "--config", write(tmp_path, "schema_version: 1\nconstruction: [\n"))
        assert code == 2 and "line" in err

    def test_schema_version(self):
        with pytest.raises(InputError, match="schema_version"):
            parse_config(CANTOR_HEAD.replace("schema_version: 1", "schema_version: 2") + "measure:\n  uniform: true\n")

    def test_defaults(self):
        c = parse_config(CANTOR_HEAD + "measure:\n  uniform: true\n")
        assert (c.budgets.tail_window, c.budgets.seed, c.budgets.n_max) == (5, 0, 30)

    def test_missing_file(self, capsys, tmp_path):
        code, _, _ = run(capsys, "cordim", "--config", str(tmp_path / "nope.yaml"))
        assert code == 2


def test_byte_identical_runs(capsys, tmp_path):
    outs = []
    for k in range(2):
        p = tmp_path / f"{k}.json"
        main(["cordim", "--config", cfg("cantor_p03.yaml"), "--route", "all", "--samples", "20000", "--format", "doc", "--out", str(p)])
        outs.append(p.read_bytes())
    capsys.readouterr()
    assert outs[0] == outs[1]
