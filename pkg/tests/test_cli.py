import json
import subprocess
import sys
from importlib.resources import files

import pytest

from informed_relay.cli import main

FAST = ["--grid-points", "31", "--refine", "2"]


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestBounds:
    def test_capacity_known_at_threshold(self, capsys):
        code, out, _ = run(capsys, "bounds", "--degraded")
        assert code == 0
        assert "capacity known: 0.5 bits" in out
        assert "capacity threshold on N2: 10" in out

    def test_json_fields(self, capsys):
        code, out, _ = run(capsys, "bounds", "--degraded", "--json", *FAST)
        rep = json.loads(out)
        assert code == 0
        assert set(rep["bounds"]) == {"lower", "upper", "upper_equiv", "trivial_lower", "trivial_upper"}
        assert rep["capacity_known"] == pytest.approx(0.5)
        assert rep["threshold_n2"] == pytest.approx(10.0)
        assert set(rep["bounds"]["lower"]["argmax"]) == {"rho12p", "theta", "rho2sp"}
        assert rep["extreme_case"] is None

    def test_general_model_has_no_equiv(self, capsys):
        _, out, _ = run(capsys, "bounds", "--json", *FAST)
        rep = json.loads(out)
        assert "upper_equiv" not in rep["bounds"]
        assert rep["capacity_known"] is None

    def test_zero_relay_power(self, capsys):
        code, out, _ = run(capsys, "bounds", "--p2", "0", "--json", *FAST)
        ext = json.loads(out)["extreme_case"]
        assert code == 0
        assert ext["name"] == "zero_relay_power"
        assert ext["capacity"] == pytest.approx(0.29248, abs=1e-5)

    def test_no_state_bounds_agree(self, capsys):
        _, out, _ = run(capsys, "bounds", "--q", "0", "--n2", "1", "--degraded", "--json")
        rep = json.loads(out)
        b = rep["bounds"]
        assert abs(b["lower"]["rate"] - b["upper"]["rate"]) <= 1e-4
        assert rep["extreme_case"]["name"] == "no_state"

    def test_db_and_linear_agree(self, capsys):
        _, a, _ = run(capsys, "bounds", "--p1db", "20", "--json", *FAST)
        _, b, _ = run(capsys, "bounds", "--p1", "100", "--json", *FAST)
        assert json.loads(a)["bounds"]["lower"]["rate"] == pytest.approx(json.loads(b)["bounds"]["lower"]["rate"], rel=1e-12)

    def test_invalid_parameter_names_field(self, capsys):
        code, _, err = run(capsys, "bounds", "--n3", "0")
        assert code == 2
        assert "n3" in err

    def test_bad_grid(self, capsys):
        code, _, err = run(capsys, "bounds", "--grid-points", "1")
        assert code == 2 and "coarse_points" in err

    def test_linear_and_db_exclusive(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["bounds", "--p1", "1", "--p1db", "0"])
        assert exc.value.code == 2


class TestSweep:
    def test_lower_only_schema(self, capsys):
        code, out, _ = run(capsys, "sweep", "--points", "2", "--bounds", "lower", *FAST)
        lines = out.splitlines()
        assert code == 0
        assert lines[0] == "snr_dB,lower,theta,rho12p,rho2sp"
        assert len(lines) == 3

    def test_files(self, capsys, tmp_path):
        code, _, err = run(capsys, "sweep", "--points", "3", "--degraded", "--format", "both", "--out", str(tmp_path / "fig"), *FAST)
        assert code == 0
        assert (tmp_path / "fig.csv").exists() and (tmp_path / "fig.svg").exists()
        assert "threshold" in (tmp_path / "fig.svg").read_text()

    def test_unwritable_path(self, capsys, tmp_path):
        code, _, err = run(capsys, "sweep", "--points", "2", "--out", str(tmp_path / "missing" / "x.csv"), *FAST)
        assert code == 2 and "--out" in err

    def test_svg_needs_out(self, capsys):
        code, _, err = run(capsys, "sweep", "--format", "svg", "--points", "2")
        assert code == 2

    @pytest.mark.parametrize(
        "argv,word",
        [
            (["--lo", "5", "--hi", "5"], "lo_db"),
            (["--points", "1"], "points"),
            (["--bounds", "lower,bogus"], "bounds"),
            (["--bounds", "upper_equiv"], "degraded"),
            (["--p1", "-2"], "p1"),
        ],
    )
    def test_input_errors(self, capsys, argv, word):
        code, _, err = run(capsys, "sweep", *argv)
        assert code == 2 and word in err

    def test_entry_point_module(self, tmp_path):
        out = tmp_path / "m.csv"
        cmd = [sys.executable, "-m", "informed_relay", "sweep", "--points", "2", "--bounds", "trivial_lower", "--out", str(out)]
        assert subprocess.run(cmd, capture_output=True).returncode == 0
        assert out.read_text().startswith("snr_dB,trivial_lower\n")


class TestDm:
    def spec_path(self, name):
        return str(files("informed_relay") / "data" / f"{name}.json")

    def test_report(self, capsys):
        code, out, _ = run(capsys, "dm", self.spec_path("xor_relay"), "--mode", "lower", "--budget", "1", "--json")
        rep = json.loads(out)
        assert code == 0
        assert rep["is_degraded"] is False
        assert rep["results"]["lower"]["rate"] == pytest.approx(0.27807, abs=0.01)
        assert set(rep["results"]["lower"]["factorization"]) == {"p_u1", "p_x1_u1", "p_u2_u1s", "p_x2_u1u2s"}

    def test_degraded_verdict_text(self, capsys):
        code, out, _ = run(capsys, "dm", self.spec_path("degraded_relay"), "--mode", "upper", "--budget", "1")
        assert code == 0
        assert "physically degraded: yes" in out
        assert "p_x2_x1s" in out

    def test_malformed_json(self, capsys, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text('{"alphabet_sizes": {"S": 1, "X1": 2, "X2": 2, "Y2": 2, "Y3": 2}, "kernel": []}')
        code, _, err = run(capsys, "dm", str(bad))
        assert code == 2 and "state_pmf" in err

    def test_non_stochastic_names_cell(self, capsys, tmp_path):
        doc = json.loads(open(self.spec_path("xor_relay")).read())
        doc["kernel"][-1] = 0.5
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps(doc))
        code, _, err = run(capsys, "dm", str(bad))
        assert code == 2 and "x1=1, x2=1, s=0" in err

    def test_missing_file(self, capsys, tmp_path):
        code, _, err = run(capsys, "dm", str(tmp_path / "nope.json"))
        assert code == 2

    def test_bad_budget(self, capsys):
        code, _, err = run(capsys, "dm", self.spec_path("xor_relay"), "--budget", "0")
        assert code == 2 and "budget" in err
