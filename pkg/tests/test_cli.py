import csv
import json
import math
import subprocess
import sys
from pathlib import Path

import pytest

from ebclab import cli, config, dtn
from ebclab.dtn import DtnKind
from ebclab.regimes import ZERO, ExtendedLimit, classify_limits

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def _write(tmp_path, doc, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def _solver_doc(**over):
    doc = json.loads((CONFIGS / "solve_full.json").read_text())
    doc.update(over)
    return doc


@pytest.mark.parametrize("path,kind", [("classify.json", "classify"), ("classify_limits.json", "classify"),
                                       ("solve_full.json", "solve_full"), ("solve_ebc.json", "solve_ebc"),
                                       ("converge_robin.json", "converge"), ("converge_transmission.json", "converge"),
                                       ("converge_fluxjump.json", "converge"), ("converge_dtn.json", "converge")])
def test_committed_configs_validate(path, kind):
    config.load(CONFIGS / path, kind)


class TestClassify:
    def test_decoupled(self, tmp_path, capsys):
        p = _write(tmp_path, {"schema_version": 1, "law": {"c_sigma": 1, "p_sigma": 2, "c_mu": 1, "p_mu": 0}})
        assert cli.main(["classify", "--config", p]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["family"]["family"] == "DecoupledNeumann" and out["feasible"]
        assert out["case"] == 1 and "sigma_delta_cubed_ok" in out

    def test_dashed_cell(self, capsys):
        assert cli.main(["classify", "--config", str(CONFIGS / "classify_limits.json")]) == 2
        out = json.loads(capsys.readouterr().out)
        assert not out["feasible"] and "β = γ²/b" in out["reason"]

    @pytest.mark.parametrize("doc", [
        {"schema_version": 1, "law": {"c_sigma": 1, "p_sigma": 2, "c_mu": 1}},
        {"schema_version": 1, "law": {"c_sigma": 1, "p_sigma": 2, "c_mu": 1, "p_mu": 0}, "extra": 1},
        {"schema_version": 2, "law": {"c_sigma": 1, "p_sigma": 2, "c_mu": 1, "p_mu": 0}},
        {"law": {"c_sigma": 1, "p_sigma": 2, "c_mu": 1, "p_mu": 0}},
        {"schema_version": 1, "law": {"c_sigma": -1, "p_sigma": 2, "c_mu": 1, "p_mu": 0}},
    ])
    def test_malformed(self, tmp_path, capsys, doc):
        assert cli.main(["classify", "--config", _write(tmp_path, doc)]) == 1
        assert "invalid classify config" in capsys.readouterr().err

    def test_unreadable(self, tmp_path):
        (tmp_path / "bad.json").write_text("{not json")
        assert cli.main(["classify", "--config", str(tmp_path / "bad.json")]) == 1
        assert cli.main(["classify", "--config", str(tmp_path / "missing.json")]) == 1


class TestDtn:
    def test_constant_only(self, capsys):
        assert cli.main(["dtn", "--lmax", "0", "--H", "2"]) == 0
        rows = list(csv.DictReader(capsys.readouterr().out.splitlines()))
        assert len(rows) == 1
        assert [float(rows[0][k]) for k in ("j_combined", "j1", "j2")] == [-0.5, -0.5, -0.5]

    def test_infinite(self, capsys):
        assert cli.main(["dtn", "--lmax", "1", "--H", "inf", "--R1", "1"]) == 0
        row = list(csv.DictReader(capsys.readouterr().out.splitlines()))[1]
        assert float(row["j1"]) == -math.sqrt(2) and float(row["j2"]) == 0.0

    def test_same_code_path(self, capsys):
        assert cli.main(["dtn", "--lmax", "6", "--H", "0.3", "--R1", "1.5"]) == 0
        for row in csv.DictReader(capsys.readouterr().out.splitlines()):
            lam = float(row["lambda"])
            assert float(row["j1"]) == dtn.dtn_mode_multiplier(DtnKind.FIRST, lam, 0.3)
            assert float(row["j2"]) == dtn.dtn_mode_multiplier(DtnKind.SECOND, lam, 0.3)
            assert float(row["j_combined"]) == dtn.dtn_mode_multiplier(DtnKind.COMBINED, lam, 0.3)

    def test_json(self, capsys):
        assert cli.main(["dtn", "--lmax", "2", "--H", "1", "--json"]) == 0
        assert [r["l"] for r in json.loads(capsys.readouterr().out)] == [0, 1, 2]

    @pytest.mark.parametrize("args", [["--lmax", "1", "--H", "0"], ["--lmax", "1", "--H", "-2"],
                                      ["--lmax", "-1", "--H", "1"], ["--lmax", "1", "--H", "abc"],
                                      ["--lmax", "1"]])
    def test_bad_args(self, args):
        assert cli.main(["dtn", *args]) == 1


class TestSolve:
    def test_zero_data(self, tmp_path):
        p = _write(tmp_path, _solver_doc(initial={"preset": "zero"}, lmax=2))
        # the zero preset carries no modes; zero amplitude keeps every mode but with zero values
        p2 = _write(tmp_path, _solver_doc(initial={"preset": "multimode", "params": {"amplitude": 0.0}}, lmax=2),
                    "cfg2.json")
        assert cli.main(["solve-full", "--config", p, "--out", str(tmp_path / "a")]) == 0
        assert cli.main(["solve-full", "--config", p2, "--out", str(tmp_path / "b")]) == 0
        rows = list(csv.DictReader((tmp_path / "b" / "snapshots.csv").read_text().splitlines()))
        assert rows and all(float(r["value"]) == 0.0 for r in rows)
        assert json.loads((tmp_path / "a" / "summary.json").read_text())["final_l2_norm"] == 0.0

    def test_summary_norm(self, tmp_path):
        from ebclab.harness import initial_data
        from ebclab.radial import ball_l2_norm, build_mesh, solve_full

        doc = _solver_doc()
        out = tmp_path / "o"
        assert cli.main(["solve-full", "--config", _write(tmp_path, doc), "--out", str(out), "--threads", "2"]) == 0
        summary = json.loads((out / "summary.json").read_text())
        layer = config.layer_from(doc)
        T, dt, theta, stride = config.time_from(doc)
        sols = solve_full(layer, initial_data("multimode", doc["lmax"], layer.geom), None, T, dt, theta,
                          mesh=build_mesh(layer, **doc["mesh"]), stride=stride)
        assert summary["final_l2_norm"] == ball_l2_norm(sols, T)
        assert summary["steps"] == 100 and summary["wall_time_s"] >= 0

    def test_reproducible(self, tmp_path):
        for d in ("a", "b"):
            assert cli.main(["solve-ebc", "--config", str(CONFIGS / "solve_ebc.json"), "--out", str(tmp_path / d),
                             "--no-timing"]) == 0
        for name in ("snapshots.csv", "summary.json"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
        assert not [p for p in (tmp_path / "a").iterdir() if p.name.startswith(".")]

    def test_ebc_from_law(self, tmp_path):
        doc = json.loads((CONFIGS / "solve_ebc.json").read_text())
        del doc["family"]
        doc["law"] = {"c_sigma": 2.0, "p_sigma": 1.0, "c_mu": 1.0, "p_mu": 1.0}
        assert cli.main(["solve-ebc", "--config", _write(tmp_path, doc), "--out", str(tmp_path)]) == 0
        assert json.loads((tmp_path / "summary.json").read_text())["family"] == {"family": "RobinContact", "b": 2.0}

    @pytest.mark.parametrize("change", [
        {"time": {"T": 0.1, "dt": 0.03}},
        {"layer": {"delta": 1.5, "sigma": 1.0, "mu": 1.0}},
        {"initial": {"preset": "nope"}},
        {"mesh": {"n_inner": 2}},
    ])
    def test_config_errors(self, tmp_path, change):
        assert cli.main(["solve-full", "--config", _write(tmp_path, _solver_doc(**change)), "--out", str(tmp_path)]) == 1


class TestConverge:
    def test_robin_flagship(self, tmp_path, capsys):
        out = tmp_path / "r"
        assert cli.main(["converge", "--config", str(CONFIGS / "converge_robin.json"), "--out", str(out),
                         "--json", "--csv"]) == 0
        rows = list(csv.DictReader((out / "report.csv").read_text().splitlines()))
        errs = [float(r["sup_t_error"]) for r in rows]
        assert len(rows) == 4 and all(a > b for a, b in zip(errs, errs[1:]))
        assert json.loads((out / "report.json").read_text())["regime"]["family"]["family"] == "RobinContact"
        assert "report.csv" in (out / "report.gp").read_text()

    def test_infeasible_exits_before_solving(self, tmp_path, monkeypatch):
        bad = classify_limits(ExtendedLimit.finite(1.0), ZERO, ExtendedLimit.finite(1.0))
        monkeypatch.setattr(cli, "classify", lambda law: bad)
        monkeypatch.setattr(cli, "run_experiment", lambda exp: pytest.fail("solved an infeasible regime"))
        assert cli.main(["converge", "--config", str(CONFIGS / "converge_robin.json"), "--out", str(tmp_path)]) == 2
        assert not list(tmp_path.iterdir())

    def test_bad_deltas(self, tmp_path):
        doc = json.loads((CONFIGS / "converge_robin.json").read_text())
        doc["deltas"] = [0.05, 0.1]
        assert cli.main(["converge", "--config", _write(tmp_path, doc), "--out", str(tmp_path)]) == 1


class TestSelftest:
    def test_pristine(self, capsys):
        assert cli.main(["selftest", "--seed", "3"]) == 0
        assert capsys.readouterr().out.count("PASS") == 6

    def test_perturbed_sign(self, capsys, monkeypatch):
        original = dtn.dtn_mode_multiplier
        monkeypatch.setattr(dtn, "dtn_mode_multiplier", lambda kind, lam, H: -original(kind, lam, H))
        assert cli.main(["selftest"]) == 3
        err = capsys.readouterr().err
        assert "dtn symmetry" in err


class TestUsage:
    @pytest.mark.parametrize("argv", [[], ["bogus"], ["classify"], ["solve-full", "--config", "x", "--threads", "0"]])
    def test_usage_errors_exit_1(self, argv):
        assert cli.main(argv) == 1

    def test_console_script(self, tmp_path):
        r = subprocess.run([sys.executable, "-m", "ebclab.cli", "dtn", "--lmax", "0", "--H", "-1"],
                           capture_output=True, text=True)
        assert r.returncode == 1 and "H must be positive" in r.stderr

    def test_atomic_write_replaces(self, tmp_path):
        p = tmp_path / "x" / "f.txt"
        cli.write_atomic(p, b"one")
        cli.write_atomic(p, b"two")
        assert p.read_bytes() == b"two" and [q.name for q in p.parent.iterdir()] == ["f.txt"]
