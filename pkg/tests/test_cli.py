import csv
import json
import math

import pytest

from nordenlift import cli
from nordenlift.classify import THREADS_ENV

CONFORMAL = {"kind": "conformal-ak", "functions": {"a1": "1+t", "a3": "t/2", "c1": "2+t", "c3": "0"},
             "t_max": 0.5}
PERTURBED = {"kind": "integrable", "t_max": 0.5, "perturb": {"b1": 0.1},
             "functions": {"a1": "1+t", "a3": "t/2", "c1": "2+t", "c3": "0", "d1": "0.2", "d3": "0.1"}}


def write_config(tmp_path, family, c=1.0, n=2, **extra):
    doc = {"schema": 1, "base": {"n": n, "c": c}, "family": family,
           "sampling": {"num_points": 8, "seed": 3}, **extra}
    path = tmp_path / "run.json"
    path.write_text(json.dumps(doc))
    return str(path)


def run_json(tmp_path, *argv):
    out = tmp_path / "report.json"
    code = cli.run([*argv, "--output", str(out)])
    return code, json.loads(out.read_text())


class TestCheck:
    def test_trivial(self, tmp_path):
        code, rep = run_json(tmp_path, "check", "--config", write_config(tmp_path, {"kind": "trivial-flat"}, c=0.0))
        assert code == 0 and rep["status"] == "pass" and rep["failures"] == []

    def test_sign_flip_named(self, tmp_path):
        cfg = write_config(tmp_path, {"kind": "trivial-flat", "scale": {"c2": -1}}, c=0.0)
        code, rep = run_json(tmp_path, "check", "--config", cfg)
        assert code == 1
        assert "norden" in rep["failures"]
        assert rep["residuals"]["norden"] == 2.0

    def test_diagonal(self, tmp_path):
        cfg = write_config(tmp_path, {"kind": "diagonal-ak", "scalars": {"A": 1, "B": 1}})
        code, rep = run_json(tmp_path, "check", "--config", cfg)
        assert code == 0 and rep["family"] == "diagonal-ak"
        assert rep["residuals"]["J^2+I"] < 1e-10


class TestClassify:
    @pytest.mark.parametrize("family,c,verdict", [
        ({"kind": "trivial-flat"}, 0.0, "anti-Kähler"),
        (CONFORMAL, 1.0, "strictly ω₁"),
        (PERTURBED, 1.0, "generic Norden (ω₁⊕ω₂⊕ω₃ only)"),
    ])
    def test_verdicts(self, tmp_path, family, c, verdict):
        code, rep = run_json(tmp_path, "classify", "--config", write_config(tmp_path, family, c=c))
        assert code == 0
        assert rep["verdict"] == verdict
        assert set(rep["residuals"]) >= {"F=0", "w1-identity", "phi=0", "cyclic-F", "cyclic-FJ"}

    def test_inconclusive_exit(self, tmp_path):
        cfg = write_config(tmp_path, PERTURBED, tolerances={"member": 1e-6, "reject": 1.0})
        code, rep = run_json(tmp_path, "classify", "--config", cfg)
        assert code == 2 and rep["status"] == "inconclusive"

    def test_tol_flag(self, tmp_path):
        cfg = write_config(tmp_path, PERTURBED)
        code, rep = run_json(tmp_path, "classify", "--config", cfg, "--tol", "0.1")
        assert rep["classes"]["tolerance"] == 0.1
        assert rep["classes"]["classes"]["w1+w2"]["member"] is True


class TestVerify:
    def test_ak_diagonal(self, tmp_path):
        code, rep = run_json(tmp_path, "verify", "3.2", "--points", "6")
        assert code == 0
        assert rep["residuals"]["F=0"] < 1e-6 and rep["residuals"]["witness:F=0"] > 1e-3

    def test_integrability_equivalence(self, tmp_path):
        code, rep = run_json(tmp_path, "verify", "5.1", "--points", "6")
        r = rep["residuals"]
        assert code == 0
        assert r["nijenhuis"] < 1e-6 and r["cyclic-FJ"] < 1e-5
        assert r["witness:nijenhuis"] > 1e-3 and r["witness:cyclic-FJ"] > 1e-3

    def test_curvature_mismatch(self, tmp_path):
        code, rep = run_json(tmp_path, "verify", "2.3", "--points", "6")
        assert code == 0 and rep["residuals"]["witness:nijenhuis"] > 1e-2

    def test_unknown_id_rejected(self, capsys):
        with pytest.raises(SystemExit):
            cli.run(["verify", "1.1"])


class TestDump:
    def test_table(self, tmp_path):
        cfg = write_config(tmp_path, {"kind": "diagonal-ak", "scalars": {"A": 1, "B": 1}})
        out = tmp_path / "table.csv"
        assert cli.run(["dump", "--config", cfg, "--output", str(out)]) == 0
        rows = list(csv.DictReader(out.open()))
        assert len(rows) == 8
        for r in rows:
            assert float(r["a1"]) == pytest.approx(math.sqrt(1 + 2 * float(r["t"])), abs=1e-12)

    def test_f_components(self, tmp_path):
        cfg = write_config(tmp_path, {"kind": "generic"})
        out = tmp_path / "f.csv"
        assert cli.run(["dump", "--what", "F", "--points", "5", "--config", cfg, "--output", str(out)]) == 0
        rows = list(csv.DictReader(out.open()))
        assert len(rows) == 5 * 64 and {r["point"] for r in rows} == {"0", "1", "2", "3", "4"}

    def test_bad_path(self, tmp_path, capsys):
        bad = tmp_path / "missing" / "x.csv"
        assert cli.run(["dump", "--output", str(bad)]) == 1
        assert "I/O error" in capsys.readouterr().err


class TestConfigErrors:
    @pytest.mark.parametrize("doc", [
        {"schema": 2},
        {"schema": 1, "extra": True},
        {"schema": 1, "base": {"n": 1}},
        {"schema": 1, "family": {"kind": "custom", "functions": {"a1": "1+*t"}}},
        {"schema": 1, "sampling": {"num_points": 0}},
        [1, 2],
    ])
    def test_exit_64(self, tmp_path, doc, capsys):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(doc))
        assert cli.run(["check", "--config", str(path)]) == 64
        assert "config error" in capsys.readouterr().err

    def test_missing_file(self, tmp_path):
        assert cli.run(["check", "--config", str(tmp_path / "nope.json")]) == 64

    def test_not_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{schema: 1")
        assert cli.run(["classify", "--config", str(path)]) == 64


class TestDeterminism:
    def strip(self, rep):
        rep.pop("timing")
        return rep

    def test_same_seed_same_report(self, tmp_path):
        cfg = write_config(tmp_path, CONFORMAL)
        a = self.strip(run_json(tmp_path, "classify", "--config", cfg, "--seed", "4")[1])
        b = self.strip(run_json(tmp_path, "classify", "--config", cfg, "--seed", "4")[1])
        assert cli.render(a) == cli.render(b)

    def test_seed_changes_points(self, tmp_path):
        cfg = write_config(tmp_path, {"kind": "generic"})
        a = run_json(tmp_path, "classify", "--config", cfg, "--seed", "1")[1]
        b = run_json(tmp_path, "classify", "--config", cfg, "--seed", "2")[1]
        assert a["residuals"] != b["residuals"]

    def test_threads_do_not_change_report(self, tmp_path, monkeypatch):
        cfg = write_config(tmp_path, {"kind": "generic"})
        a = self.strip(run_json(tmp_path, "classify", "--config", cfg)[1])
        monkeypatch.setenv(THREADS_ENV, "4")
        b = self.strip(run_json(tmp_path, "classify", "--config", cfg)[1])
        assert a == b

    def test_config_echo(self, tmp_path):
        cfg = write_config(tmp_path, CONFORMAL, c=1.0, n=3)
        rep = run_json(tmp_path, "check", "--config", cfg, "--points", "4")[1]
        assert rep["config"]["base"] == {"n": 3, "c": 1.0}
        assert rep["config"]["sampling"]["num_points"] == 4
        assert rep["command"] == "check"


def test_stdout_default(capsys):
    assert cli.run(["check", "--points", "2"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["family"] == "trivial-flat"
