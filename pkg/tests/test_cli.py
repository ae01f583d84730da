import json
import math

import pytest

from splitgrow.cli import main, parse_weight_expr
from splitgrow.experiment import ExperimentConfig, worker_count
from conftest import DMAX3_ENTRIES

E2 = math.e ** 2


class TestParseWeightExpr:
    @pytest.mark.parametrize("expr,a,b", [
        ("i", 1.0, 0.0), ("2*i+1", 2.0, 1.0), ("i-0.5", 1.0, -0.5),
        ("1", 0.0, 1.0), ("0.5*i", 0.5, 0.0), ("i + 1", 1.0, 1.0),
        ("-i+3", -1.0, 3.0),
    ])
    def test_forms(self, expr, a, b):
        sw = parse_weight_expr(expr)
        assert (sw.a, sw.b) == (a, b)


def dmax3_table_file(tmp_path):
    path = tmp_path / "dmax3.json"
    path.write_text(json.dumps({"d_max": 3, "entries": [list(e) for e in DMAX3_ENTRIES]}))
    return path


class TestSolve:
    def test_preferential(self, tmp_path):
        out = tmp_path / "out"
        rc = main(["solve", "--family", "preferential", "--w", "i",
                   "--K", "400", "--out", str(out)])
        assert rc == 0
        doc = json.loads((out / "solution.json").read_text())
        assert doc["method"] == "fixed-point"
        assert doc["densities"][0] == pytest.approx(2 / 3, abs=1e-9)
        man = json.loads((out / "manifest.json").read_text())
        assert "config_digest" in man and "versions" in man

    def test_table(self, tmp_path):
        out = tmp_path / "out"
        rc = main(["solve", "--table", str(dmax3_table_file(tmp_path)),
                   "--out", str(out)])
        assert rc == 0
        doc = json.loads((out / "solution.json").read_text())
        assert doc["method"] == "linear"
        assert doc["densities"] == pytest.approx([0.25, 0.5, 0.25], abs=1e-10)

    def test_uniform(self, tmp_path):
        out = tmp_path / "out"
        rc = main(["solve", "--family", "uniform", "--x", "0", "--out", str(out)])
        assert rc == 0
        doc = json.loads((out / "solution.json").read_text())
        assert doc["densities"][0] == pytest.approx(8 / (3 * (E2 - 1)), abs=1e-10)
        assert doc["densities"][0] == pytest.approx(0.4173812, abs=1e-6)

    def test_two_colour(self, tmp_path):
        out = tmp_path / "out"
        rc = main(["solve", "--family", "rna", "--K", "128", "--out", str(out)])
        assert rc == 0
        doc = json.loads((out / "solution.json").read_text())
        assert doc["kind"] == "two-colour"
        assert doc["e_black"][0] == pytest.approx(1 / E2, abs=1e-10)
        assert doc["rho_white"][0] + doc["rho_black"][0] == pytest.approx(
            0.4173804, abs=1e-7)

    def test_case2_needs_force(self, tmp_path, capsys):
        rc = main(["solve", "--family", "preferential", "--w", "i", "--K", "64"])
        assert rc == 0
        # grafting alpha=1 yields zero leaf mass at degree 2: refused politely
        rc = main(["solve", "--family", "grafting", "--alpha", "1.0",
                   "--gamma", "1.0", "--K", "32"])
        assert rc == 2


class TestSimulate:
    def test_deterministic_outputs(self, tmp_path):
        args = ["simulate", "--family", "preferential", "--w", "i",
                "--seed", "4242", "--replicas", "2", "--t-final", "2000",
                "--thin", "500"]
        rc = main(args + ["--out", str(tmp_path / "a")])
        assert rc == 0
        rc = main(args + ["--out", str(tmp_path / "b")])
        assert rc == 0
        assert (tmp_path / "a/census.csv").read_bytes() \
            == (tmp_path / "b/census.csv").read_bytes()
        da = json.loads((tmp_path / "a/manifest.json").read_text())
        db = json.loads((tmp_path / "b/manifest.json").read_text())
        assert da["config_digest"] == db["config_digest"]

    def test_census_identities_in_csv(self, tmp_path):
        out = tmp_path / "out"
        rc = main(["simulate", "--family", "uniform", "--x", "0",
                   "--seed", "7", "--replicas", "2", "--t-final", "1500",
                   "--out", str(out)])
        assert rc == 0
        per_rep = {}
        for line in (out / "census.csv").read_text().splitlines()[1:]:
            rep, t, k, n = map(int, line.split(","))
            key = (rep, t)
            s, ks = per_rep.get(key, (0, 0))
            per_rep[key] = (s + n, ks + k * n)
        for (rep, t), (s, ks) in per_rep.items():
            assert s == t and ks == 2 * t - 2

    def test_binary_dump(self, tmp_path):
        out = tmp_path / "out"
        rc = main(["simulate", "--family", "preferential", "--w", "i",
                   "--seed", "3", "--replicas", "1", "--t-final", "500",
                   "--binary", "--out", str(out)])
        assert rc == 0
        assert (out / "census_0.bin").exists()

    def test_invalid_model_aborts_with_report(self, tmp_path, capsys):
        table = tmp_path / "bad.json"
        table.write_text(json.dumps({"d_max": 2, "entries": [[1, 2, 1.0]]}))
        rc = main(["simulate", "--table", str(table), "--t-final", "100",
                   "--replicas", "1", "--out", str(tmp_path / "o")])
        assert rc == 2
        assert "top_splittable" in capsys.readouterr().out

    def test_two_colour_csv(self, tmp_path):
        out = tmp_path / "out"
        rc = main(["simulate", "--family", "rna", "--seed", "11",
                   "--replicas", "1", "--t-final", "800", "--out", str(out)])
        assert rc == 0
        lines = (out / "census.csv").read_text().splitlines()
        assert lines[0] == "replica,t,k,n_white,n_black"
        tot = 0
        t_seen = 0
        for line in lines[1:]:
            rep, t, k, nw, nb = map(int, line.split(","))
            tot += 3 * nw + 2 * nb
            t_seen = t
        assert tot == t_seen + 2


class TestCompare:
    def test_preferential_baseline_passes(self, tmp_path):
        out = tmp_path / "out"
        rc = main(["compare", "--family", "preferential", "--w", "i",
                   "--seed", "2025", "--replicas", "8", "--t-final", "20000",
                   "--k-check", "4", "--out", str(out)])
        assert rc == 0
        text = (out / "report.csv").read_text()
        assert "# seed,2025" in text
        assert "closed-form" in text

    def test_report_bytes_reproducible(self, tmp_path):
        args = ["compare", "--family", "grafting", "--alpha", "0.5",
                "--gamma", "1.0", "--seed", "808", "--replicas", "2",
                "--t-final", "3000", "--k-check", "3"]
        rc_a = main(args + ["--out", str(tmp_path / "a")])
        rc_b = main(args + ["--out", str(tmp_path / "b")])
        assert rc_a == rc_b
        assert (tmp_path / "a/report.csv").read_bytes() \
            == (tmp_path / "b/report.csv").read_bytes()
        assert (tmp_path / "a/solution.json").read_bytes() \
            == (tmp_path / "b/solution.json").read_bytes()

    def test_mismatched_reference_fails(self, tmp_path):
        cfgfile = tmp_path / "cfg.json"
        cfgfile.write_text(json.dumps({
            "model": {"family": "preferential", "a": 1.0, "b": 0.0},
            "reference_model": {"family": "uniform", "x": 0.0},
            "replicas": 8, "t_final": 20000, "seed": 99, "k_check": 3,
        }))
        rc = main(["compare", "--config", str(cfgfile), "--out", str(tmp_path / "o")])
        assert rc == 1

    def test_two_colour_report_includes_cross_check(self, tmp_path):
        out = tmp_path / "out"
        rc = main(["compare", "--family", "rna", "--seed", "31",
                   "--replicas", "6", "--t-final", "15000", "--k-check", "3",
                   "--out", str(out)])
        assert rc == 0
        text = (out / "report.csv").read_text()
        assert "# check_colour_sum_vs_one_colour_max_dev" in text
        assert "white" in text and "black" in text


class TestValidate:
    def test_table_passes(self, tmp_path, capsys):
        rc = main(["validate", "--table", str(dmax3_table_file(tmp_path))])
        assert rc == 0
        out = capsys.readouterr().out
        assert "linearity" in out and "regime I" in out

    def test_degenerate_fails(self, tmp_path, capsys):
        table = tmp_path / "bad.json"
        table.write_text(json.dumps({"d_max": 2, "entries": [[1, 2, 1.0]]}))
        assert main(["validate", "--table", str(table)]) == 2

    def test_two_colour(self, capsys):
        assert main(["validate", "--family", "rna"]) == 0
        out = capsys.readouterr().out
        assert "reduced one-colour" in out and "regime III" in out


class TestConfigPlumbing:
    def test_digest_stable(self):
        c1 = ExperimentConfig(model={"family": "uniform", "x": 0.0}, seed=1)
        c2 = ExperimentConfig(model={"family": "uniform", "x": 0.0}, seed=1)
        assert c1.digest == c2.digest
        c3 = ExperimentConfig(model={"family": "uniform", "x": 0.0}, seed=2)
        assert c1.digest != c3.digest

    def test_unknown_key_rejected(self):
        with pytest.raises(Exception):
            ExperimentConfig.from_dict({"model": {}, "bogus": 1})

    def test_worker_env_cap(self, monkeypatch):
        monkeypatch.setenv("SPLITGROW_THREADS", "1")
        assert worker_count(32) == 1
        monkeypatch.setenv("SPLITGROW_THREADS", "4")
        assert worker_count(2) == 2
