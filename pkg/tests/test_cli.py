import csv
import hashlib
import json
import subprocess
import sys

import numpy as np
import pytest

import spincats
from spincats import cli
from spincats.cli import EXIT_NUMERIC, EXIT_OK, EXIT_PARAMS, ConfigError, RunConfig, Table, build_state, main, run
from spincats.spin import Axis, Spin


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def snapshot(directory):
    return {p.name: p.read_bytes() for p in sorted(directory.iterdir())}


class TestParams:
    def test_defaults_filled(self):
        params = cli.resolve_params("qfi", {"spin": 4})
        assert params == {"spin": 4, "parity": "plus", "grid_resolution": 16}

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="bogus"):
            cli.resolve_params("qfi", {"bogus": 1})

    @pytest.mark.parametrize("value", ["4", 4.5, True, None])
    def test_wrong_type(self, value):
        with pytest.raises(ConfigError):
            cli.resolve_params("qfi", {"spin": value})

    def test_int_promoted_for_float(self):
        assert cli.resolve_params("rates", {"g": 1})["g"] == 1.0

    @pytest.mark.parametrize(
        "text,expected",
        [("spin=4", ("spin", 4)), ("parity=minus", ("parity", "minus")), ("m_values=[1,3]", ("m_values", [1, 3]))],
    )
    def test_override_parsing(self, text, expected):
        assert cli._parse_override(text) == expected

    def test_override_needs_equals(self):
        with pytest.raises(ConfigError):
            cli._parse_override("spin")


class TestStates:
    @pytest.mark.parametrize(
        "spec,axis,index",
        [
            ({"kind": "dicke", "m": 1, "axis": "z"}, Axis.Z, 4),
            ({"kind": "coherent", "axis": "x"}, Axis.X, 6),
        ],
    )
    def test_basis_states(self, spec, axis, index):
        state = build_state(Spin(6), spec)
        assert state.basis == axis and abs(state.amplitudes[index]) == 1

    def test_kitten_and_uniform(self):
        assert np.linalg.norm(build_state(Spin(6), {"kind": "kitten", "m": 2, "parity": "minus"}).amplitudes) == pytest.approx(1)
        assert np.allclose(np.abs(build_state(Spin(4), {"kind": "uniform"}).amplitudes) ** 2, 0.2)

    @pytest.mark.parametrize("spec", [{"kind": "cat"}, {"kind": "dicke", "n": 1}, "dicke", {"m": 1}])
    def test_rejects(self, spec):
        with pytest.raises(ConfigError):
            build_state(Spin(4), spec)


class TestSerialization:
    def test_csv_format(self):
        text = cli.table_to_csv(Table(("a", "b", "c", "d"), [(1, 0.1, None, True), (2, float("inf"), "x", False)]))
        assert text == "a,b,c,d\n1,1.00000000000000006e-01,,true\n2,inf,x,false\n"

    def test_float_round_trip(self):
        values = np.random.default_rng(0).normal(size=50) * 10.0 ** np.arange(-25, 25)
        text = cli.table_to_csv(Table(("v",), [(float(v),) for v in values]))
        parsed = [float(line) for line in text.splitlines()[1:]]
        assert parsed == list(values)

    def test_json_non_finite(self):
        assert json.loads(cli._dump_json({"x": float("inf"), "y": np.float64(1.5)})) == {"x": "inf", "y": 1.5}


class TestCommands:
    def test_rates(self, tmp_path):
        manifest = run(RunConfig("rates", {}), tmp_path)
        assert manifest["summary"]["settle_time"] == pytest.approx(2250.0)
        assert manifest["summary"]["settle_time_us"] == pytest.approx(2.25)
        (row,) = read_csv(tmp_path / "rates.csv")
        assert float(row["settle_time"]) == pytest.approx(2250.0)

    def test_qfi_columns(self, tmp_path):
        run(RunConfig("qfi", {"spin": 4}), tmp_path)
        rows = read_csv(tmp_path / "qfi.csv")
        assert [int(r["m"]) for r in rows] == [0, 1, 2, 3, 4]
        for r in rows:
            assert float(r["qfi_y"]) == pytest.approx(4 * int(r["m"]) ** 2, abs=1e-9)
            assert float(r["qfi_opt"]) >= float(r["qfi_y"]) - 1e-9

    def test_pcrit(self, tmp_path):
        run(RunConfig("pcrit", {"s_min": 10, "s_max": 12, "f_points": 5}), tmp_path)
        rows = read_csv(tmp_path / "pcrit.csv")
        assert float(rows[0]["p_crit"]) == pytest.approx(0.5378646850585938, rel=1e-12)
        assert len(read_csv(tmp_path / "pcrit_limit.csv")) == 5

    def test_secret(self, tmp_path):
        manifest = run(RunConfig("secret", {"s_max": 5}), tmp_path)
        rows = read_csv(tmp_path / "thresholds.csv")
        assert len(rows) == sum(S + 1 for S in range(1, 6))
        first = rows[1]
        assert (first["S"], first["m"]) == ("1", "1")
        assert float(first["p_crit_kitten"]) == float(first["p_crit_ghz"]) == 2**-0.5
        assert "ratio_at_s_max" in manifest["summary"]

    def test_wigner(self, tmp_path):
        manifest = run(RunConfig("wigner", {"spin": 4, "state": {"kind": "kitten", "m": 2}}), tmp_path)
        assert manifest["summary"]["fringe_count"] == 4
        assert manifest["summary"]["normalization"] == pytest.approx(1, abs=1e-10)
        assert len(read_csv(tmp_path / "wigner.csv")) == 32 * 64

    def test_ensemble(self, tmp_path):
        params = {"n_particles": 4, "gamma_eff": 0.01, "t_points": 5, "m_values": [1]}
        manifest = run(RunConfig("ensemble", params), tmp_path)
        rows = read_csv(tmp_path / "fidelity.csv")
        assert len(rows) == 10 and {r["parity"] for r in rows} == {"plus", "minus"}
        assert set(manifest["summary"]["fit_assignment"]["1"]) == {"growth", "decay", "max_deviation"}

    def test_trajectory_records(self, tmp_path):
        run(RunConfig("trajectory", {"spin": 3, "n_trajectories": 2}, master_seed=5), tmp_path)
        records = json.loads((tmp_path / "trajectories.json").read_text())
        summary = read_csv(tmp_path / "trajectories.csv")
        jumps = read_csv(tmp_path / "jumps.csv")
        assert [len(r["jump_times"]) for r in records] == [int(s["n_jumps"]) for s in summary]
        assert len(jumps) == sum(len(r["jump_times"]) for r in records)

    def test_json_format(self, tmp_path):
        run(RunConfig("rates", {}, format="json"), tmp_path)
        (row,) = json.loads((tmp_path / "rates.json").read_text())
        assert row["settle_time"] == pytest.approx(2250.0)


class TestReproducibility:
    CONFIG = RunConfig("histogram", {"spin": 4, "n_trajectories": 200}, master_seed=11)

    def test_byte_identical_across_workers(self, tmp_path):
        run(self.CONFIG, tmp_path / "a", workers=1)
        run(self.CONFIG, tmp_path / "b", workers=2)
        assert snapshot(tmp_path / "a") == snapshot(tmp_path / "b")

    def test_full_size_histogram_repeatable(self, tmp_path):
        config = RunConfig("histogram", {"spin": 10, "n_trajectories": 5000}, master_seed=42)
        run(config, tmp_path / "a")
        run(config, tmp_path / "b")
        assert (tmp_path / "a" / "histogram.csv").read_bytes() == (tmp_path / "b" / "histogram.csv").read_bytes()

    def test_seed_changes_output(self, tmp_path):
        run(self.CONFIG, tmp_path / "a")
        run(RunConfig("histogram", self.CONFIG.params, master_seed=12), tmp_path / "b")
        assert (tmp_path / "a" / "histogram.csv").read_bytes() != (tmp_path / "b" / "histogram.csv").read_bytes()

    def test_rerun_from_manifest(self, tmp_path):
        assert main(["histogram", "--param", "spin=4", "--param", "n_trajectories=100", "--seed", "3", "--out", str(tmp_path / "a")]) == EXIT_OK
        assert main(["rerun", str(tmp_path / "a" / "manifest.json"), "--out", str(tmp_path / "b")]) == EXIT_OK
        assert snapshot(tmp_path / "a") == snapshot(tmp_path / "b")

    def test_manifest_contents(self, tmp_path):
        manifest = run(RunConfig("qfi", {"spin": 2}), tmp_path)
        assert manifest["version"] == spincats.__version__
        assert manifest["config"]["params"] == {"spin": 2, "parity": "plus", "grid_resolution": 16}
        digest = hashlib.sha256((tmp_path / "qfi.csv").read_bytes()).hexdigest()
        assert manifest["artifacts"] == {"qfi.csv": digest}


    def test_output_path_from_config(self, tmp_path):
        run(RunConfig("rates", {}, output_path=tmp_path / "here"))
        assert (tmp_path / "here" / "rates.csv").exists()


class TestExitCodes:
    def test_config_file(self, tmp_path):
        cfg = tmp_path / "params.json"
        cfg.write_text(json.dumps({"spin": 3}))
        out = tmp_path / "out"
        assert main(["qfi", "--config", str(cfg), "--param", "parity=minus", "--out", str(out)]) == EXIT_OK
        assert json.loads((out / "manifest.json").read_text())["config"]["params"]["parity"] == "minus"

    @pytest.mark.parametrize(
        "argv",
        [
            ["qfi", "--param", "bogus=1"],
            ["qfi", "--param", "spin=-2"],
            ["qfi", "--param", "parity=sideways"],
            ["ensemble", "--param", "n_particles=30"],
            ["rates", "--param", "delta=0"],
            ["qfi", "--seed", "-1"],
            ["rates", "--param", "frequency_unit=THz"],
        ],
    )
    def test_invalid_parameters(self, tmp_path, argv, capsys):
        out = tmp_path / "out"
        assert main(argv + ["--out", str(out)]) == EXIT_PARAMS
        assert "invalid parameters" in capsys.readouterr().err
        assert not out.exists() or not any(out.iterdir())

    def test_missing_config_file(self, tmp_path):
        assert main(["qfi", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path)]) == EXIT_PARAMS

    def test_bad_manifest(self, tmp_path):
        path = tmp_path / "manifest.json"
        path.write_text("{}")
        assert main(["rerun", str(path), "--out", str(tmp_path)]) == EXIT_PARAMS

    def test_numerical_failure_leaves_nothing(self, tmp_path, monkeypatch, capsys):
        from spincats.ensemble import StiffnessError

        def fail(*args, **kwargs):
            raise StiffnessError("step size collapsed at t = 0.3")

        monkeypatch.setattr(cli, "evolve", fail)
        out = tmp_path / "out"
        assert main(["ensemble", "--param", "n_particles=4", "--out", str(out)]) == EXIT_NUMERIC
        assert "numerical failure" in capsys.readouterr().err
        assert not out.exists() or not any(out.iterdir())

    def test_failure_while_writing_keeps_previous(self, tmp_path, monkeypatch):
        run(RunConfig("rates", {}), tmp_path)
        before = snapshot(tmp_path)
        # second file cannot be staged, so the first must not reach the output directory
        monkeypatch.setattr(cli, "_render", lambda outcome, fmt: {"rates.csv": "new\n", "missing/x.csv": "x\n"})
        with pytest.raises(OSError):
            run(RunConfig("rates", {"g": 0.5}), tmp_path)
        assert snapshot(tmp_path) == before


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "spincats", "rates", "--out", str(tmp_path)], capture_output=True, text=True, check=False
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["settle_time"] == pytest.approx(2250.0)
