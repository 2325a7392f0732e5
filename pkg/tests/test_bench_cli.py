import csv
import json
import warnings

import numpy as np
import pytest

from qkmm.bench.cli import main
from qkmm.bench.harness import (ExperimentConfig, cmd_compare, cmd_gatecount, cmd_mmm_sweep,
                                cmd_noise_sweep, cmd_run, parse_sources, run_instance)
from qkmm.bench.io import load_matrix, read_csv
from qkmm.bench.plots import emit_plots
from qkmm.errors import ConfigurationError
from qkmm.noise import NoiseParams


def rows_of(path):
    header, rows = read_csv(path)
    return header, rows


def without_timing(path):
    _, rows = rows_of(path)
    return [{k: v for k, v in r.items() if not k.endswith("_s")} for r in rows]


class TestExitCodes:
    def test_success(self, tmp_path):
        assert main(["run", "--task", "v2v", "--dims", "2", "--exact", "--out",
                     str(tmp_path)]) == 0

    def test_unknown_flag(self, capsys):
        assert main(["run", "--frobnicate"]) == 2

    def test_missing_subcommand(self, capsys):
        assert main([]) == 2

    def test_bad_dims(self, tmp_path, capsys):
        assert main(["run", "--dims", "3", "--out", str(tmp_path)]) == 2
        assert "powers of two" in capsys.readouterr().err

    def test_zero_trials(self, tmp_path, capsys):
        assert main(["run", "--trials", "0", "--out", str(tmp_path)]) == 2

    def test_unnormalised_file_input(self, tmp_path, capsys):
        (tmp_path / "a.csv").write_text("3,4\n1,0\n")
        (tmp_path / "b.csv").write_text("1,0\n0,1\n")
        code = main(["run", "--task", "m2m", "--matrix-a", str(tmp_path / "a.csv"),
                     "--matrix-b", str(tmp_path / "b.csv"), "--out", str(tmp_path)])
        assert code == 3

    def test_density_cap(self, tmp_path, capsys):
        code = main(["noise-sweep", "--task", "m2m", "--dims", "16", "--out", str(tmp_path)])
        assert code == 2

    def test_help(self, capsys):
        assert main(["--help"]) == 0


class TestRun:
    def test_v2v_exact(self, tmp_path):
        main(["run", "--task", "v2v", "--dims", "2", "--trials", "1", "--exact", "--out",
              str(tmp_path)])
        (row,) = rows_of(tmp_path / "run_v2v.csv")[1]
        assert float(row["fidelity"]) == 1.0
        assert float(row["mean_error"]) <= 1e-12

    def test_header_is_versioned(self, tmp_path):
        main(["run", "--task", "v2v", "--dims", "2", "--out", str(tmp_path)])
        header, _ = rows_of(tmp_path / "run_v2v.csv")
        assert header.startswith("# qkmm-results/1 run columns=task,dim,")

    def test_summary_json(self, tmp_path):
        main(["run", "--task", "m2m", "--dims", "2,4", "--trials", "3", "--out", str(tmp_path)])
        summary = json.loads((tmp_path / "run_m2m_summary.json").read_text())
        assert [s["dim"] for s in summary["summary"]] == [2, 4]
        assert all(s["n"] == 3 for s in summary["summary"])
        assert summary["config"]["seed"] == 0
        assert "fidelity_convention" in summary

    def test_json_format(self, tmp_path):
        main(["run", "--task", "v2m", "--dims", "2", "--format", "json", "--out", str(tmp_path)])
        payload = json.loads((tmp_path / "run_v2m.json").read_text())
        assert payload["format"] == "qkmm-results/1" and len(payload["rows"]) == 1

    def test_noisy_run_with_sources(self, tmp_path):
        main(["run", "--task", "v2v", "--dims", "2", "--exact", "--sources", "T1+GATE",
              "--out", str(tmp_path)])
        (row,) = rows_of(tmp_path / "run_v2v.csv")[1]
        assert float(row["fidelity"]) < 1.0
        assert int(row["gates_measured"]) > 0

    def test_file_input_with_auto_normalize(self, tmp_path):
        (tmp_path / "a.json").write_text(json.dumps([[3, 4], [0, 2]]))
        (tmp_path / "b.csv").write_text("# columns\n2,0\n0,5\n")
        assert main(["run", "--task", "m2m", "--matrix-a", str(tmp_path / "a.json"),
                     "--matrix-b", str(tmp_path / "b.csv"), "--auto-normalize", "--exact",
                     "--out", str(tmp_path)]) == 0
        summary = json.loads((tmp_path / "run_m2m_summary.json").read_text())
        assert summary["input_scales"] == {"rows": [5.0, 2.0], "columns": [2.0, 5.0]}
        (row,) = rows_of(tmp_path / "run_m2m.csv")[1]
        assert float(row["mean_error"]) <= 1e-9

    def test_mmm_task(self, tmp_path):
        assert main(["run", "--task", "mmm", "--dims", "4", "--exact", "--parallel-counts", "2",
                     "--out", str(tmp_path)]) == 0
        (row,) = rows_of(tmp_path / "run_mmm.csv")[1]
        assert float(row["mean_error"]) <= 1e-9

    def test_config_file(self, tmp_path):
        cfg = tmp_path / "exp.toml"
        cfg.write_text(f'task = "swap"\ndims = [2, 4]\nexact = true\noutput_dir = "{tmp_path}"\n')
        assert main(["run", "--config", str(cfg)]) == 0
        assert len(rows_of(tmp_path / "run_swap.csv")[1]) == 2


class TestDeterminism:
    @pytest.mark.parametrize("argv,name", [
        (["run", "--task", "m2m", "--dims", "2,4", "--trials", "3"], "run_m2m.csv"),
        (["noise-sweep", "--task", "v2v", "--dims", "2,4"], "noise_sweep_v2v.csv"),
        (["mmm-sweep", "--dims", "4", "--parallel-counts", "2,4"], "mmm_sweep.csv"),
    ])
    def test_same_seed_same_rows(self, tmp_path, argv, name):
        main(argv + ["--seed", "9", "--out", str(tmp_path / "a")])
        main(argv + ["--seed", "9", "--out", str(tmp_path / "b")])
        assert without_timing(tmp_path / "a" / name) == without_timing(tmp_path / "b" / name)

    def test_workers_do_not_change_results(self, tmp_path):
        argv = ["run", "--task", "v2m", "--dims", "2,4", "--trials", "2", "--seed", "4"]
        main(argv + ["--out", str(tmp_path / "a")])
        main(argv + ["--workers", "2", "--out", str(tmp_path / "b")])
        assert without_timing(tmp_path / "a" / "run_v2m.csv") == \
            without_timing(tmp_path / "b" / "run_v2m.csv")

    def test_row_reruns_from_echo(self, tmp_path):
        out = cmd_run(ExperimentConfig(task="m2m", dims=(4,), trials=2, seed=5,
                                       output_dir=str(tmp_path)))
        summary = json.loads(out.files[1].read_text())
        config = ExperimentConfig.from_dict(summary["config"])
        for record in out.records:
            echo = record.config_echo
            again = run_instance(config, echo["dim"], echo["trial"])
            assert again.metrics == record.metrics


class TestCompare:
    def test_qkmm_below_hadamard_stack(self, tmp_path):
        out = cmd_compare(ExperimentConfig(task="m2m", dims=(8,), methods=("qkmm", "hadamard"),
                                           output_dir=str(tmp_path)))
        by = {r.config_echo["method"]: r.gate_counts for r in out.records}
        assert by["qkmm"]["gates_total"] < by["hadamard"]["gates_total"]
        assert by["hadamard"]["repetitions"] == 64

    def test_v2v_qubits_against_swap(self, tmp_path):
        out = cmd_compare(ExperimentConfig(task="v2v", dims=(2,), methods=("qkmm", "swap"),
                                           output_dir=str(tmp_path)))
        by = {r.config_echo["method"]: r.gate_counts["qubits"] for r in out.records}
        assert by == {"qkmm": 1, "swap": 3}

    def test_single_method(self, tmp_path):
        main(["compare", "--task", "v2m", "--dims", "2,4", "--methods", "qkmm", "--out",
              str(tmp_path)])
        _, rows = rows_of(tmp_path / "compare_v2m.csv")
        assert {r["method"] for r in rows} == {"qkmm"} and len(rows) == 2

    def test_baselines_are_exact(self, tmp_path):
        out = cmd_compare(ExperimentConfig(task="v2m", dims=(4,), output_dir=str(tmp_path)))
        assert all(r.metrics["mean_error"] < 1e-8 for r in out.records)


class TestNoiseSweep:
    def test_none_subset_has_unit_fidelity(self, tmp_path):
        main(["noise-sweep", "--task", "v2v", "--dims", "2,4,8", "--sources", "none",
              "--out", str(tmp_path)])
        _, rows = rows_of(tmp_path / "noise_sweep_v2v.csv")
        assert [float(r["fidelity"]) for r in rows] == [1.0, 1.0, 1.0]

    def test_all_subsets_present(self, tmp_path):
        cmd_noise_sweep(ExperimentConfig(task="m2m", dims=(2,), noise=NoiseParams(),
                                         output_dir=str(tmp_path)))
        _, rows = rows_of(tmp_path / "noise_sweep_m2m.csv")
        assert [r["sources"] for r in rows] == ["none", "T1", "T2", "GATE", "T1+T2+GATE"]

    def test_noise_config_recorded(self, tmp_path):
        cfg = tmp_path / "noise.json"
        cfg.write_text(json.dumps({"t1": 80.0, "t2": 60.0, "two_qubit_duration": 300.0}))
        main(["noise-sweep", "--task", "v2v", "--dims", "2", "--noise-config", str(cfg),
              "--out", str(tmp_path)])
        summary = json.loads((tmp_path / "noise_sweep_v2v_summary.json").read_text())
        assert summary["noise"]["t1"] == 80.0
        assert summary["noise"]["two_qubit_duration"] == 300.0

    def test_parse_sources(self):
        assert parse_sources("none,T1,all") == ((), ("T1",), ("T1", "T2", "GATE"))
        assert parse_sources("gate+t1") == (("T1", "GATE"),)
        with pytest.raises(ConfigurationError):
            parse_sources("T3")


class TestMmmSweep:
    def test_fifteen_points(self, tmp_path):
        cmd_mmm_sweep(ExperimentConfig(task="mmm", dims=(4, 8, 16), output_dir=str(tmp_path)))
        _, rows = rows_of(tmp_path / "mmm_sweep.csv")
        assert len(rows) == 15
        assert {int(r["K"]) for r in rows} == {2, 4, 8, 16, 32}

    def test_per_product_gates_fall_with_K(self, tmp_path):
        out = cmd_mmm_sweep(ExperimentConfig(task="mmm", dims=(8,), output_dir=str(tmp_path),
                                             parallel_counts=(1, 2, 4, 8, 16, 32)))
        per = [r.gate_counts["gates_per_product"] for r in out.records]
        assert all(a > b for a, b in zip(per, per[1:]))

    def test_k1_matches_single_block(self, tmp_path):
        out = cmd_mmm_sweep(ExperimentConfig(task="mmm", dims=(4,), parallel_counts=(1,),
                                             exact=True, output_dir=str(tmp_path)))
        (rec,) = out.records
        assert rec.metrics["mean_error"] < 1e-9 and rec.gate_counts["qubits"] == 4


class TestGatecount:
    def test_table(self, tmp_path):
        out = cmd_gatecount(ExperimentConfig(task="gatecount", dims=(2, 4, 8, 16),
                                             output_dir=str(tmp_path)))
        for rec in out.records:
            m = rec.metrics
            assert m["model_count"] == m["S_recomposed"]
            assert m["S_linear_gap"] == 768 * m["dim"]
            assert m["measured_elementary"] > 0

    def test_run_delegates(self, tmp_path):
        assert main(["run", "--task", "gatecount", "--dims", "2,4", "--out", str(tmp_path)]) == 0
        assert (tmp_path / "gatecount.csv").exists()


class TestPlots:
    def test_empty_dir_warns(self, tmp_path):
        with pytest.warns(UserWarning):
            assert emit_plots(tmp_path) == []

    def test_noise_sweep_specs(self, tmp_path):
        main(["noise-sweep", "--task", "v2v", "--dims", "2", "--sources", "none,T1", "--out",
              str(tmp_path)])
        files = emit_plots(tmp_path)
        names = sorted(p.name for p in files)
        assert names == ["noise_sweep_v2v_fidelity.json", "noise_sweep_v2v_mean_error.json",
                         "plot_tool.py"]

    def test_compare_spec_is_log_log_per_method(self, tmp_path):
        main(["compare", "--task", "v2v", "--dims", "2,4", "--out", str(tmp_path)])
        emit_plots(tmp_path)
        spec = json.loads((tmp_path / "plots" / "compare_v2v_time.json").read_text())
        assert spec["series"] == "method"
        assert spec["xscale"] == "log" and spec["yscale"] == "log"
        assert spec["data"] == "../compare_v2v.csv"

    def test_cli_plots(self, tmp_path, capsys):
        main(["gatecount", "--dims", "2,4", "--out", str(tmp_path)])
        capsys.readouterr()
        assert main(["plots", str(tmp_path)]) == 0
        printed = capsys.readouterr().out.split()
        assert any(p.endswith("plot_tool.py") for p in printed)

    def test_plot_tool_renders(self, tmp_path):
        pytest.importorskip("matplotlib")
        import subprocess
        import sys
        main(["run", "--task", "v2v", "--dims", "2,4", "--out", str(tmp_path)])
        emit_plots(tmp_path)
        plots = tmp_path / "plots"
        subprocess.run([sys.executable, "plot_tool.py", "run_v2v_time.json"], cwd=plots,
                       check=True, capture_output=True)
        assert (plots / "run_v2v_time.png").stat().st_size > 0


class TestIO:
    def test_row_vector_becomes_vector(self, tmp_path):
        (tmp_path / "v.csv").write_text("0.6,0.8\n")
        assert load_matrix(tmp_path / "v.csv").shape == (2,)

    def test_bad_file(self, tmp_path):
        from qkmm.errors import ValidationError
        (tmp_path / "m.csv").write_text("1,x\n")
        with pytest.raises(ValidationError):
            load_matrix(tmp_path / "m.csv")

    def test_config_round_trip(self):
        cfg = ExperimentConfig(task="v2m", dims=(2, 8), noise=NoiseParams(t1=70.0),
                               source_sets=((), ("T1",)))
        assert ExperimentConfig.from_dict(json.loads(json.dumps(cfg.to_dict()))) == cfg

    def test_unknown_config_key(self):
        with pytest.raises(ConfigurationError):
            ExperimentConfig.from_dict({"tsk": "v2v"})
