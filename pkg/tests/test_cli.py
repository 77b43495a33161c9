"""Command-line interface: commands, formats, and exit codes."""
import json

import pytest
from click.testing import CliRunner

from hetsched.core import dump_json
from hetsched.cli import main


@pytest.fixture
def runner():
    return CliRunner()


def _json_out(result):
    assert result.exit_code == 0, result.output
    return json.loads(result.output)


class TestSchedule:
    def test_preset_workload(self, runner):
        out = _json_out(runner.invoke(main, ["schedule", "-w", "gcn:OA"]))
        assert out["mnemonic"]
        assert out["throughput_per_s"] == pytest.approx(1 / out["period_s"])

    def test_builder_flags(self, runner):
        out = _json_out(runner.invoke(
            main, ["schedule", "--model", "transformer", "--seq-len", "256",
                   "--window", "64", "--layers", "2"]))
        assert out["schedule"]["stages"]

    def test_modes_differ(self, runner):
        perf = _json_out(runner.invoke(
            main, ["schedule", "-w", "gcn:S2", "--mode", "perf"]))
        energy = _json_out(runner.invoke(
            main, ["schedule", "-w", "gcn:S2", "--mode", "energy"]))
        assert energy["energy_per_inference_j"] \
            <= perf["energy_per_inference_j"]

    def test_balanced_full_fraction_equals_perf(self, runner):
        perf = _json_out(runner.invoke(
            main, ["schedule", "-w", "gcn:S2", "--mode", "perf"]))
        bal = _json_out(runner.invoke(
            main, ["schedule", "-w", "gcn:S2", "--mode", "balanced",
                   "--fraction", "1.0"]))
        assert bal["mnemonic"] == perf["mnemonic"]
        assert bal["period_s"] == perf["period_s"]

    def test_gpu_only_baseline(self, runner):
        out = _json_out(runner.invoke(
            main, ["schedule", "-w", "gcn:OA", "--baseline", "gpu-only"]))
        assert set(out["mnemonic"]) <= set("0123456789G")

    def test_static_baseline(self, runner):
        out = _json_out(runner.invoke(
            main, ["schedule", "-w", "gcn:OA", "--baseline", "static",
                   "--stages", "0:2:FPGA:2,2:4:GPU:1"]))
        assert out["mnemonic"] == "2F1G"

    def test_fleetrec_baseline(self, runner):
        out = _json_out(runner.invoke(
            main, ["schedule", "-w", "gcn:OA", "--baseline", "fleetrec",
                   "--pin", "0=FPGA"]))
        assert out["schedule"]["stages"][0]["device_type"] == "FPGA"

    def test_oracle_flag(self, runner):
        dp = _json_out(runner.invoke(main, ["schedule", "-w", "gcn:OA"]))
        orc = _json_out(runner.invoke(
            main, ["schedule", "-w", "gcn:OA", "--oracle"]))
        assert orc["period_s"] == dp["period_s"]

    def test_output_file(self, runner, tmp_path):
        path = tmp_path / "out.json"
        res = runner.invoke(main, ["schedule", "-w", "gcn:OA",
                                   "-o", str(path)])
        assert res.exit_code == 0
        assert json.loads(path.read_text())["mnemonic"]

    def test_workload_file(self, runner, tmp_path):
        from hetsched import build_preset
        path = tmp_path / "wl.json"
        dump_json(build_preset("gcn", "OA"), path)
        out = _json_out(runner.invoke(main, ["schedule", "-w", str(path)]))
        assert out["mnemonic"]


class TestExitCodes:
    def test_bad_preset_is_config_error(self, runner):
        res = runner.invoke(main, ["schedule", "-w", "gcn:NOPE"])
        assert res.exit_code == 2

    def test_missing_workload(self, runner):
        res = runner.invoke(main, ["schedule"])
        assert res.exit_code == 2

    def test_oracle_size_guard(self, runner):
        res = runner.invoke(main, ["schedule", "-w", "transformer:1024:512",
                                   "--oracle"])
        assert res.exit_code == 4

    def test_infeasible(self, runner, tmp_path):
        system = {
            "device_types": [{
                "name": "GPU", "count_available": 1,
                "link_bandwidth": 1e9, "p_static": 10.0,
                "p_dynamic": {"gemm": 100.0}, "eligible": ["gemm"],
                "perf_model_id": "mi210"}],
            "interconnect": {"generation": "pcie4"},
        }
        path = tmp_path / "sys.json"
        path.write_text(json.dumps(system))
        res = runner.invoke(main, ["schedule", "-w", "gcn:OA",
                                   "--system", str(path)])
        assert res.exit_code == 3

    def test_bad_json_file(self, runner, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{")
        res = runner.invoke(main, ["schedule", "-w", str(path)])
        assert res.exit_code == 2


class TestPareto:
    def test_csv(self, runner):
        res = runner.invoke(main, ["pareto", "-w", "gcn:OA"])
        assert res.exit_code == 0
        lines = res.output.strip().splitlines()
        assert lines[0] == "throughput_per_s,energy_per_inference_j,mnemonic"
        rows = [ln.split(",") for ln in lines[1:]]
        assert rows
        thps = [float(r[0]) for r in rows]
        assert thps == sorted(thps, reverse=True)


class TestSimulate:
    def test_agreement(self, runner):
        res = runner.invoke(main, ["simulate", "-w", "gcn:OA"])
        out = _json_out(res)
        assert out["simulated_period_s"] \
            == pytest.approx(out["analytic_period_s"], rel=1e-9)

    def test_replay_and_trace(self, runner, tmp_path):
        sched_path = tmp_path / "sched.json"
        trace_path = tmp_path / "trace.csv"
        res = runner.invoke(main, ["schedule", "-w", "gcn:OA",
                                   "-o", str(sched_path)])
        assert res.exit_code == 0
        res = runner.invoke(main, ["simulate", "-w", "gcn:OA",
                                   "--schedule", str(sched_path),
                                   "--trace", str(trace_path)])
        out = _json_out(res)
        assert trace_path.exists()
        assert out["mnemonic"] == json.loads(
            sched_path.read_text())["mnemonic"]


class TestCompare:
    def test_matrix_csv(self, runner):
        res = runner.invoke(main, ["compare", "-w", "gcn:OA",
                                   "--interconnect", "pcie4",
                                   "--interconnect", "cxl3"])
        assert res.exit_code == 0, res.output
        lines = res.output.strip().splitlines()
        assert lines[0].startswith("workload,interconnect,baseline,")
        baselines = {ln.split(",")[2] for ln in lines[1:]}
        assert baselines == {"dype", "gpu_only", "fpga_only",
                             "theoretical_additive"}
        gens = {ln.split(",")[1] for ln in lines[1:]}
        assert gens == {"pcie4", "cxl3"}


class TestRobustnessCmd:
    def test_zero_epsilon(self, runner):
        res = runner.invoke(main, ["robustness", "-w", "gcn:OA",
                                   "--epsilon", "0", "--trials", "3"])
        out = _json_out(res)
        assert out["n_suboptimal"] == 0


class TestFit:
    def test_fit_roundtrip(self, runner, tmp_path):
        import random

        from hetsched import Kernel, KernelKind, MeasurementSet, PerfModel
        from hetsched.perf import ModelKind

        rng = random.Random(5)
        truth = PerfModel(ModelKind.SPMM_FPGA, {"C": 1.25})
        rows = []
        for _ in range(12):
            k = Kernel(KernelKind.SPMM, m=rng.randint(100, 5000),
                       k=rng.randint(100, 5000), n=rng.randint(8, 512),
                       nnz=rng.randint(1000, 100000))
            rows.append((k, truth.raw_seconds(k)))
        path = tmp_path / "meas.csv"
        MeasurementSet(tuple(rows)).to_csv(path)
        res = runner.invoke(main, ["fit", "--kind", "spmm_fpga",
                                   "--data", str(path)])
        out = _json_out(res)
        assert out["models"][0]["coefficients"]["C"] \
            == pytest.approx(1.25, rel=1e-9)
        assert out["fit_report"]["rmse_s"] < 1e-12

    def test_underdetermined_exit_code(self, runner, tmp_path):
        path = tmp_path / "meas.csv"
        path.write_text("kind,m,k,n,nnz,seq_len,window,seconds\n")
        res = runner.invoke(main, ["fit", "--kind", "gemm_gpu",
                                   "--data", str(path)])
        assert res.exit_code == 2


class TestGenWorkload:
    def test_emits_valid_workload(self, runner, tmp_path):
        from hetsched import Workload, validate_workload
        path = tmp_path / "wl.json"
        res = runner.invoke(main, ["gen-workload", "--model", "gin",
                                   "--dataset", "S3", "-o", str(path)])
        assert res.exit_code == 0
        wl = Workload.from_dict(json.loads(path.read_text()))
        assert validate_workload(wl) == []

    def test_rejects_workload_flag(self, runner):
        res = runner.invoke(main, ["gen-workload", "-w", "x.json"])
        assert res.exit_code == 2
