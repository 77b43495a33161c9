"""Domain-type invariants, serialization round-trips, and mnemonics."""
import pytest

from hetsched import (
    ConfigError,
    DeviceType,
    InterconnectSpec,
    Kernel,
    KernelKind,
    PipelineSchedule,
    Stage,
    SystemSpec,
    ValidationError,
    Workload,
    mnemonic,
    parse_mnemonic,
    validate_schedule,
    validate_workload,
)
from hetsched.core import GENERATION_SCALES, dump_json


def _wl_two_gemms():
    k1 = Kernel(KernelKind.GEMM, m=4, k=3, n=5, label="a")
    k2 = Kernel(KernelKind.GEMM, m=4, k=5, n=2, label="b")
    return Workload(kernels=(k1, k2), edge_bytes=(4 * 4 * 5,),
                    input_bytes=48, output_bytes=32,
                    replication_input=(False, False), name="wl")


class TestKernel:
    def test_spmm_requires_nnz(self):
        k = Kernel(KernelKind.SPMM, m=4, k=4, n=4, nnz=0)
        assert any("nnz" in e for e in k.local_errors())

    def test_nnz_capacity(self):
        k = Kernel(KernelKind.SPMM, m=2, k=2, n=4, nnz=5)
        assert any("capacity" in e for e in k.local_errors())

    def test_window_bounds(self):
        k = Kernel(KernelKind.WINDOW_ATTENTION, seq_len=16, window=32)
        assert k.local_errors()
        ok = Kernel(KernelKind.WINDOW_ATTENTION, seq_len=16, window=16)
        assert not ok.local_errors()

    def test_roundtrip(self):
        k = Kernel(KernelKind.SPMM, m=4, k=4, n=4, nnz=3, label="x")
        assert Kernel.from_dict(k.to_dict()) == k


class TestWorkload:
    def test_valid(self):
        assert validate_workload(_wl_two_gemms()) == []

    def test_bad_edge_bytes(self):
        wl = _wl_two_gemms()
        bad = Workload(kernels=wl.kernels, edge_bytes=(7,),
                       input_bytes=wl.input_bytes,
                       output_bytes=wl.output_bytes,
                       replication_input=wl.replication_input)
        assert any("edge_bytes" in e for e in validate_workload(bad))

    def test_dimension_chaining(self):
        k1 = Kernel(KernelKind.GEMM, m=4, k=3, n=5, label="a")
        k2 = Kernel(KernelKind.GEMM, m=9, k=9, n=2, label="b")
        wl = Workload(kernels=(k1, k2), edge_bytes=(80,), input_bytes=48,
                      output_bytes=32, replication_input=(False, False))
        assert any("chain" in e for e in validate_workload(wl))

    def test_duplicate_labels(self):
        k1 = Kernel(KernelKind.GEMM, m=4, k=3, n=5, label="a")
        k2 = Kernel(KernelKind.GEMM, m=4, k=5, n=2, label="a")
        wl = Workload(kernels=(k1, k2), edge_bytes=(80,), input_bytes=48,
                      output_bytes=32, replication_input=(False, False))
        assert any("unique" in e for e in validate_workload(wl))

    def test_boundary_bytes(self):
        wl = _wl_two_gemms()
        assert wl.boundary_bytes(0) == wl.input_bytes
        assert wl.boundary_bytes(1) == wl.edge_bytes[0]
        assert wl.boundary_bytes(2) == wl.output_bytes

    def test_roundtrip(self):
        wl = _wl_two_gemms()
        assert Workload.from_dict(wl.to_dict()) == wl


class TestDeviceAndSystem:
    def _dev(self, **over):
        base = dict(name="GPU", count_available=2, link_bandwidth=1e9,
                    p_static=40.0, p_dynamic={KernelKind.GEMM: 200.0},
                    eligible=frozenset({KernelKind.GEMM}),
                    perf_model_id="m")
        base.update(over)
        return DeviceType(**base)

    def test_validation(self):
        with pytest.raises(ConfigError):
            self._dev(link_bandwidth=0.0)
        with pytest.raises(ConfigError):
            self._dev(p_static=0.0)
        with pytest.raises(ConfigError):
            self._dev(count_available=-1)

    def test_letter(self):
        assert self._dev(name="fpga").letter == "F"

    def test_unique_names(self):
        with pytest.raises(ConfigError):
            SystemSpec(device_types=(self._dev(), self._dev()))

    def test_host_bandwidth_default(self):
        spec = SystemSpec(device_types=(
            self._dev(), self._dev(name="FPGA", link_bandwidth=5e9)))
        assert spec.effective_host_bandwidth() == 5e9
        pinned = SystemSpec(device_types=(self._dev(),), host_bandwidth=7e9)
        assert pinned.effective_host_bandwidth() == 7e9

    def test_roundtrip(self):
        spec = SystemSpec(device_types=(self._dev(),),
                          interconnect=InterconnectSpec.for_generation("pcie5"))
        back = SystemSpec.from_dict(spec.to_dict())
        assert back == spec

    def test_generation_scales(self):
        assert GENERATION_SCALES["pcie5"] == 2 * GENERATION_SCALES["pcie4"]
        assert GENERATION_SCALES["cxl3"] == 4 * GENERATION_SCALES["pcie4"]
        with pytest.raises(ConfigError):
            InterconnectSpec.for_generation("pcie9")


def _sched():
    s0 = Stage(start=0, end=1, device_type="FPGA", device_count=2,
               t_exec=3.0, t_comm_in=0.5, t_comm_out=0.25)
    s1 = Stage(start=1, end=2, device_type="GPU", device_count=1,
               t_exec=1.0, t_comm_in=0.25, t_comm_out=0.5)
    return PipelineSchedule(stages=(s0, s1), period=3.75, latency=5.5,
                            devices_used={"FPGA": 2, "GPU": 1},
                            energy_per_period=10.0)


class TestSchedule:
    def test_stage_time_order(self):
        s = _sched().stages[0]
        assert s.t_stage == (s.t_exec + s.t_comm_in) + s.t_comm_out

    def test_mnemonic(self):
        assert mnemonic(_sched()) == "2F1G"
        assert parse_mnemonic("2F1G") == [(2, "F"), (1, "G")]
        assert parse_mnemonic("12F3G") == [(12, "F"), (3, "G")]
        with pytest.raises(ValidationError):
            parse_mnemonic("F2")

    def test_validate_schedule(self, demo_sys):
        wl = Workload(
            kernels=(Kernel(KernelKind.GEMM, m=4, k=3, n=5, label="a"),
                     Kernel(KernelKind.GEMM, m=4, k=5, n=2, label="b")),
            edge_bytes=(80,), input_bytes=48, output_bytes=32,
            replication_input=(False, False))
        assert validate_schedule(_sched(), wl, demo_sys) == []

    def test_validate_rejects_overuse(self, demo_sys):
        bad = _sched()
        stages = (bad.stages[0],
                  Stage(start=1, end=2, device_type="GPU", device_count=9,
                        t_exec=1.0, t_comm_in=0.25, t_comm_out=0.5))
        bad = PipelineSchedule(stages=stages, period=10.75, latency=5.5,
                               devices_used={"FPGA": 2, "GPU": 9},
                               energy_per_period=10.0)
        wl = _wl_two_gemms()
        errs = validate_schedule(bad, wl, demo_sys)
        assert any("available" in e for e in errs)

    def test_roundtrip(self):
        s = _sched()
        assert PipelineSchedule.from_dict(s.to_dict()) == s

    def test_dump_json(self, tmp_path):
        out = tmp_path / "s.json"
        text = dump_json(_sched(), out)
        assert out.read_text() == text
        assert '"mnemonic": "2F1G"' in text
