"""Energy accounting: static share, dynamic accrual, transfer power."""
import pytest

from hetsched import (
    Objective,
    ValidationError,
    build_preset,
    dype_schedule,
    energy_per_inference,
    f_eng,
)
from hetsched.energy import efficiency, stage_dynamic_energy_per_device


@pytest.fixture(scope="module")
def oa_result(demo_sys, demo_reg):
    wl = build_preset("gcn", "OA")
    return wl, dype_schedule(wl, demo_sys, demo_reg, Objective.perf())


class TestFEng:
    def test_matches_searched_energy(self, demo_sys, demo_reg, oa_result):
        wl, result = oa_result
        sched = result.schedule
        assert f_eng(sched, sched.period, demo_sys, wl, demo_reg) \
            == sched.energy_per_period

    def test_period_below_peak_rejected(self, demo_sys, demo_reg, oa_result):
        wl, result = oa_result
        sched = result.schedule
        with pytest.raises(ValidationError):
            f_eng(sched, sched.period * 0.5, demo_sys, wl, demo_reg)

    def test_static_power_scales_with_period(self, demo_sys, demo_reg,
                                             oa_result):
        wl, result = oa_result
        sched = result.schedule
        e1 = f_eng(sched, sched.period, demo_sys, wl, demo_reg)
        e2 = f_eng(sched, 2 * sched.period, demo_sys, wl, demo_reg)
        p_static = sum(
            s.device_count * demo_sys.device(s.device_type).p_static
            for s in sched.stages)
        assert e2 - e1 == pytest.approx(p_static * sched.period)

    def test_unallocated_devices_draw_nothing(self, demo_sys, demo_reg):
        wl = build_preset("gcn", "OA")
        single = dype_schedule(wl, demo_sys, demo_reg,
                               Objective.energy()).schedule
        assert single.devices_used == {"FPGA": 1}
        p_static = demo_sys.device("FPGA").p_static
        dyn = single.energy_per_period - p_static * single.period
        # only the one FPGA contributes; dynamic part is positive and small
        assert 0.0 < dyn < single.energy_per_period

    def test_dynamic_energy_is_kind_weighted(self, demo_sys, demo_reg):
        wl = build_preset("gcn", "OA")
        dev = demo_sys.device("FPGA")
        e = stage_dynamic_energy_per_device(wl, 0, len(wl), dev, 1,
                                            demo_sys, demo_reg)
        manual = 0.0
        from hetsched.perf import kernel_unit_time
        for i, k in enumerate(wl.kernels):
            t = kernel_unit_time(k, wl.replication_input[i], dev, 1,
                                 demo_sys, demo_reg)
            manual += dev.p_dynamic[k.kind] * t
        assert e == manual


class TestConversions:
    def test_energy_per_inference(self):
        assert energy_per_inference(3.5) == 3.5

    def test_efficiency(self):
        assert efficiency(4.0) == 0.25
