"""Transfer-occupancy model and the ingest stagger rule."""
import pytest

from hetsched import (
    ConfigError,
    Endpoint,
    InterconnectSpec,
    TransferQuery,
    f_comm,
    stagger_offset,
)
from hetsched.comm import boundary_comm


def _ic(**over):
    base = dict(generation="custom", bandwidth_scale=1.0, p2p_enabled=True,
                cpu_route_factor=2.0, p2p_fixed_latency=0.0,
                cpu_fixed_latency=0.0)
    base.update(over)
    return InterconnectSpec(**base)


class TestFComm:
    def test_bottleneck_is_narrower_side(self):
        q = TransferQuery(bytes=1000, src=Endpoint(bandwidth=100.0, count=1),
                          dst=Endpoint(bandwidth=10.0, count=1))
        assert f_comm(q, _ic()) == pytest.approx(100.0)

    def test_aggregate_bandwidth_scales_with_count(self):
        q = TransferQuery(bytes=1000, src=Endpoint(bandwidth=100.0, count=1),
                          dst=Endpoint(bandwidth=10.0, count=5))
        assert f_comm(q, _ic()) == pytest.approx(20.0)

    def test_generation_scaling(self):
        q = TransferQuery(bytes=1000, src=Endpoint(bandwidth=10.0),
                          dst=Endpoint(bandwidth=10.0))
        assert f_comm(q, _ic(bandwidth_scale=2.0)) \
            == pytest.approx(f_comm(q, _ic()) / 2.0)

    def test_cpu_route_penalty(self):
        q = TransferQuery(bytes=1000, src=Endpoint(bandwidth=10.0),
                          dst=Endpoint(bandwidth=10.0))
        direct = f_comm(q, _ic())
        routed = f_comm(q, _ic(p2p_enabled=False, cpu_route_factor=2.0,
                               cpu_fixed_latency=5.0))
        assert routed == pytest.approx(2.0 * direct + 5.0)

    def test_fixed_latencies(self):
        q = TransferQuery(bytes=0, src=Endpoint(bandwidth=10.0),
                          dst=Endpoint(bandwidth=10.0))
        assert f_comm(q, _ic(p2p_fixed_latency=1e-5)) == pytest.approx(1e-5)

    def test_small_transfer_speedup_exceeds_asymptote(self):
        # With a fixed-latency gap, small transfers gain more than the
        # bandwidth ratio between the routed and direct paths.
        ic_p2p = _ic(p2p_fixed_latency=1e-5)
        ic_cpu = _ic(p2p_enabled=False, cpu_fixed_latency=5e-5)
        small = TransferQuery(bytes=256, src=Endpoint(bandwidth=1e9),
                              dst=Endpoint(bandwidth=1e9))
        big = TransferQuery(bytes=1 << 30, src=Endpoint(bandwidth=1e9),
                            dst=Endpoint(bandwidth=1e9))
        small_ratio = f_comm(small, ic_cpu) / f_comm(small, ic_p2p)
        big_ratio = f_comm(big, ic_cpu) / f_comm(big, ic_p2p)
        assert small_ratio > 2.0 > 1.0
        assert big_ratio == pytest.approx(2.0, rel=1e-3)
        assert small_ratio > big_ratio

    def test_validation(self):
        with pytest.raises(ConfigError):
            Endpoint(bandwidth=0.0)
        with pytest.raises(ConfigError):
            Endpoint(bandwidth=1.0, count=0)
        with pytest.raises(ConfigError):
            TransferQuery(bytes=-1, src=Endpoint(bandwidth=1.0),
                          dst=Endpoint(bandwidth=1.0))


class TestBoundaryComm:
    def test_host_endpoints(self, demo_sys):
        t = boundary_comm(1 << 20, None, None, demo_sys)
        bw = demo_sys.effective_host_bandwidth() \
            * demo_sys.interconnect.bandwidth_scale
        assert t == pytest.approx((1 << 20) / bw
                                  + demo_sys.interconnect.p2p_fixed_latency)

    def test_device_group(self, demo_sys):
        fpga = demo_sys.device("FPGA")
        t1 = boundary_comm(1 << 24, None, (fpga, 1), demo_sys)
        t3 = boundary_comm(1 << 24, None, (fpga, 3), demo_sys)
        assert t3 < t1  # wider destination group, host side still faster


class TestStagger:
    def test_single_stage_has_no_offset(self, demo_sys, demo_reg):
        from hetsched import Objective, build_preset, dype_schedule
        wl = build_preset("gcn", "OA")
        sched = dype_schedule(wl, demo_sys, demo_reg,
                              Objective.energy()).schedule
        assert len(sched.stages) == 1
        assert stagger_offset(sched, wl, demo_sys) == 0.0

    def test_multi_stage_offset_is_ingest_time(self, demo_sys, demo_reg):
        from hetsched import Objective, build_preset, dype_schedule
        wl = build_preset("gcn", "OA")
        sched = dype_schedule(wl, demo_sys, demo_reg,
                              Objective.perf()).schedule
        assert len(sched.stages) > 1
        first = sched.stages[0]
        dev = demo_sys.device(first.device_type)
        expect = boundary_comm(wl.input_bytes, None,
                               (dev, first.device_count), demo_sys)
        assert stagger_offset(sched, wl, demo_sys) == expect
