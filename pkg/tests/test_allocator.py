"""Tests for the learned and static allocators."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_input, make_profile
from faas_rightsizer.allocator import Allocator, StaticAllocator, build_allocator
from faas_rightsizer.config_models import AllocatorSettings
from faas_rightsizer.errors import UnknownFunctionError
from faas_rightsizer.featurizer import featurize
from faas_rightsizer.models import Allocation, AllocationPolicy, InvocationOutcome
from faas_rightsizer.simcore import exec_time, max_vcpus_used, memory_footprint, oracle_min_vcpus

MB = 2 ** 20


def outcome(vcpus=8, memory_mb=1024, exec_s=5.0, slo_s=6.5, used=1.0, peak=100.0,
            oom=False, features=(1.0, 2.0)) -> InvocationOutcome:
    return InvocationOutcome(
        function="f", features=features, slo_s=slo_s,
        alloc=Allocation(vcpus=vcpus, memory_mb=memory_mb),
        exec_s=exec_s, e2e_s=exec_s, max_vcpus_used=used, peak_mem_mb=peak, oom_killed=oom,
    )


@pytest.fixture
def allocator():
    alloc = Allocator()
    alloc.register("f", 2)
    return alloc


class TestAllocate:
    """Test allocation decisions before and after the confidence thresholds."""

    def test_defaults_before_feedback(self, allocator):
        alloc = allocator.allocate("f", (1.0, 2.0), 5.0)
        assert (alloc.vcpus, alloc.memory_mb) == (16, 4096)
        assert not alloc.vcpu_from_model
        assert not alloc.mem_from_model

    def test_unknown_function(self, allocator):
        with pytest.raises(UnknownFunctionError):
            allocator.allocate("g", (1.0, 2.0), 5.0)

    def test_non_positive_slo(self, allocator):
        with pytest.raises(ValueError):
            allocator.allocate("f", (1.0, 2.0), 0.0)

    def test_vcpu_model_after_threshold(self, allocator):
        """vCPUs come from the model after 10 feedbacks, memory only after 20."""
        for _ in range(10):
            allocator.feedback(outcome())
        alloc = allocator.allocate("f", (1.0, 2.0), 6.5)
        assert alloc.vcpu_from_model
        assert not alloc.mem_from_model
        assert alloc.memory_mb == 4096

        for _ in range(10):
            allocator.feedback(outcome())
        alloc = allocator.allocate("f", (1.0, 2.0), 6.5)
        assert alloc.mem_from_model
        assert alloc.memory_mb == 128

    def test_register_idempotent(self, allocator):
        state = allocator.state("f")
        assert allocator.register("f", 2) is state


class TestSafeguard:
    """Test the memory safeguard against inputs larger than the prediction."""

    def test_input_larger_than_prediction(self, allocator):
        assert allocator.safeguard_memory(256, 1024 * MB) == 4096

    def test_prediction_holds_input(self, allocator):
        assert allocator.safeguard_memory(1024, 100 * MB) == 1024

    def test_equal_size_falls_back(self, allocator):
        assert allocator.safeguard_memory(128, 128 * MB) == 4096


class TestVcpuCostVector:
    """Test vCPU cost vectors."""

    def test_slack_removes_vcpus(self, allocator):
        cv = allocator.build_vcpu_cost_vector(outcome(vcpus=10, exec_s=5.0, slo_s=6.5, used=7.0))
        assert cv.target == 9
        assert (cv.cost(9), cv.cost(10), cv.cost(8)) == (1.0, 2.0, 3.0)

    def test_small_slack_keeps_class(self, allocator):
        cv = allocator.build_vcpu_cost_vector(outcome(vcpus=10, exec_s=6.0, slo_s=6.5, used=7.0))
        assert cv.target == 10

    def test_underused_violation(self, allocator):
        cv = allocator.build_vcpu_cost_vector(outcome(vcpus=8, exec_s=9.0, slo_s=7.0, used=4.0))
        assert cv.target == 4

    def test_saturated_violation(self, allocator):
        cv = allocator.build_vcpu_cost_vector(outcome(vcpus=8, exec_s=8.1, slo_s=7.0, used=7.8))
        assert cv.target == 11

    def test_saturated_single_vcpu_escalates_one_step(self, allocator):
        """A violation on one fully used vCPU targets two, however large the deficit."""
        cv = allocator.build_vcpu_cost_vector(outcome(vcpus=1, exec_s=20.0, slo_s=7.0, used=1.0))
        assert cv.target == 2
        cv = allocator.build_vcpu_cost_vector(outcome(vcpus=1, exec_s=7.2, slo_s=7.0, used=1.0),
                                              mode="proportional")
        assert cv.target == 2

    def test_single_threaded_violation_on_two_vcpus(self, allocator):
        """A single-threaded invocation on two vCPUs is under-used, so it targets one."""
        cv = allocator.build_vcpu_cost_vector(outcome(vcpus=2, exec_s=20.0, slo_s=7.0, used=1.0))
        assert cv.target == 1

    def test_costs_follow_the_container_size(self, allocator):
        """After a warm_larger placement the vector is built from the size that ran."""
        o = InvocationOutcome(
            function="f", features=(1.0, 2.0), slo_s=6.5, alloc=Allocation(vcpus=4, memory_mb=512),
            container_vcpus=10, container_memory_mb=1024,
            exec_s=5.0, e2e_s=5.0, max_vcpus_used=7.0, peak_mem_mb=100.0,
        )
        assert (o.ran_vcpus, o.ran_memory_mb) == (10, 1024)
        assert allocator.build_vcpu_cost_vector(o).target == 9
        killed = o.model_copy(update={"oom_killed": True})
        assert allocator.build_memory_cost_vector(killed).target == 16

    def test_proportional_mode(self, allocator):
        met = allocator.build_vcpu_cost_vector(outcome(vcpus=10, exec_s=5.0, slo_s=10.0, used=7.0),
                                               mode="proportional")
        assert met.target == 5
        violated = allocator.build_vcpu_cost_vector(outcome(vcpus=8, exec_s=8.75, slo_s=7.0, used=7.8),
                                                    mode="proportional")
        assert violated.target == 10

    def test_oom_has_no_vcpu_vector(self, allocator):
        assert allocator.build_vcpu_cost_vector(outcome(oom=True)) is None

    def test_clamped_to_c_max(self, allocator):
        cv = allocator.build_vcpu_cost_vector(outcome(vcpus=32, exec_s=60.0, slo_s=7.0, used=31.0))
        assert cv.target == 32

    @settings(max_examples=1000)
    @given(
        vcpus=st.integers(min_value=1, max_value=32),
        used_fraction=st.floats(min_value=0.01, max_value=1.0),
        slo_s=st.floats(min_value=0.1, max_value=100.0),
        exec_s=st.floats(min_value=0.01, max_value=200.0),
        mode=st.sampled_from(["absolute", "proportional"]),
    )
    def test_cost_vector_properties(self, vcpus, used_fraction, slo_s, exec_s, mode):
        """Target is the argmin, underprediction costs more, no escalation past used vCPUs."""
        allocator = Allocator()
        used = max(0.1, round(vcpus * used_fraction, 1))
        used = min(used, float(vcpus))
        cv = allocator.build_vcpu_cost_vector(
            outcome(vcpus=vcpus, exec_s=exec_s, slo_s=slo_s, used=used), mode=mode)

        t = cv.target
        assert 1 <= t <= 32
        assert cv.cost(t) == 1.0
        for d in range(1, 32):
            if t - d >= 1 and t + d <= 32:
                assert cv.cost(t - d) > cv.cost(t + d)

        if exec_s <= slo_s:
            assert t <= vcpus
        elif used < 0.9 * vcpus:
            assert t <= max(1, math.ceil(used - 1e-9))
        elif vcpus == 1:
            assert t == 2
        else:
            assert t >= min(32, math.ceil(used - 1e-9) + 1)


class TestMemoryCostVector:
    """Test memory cost vectors."""

    def test_peak_class(self, allocator):
        assert allocator.build_memory_cost_vector(outcome(peak=900.0)).target == 8

    def test_exact_class_boundary(self, allocator):
        assert allocator.build_memory_cost_vector(outcome(peak=128.0)).target == 1

    def test_oom_doubles(self, allocator):
        cv = allocator.build_memory_cost_vector(outcome(memory_mb=1024, peak=1024.0, oom=True))
        assert cv.target == 16

    def test_heavier_underprediction_penalty(self, allocator):
        cv = allocator.build_memory_cost_vector(outcome(peak=900.0))
        assert cv.cost(7) == 5.0
        assert cv.cost(9) == 2.0


class TestFeedback:
    """Test learner updates from outcomes."""

    def test_oom_skips_vcpu_model(self, allocator):
        allocator.feedback(outcome(memory_mb=512, peak=512.0, oom=True))
        state = allocator.state("f")
        assert state.completed_feedbacks == 1
        assert state.vcpu_model.updates_seen == 0
        assert state.mem_model.updates_seen == 1

    def test_regular_feedback_updates_both(self, allocator):
        allocator.feedback(outcome())
        state = allocator.state("f")
        assert state.vcpu_model.updates_seen == 1
        assert state.mem_model.updates_seen == 1

    def test_thresholds_follow_settings(self):
        settings = AllocatorSettings(vcpu_conf_threshold=2, mem_conf_threshold=4)
        allocator = Allocator(settings)
        state = allocator.register("f", 2)
        for _ in range(2):
            allocator.feedback(outcome())
        assert state.vcpu_confident
        assert not state.mem_confident


def feedback_loop(allocator, profile, desc, slo_s, rounds):
    """Allocate, execute uncontended and feed back ``rounds`` times; returns the allocations."""
    features = featurize(desc)
    allocator.register(profile.name, len(features))
    footprint = memory_footprint(profile, desc)
    allocations = []
    for _ in range(rounds):
        alloc = allocator.allocate(profile.name, features, slo_s, desc.size_bytes)
        allocations.append(alloc)
        oom = footprint.kill_fraction(alloc.memory_mb) is not None
        allocator.feedback(InvocationOutcome(
            function=profile.name, features=features, slo_s=slo_s, alloc=alloc,
            exec_s=exec_time(profile, desc, alloc.vcpus), e2e_s=exec_time(profile, desc, alloc.vcpus),
            max_vcpus_used=max_vcpus_used(profile, alloc.vcpus),
            peak_mem_mb=min(footprint.reported_peak_mb, alloc.memory_mb) if oom else footprint.reported_peak_mb,
            oom_killed=oom, input_bytes=desc.size_bytes,
        ))
    return allocations


CONVERGENCE_CASES = [
    # (profile, input, slo_s)
    (make_profile("linpack", "matrix", work=120.0, p=1.0, k_sat=16), make_input("matrix"), 10.5),
    (make_profile("matmult", "matrix", work=80.0, p=1.0, k_sat=8), make_input("matrix"), 14.0),
    (make_profile("compress", "matrix", work=150.0, p=0.95, k_sat=12), make_input("matrix"), 27.125),
    (make_profile("imageproc", "image", work=10.0), make_input("image"), 14.0),
    (make_profile("rowcount", "csv", work=20.0), make_input("csv"), 28.0),
    (make_profile("sentiment", "json", work=30.0, mem_base_mb=256.0, mem_per_byte=2.5e-5),
     make_input("json", size_bytes=40_000_000), 42.0),
]


class TestConvergence:
    """Test the closed loop against the brute-force oracle."""

    @pytest.mark.parametrize("profile,desc,slo_s", CONVERGENCE_CASES, ids=lambda c: getattr(c, "name", None))
    def test_converges_near_oracle(self, profile, desc, slo_s):
        """After threshold + 30 feedbacks vCPUs and memory are within one class of the oracle."""
        allocator = Allocator()
        rounds = allocator.settings.vcpu_conf_threshold + 30
        feedback_loop(allocator, profile, desc, slo_s, rounds)
        final = allocator.allocate(profile.name, featurize(desc), slo_s, desc.size_bytes)

        assert final.vcpu_from_model and final.mem_from_model
        assert abs(final.vcpus - oracle_min_vcpus(profile, desc, slo_s)) <= 1
        mem_class = math.ceil(memory_footprint(profile, desc).reported_peak_mb / 128)
        assert abs(final.memory_class - mem_class) <= 1

    def test_single_threaded_infeasible_slo_stays_small(self):
        """A single-threaded function missing its SLO is not given more vCPUs."""
        profile = make_profile("sentiment", "json", work=10.0)
        desc = make_input("json")
        allocator = Allocator()
        feedback_loop(allocator, profile, desc, 8.0, 20)
        later = feedback_loop(allocator, profile, desc, 8.0, 100)
        assert max(a.vcpus for a in later) <= 2


class TestStaticAllocator:
    """Test the fixed-size baselines."""

    def test_presets(self):
        medium = StaticAllocator.from_policy("static-medium")
        large = StaticAllocator.from_policy(AllocationPolicy.STATIC_LARGE)
        assert medium.allocate("f", (), 1.0).size == (12, 3072)
        assert large.allocate("f", (), 1.0).size == (20, 5120)

    def test_ignores_feedback(self):
        medium = StaticAllocator.from_policy("static_medium")
        medium.register("f", 2)
        medium.feedback(outcome())
        assert medium.allocate("f", (1.0, 2.0), 1.0).size == (12, 3072)

    def test_learned_is_not_static(self):
        with pytest.raises(ValueError):
            StaticAllocator.from_policy("learned")

    def test_build_allocator(self):
        assert isinstance(build_allocator("learned"), Allocator)
        assert isinstance(build_allocator("static-large"), StaticAllocator)
