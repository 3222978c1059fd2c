"""End-to-end comparisons between policies on small controlled workloads."""

import pytest

from conftest import make_catalog, make_input, make_profile
from faas_rightsizer.allocator import StaticAllocator
from faas_rightsizer.config_models import RunConfig
from faas_rightsizer.metrics import summarize
from faas_rightsizer.simcore import Simulator

# learning rate 1/4 over four unit json features: every prediction equals the last target
EXACT_FOLLOW = dict(vcpu_conf_threshold=0, mem_conf_threshold=0, learning_rate=0.25)


def run_records(catalog, arrivals, slos=None, allocator=None, **config):
    config.setdefault("audit", True)
    sim = Simulator(RunConfig(**config), catalog, slos, allocator=allocator)
    return sim.run(arrivals).records


def contended_transcoder():
    """exec(k) = 3 + 27/k seconds, up to 32 useful vCPUs."""
    profile = make_profile(name="transcode", input_type="json", work=30.0, p=0.9, k_sat=32)
    return make_catalog((profile, [make_input("json")]))


class TestAcceptance:
    """Test the orderings the allocator and scheduler are expected to produce."""

    def test_absolute_beats_proportional_under_contention(self):
        """On a 16-core worker the absolute cost function reaches a feasible size sooner."""
        catalog = contended_transcoder()
        arrivals = [(60.0 * i, "transcode", "in") for i in range(20)]
        slos = {("transcode", "in"): 6.2}
        reports = {}
        for mode in ("absolute", "proportional"):
            records = run_records(catalog, arrivals, slos, cost_mode=mode, worker_cores=16, **EXACT_FOLLOW)
            reports[mode] = summarize(records)
        assert reports["absolute"].slo_violation_pct == pytest.approx(10.0)
        assert reports["proportional"].slo_violation_pct == pytest.approx(25.0)

    def test_violations_fall_as_slos_loosen(self):
        catalog = make_catalog((make_profile(name="transcode", input_type="json", work=30.0, p=0.9,
                                             k_sat=32, cold_start_ms=2500.0), [make_input("json")]))
        arrivals = [(60.0 * i, "transcode", "in") for i in range(30)]
        rates = []
        for multiplier in (1.2, 1.4, 1.6, 1.8):
            records = run_records(catalog, arrivals, slo_multiplier=multiplier, **EXACT_FOLLOW)
            assert records[0].slo_s == pytest.approx(multiplier * 4.637868, rel=1e-6)
            rates.append(summarize(records).slo_violation_pct)
        assert all(a >= b for a, b in zip(rates, rates[1:]))
        assert rates[0] > rates[-1]

    def test_higher_memory_threshold_avoids_oom_kills(self):
        """A large input predicted from too few samples is killed; waiting longer avoids it."""
        heavy = make_profile(name="heavy", input_type="json", work=1.0, mem_per_byte=4e-5)
        light = make_profile(name="light", input_type="json", work=1.0)
        small = make_input("json", input_id="small", size_bytes=0, attrs={"outer_length": 0})
        large = make_input("json", input_id="large", size_bytes=50_000_000, attrs={"outer_length": 4000})
        catalog = make_catalog((heavy, [small, large]), (light, [make_input("json")]))
        arrivals = []
        for i in range(3000):
            if i % 2:
                arrivals.append((2.0 * i, "light", "in"))
            else:
                j = i // 2
                arrivals.append((2.0 * i, "heavy", "small" if j < 4 or j % 2 else "large"))
        slos = {("heavy", "small"): 10.0, ("heavy", "large"): 10.0, ("light", "in"): 10.0}

        rates = {}
        for threshold in (4, 20):
            records = run_records(catalog, arrivals, slos, num_workers=2, mem_conf_threshold=threshold)
            assert len(records) == 3000
            rates[threshold] = summarize(records).oom_killed_pct
        assert rates[20] < 1.0
        assert rates[4] > rates[20]

    def test_hashing_keeps_containers_warm(self):
        """Spreading by memory pressure lands functions on workers without their containers."""
        profiles = [make_profile(name=f"fn{n}", work=1.0) for n in range(4)]
        catalog = make_catalog(*((p, [make_input()]) for p in profiles))
        arrivals = []
        for burst in range(8):
            for n in range(4):
                arrivals.append((60.0 * burst, f"fn{(burst + n) % 4}", "in"))
        slos = {(p.name, "in"): 5.0 for p in profiles}

        cold = {}
        for policy in ("hashing", "memory_centric_baseline"):
            records = run_records(catalog, arrivals, slos, allocator=StaticAllocator(2, 256),
                                  num_workers=4, scheduler_policy=policy)
            cold[policy] = summarize(records).cold_start_pct
        assert cold["memory_centric_baseline"] == pytest.approx(50.0)
        assert cold["hashing"] <= 0.6 * cold["memory_centric_baseline"]

    def test_packing_overloads_one_worker(self):
        profiles = [make_profile(name=f"fn{n}", work=120.0, p=1.0, k_sat=16) for n in range(4)]
        catalog = make_catalog(*((p, [make_input()]) for p in profiles))
        arrivals = [(60.0 * wave, p.name, "in") for wave in range(5) for p in profiles]
        slos = {(p.name, "in"): 12.0 for p in profiles}

        violations = {}
        for policy in ("hashing", "packing"):
            records = run_records(catalog, arrivals, slos, allocator=StaticAllocator(12, 3072),
                                  num_workers=4, worker_cores=36, scheduler_policy=policy)
            violations[policy] = summarize(records).slo_violation_pct
        assert violations["packing"] == 100.0
        assert violations["hashing"] <= violations["packing"]

    def test_oversubscription_causes_timeouts(self):
        """Admitting more busy vCPUs than cores slows every invocation past its timeout."""
        profile = make_profile(name="par", work=100.0, p=1.0, k_sat=16, timeout_s=12.0, cold_start_ms=0.0)
        catalog = make_catalog((profile, [make_input()]))
        arrivals = [(0.0, "par", "in")] * 13
        rates = []
        for user_cpu in (90, 110, 130):
            records = run_records(catalog, arrivals, {("par", "in"): 20.0}, allocator=StaticAllocator(10, 512),
                                  num_workers=1, worker_cores=90, user_cpu=user_cpu)
            rates.append(summarize(records).timeout_pct)
        assert rates[0] == 0.0
        assert all(a <= b for a, b in zip(rates, rates[1:]))
        assert rates[-1] == 100.0

    def test_runs_repeat_exactly(self):
        catalog = contended_transcoder()
        arrivals = [(60.0 * i, "transcode", "in") for i in range(20)]
        slos = {("transcode", "in"): 6.2}
        first = run_records(catalog, arrivals, slos, cost_mode="proportional", worker_cores=16, **EXACT_FOLLOW)
        second = run_records(catalog, arrivals, slos, cost_mode="proportional", worker_cores=16, **EXACT_FOLLOW)
        assert first == second
