"""Discrete-event simulation of invocations on a worker cluster.

Performance model: an invocation of a function with parallel fraction ``p``
on ``k`` vCPUs needs ``W(s) * ((1 - p) + p / min(k, k_sat))`` seconds of
uncontended execution. While executing it occupies ``1 + p * (k_eff - 1)``
cores of its worker; when the busy width on a worker exceeds its physical
cores every invocation there slows down by the ratio. Memory grows linearly
from ``mem_base_mb`` to its peak over the invocation's progress; crossing
the allocation kills the invocation at the next utilization sample.
"""

import heapq
import itertools
import logging
import math
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterable, Mapping, Optional, Union

import numpy as np

from .allocator import Allocator, StaticAllocator, build_allocator
from .catalog import Catalog
from .config_models import RunConfig
from .constants import Defaults
from .errors import CapacityExceededError, InvariantViolation, SimulationError, WorkloadError
from .featurizer import InputDescriptor, extraction_latency, featurize
from .models import (
    Allocation, FunctionProfile, InvocationOutcome, InvocationRecord, PlacementKind,
)
from .scheduler import Container, Placement, Scheduler

logger = logging.getLogger(__name__)

_EPS = 1e-9


# Performance model

def effective_vcpus(profile: FunctionProfile, vcpus: int) -> int:
    """vCPUs the function can actually exploit."""
    return min(vcpus, profile.k_sat)


def parallel_width(profile: FunctionProfile, vcpus: int) -> float:
    """Average number of cores an executing invocation keeps busy."""
    return 1.0 + profile.parallel_fraction * (effective_vcpus(profile, vcpus) - 1)


def max_vcpus_used(profile: FunctionProfile, vcpus: int) -> float:
    """Reported peak vCPU utilization, to one decimal."""
    return round(parallel_width(profile, vcpus), 1)


def exec_time(profile: FunctionProfile, desc: InputDescriptor, vcpus: int,
              contention_factor: float = 1.0) -> float:
    """Execution time in seconds of one invocation on ``vcpus`` vCPUs."""
    if vcpus < 1:
        raise ValueError(f"vcpus must be at least 1, got {vcpus}")
    if contention_factor < 1:
        raise ValueError(f"contention_factor must be at least 1, got {contention_factor}")
    p = profile.parallel_fraction
    work = profile.work(desc.attr(profile.scale_attr))
    return work * ((1.0 - p) + p / effective_vcpus(profile, vcpus)) * contention_factor


def contention_factor(demand: float, capacity: float) -> float:
    """Slowdown of every executing invocation on a worker with ``demand`` busy cores."""
    if capacity <= 0:
        raise ValueError(f"capacity must be positive, got {capacity}")
    return max(1.0, demand / capacity)


@dataclass(frozen=True)
class MemoryFootprint:
    """Linear memory ramp of one invocation."""
    base_mb: float
    peak_mb: float

    @property
    def reported_peak_mb(self) -> int:
        """Peak as a utilization sample reports it (whole MB)."""
        return max(1, math.ceil(self.peak_mb - _EPS))

    def kill_fraction(self, alloc_mb: float) -> Optional[float]:
        """Fraction of progress at which the ramp crosses ``alloc_mb``; None if it never does."""
        if self.peak_mb <= alloc_mb:
            return None
        if self.base_mb >= alloc_mb:
            return 0.0
        return (alloc_mb - self.base_mb) / (self.peak_mb - self.base_mb)


def memory_footprint(profile: FunctionProfile, desc: InputDescriptor) -> MemoryFootprint:
    return MemoryFootprint(profile.mem_base_mb, profile.mem_base_mb + profile.mem_per_byte * desc.size_bytes)


def oracle_min_vcpus(profile: FunctionProfile, desc: InputDescriptor, slo_s: float,
                     c_max: int = Defaults.C_MAX) -> Optional[int]:
    """Fewest vCPUs meeting ``slo_s`` without contention; None when infeasible."""
    if slo_s <= 0:
        raise ValueError(f"slo_s must be positive, got {slo_s}")
    for k in range(1, c_max + 1):
        if exec_time(profile, desc, k) <= slo_s:
            return k
    return None


def oracle_min_mem_class(profile: FunctionProfile, desc: InputDescriptor, class_mb: int = 128) -> int:
    """Smallest memory class holding the input's peak footprint."""
    return max(1, math.ceil(memory_footprint(profile, desc).reported_peak_mb / class_mb))


# Event loop

class EventKind(str, Enum):
    ARRIVAL = "arrival"
    DISPATCH = "dispatch"
    EXEC_START = "exec_start"
    CONTAINER_READY = "container_ready"
    EXEC_COMPLETE = "exec_complete"
    OOM_KILL = "oom_kill"
    TIMEOUT = "timeout"
    EVICT_SWEEP = "evict_sweep"


@dataclass(order=True)
class SimEvent:
    """Queue entry; ordered by (time, sequence number)."""
    time: float
    seq: int
    kind: EventKind = field(compare=False)
    payload: Any = field(compare=False, default=None)
    version: int = field(compare=False, default=0)


@dataclass(eq=False)
class _Invocation:
    """Book-keeping of one invocation while it is in flight."""
    record: InvocationRecord
    profile: FunctionProfile
    desc: InputDescriptor
    features: tuple[float, ...]
    dispatch_time: float = 0.0
    alloc: Optional[Allocation] = None
    container: Optional[Container] = None
    exec_start: float = 0.0
    nominal_s: float = 0.0
    width: float = 1.0
    kill_fraction: Optional[float] = None
    done_s: float = 0.0
    last_update: float = 0.0
    factor: float = 1.0
    version: int = 0
    finished: bool = False


@dataclass
class SimulationResult:
    """Records of one run plus the state needed to inspect it."""
    records: list[InvocationRecord]
    metadata: dict[str, str]
    allocator: Union[Allocator, StaticAllocator]
    scheduler: Scheduler
    events_processed: int = 0
    peak_worker_vcpus: int = 0
    peak_worker_memory_mb: int = 0
    # invocation id -> (nominal seconds, integrated seconds) of completed invocations
    work_integrals: dict[int, tuple[float, float]] = field(default_factory=dict)


class Simulator:
    """Single-threaded event loop for one run."""

    def __init__(self, config: RunConfig, catalog: Catalog,
                 slo_table: Optional[Mapping[tuple[str, str], float]] = None,
                 allocator: Optional[Union[Allocator, StaticAllocator]] = None):
        self.config = config
        self.catalog = catalog
        if slo_table is None:
            from .workload import build_slo_table
            slo_table = build_slo_table(catalog, config.slo_multiplier, config.c_max).slos
        self.slo_table = slo_table
        self.allocator = allocator or build_allocator(config.allocation_policy, config.allocator_settings())
        # routing stream, separate from the workload stream
        self.rng = np.random.default_rng([config.seed, 1])
        self.scheduler = Scheduler(
            num_workers=config.num_workers,
            vcpu_capacity=config.user_cpu,
            memory_capacity_mb=config.worker_memory_mb,
            keepalive_s=config.keepalive_s,
            policy=config.scheduler_policy,
            rng=self.rng,
        )
        self.sample_s = config.sampling_interval_ms / 1000.0
        self.clock = 0.0
        self._queue: list[SimEvent] = []
        self._seq = itertools.count()
        self._pending: deque[_Invocation] = deque()
        self._running: list[dict[int, _Invocation]] = [dict() for _ in range(config.num_workers)]
        self._features: dict[tuple[str, str], tuple[float, ...]] = {}
        self._records: list[InvocationRecord] = []
        self._work_integrals: dict[int, tuple[float, float]] = {}
        self._result: Optional[SimulationResult] = None

        for function in sorted(catalog.profiles):
            dim = len(featurize(next(iter(catalog.inputs[function].values()))))
            self.allocator.register(function, dim)

    def _push(self, time: float, kind: EventKind, payload: Any = None, version: int = 0) -> None:
        heapq.heappush(self._queue, SimEvent(time, next(self._seq), kind, payload, version))

    def _features_of(self, function: str, desc: InputDescriptor) -> tuple[float, ...]:
        key = (function, desc.input_id)
        if key not in self._features:
            self._features[key] = featurize(desc)
        return self._features[key]

    def run(self, arrivals: Iterable[tuple[float, str, str]]) -> SimulationResult:
        """Simulate every arrival to completion.

        Args:
            arrivals: time-sorted (t_s, function, input_id) tuples
        """
        if self._result is not None:
            raise SimulationError("Simulator instances run once")

        last_t = 0.0
        for invocation_id, (t_s, function, input_id) in enumerate(arrivals):
            if t_s < 0 or t_s < last_t:
                raise WorkloadError(f"Arrival {invocation_id} at t={t_s} is negative or out of order")
            last_t = t_s
            profile = self.catalog.profile(function)
            desc = self.catalog.input(function, input_id)
            record = InvocationRecord(invocation_id=invocation_id, function=function,
                                      input_id=input_id, arrival_s=float(t_s))
            record.slo_s = float(self.slo_table[(function, input_id)])
            self._records.append(record)
            inv = _Invocation(record, profile, desc, self._features_of(function, desc))
            self._push(float(t_s), EventKind.ARRIVAL, inv)

        logger.info(f"Simulating {len(self._records)} invocations on {self.config.num_workers} workers "
                    f"({self.config.scheduler_policy.value}, {self.config.allocation_policy.value})")

        result = SimulationResult(records=self._records, metadata=self._metadata(),
                                  allocator=self.allocator, scheduler=self.scheduler)
        if self._queue:
            self._push(self.config.sweep_interval_s, EventKind.EVICT_SWEEP)

        while self._queue:
            event = heapq.heappop(self._queue)
            if event.time < self.clock - _EPS:
                raise InvariantViolation(f"Event at t={event.time} precedes clock {self.clock}")
            self.clock = max(self.clock, event.time)
            self._dispatch_event(event)
            result.events_processed += 1

            for worker in self.scheduler.workers:
                result.peak_worker_vcpus = max(result.peak_worker_vcpus, worker.active_vcpus)
                result.peak_worker_memory_mb = max(result.peak_worker_memory_mb, worker.active_memory_mb)
            if self.config.audit and not self.scheduler.audit():
                raise InvariantViolation(f"Worker load accounting broken at t={self.clock}")

        if self._pending:
            raise SimulationError(f"{len(self._pending)} invocations still queued when the run ended")

        result.work_integrals = self._work_integrals
        self._result = result
        logger.info(f"Simulation finished at t={self.clock:.3f}s after {result.events_processed} events")
        return result

    def _metadata(self) -> dict[str, str]:
        c = self.config
        return {
            "seed": str(c.seed),
            "scheduler_policy": c.scheduler_policy.value,
            "allocation_policy": c.allocation_policy.value,
            "cost_mode": c.cost_mode.value,
            "num_workers": str(c.num_workers),
            "user_cpu": str(c.user_cpu),
            "worker_cores": str(c.worker_cores),
            "target_rps": repr(c.target_rps),
            "slo_multiplier": repr(c.slo_multiplier),
            "invocations": str(len(self._records)),
        }

    def _dispatch_event(self, event: SimEvent) -> None:
        kind = event.kind
        if kind is EventKind.EVICT_SWEEP:
            self.scheduler.evict_idle(self.clock)
            if self._queue:
                self._push(self.clock + self.config.sweep_interval_s, EventKind.EVICT_SWEEP)
            return
        if kind is EventKind.CONTAINER_READY:
            self.scheduler.on_ready(event.payload, self.clock)
            return

        inv: _Invocation = event.payload
        if kind is EventKind.ARRIVAL:
            latency_s = extraction_latency(inv.desc) / 1000.0
            inv.record.featurize_s = latency_s
            self._push(self.clock + latency_s, EventKind.DISPATCH, inv)
        elif kind is EventKind.DISPATCH:
            self._on_dispatch(inv)
        elif kind is EventKind.EXEC_START:
            self._start_exec(inv)
        elif inv.finished:
            return
        elif kind is EventKind.TIMEOUT:
            self._on_kill(inv, timed_out=True)
        elif event.version != inv.version:
            # superseded by a contention change
            return
        elif kind is EventKind.EXEC_COMPLETE:
            self._on_complete(inv)
        elif kind is EventKind.OOM_KILL:
            self._on_kill(inv, timed_out=False)

    def _on_dispatch(self, inv: _Invocation) -> None:
        record = inv.record
        inv.dispatch_time = self.clock
        inv.alloc = self.allocator.allocate(record.function, inv.features, record.slo_s, inv.desc.size_bytes)
        record.vcpu_from_model = inv.alloc.vcpu_from_model
        record.mem_from_model = inv.alloc.mem_from_model
        record.requested_vcpus = record.vcpus = inv.alloc.vcpus
        record.requested_memory_mb = record.memory_mb = inv.alloc.memory_mb

        try:
            placement = self.scheduler.route(record.function, inv.alloc, self.clock)
        except CapacityExceededError as e:
            logger.warning(f"Invocation {record.invocation_id} rejected: {e}")
            record.placement = PlacementKind.REJECTED.value
            inv.finished = True
            return

        if placement.queued:
            record.worker = placement.worker
            self._pending.append(inv)
            return
        self._place(inv, placement)

    def _place(self, inv: _Invocation, placement: Placement) -> None:
        record = inv.record
        container = placement.container
        inv.container = container
        record.placement = placement.kind.value
        record.worker = placement.worker
        record.queue_s = self.clock - inv.dispatch_time
        # the invocation runs with the size of the container it landed in
        record.vcpus = container.vcpus
        record.memory_mb = container.memory_mb

        if placement.background_launch is not None:
            vcpus, memory_mb, worker = placement.background_launch
            launched = self.scheduler.launch_background(record.function, vcpus, memory_mb, worker)
            self._push(self.clock + inv.profile.cold_start_ms / 1000.0, EventKind.CONTAINER_READY, launched)

        if placement.kind is PlacementKind.COLD:
            record.cold_start_s = inv.profile.cold_start_ms / 1000.0
            self._push(self.clock + record.cold_start_s, EventKind.EXEC_START, inv)
        else:
            self._start_exec(inv)

    def _start_exec(self, inv: _Invocation) -> None:
        container = inv.container
        inv.exec_start = self.clock
        inv.last_update = self.clock
        inv.nominal_s = exec_time(inv.profile, inv.desc, container.vcpus)
        inv.width = parallel_width(inv.profile, container.vcpus)
        footprint = memory_footprint(inv.profile, inv.desc)
        inv.kill_fraction = footprint.kill_fraction(container.memory_mb)
        inv.record.max_vcpus_used = max_vcpus_used(inv.profile, container.vcpus)
        inv.record.peak_mem_mb = float(footprint.reported_peak_mb)

        self._running[container.worker][inv.record.invocation_id] = inv
        self._rebalance(container.worker, changed=inv)
        self._push(self.clock + inv.profile.timeout_s, EventKind.TIMEOUT, inv)

    def _rebalance(self, worker: int, changed: Optional[_Invocation] = None) -> None:
        """Integrate progress so far and reschedule finishes at the worker's new slowdown."""
        running = self._running[worker]
        demand = sum(inv.width for inv in running.values())
        factor = contention_factor(demand, self.config.worker_cores)
        for inv in running.values():
            inv.done_s += (self.clock - inv.last_update) / inv.factor
            inv.last_update = self.clock
            if inv is changed or inv.factor != factor:
                inv.factor = factor
                self._schedule_finish(inv)

    def _schedule_finish(self, inv: _Invocation) -> None:
        inv.version += 1
        complete_at = self.clock + max(0.0, inv.nominal_s - inv.done_s) * inv.factor
        if inv.kill_fraction is None:
            self._push(complete_at, EventKind.EXEC_COMPLETE, inv, inv.version)
            return
        # the kill is observed at the first utilization sample after the crossing,
        # and never later than the moment the invocation would have finished
        cross_at = self.clock + max(0.0, inv.kill_fraction * inv.nominal_s - inv.done_s) * inv.factor
        samples = max(1, math.ceil((cross_at - inv.exec_start) / self.sample_s - _EPS))
        kill_at = min(inv.exec_start + samples * self.sample_s, complete_at)
        self._push(kill_at, EventKind.OOM_KILL, inv, inv.version)

    def _finish(self, inv: _Invocation) -> None:
        """Stop the invocation's execution and settle its worker."""
        inv.finished = True
        worker = inv.container.worker
        inv.done_s += (self.clock - inv.last_update) / inv.factor
        inv.last_update = self.clock
        del self._running[worker][inv.record.invocation_id]
        self._rebalance(worker)

    def _on_complete(self, inv: _Invocation) -> None:
        self._finish(inv)
        self._work_integrals[inv.record.invocation_id] = (inv.nominal_s, inv.done_s)
        record = inv.record
        record.exec_s = self.clock - inv.exec_start
        record.e2e_s = self.clock - record.arrival_s
        record.slo_met = record.e2e_s <= record.slo_s
        self.scheduler.on_complete(inv.container, self.clock)
        self.allocator.feedback(self._outcome(inv))
        self._drain_pending()

    def _on_kill(self, inv: _Invocation, timed_out: bool) -> None:
        self._finish(inv)
        record = inv.record
        record.e2e_s = self.clock - record.arrival_s
        record.slo_met = False
        self.scheduler.on_kill(inv.container)
        if timed_out:
            record.timed_out = True
            record.exec_s = inv.profile.timeout_s
            logger.debug(f"Invocation {record.invocation_id} timed out")
        else:
            record.oom_killed = True
            record.exec_s = self.clock - inv.exec_start
            # the sampler only sees the footprint up to the kill
            record.peak_mem_mb = float(min(record.peak_mem_mb, record.memory_mb))
            self.allocator.feedback(self._outcome(inv))
            logger.debug(f"Invocation {record.invocation_id} OOM-killed at {record.memory_mb} MB")
        self._drain_pending()

    def _outcome(self, inv: _Invocation) -> InvocationOutcome:
        record = inv.record
        return InvocationOutcome(
            function=record.function,
            features=inv.features,
            slo_s=record.slo_s,
            alloc=inv.alloc,
            container_vcpus=record.vcpus,
            container_memory_mb=record.memory_mb,
            exec_s=record.exec_s,
            e2e_s=record.e2e_s,
            max_vcpus_used=record.max_vcpus_used,
            peak_mem_mb=record.peak_mem_mb,
            oom_killed=record.oom_killed,
            input_bytes=inv.desc.size_bytes,
        )

    def _drain_pending(self) -> None:
        """Place queued invocations in arrival order while capacity allows."""
        while self._pending:
            inv = self._pending[0]
            placement = self.scheduler.try_place(inv.record.function, inv.alloc, self.clock)
            if placement is None:
                return
            self._pending.popleft()
            self._place(inv, placement)


def run(config: RunConfig, catalog: Catalog, arrivals: Iterable[tuple[float, str, str]],
        slo_table: Optional[Mapping[tuple[str, str], float]] = None) -> SimulationResult:
    """Run one simulation of ``arrivals`` under ``config``."""
    return Simulator(config, catalog, slo_table).run(arrivals)
