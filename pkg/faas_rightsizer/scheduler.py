"""Container placement with decoupled vCPU and memory load tracking.

Routing priority for the hashing policy:

1. an idle container of exactly the allocated size (warm_exact);
2. the closest larger idle container of the function (warm_larger), with an
   exact-size container launched in the background;
3. a new exact-size container on the function's home server, or the next
   worker with capacity (cold);
4. when no worker has capacity, a random worker and a cluster-wide FIFO queue.

Idle and launching containers hold no vCPU or memory load. A cold container
is busy from the moment it is placed.
"""

import hashlib
import itertools
import logging
from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

import numpy as np

from .constants import Defaults
from .errors import CapacityExceededError, ContainerStateError
from .models import Allocation, ContainerState, PlacementKind, SchedulerPolicy

logger = logging.getLogger(__name__)

SizeKey = tuple[str, int, int]


def home_server(function: str, num_workers: int) -> int:
    """Worker index the function's cold starts prefer; stable across processes."""
    if num_workers < 1:
        raise ValueError(f"num_workers must be at least 1, got {num_workers}")
    digest = hashlib.blake2b(function.encode('utf-8'), digest_size=8).digest()
    return int.from_bytes(digest, 'big') % num_workers


@dataclass(eq=False)
class Container:
    """One function container on a worker."""
    container_id: int
    function: str
    vcpus: int
    memory_mb: int
    worker: int
    state: ContainerState
    idle_since: float = 0.0

    @property
    def key(self) -> SizeKey:
        return (self.function, self.vcpus, self.memory_mb)


@dataclass(eq=False)
class WorkerState:
    """Capacity, busy load and idle container pool of one worker."""
    worker_id: int
    vcpu_capacity: int
    memory_capacity_mb: int
    active_vcpus: int = 0
    active_memory_mb: int = 0
    # idle containers only, most recently idled last
    warm_pool: dict[SizeKey, list[Container]] = field(default_factory=dict)
    containers: dict[int, Container] = field(default_factory=dict)

    def has_capacity(self, vcpus: int, memory_mb: int) -> bool:
        return (self.active_vcpus + vcpus <= self.vcpu_capacity
                and self.active_memory_mb + memory_mb <= self.memory_capacity_mb)

    def could_ever_fit(self, vcpus: int, memory_mb: int) -> bool:
        return vcpus <= self.vcpu_capacity and memory_mb <= self.memory_capacity_mb

    def idle_containers(self) -> Iterable[Container]:
        for pool in self.warm_pool.values():
            yield from pool

    def busy_containers(self) -> Iterable[Container]:
        return (c for c in self.containers.values() if c.state is ContainerState.BUSY)


@dataclass
class Placement:
    """Where an invocation goes.

    ``container`` is None only for a queued cold start, which waits until
    some worker frees capacity.
    """
    kind: PlacementKind
    worker: int
    container: Optional[Container] = None
    background_launch: Optional[tuple[int, int, int]] = None  # (vcpus, memory_mb, worker)
    queued: bool = False


class Scheduler:
    """Routes allocations to containers on a cluster of identical workers."""

    def __init__(self, num_workers: int = Defaults.NUM_WORKERS,
                 vcpu_capacity: int = Defaults.USER_CPU,
                 memory_capacity_mb: int = Defaults.WORKER_MEMORY_MB,
                 keepalive_s: float = Defaults.KEEPALIVE_S,
                 policy: Union[SchedulerPolicy, str] = SchedulerPolicy.HASHING,
                 rng: Optional[np.random.Generator] = None):
        if num_workers < 1:
            raise ValueError(f"num_workers must be at least 1, got {num_workers}")
        self.workers = [WorkerState(i, vcpu_capacity, memory_capacity_mb) for i in range(num_workers)]
        self.keepalive_s = keepalive_s
        self.policy = SchedulerPolicy.from_string(policy)
        self.rng = rng if rng is not None else np.random.default_rng(Defaults.SEED)
        self._ids = itertools.count()
        self._homes: dict[str, int] = {}
        self.warm_larger_placements = 0
        self.background_launches = 0

    @property
    def num_workers(self) -> int:
        return len(self.workers)

    def home(self, function: str) -> int:
        if function not in self._homes:
            self._homes[function] = home_server(function, self.num_workers)
        return self._homes[function]

    def _circular(self, start: int) -> list[WorkerState]:
        n = self.num_workers
        return [self.workers[(start + i) % n] for i in range(n)]

    # Routing

    def route(self, function: str, alloc: Allocation, now: float = 0.0) -> Placement:
        """Place one invocation with the configured policy.

        Raises:
            CapacityExceededError: no worker could ever hold the allocation.
        """
        self._check_fits(alloc)
        placement = self.try_place(function, alloc, now)
        if placement is not None:
            return placement
        worker = int(self.rng.integers(self.num_workers))
        logger.debug(f"No capacity for {function} {alloc.size}; queued with worker {worker}")
        return Placement(kind=PlacementKind.COLD, worker=worker, queued=True)

    def try_place(self, function: str, alloc: Allocation, now: float = 0.0) -> Optional[Placement]:
        """Place without queueing; None when no worker has capacity."""
        if self.policy is SchedulerPolicy.HASHING:
            return self._place_spread(function, alloc, self._circular(self.home(function)))
        if self.policy is SchedulerPolicy.PACKING:
            return self.pack_route(function, alloc)
        return self._place_memory_centric(function, alloc)

    def pack_route(self, function: str, alloc: Allocation) -> Optional[Placement]:
        """Warm routing as usual, cold starts on the lowest-indexed worker with room."""
        return self._place_spread(function, alloc, self.workers)

    def _check_fits(self, alloc: Allocation) -> None:
        if not any(w.could_ever_fit(alloc.vcpus, alloc.memory_mb) for w in self.workers):
            raise CapacityExceededError(
                f"Allocation {alloc.vcpus} vCPUs / {alloc.memory_mb} MB exceeds every worker's capacity"
            )

    def _place_spread(self, function: str, alloc: Allocation,
                      order: list[WorkerState]) -> Optional[Placement]:
        key = (function, alloc.vcpus, alloc.memory_mb)

        for worker in order:
            if worker.warm_pool.get(key) and worker.has_capacity(alloc.vcpus, alloc.memory_mb):
                container = worker.warm_pool[key][-1]
                self._acquire(container)
                return Placement(kind=PlacementKind.WARM_EXACT, worker=worker.worker_id, container=container)

        larger = self._closest_larger(function, alloc, order)
        if larger is not None:
            self._acquire(larger)
            target = self.workers[larger.worker]
            if not target.has_capacity(alloc.vcpus, alloc.memory_mb):
                # home server (first worker in search order)
                target = order[0]
            self.warm_larger_placements += 1
            return Placement(
                kind=PlacementKind.WARM_LARGER,
                worker=larger.worker,
                container=larger,
                background_launch=(alloc.vcpus, alloc.memory_mb, target.worker_id),
            )

        for worker in order:
            if worker.has_capacity(alloc.vcpus, alloc.memory_mb):
                container = self._create(worker, function, alloc.vcpus, alloc.memory_mb, ContainerState.BUSY)
                return Placement(kind=PlacementKind.COLD, worker=worker.worker_id, container=container)
        return None

    def _closest_larger(self, function: str, alloc: Allocation,
                        order: list[WorkerState]) -> Optional[Container]:
        """Idle container dominating the request with the smallest surplus.

        Ties on surplus go to the earlier worker in ``order``, then to the
        most recently idled container.
        """
        best = None
        best_key = None
        for rank, worker in enumerate(order):
            for (fn, vcpus, memory_mb), pool in worker.warm_pool.items():
                if fn != function or not pool:
                    continue
                if vcpus < alloc.vcpus or memory_mb < alloc.memory_mb:
                    continue
                if (vcpus, memory_mb) == alloc.size:
                    continue
                if not worker.has_capacity(vcpus, memory_mb):
                    continue
                container = pool[-1]
                sort_key = (vcpus - alloc.vcpus, memory_mb - alloc.memory_mb, rank, -container.idle_since)
                if best_key is None or sort_key < best_key:
                    best, best_key = container, sort_key
        return best

    def _place_memory_centric(self, function: str, alloc: Allocation) -> Optional[Placement]:
        """Least allocated memory wins; only exact idle containers on it are reused."""
        candidates = [w for w in self.workers if w.has_capacity(alloc.vcpus, alloc.memory_mb)]
        if not candidates:
            return None
        worker = min(candidates, key=lambda w: (w.active_memory_mb, w.worker_id))
        pool = worker.warm_pool.get((function, alloc.vcpus, alloc.memory_mb))
        if pool:
            container = pool[-1]
            self._acquire(container)
            return Placement(kind=PlacementKind.WARM_EXACT, worker=worker.worker_id, container=container)
        container = self._create(worker, function, alloc.vcpus, alloc.memory_mb, ContainerState.BUSY)
        return Placement(kind=PlacementKind.COLD, worker=worker.worker_id, container=container)

    # Container life cycle

    def _create(self, worker: WorkerState, function: str, vcpus: int, memory_mb: int,
                state: ContainerState) -> Container:
        container = Container(next(self._ids), function, vcpus, memory_mb, worker.worker_id, state)
        worker.containers[container.container_id] = container
        if state is ContainerState.BUSY:
            worker.active_vcpus += vcpus
            worker.active_memory_mb += memory_mb
        return container

    def _acquire(self, container: Container) -> None:
        worker = self.workers[container.worker]
        pool = worker.warm_pool[container.key]
        pool.remove(container)
        if not pool:
            del worker.warm_pool[container.key]
        container.state = ContainerState.BUSY
        worker.active_vcpus += container.vcpus
        worker.active_memory_mb += container.memory_mb

    def launch_background(self, function: str, vcpus: int, memory_mb: int, worker: int) -> Container:
        """Start an exact-size container that joins the pool once ready."""
        self.background_launches += 1
        return self._create(self.workers[worker], function, vcpus, memory_mb, ContainerState.LAUNCHING)

    def on_ready(self, container: Container, now: float) -> None:
        """A background launch finished starting."""
        if container.state is not ContainerState.LAUNCHING:
            raise ContainerStateError(f"Container {container.container_id} is not launching")
        self._make_idle(container, now)

    def on_complete(self, container: Container, now: float = 0.0) -> None:
        """The container's invocation finished; it becomes idle."""
        if container.state is not ContainerState.BUSY:
            raise ContainerStateError(
                f"Container {container.container_id} is {container.state.value}, not busy"
            )
        self._release_load(container)
        self._make_idle(container, now)

    def on_kill(self, container: Container) -> None:
        """The container's invocation was killed; the container is destroyed."""
        if container.state is not ContainerState.BUSY:
            raise ContainerStateError(
                f"Container {container.container_id} is {container.state.value}, not busy"
            )
        self._release_load(container)
        del self.workers[container.worker].containers[container.container_id]

    def _release_load(self, container: Container) -> None:
        worker = self.workers[container.worker]
        worker.active_vcpus -= container.vcpus
        worker.active_memory_mb -= container.memory_mb

    def _make_idle(self, container: Container, now: float) -> None:
        container.state = ContainerState.WARM_IDLE
        container.idle_since = now
        self.workers[container.worker].warm_pool.setdefault(container.key, []).append(container)

    def evict_idle(self, now: float) -> list[Container]:
        """Remove idle containers that outlived the keep-alive."""
        evicted = []
        for worker in self.workers:
            for key in list(worker.warm_pool):
                pool = worker.warm_pool[key]
                keep = [c for c in pool if now - c.idle_since < self.keepalive_s]
                if len(keep) == len(pool):
                    continue
                evicted.extend(c for c in pool if now - c.idle_since >= self.keepalive_s)
                if keep:
                    worker.warm_pool[key] = keep
                else:
                    del worker.warm_pool[key]
        for container in evicted:
            del self.workers[container.worker].containers[container.container_id]
        if evicted:
            logger.debug(f"Evicted {len(evicted)} idle containers at t={now:.3f}")
        return evicted

    # Accounting

    def audit(self) -> bool:
        """True iff every worker's load counters match its busy containers and capacity."""
        for worker in self.workers:
            vcpus = sum(c.vcpus for c in worker.busy_containers())
            memory_mb = sum(c.memory_mb for c in worker.busy_containers())
            if vcpus != worker.active_vcpus or memory_mb != worker.active_memory_mb:
                return False
            if worker.active_vcpus > worker.vcpu_capacity or worker.active_memory_mb > worker.memory_capacity_mb:
                return False
            for pool in worker.warm_pool.values():
                if any(c.state is not ContainerState.WARM_IDLE for c in pool):
                    return False
        return True

    def idle_count(self) -> int:
        return sum(len(pool) for w in self.workers for pool in w.warm_pool.values())

    def container_count(self) -> int:
        return sum(len(w.containers) for w in self.workers)
