"""Pydantic models and enums shared by the allocator, scheduler and simulator."""

from dataclasses import dataclass, fields
from enum import Enum
from typing import Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator

from .constants import CostFunction, Defaults


class _LookupEnum(str, Enum):
    """String enum with a forgiving ``from_string`` constructor."""

    @classmethod
    def from_string(cls, value: str):
        """Convert a string (any case, '-' or '_') to a member."""
        if isinstance(value, cls):
            return value
        if not value:
            raise ValueError(f"Empty value for {cls.__name__}")
        normalized = str(value).strip().lower().replace('-', '_')
        for member in cls:
            if member.value == normalized:
                return member
        choices = ", ".join(m.value for m in cls)
        raise ValueError(f"Unknown {cls.__name__} '{value}' (choose from: {choices})")


class InputType(_LookupEnum):
    """Input types understood by the featurizer."""
    IMAGE = "image"
    MATRIX = "matrix"
    VIDEO = "video"
    CSV = "csv"
    JSON = "json"
    AUDIO = "audio"
    PAYLOAD = "payload"


class Trigger(_LookupEnum):
    """How an invocation was triggered, deciding where features get extracted."""
    STORAGE_TRIGGER = "storage_trigger"
    API_TRIGGER = "api_trigger"
    PRE_EXTRACTED = "pre_extracted"


class CostMode(_LookupEnum):
    """How slack is converted into a vCPU class change."""
    ABSOLUTE = "absolute"
    PROPORTIONAL = "proportional"


class SchedulerPolicy(_LookupEnum):
    """Container placement policies."""
    HASHING = "hashing"
    PACKING = "packing"
    MEMORY_CENTRIC_BASELINE = "memory_centric_baseline"


class AllocationPolicy(_LookupEnum):
    """Resource allocation policies."""
    LEARNED = "learned"
    STATIC_MEDIUM = "static_medium"
    STATIC_LARGE = "static_large"


class PlacementKind(_LookupEnum):
    """Outcome of routing an invocation."""
    WARM_EXACT = "warm_exact"
    WARM_LARGER = "warm_larger"
    COLD = "cold"
    REJECTED = "rejected"


class ContainerState(_LookupEnum):
    """Container life-cycle states."""
    WARM_IDLE = "warm_idle"
    BUSY = "busy"
    LAUNCHING = "launching"


class FunctionProfile(BaseModel):
    """Synthetic performance and memory model of one serverless function."""

    model_config = ConfigDict(frozen=True, extra='forbid')

    name: str = Field(min_length=1, description="Function name")
    input_type: InputType = Field(description="Type of the function's inputs")
    scale_attr: str = Field(default="size_bytes", description="Input attribute driving the work curve")
    work_coeffs: Tuple[float, float, float] = Field(
        description="(a, b, c) of W(s) = a*s^b + c seconds of single-core work"
    )
    parallel_fraction: float = Field(ge=0.0, le=1.0, description="Parallelizable fraction p")
    k_sat: int = Field(ge=1, description="Maximum exploitable vCPUs")
    mem_base_mb: float = Field(default=64.0, ge=0.0, description="Footprint at zero input size")
    mem_per_byte: float = Field(default=0.0, ge=0.0, description="Footprint slope in MB per input byte")
    cold_start_ms: float = Field(default=500.0, ge=0.0, description="Container start-up delay")
    timeout_s: float = Field(default=Defaults.TIMEOUT_S, gt=0.0, description="Execution timeout")

    @field_validator('input_type', mode='before')
    @classmethod
    def parse_input_type(cls, v):
        """Accept input types in any case."""
        return InputType.from_string(v)

    def work(self, scale: float) -> float:
        """Single-core work W(s) in seconds."""
        a, b, c = self.work_coeffs
        return a * float(scale) ** b + c


class Allocation(BaseModel):
    """Decoupled (vCPU, memory) decision for one invocation."""

    model_config = ConfigDict(frozen=True)

    vcpus: int = Field(ge=1, description="Allocated vCPUs")
    memory_mb: int = Field(ge=CostFunction.MEM_CLASS_MB, description="Allocated memory")
    vcpu_from_model: bool = False
    mem_from_model: bool = False

    @field_validator('memory_mb')
    @classmethod
    def validate_memory_class(cls, v: int) -> int:
        """Memory is allocated in whole 128 MB classes."""
        if v % CostFunction.MEM_CLASS_MB:
            raise ValueError(f"memory_mb must be a multiple of {CostFunction.MEM_CLASS_MB}, got {v}")
        return v

    @property
    def memory_class(self) -> int:
        return self.memory_mb // CostFunction.MEM_CLASS_MB

    @property
    def size(self) -> Tuple[int, int]:
        """Container size key (vcpus, memory_mb)."""
        return (self.vcpus, self.memory_mb)


class InvocationOutcome(BaseModel):
    """Observed performance and utilization of one finished invocation.

    ``alloc`` is the allocator's decision. A warm_larger placement runs the
    invocation in a bigger container, whose size goes in ``container_vcpus``
    and ``container_memory_mb``; cost vectors are built against that size.
    """

    model_config = ConfigDict(frozen=True)

    function: str
    features: Tuple[float, ...]
    slo_s: float = Field(gt=0.0)
    alloc: Allocation
    container_vcpus: Optional[int] = Field(default=None, ge=1)
    container_memory_mb: Optional[int] = Field(default=None, ge=CostFunction.MEM_CLASS_MB)
    exec_s: float = Field(gt=0.0, description="Execution time excluding cold start")
    e2e_s: float = Field(gt=0.0)
    max_vcpus_used: float = Field(gt=0.0)
    peak_mem_mb: float = Field(gt=0.0)
    oom_killed: bool = False
    input_bytes: int = Field(default=0, ge=0)

    @property
    def ran_vcpus(self) -> int:
        """vCPUs the invocation executed with."""
        return self.alloc.vcpus if self.container_vcpus is None else self.container_vcpus

    @property
    def ran_memory_mb(self) -> int:
        return self.alloc.memory_mb if self.container_memory_mb is None else self.container_memory_mb

    @property
    def slo_met(self) -> bool:
        return self.exec_s <= self.slo_s


@dataclass(slots=True)
class InvocationRecord:
    """One row of the results table.

    ``vcpus`` and ``memory_mb`` are the size of the container the invocation
    ran in. ``requested_vcpus`` and ``requested_memory_mb`` are what the
    allocator asked for, and the two provenance flags describe those; the
    pairs differ only after a warm_larger placement.
    """
    invocation_id: int
    function: str
    input_id: str
    arrival_s: float
    featurize_s: float = 0.0
    slo_s: float = 0.0
    vcpus: int = 0
    memory_mb: int = 0
    vcpu_from_model: bool = False
    mem_from_model: bool = False
    requested_vcpus: int = 0
    requested_memory_mb: int = 0
    placement: str = PlacementKind.REJECTED.value
    worker: int = -1
    cold_start_s: float = 0.0
    queue_s: float = 0.0
    exec_s: float = 0.0
    e2e_s: float = 0.0
    slo_met: bool = False
    max_vcpus_used: float = 0.0
    peak_mem_mb: float = 0.0
    oom_killed: bool = False
    timed_out: bool = False

    @classmethod
    def column_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    @property
    def completed(self) -> bool:
        """Invocation ran to completion (not killed, timed out or rejected)."""
        return (self.placement != PlacementKind.REJECTED.value
                and not self.oom_killed and not self.timed_out)
