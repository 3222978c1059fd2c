"""Pydantic models for run configuration."""

import json
import logging
from pathlib import Path
from typing import Any, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .constants import CostFunction, Defaults
from .models import AllocationPolicy, CostMode, SchedulerPolicy

logger = logging.getLogger(__name__)

PATH_FIELDS = ('trace_path', 'catalog_path', 'schedule_path')


class AllocatorSettings(BaseModel):
    """Hyperparameters of the learned allocator."""

    model_config = ConfigDict(frozen=True, extra='forbid')

    vcpu_conf_threshold: int = Field(default=Defaults.VCPU_CONF_THRESHOLD, ge=0)
    mem_conf_threshold: int = Field(default=Defaults.MEM_CONF_THRESHOLD, ge=0)
    default_vcpus: int = Field(default=Defaults.DEFAULT_VCPUS, ge=1)
    default_mem_mb: int = Field(default=Defaults.DEFAULT_MEM_MB, ge=CostFunction.MEM_CLASS_MB)
    deficit_step_s: float = Field(default=CostFunction.DEFICIT_STEP_S, gt=0.0)
    slack_step_s: float = Field(default=CostFunction.SLACK_STEP_S, gt=0.0)
    vcpu_alpha_over: float = Field(default=CostFunction.VCPU_ALPHA_OVER, gt=0.0)
    vcpu_alpha_under: float = Field(default=CostFunction.VCPU_ALPHA_UNDER, gt=0.0)
    mem_alpha_over: float = Field(default=CostFunction.MEM_ALPHA_OVER, gt=0.0)
    mem_alpha_under: float = Field(default=CostFunction.MEM_ALPHA_UNDER, gt=0.0)
    cost_mode: CostMode = CostMode.ABSOLUTE
    c_max: int = Field(default=Defaults.C_MAX, ge=2)
    mem_max_mb: int = Field(default=Defaults.MEM_MAX_MB, ge=2 * CostFunction.MEM_CLASS_MB)
    learning_rate: float = Field(default=Defaults.LEARNING_RATE, ge=0.0)

    @field_validator('cost_mode', mode='before')
    @classmethod
    def parse_cost_mode(cls, v):
        return CostMode.from_string(v)

    @field_validator('default_mem_mb', 'mem_max_mb')
    @classmethod
    def validate_memory_class(cls, v: int) -> int:
        if v % CostFunction.MEM_CLASS_MB:
            raise ValueError(f"must be a multiple of {CostFunction.MEM_CLASS_MB} MB, got {v}")
        return v

    @model_validator(mode='after')
    def validate_defaults_in_range(self) -> 'AllocatorSettings':
        if self.default_vcpus > self.c_max:
            raise ValueError(f"default_vcpus ({self.default_vcpus}) exceeds c_max ({self.c_max})")
        if self.default_mem_mb > self.mem_max_mb:
            raise ValueError(f"default_mem_mb ({self.default_mem_mb}) exceeds mem_max_mb ({self.mem_max_mb})")
        return self

    @property
    def mem_classes(self) -> int:
        return self.mem_max_mb // CostFunction.MEM_CLASS_MB


class RunConfig(BaseModel):
    """Settings of one simulation run, loaded from a flat JSON object."""

    model_config = ConfigDict(extra='forbid')

    # Cluster
    num_workers: int = Field(default=Defaults.NUM_WORKERS, ge=1, description="Number of invoker workers")
    user_cpu: int = Field(default=Defaults.USER_CPU, ge=1, description="Busy vCPU admission limit per worker")
    worker_memory_mb: int = Field(default=Defaults.WORKER_MEMORY_MB, ge=CostFunction.MEM_CLASS_MB)
    worker_cores: int = Field(default=Defaults.WORKER_CORES, ge=1, description="Physical cores per worker")
    keepalive_s: float = Field(default=Defaults.KEEPALIVE_S, ge=0.0, description="Idle container keep-alive")
    sweep_interval_s: float = Field(default=Defaults.SWEEP_INTERVAL_S, gt=0.0, description="Eviction sweep period")
    scheduler_policy: SchedulerPolicy = SchedulerPolicy.HASHING
    allocation_policy: AllocationPolicy = AllocationPolicy.LEARNED

    # Allocator
    cost_mode: CostMode = CostMode.ABSOLUTE
    vcpu_conf_threshold: int = Field(default=Defaults.VCPU_CONF_THRESHOLD, ge=0)
    mem_conf_threshold: int = Field(default=Defaults.MEM_CONF_THRESHOLD, ge=0)
    default_vcpus: int = Field(default=Defaults.DEFAULT_VCPUS, ge=1)
    default_mem_mb: int = Field(default=Defaults.DEFAULT_MEM_MB, ge=CostFunction.MEM_CLASS_MB)
    deficit_step_s: float = Field(default=CostFunction.DEFICIT_STEP_S, gt=0.0, description="X")
    slack_step_s: float = Field(default=CostFunction.SLACK_STEP_S, gt=0.0, description="Y")
    vcpu_alpha_over: float = Field(default=CostFunction.VCPU_ALPHA_OVER, gt=0.0)
    vcpu_alpha_under: float = Field(default=CostFunction.VCPU_ALPHA_UNDER, gt=0.0)
    mem_alpha_over: float = Field(default=CostFunction.MEM_ALPHA_OVER, gt=0.0)
    mem_alpha_under: float = Field(default=CostFunction.MEM_ALPHA_UNDER, gt=0.0)
    c_max: int = Field(default=Defaults.C_MAX, ge=2)
    mem_max_mb: int = Field(default=Defaults.MEM_MAX_MB, ge=2 * CostFunction.MEM_CLASS_MB)
    learning_rate: float = Field(default=Defaults.LEARNING_RATE, ge=0.0)

    # Simulation
    sampling_interval_ms: float = Field(default=Defaults.SAMPLING_INTERVAL_MS, gt=0.0)
    audit: bool = Field(default=False, description="Audit worker load after every event")

    # Workload
    slo_multiplier: float = Field(default=Defaults.SLO_MULTIPLIER, gt=0.0)
    target_rps: float = Field(default=Defaults.TARGET_RPS, gt=0.0)
    window_minutes: int = Field(default=Defaults.WINDOW_MINUTES, ge=1, le=Defaults.MINUTES_PER_DAY)
    seed: int = Field(default=Defaults.SEED, ge=0)

    # Files
    trace_path: Optional[Path] = Field(default=None, description="Per-minute invocation trace CSV")
    catalog_path: Optional[Path] = Field(default=None, description="Catalog JSON; bundled demo when unset")
    schedule_path: Optional[Path] = Field(default=None, description="Schedule CSV to replay")
    output_dir: Path = Field(default=Path(Defaults.OUTPUT_DIR))

    debug: bool = Field(default=False, description="Enable debug logging")

    @model_validator(mode='before')
    @classmethod
    def derive_mem_threshold(cls, data: Any) -> Any:
        """Memory confidence threshold defaults to twice the vCPU one."""
        if isinstance(data, dict) and 'vcpu_conf_threshold' in data and 'mem_conf_threshold' not in data:
            data = dict(data)
            data['mem_conf_threshold'] = 2 * int(data['vcpu_conf_threshold'])
        return data

    @field_validator('scheduler_policy', mode='before')
    @classmethod
    def parse_scheduler_policy(cls, v):
        return SchedulerPolicy.from_string(v)

    @field_validator('allocation_policy', mode='before')
    @classmethod
    def parse_allocation_policy(cls, v):
        return AllocationPolicy.from_string(v)

    @field_validator('cost_mode', mode='before')
    @classmethod
    def parse_cost_mode(cls, v):
        return CostMode.from_string(v)

    @field_validator(*PATH_FIELDS)
    @classmethod
    def validate_input_path(cls, v: Optional[Path]) -> Optional[Path]:
        """Input files must exist when given."""
        if v is None:
            return None
        if not v.exists():
            raise ValueError(f"File does not exist: {v}")
        if not v.is_file():
            raise ValueError(f"Not a file: {v}")
        return v

    @model_validator(mode='after')
    def validate_cluster_fits_defaults(self) -> 'RunConfig':
        # Building the settings runs their cross-field checks
        self.allocator_settings()
        return self

    def allocator_settings(self) -> AllocatorSettings:
        """Allocator hyperparameters carried by this config."""
        return AllocatorSettings(**self.model_dump(include=set(AllocatorSettings.model_fields)))

    def to_dict(self) -> dict:
        """Convert to a JSON-serializable flat dict."""
        return self.model_dump(mode='json', exclude_none=True)

    @classmethod
    def load_from_file(cls, config_file: Path) -> 'RunConfig':
        """Load a config file; relative paths resolve against its directory."""
        with open(config_file, 'r', encoding='utf-8') as f:
            data = json.load(f)
        if isinstance(data, dict):
            for key in PATH_FIELDS + ('output_dir',):
                if data.get(key) and not Path(data[key]).is_absolute():
                    data[key] = str(config_file.parent / data[key])
        return cls(**data)

    def save_to_file(self, config_file: Path) -> None:
        """Atomically save configuration to file."""
        config_file.parent.mkdir(parents=True, exist_ok=True)
        temp_file = config_file.with_suffix('.tmp')
        try:
            with open(temp_file, 'w', encoding='utf-8') as f:
                json.dump(self.to_dict(), f, indent=2, ensure_ascii=False)
            temp_file.replace(config_file)
        except Exception:
            if temp_file.exists():
                temp_file.unlink()
            raise
