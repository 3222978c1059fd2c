"""Per-function vCPU and memory allocation.

Each registered function gets two CSOAA learners: one over the input
features plus the SLO for the vCPU count, one over the input features alone
for the memory class. Until a function has seen enough completed
invocations the configured defaults are used instead of the models.
"""

import logging
import math
from typing import Optional, Sequence, Union

from .config_models import AllocatorSettings
from .constants import CostFunction, StaticPresets
from .errors import UnknownFunctionError
from .learner import CostVector, CsoaaModel
from .models import Allocation, AllocationPolicy, CostMode, InvocationOutcome

logger = logging.getLogger(__name__)

# Absorbs float noise in slack/deficit ratios that land on a step boundary
_EPS = 1e-9

BYTES_PER_MB = 2 ** 20


def _clamp(value: int, low: int, high: int) -> int:
    return max(low, min(high, value))


class FunctionLearnerState:
    """The pair of learners of one function and its feedback count."""

    def __init__(self, function: str, feature_dim: int, settings: AllocatorSettings):
        self.function = function
        self.feature_dim = feature_dim
        self.vcpu_model = CsoaaModel(settings.c_max, feature_dim + 1, settings.learning_rate)
        self.mem_model = CsoaaModel(settings.mem_classes, feature_dim, settings.learning_rate)
        self.completed_feedbacks = 0
        self.vcpu_conf_threshold = settings.vcpu_conf_threshold
        self.mem_conf_threshold = settings.mem_conf_threshold

    @property
    def vcpu_confident(self) -> bool:
        return self.completed_feedbacks >= self.vcpu_conf_threshold

    @property
    def mem_confident(self) -> bool:
        return self.completed_feedbacks >= self.mem_conf_threshold


class Allocator:
    """Learned, decoupled vCPU and memory allocator."""

    def __init__(self, settings: Optional[AllocatorSettings] = None):
        self.settings = settings or AllocatorSettings()
        self._states: dict[str, FunctionLearnerState] = {}

    def register(self, function: str, feature_dim: int) -> FunctionLearnerState:
        """Create the learners of ``function`` (idempotent)."""
        state = self._states.get(function)
        if state is None:
            state = FunctionLearnerState(function, feature_dim, self.settings)
            self._states[function] = state
            logger.debug(f"Registered function {function} with {feature_dim} features")
        return state

    def state(self, function: str) -> FunctionLearnerState:
        try:
            return self._states[function]
        except KeyError:
            raise UnknownFunctionError(function) from None

    def allocate(self, function: str, features: Sequence[float], slo_s: float,
                 input_bytes: int = 0) -> Allocation:
        """Allocation for one invocation of ``function``.

        Args:
            function: Registered function name
            features: Input feature vector
            slo_s: Latency objective of the invocation; a vCPU feature only
            input_bytes: Total size of the invocation's data inputs
        """
        if slo_s <= 0:
            raise ValueError(f"slo_s must be positive, got {slo_s}")
        state = self.state(function)
        s = self.settings

        if state.vcpu_confident:
            vcpus = state.vcpu_model.predict(list(features) + [slo_s])
        else:
            vcpus = s.default_vcpus

        if state.mem_confident:
            predicted = CostFunction.MEM_CLASS_MB * state.mem_model.predict(features)
            memory_mb = self.safeguard_memory(predicted, input_bytes)
        else:
            memory_mb = s.default_mem_mb

        return Allocation(
            vcpus=vcpus,
            memory_mb=memory_mb,
            vcpu_from_model=state.vcpu_confident,
            mem_from_model=state.mem_confident,
        )

    def safeguard_memory(self, predicted_mb: int, input_total_bytes: int) -> int:
        """Fall back to the default when the prediction cannot hold the inputs."""
        if predicted_mb * BYTES_PER_MB <= input_total_bytes:
            logger.debug(f"Memory safeguard: {predicted_mb} MB <= {input_total_bytes} input bytes")
            return self.settings.default_mem_mb
        return predicted_mb

    def build_vcpu_cost_vector(self, o: InvocationOutcome,
                               mode: Optional[Union[CostMode, str]] = None) -> Optional[CostVector]:
        """vCPU cost vector for a completed invocation; None for OOM kills."""
        if o.oom_killed:
            return None
        s = self.settings
        mode = s.cost_mode if mode is None else CostMode.from_string(mode)
        vcpus = o.ran_vcpus
        used = o.max_vcpus_used

        if o.exec_s <= o.slo_s:
            slack = o.slo_s - o.exec_s
            if mode is CostMode.ABSOLUTE:
                removed = math.floor(slack / s.slack_step_s + _EPS)
            else:
                removed = math.floor(vcpus * slack / o.slo_s + _EPS)
            target = max(1, vcpus - removed)
        elif used < CostFunction.HIGH_UTILIZATION * vcpus:
            # under-used allocation: the class that was actually used
            target = math.ceil(used - _EPS)
        else:
            deficit = o.exec_s - o.slo_s
            if mode is CostMode.ABSOLUTE:
                increase = max(1, math.ceil(deficit / s.deficit_step_s - _EPS))
            else:
                increase = max(1, math.ceil(vcpus * deficit / o.slo_s - _EPS))
            target = math.ceil(used - _EPS) + increase
            if vcpus == 1:
                target = min(target, CostFunction.SINGLE_VCPU_ESCALATION)

        target = _clamp(target, 1, s.c_max)
        return CostVector.linear(target, s.c_max, s.vcpu_alpha_over, s.vcpu_alpha_under)

    def build_memory_cost_vector(self, o: InvocationOutcome) -> CostVector:
        """Memory cost vector; an OOM kill targets twice the allocated class."""
        s = self.settings
        if o.oom_killed:
            target = 2 * (o.ran_memory_mb // CostFunction.MEM_CLASS_MB)
        else:
            target = math.ceil(o.peak_mem_mb / CostFunction.MEM_CLASS_MB - _EPS)
        target = _clamp(target, 1, s.mem_classes)
        return CostVector.linear(target, s.mem_classes, s.mem_alpha_over, s.mem_alpha_under)

    def feedback(self, o: InvocationOutcome) -> None:
        """Train both learners of the outcome's function on it."""
        state = self.state(o.function)
        vcpu_costs = self.build_vcpu_cost_vector(o)
        if vcpu_costs is not None:
            state.vcpu_model.update(list(o.features) + [o.slo_s], vcpu_costs)
        state.mem_model.update(o.features, self.build_memory_cost_vector(o))
        state.completed_feedbacks += 1
        if state.completed_feedbacks in (state.vcpu_conf_threshold, state.mem_conf_threshold):
            logger.debug(f"{o.function}: {state.completed_feedbacks} feedbacks, model predictions enabled")


class StaticAllocator:
    """Fixed-size baseline allocator that ignores feedback."""

    def __init__(self, vcpus: int, memory_mb: int):
        self.allocation = Allocation(vcpus=vcpus, memory_mb=memory_mb)

    @classmethod
    def from_policy(cls, policy: Union[AllocationPolicy, str]) -> 'StaticAllocator':
        policy = AllocationPolicy.from_string(policy)
        presets = {
            AllocationPolicy.STATIC_MEDIUM: StaticPresets.MEDIUM,
            AllocationPolicy.STATIC_LARGE: StaticPresets.LARGE,
        }
        if policy not in presets:
            raise ValueError(f"{policy.value} is not a static allocation policy")
        return cls(*presets[policy])

    def register(self, function: str, feature_dim: int) -> None:
        return None

    def allocate(self, function: str, features: Sequence[float], slo_s: float,
                 input_bytes: int = 0) -> Allocation:
        return self.allocation

    def feedback(self, o: InvocationOutcome) -> None:
        return None


def build_allocator(policy: Union[AllocationPolicy, str],
                    settings: Optional[AllocatorSettings] = None) -> Union[Allocator, StaticAllocator]:
    """Allocator for an allocation policy."""
    policy = AllocationPolicy.from_string(policy)
    if policy is AllocationPolicy.LEARNED:
        return Allocator(settings)
    return StaticAllocator.from_policy(policy)
