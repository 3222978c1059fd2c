"""Input featurization.

Each input type has a fixed feature schema. ``featurize`` turns a typed
InputDescriptor into a feature vector in schema order with the input size in
bytes appended (payload inputs carry their scalar value only).
"""

import logging
from dataclasses import dataclass
from typing import Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .errors import FeatureSchemaError
from .models import InputType, Trigger

logger = logging.getLogger(__name__)

AttrValue = Union[bool, int, float, str]
FeatureVector = tuple[float, ...]

# Stable integer codes for video container encodings; unknown tags map to 0.
VIDEO_ENCODINGS = {
    "h264": 1,
    "hevc": 2,
    "h265": 2,
    "vp8": 3,
    "vp9": 4,
    "av1": 5,
    "mpeg4": 6,
    "mjpeg": 7,
}
OTHER_ENCODING = 0


@dataclass(frozen=True)
class FeatureSchema:
    """Ordered attribute names for one input type."""

    input_type: InputType
    field_order: tuple[str, ...]
    appends_size: bool = True

    @property
    def dim(self) -> int:
        return len(self.field_order) + (1 if self.appends_size else 0)

    @property
    def vector_fields(self) -> tuple[str, ...]:
        """Names of the vector entries in order."""
        return self.field_order + (("size_bytes",) if self.appends_size else ())


SCHEMAS: dict[InputType, FeatureSchema] = {
    InputType.IMAGE: FeatureSchema(InputType.IMAGE, ("width", "height", "channels", "dpi_x", "dpi_y")),
    InputType.MATRIX: FeatureSchema(InputType.MATRIX, ("rows", "cols", "density")),
    InputType.VIDEO: FeatureSchema(
        InputType.VIDEO, ("width", "height", "duration_s", "bitrate_bps", "avg_frame_rate", "encoding")
    ),
    InputType.CSV: FeatureSchema(InputType.CSV, ("rows", "cols")),
    InputType.JSON: FeatureSchema(InputType.JSON, ("outer_length",)),
    InputType.AUDIO: FeatureSchema(
        InputType.AUDIO, ("channels", "sample_rate", "duration_s", "bitrate_bps", "flac")
    ),
    InputType.PAYLOAD: FeatureSchema(InputType.PAYLOAD, ("value",), appends_size=False),
}

# Payloads arrive with the request; stored objects are featurized when written.
DEFAULT_TRIGGERS = {input_type: Trigger.PRE_EXTRACTED for input_type in InputType}
DEFAULT_TRIGGERS[InputType.PAYLOAD] = Trigger.API_TRIGGER


def schema_for(input_type: Union[InputType, str]) -> FeatureSchema:
    """Look up the feature schema of an input type."""
    try:
        return SCHEMAS[InputType.from_string(input_type)]
    except ValueError as e:
        raise FeatureSchemaError(str(e)) from e


class InputDescriptor(BaseModel):
    """Metadata record of one function input."""

    model_config = ConfigDict(frozen=True, extra='forbid')

    input_id: str = Field(min_length=1)
    input_type: InputType
    size_bytes: int = Field(default=0, ge=0)
    attrs: dict[str, AttrValue] = Field(default_factory=dict)
    featurize_cost_ms: float = Field(default=0.0, ge=0.0)
    trigger: Optional[Trigger] = None

    @field_validator('input_type', mode='before')
    @classmethod
    def parse_input_type(cls, v):
        return InputType.from_string(v)

    @field_validator('trigger', mode='before')
    @classmethod
    def parse_trigger(cls, v):
        return None if v is None else Trigger.from_string(v)

    @model_validator(mode='after')
    def check_attrs(self) -> 'InputDescriptor':
        schema = SCHEMAS[self.input_type]
        expected = set(schema.field_order)
        present = set(self.attrs)
        missing = sorted(expected - present)
        extra = sorted(present - expected)
        if missing or extra:
            raise FeatureSchemaError(
                f"Input '{self.input_id}' ({self.input_type.value}): "
                f"missing attrs {missing}, unexpected attrs {extra}"
            )
        for name in schema.field_order:
            value = self.attrs[name]
            if name == "encoding":
                if not isinstance(value, str):
                    raise FeatureSchemaError(f"Input '{self.input_id}': encoding must be a string tag")
                continue
            if name == "flac":
                if not isinstance(value, (bool, int)) or int(value) not in (0, 1):
                    raise FeatureSchemaError(f"Input '{self.input_id}': flac must be a boolean flag")
                continue
            if isinstance(value, str):
                raise FeatureSchemaError(f"Input '{self.input_id}': attr '{name}' must be numeric")
            if name == "density" and not 0.0 <= float(value) <= 1.0:
                raise FeatureSchemaError(f"Input '{self.input_id}': density must lie in [0, 1], got {value}")
            if self.input_type is not InputType.PAYLOAD and float(value) < 0:
                raise FeatureSchemaError(f"Input '{self.input_id}': attr '{name}' must be non-negative")
        return self

    @property
    def effective_trigger(self) -> Trigger:
        return self.trigger or DEFAULT_TRIGGERS[self.input_type]

    def attr(self, name: str) -> float:
        """Numeric value of an attribute, ``size_bytes`` included."""
        if name == "size_bytes":
            return float(self.size_bytes)
        try:
            return _encode(name, self.attrs[name])
        except KeyError:
            raise FeatureSchemaError(f"Input '{self.input_id}' has no attribute '{name}'") from None


def _encode(name: str, value: AttrValue) -> float:
    if name == "encoding":
        return float(VIDEO_ENCODINGS.get(str(value).lower(), OTHER_ENCODING))
    if isinstance(value, bool):
        return 1.0 if value else 0.0
    return float(value)


def featurize(desc: InputDescriptor) -> FeatureVector:
    """Feature vector of ``desc`` in schema order."""
    schema = SCHEMAS[desc.input_type]
    return tuple(desc.attr(name) for name in schema.vector_fields)


def extraction_latency(desc: InputDescriptor, trigger: Optional[Trigger] = None) -> float:
    """Milliseconds of feature extraction charged to the invocation's critical path.

    Only storage-triggered invocations pay, since the object has to be
    featurized before it can be allocated for.
    """
    trigger = desc.effective_trigger if trigger is None else Trigger.from_string(trigger)
    if trigger is Trigger.STORAGE_TRIGGER:
        return desc.featurize_cost_ms
    return 0.0
