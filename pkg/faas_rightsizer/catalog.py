"""Function catalog: performance profiles and their inputs.

A catalog file is a JSON document::

    {"functions": [
        {"name": "matmult", "input_type": "matrix", "scale_attr": "rows",
         "work_coeffs": [1.5e-9, 3, 0.2], "parallel_fraction": 0.95, "k_sat": 12,
         "mem_base_mb": 96, "mem_per_byte": 6e-6, "cold_start_ms": 600,
         "inputs": [{"input_id": "m2000", "size_bytes": 32000000,
                     "attrs": {"rows": 2000, "cols": 2000, "density": 1.0},
                     "featurize_cost_ms": 27, "trigger": "storage_trigger"}]}
    ]}

Inputs inherit the input type of their function.
"""

import json
import logging
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional, Union

from jsonschema import ValidationError as SchemaValidationError
from jsonschema import validate
from pydantic import ValidationError

from .constants import Defaults, ErrorMessages
from .errors import CatalogError, UnknownFunctionError
from .featurizer import InputDescriptor, schema_for
from .models import FunctionProfile

logger = logging.getLogger(__name__)

_NUMBER = {"type": "number"}

CATALOG_SCHEMA = {
    "type": "object",
    "properties": {
        "functions": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "properties": {
                    "name": {"type": "string", "minLength": 1},
                    "input_type": {"type": "string"},
                    "scale_attr": {"type": "string"},
                    "work_coeffs": {"type": "array", "items": _NUMBER, "minItems": 3, "maxItems": 3},
                    "parallel_fraction": {"type": "number", "minimum": 0, "maximum": 1},
                    "k_sat": {"type": "integer", "minimum": 1},
                    "mem_base_mb": {"type": "number", "minimum": 0},
                    "mem_per_byte": {"type": "number", "minimum": 0},
                    "cold_start_ms": {"type": "number", "minimum": 0},
                    "timeout_s": {"type": "number", "exclusiveMinimum": 0},
                    "inputs": {
                        "type": "array",
                        "minItems": 1,
                        "items": {
                            "type": "object",
                            "properties": {
                                "input_id": {"type": "string", "minLength": 1},
                                "size_bytes": {"type": "integer", "minimum": 0},
                                "attrs": {"type": "object"},
                                "featurize_cost_ms": {"type": "number", "minimum": 0},
                                "trigger": {"type": "string"},
                            },
                            "required": ["input_id", "attrs"],
                            "additionalProperties": False,
                        },
                    },
                },
                "required": ["name", "input_type", "work_coeffs", "parallel_fraction", "k_sat", "inputs"],
                "additionalProperties": False,
            },
        },
    },
    "required": ["functions"],
    "additionalProperties": False,
}


@dataclass
class Catalog:
    """Profiles by function name and their inputs by input id."""

    profiles: dict[str, FunctionProfile] = field(default_factory=dict)
    inputs: dict[str, dict[str, InputDescriptor]] = field(default_factory=dict)

    def add(self, profile: FunctionProfile, inputs: list[InputDescriptor]) -> None:
        """Register a function with its inputs after checking they agree."""
        if profile.name in self.profiles:
            raise CatalogError(f"Duplicate function '{profile.name}'")
        vector_fields = schema_for(profile.input_type).vector_fields
        if profile.scale_attr not in vector_fields:
            raise CatalogError(
                f"Function '{profile.name}': scale_attr '{profile.scale_attr}' is not a "
                f"{profile.input_type.value} feature (choose from: {', '.join(vector_fields)})"
            )
        by_id: dict[str, InputDescriptor] = {}
        for desc in inputs:
            if desc.input_type is not profile.input_type:
                raise CatalogError(
                    f"Input '{desc.input_id}' is {desc.input_type.value}, "
                    f"function '{profile.name}' takes {profile.input_type.value}"
                )
            if desc.input_id in by_id:
                raise CatalogError(f"Function '{profile.name}': duplicate input '{desc.input_id}'")
            if profile.work(desc.attr(profile.scale_attr)) <= 0:
                raise CatalogError(f"Function '{profile.name}': non-positive work for input '{desc.input_id}'")
            by_id[desc.input_id] = desc
        self.profiles[profile.name] = profile
        self.inputs[profile.name] = by_id

    def profile(self, function: str) -> FunctionProfile:
        try:
            return self.profiles[function]
        except KeyError:
            raise UnknownFunctionError(function) from None

    def input(self, function: str, input_id: str) -> InputDescriptor:
        try:
            return self.inputs[function][input_id]
        except KeyError:
            if function not in self.inputs:
                raise UnknownFunctionError(function) from None
            raise CatalogError(f"Function '{function}' has no input '{input_id}'") from None

    def pairs(self) -> list[tuple[str, str]]:
        """All (function, input_id) pairs in a stable order."""
        return [(fn, input_id) for fn in sorted(self.inputs) for input_id in sorted(self.inputs[fn])]

    def __len__(self) -> int:
        return len(self.profiles)

    @classmethod
    def from_dict(cls, data: dict) -> 'Catalog':
        """Build a catalog from a parsed catalog document.

        Raises:
            CatalogError: the document violates the catalog schema.
        """
        try:
            validate(instance=data, schema=CATALOG_SCHEMA)
        except SchemaValidationError as e:
            location = "/".join(str(p) for p in e.absolute_path)
            raise CatalogError(f"Invalid catalog at '{location}': {e.message}") from e

        catalog = cls()
        for entry in data["functions"]:
            entry = dict(entry)
            raw_inputs = entry.pop("inputs")
            try:
                profile = FunctionProfile(**entry)
                inputs = [InputDescriptor(input_type=profile.input_type, **raw) for raw in raw_inputs]
            except ValidationError as e:
                first = e.errors()[0]
                raise CatalogError(f"Invalid catalog entry '{entry.get('name')}': {first['msg']}") from e
            catalog.add(profile, inputs)
        return catalog


def load_catalog(path: Optional[Union[str, Path]] = None) -> Catalog:
    """Load a catalog file, or the bundled demo catalog when ``path`` is None."""
    if path is None:
        text = resources.files('faas_rightsizer.data').joinpath(Defaults.DEMO_CATALOG).read_text(encoding='utf-8')
        source = Defaults.DEMO_CATALOG
    else:
        path = Path(path)
        if not path.exists():
            raise CatalogError(ErrorMessages.CATALOG_NOT_FOUND.format(path))
        text = path.read_text(encoding='utf-8')
        source = str(path)

    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise CatalogError(f"Catalog {source} is not valid JSON: {e}") from e

    catalog = Catalog.from_dict(data)
    logger.debug(f"Loaded {len(catalog)} functions from {source}")
    return catalog
