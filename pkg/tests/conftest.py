"""Shared fixtures: small catalogs, profiles and configs."""

import pytest

from faas_rightsizer.catalog import Catalog, load_catalog
from faas_rightsizer.config_models import RunConfig
from faas_rightsizer.featurizer import InputDescriptor
from faas_rightsizer.models import FunctionProfile

INPUT_ATTRS = {
    "image": {"width": 640, "height": 480, "channels": 3, "dpi_x": 72, "dpi_y": 72},
    "matrix": {"rows": 100, "cols": 100, "density": 1.0},
    "csv": {"rows": 5000, "cols": 8},
    "json": {"outer_length": 1000},
    "payload": {"value": 42},
}


def make_profile(name="fn", input_type="matrix", work=10.0, p=0.0, k_sat=1, **kwargs) -> FunctionProfile:
    """Profile with constant work ``work`` seconds."""
    fields = dict(name=name, input_type=input_type, work_coeffs=(0.0, 1.0, work),
                  parallel_fraction=p, k_sat=k_sat, mem_base_mb=64.0, cold_start_ms=500.0)
    fields.update(kwargs)
    return FunctionProfile(**fields)


def make_input(input_type="matrix", input_id="in", size_bytes=80000, **kwargs) -> InputDescriptor:
    fields = dict(input_id=input_id, input_type=input_type, size_bytes=size_bytes,
                  attrs=INPUT_ATTRS[input_type], trigger="pre_extracted")
    fields.update(kwargs)
    return InputDescriptor(**fields)


def make_catalog(*entries) -> Catalog:
    """Catalog from (profile, [inputs]) pairs."""
    catalog = Catalog()
    for profile, inputs in entries:
        catalog.add(profile, list(inputs))
    return catalog


@pytest.fixture
def demo_catalog() -> Catalog:
    return load_catalog()


@pytest.fixture
def single_catalog():
    """One single-threaded function (W=2 s, 500 ms cold start) with one input."""
    profile = make_profile(name="single", work=2.0)
    desc = make_input()
    return make_catalog((profile, [desc])), profile, desc


@pytest.fixture
def run_config(tmp_path) -> RunConfig:
    return RunConfig(output_dir=tmp_path / "out")
