"""Tests for catalog loading and validation."""

import json

import pytest

from faas_rightsizer.catalog import Catalog, load_catalog
from faas_rightsizer.errors import CatalogError, UnknownFunctionError
from faas_rightsizer.models import InputType
from faas_rightsizer.simcore import oracle_min_mem_class


def catalog_doc(**overrides):
    entry = {
        "name": "matmult", "input_type": "matrix", "scale_attr": "rows",
        "work_coeffs": [1.5e-9, 3, 0.2], "parallel_fraction": 0.95, "k_sat": 12,
        "inputs": [{"input_id": "m2000", "size_bytes": 32000000,
                    "attrs": {"rows": 2000, "cols": 2000, "density": 1.0}}],
    }
    entry.update(overrides)
    return {"functions": [entry]}


class TestDemoCatalog:
    """Test the bundled demo catalog."""

    def test_loads(self, demo_catalog):
        assert len(demo_catalog) >= 6
        assert "matmult" in demo_catalog.profiles
        assert demo_catalog.profile("sentiment").parallel_fraction == 0.0

    def test_pairs_sorted(self, demo_catalog):
        pairs = demo_catalog.pairs()
        assert pairs == sorted(pairs)
        assert ("matmult", "m2000") in pairs

    def test_covers_thread_classes(self, demo_catalog):
        """Single-threaded, bounded multi-threaded and memory-heavy profiles are all present."""
        profiles = demo_catalog.profiles.values()
        assert any(p.parallel_fraction == 0 for p in profiles)
        assert any(p.parallel_fraction > 0 and p.k_sat > 1 for p in profiles)
        assert any(p.mem_per_byte >= 2e-5 for p in profiles)

    def test_memory_heavy_inputs_vary(self, demo_catalog):
        """The join spans memory classes from a few hundred MB to most of the default."""
        profile = demo_catalog.profile("dataframe-join")
        classes = sorted(oracle_min_mem_class(profile, demo_catalog.input("dataframe-join", i))
                         for i in ("orders-1mb", "orders-15mb", "orders-60mb"))
        assert classes == [3, 9, 30]


class TestCatalogValidation:
    """Test schema and consistency checks."""

    def test_from_dict(self):
        catalog = Catalog.from_dict(catalog_doc())
        assert catalog.profile("matmult").input_type is InputType.MATRIX
        assert catalog.input("matmult", "m2000").size_bytes == 32000000

    def test_schema_violation(self):
        with pytest.raises(CatalogError, match="Invalid catalog"):
            Catalog.from_dict(catalog_doc(k_sat=0))
        with pytest.raises(CatalogError):
            Catalog.from_dict({"functions": []})

    def test_unknown_key(self):
        with pytest.raises(CatalogError):
            Catalog.from_dict(catalog_doc(owner="someone"))

    def test_scale_attr_must_be_a_feature(self):
        with pytest.raises(CatalogError, match="scale_attr"):
            Catalog.from_dict(catalog_doc(scale_attr="width"))

    def test_bad_input_attrs(self):
        doc = catalog_doc(inputs=[{"input_id": "m", "attrs": {"rows": 10}}])
        with pytest.raises(CatalogError):
            Catalog.from_dict(doc)

    def test_duplicate_input(self):
        attrs = {"rows": 10, "cols": 10, "density": 1.0}
        doc = catalog_doc(inputs=[{"input_id": "m", "attrs": attrs}, {"input_id": "m", "attrs": attrs}])
        with pytest.raises(CatalogError, match="duplicate input"):
            Catalog.from_dict(doc)

    def test_non_positive_work(self):
        with pytest.raises(CatalogError, match="non-positive work"):
            Catalog.from_dict(catalog_doc(work_coeffs=[0, 1, 0]))

    def test_lookups(self):
        catalog = Catalog.from_dict(catalog_doc())
        with pytest.raises(UnknownFunctionError):
            catalog.profile("nope")
        with pytest.raises(UnknownFunctionError):
            catalog.input("nope", "m2000")
        with pytest.raises(CatalogError):
            catalog.input("matmult", "nope")


class TestLoadCatalog:
    """Test catalog file loading."""

    def test_load_file(self, tmp_path):
        path = tmp_path / "catalog.json"
        path.write_text(json.dumps(catalog_doc()))
        assert len(load_catalog(path)) == 1

    def test_missing_file(self, tmp_path):
        with pytest.raises(CatalogError, match="does not exist"):
            load_catalog(tmp_path / "missing.json")

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "catalog.json"
        path.write_text("{not json")
        with pytest.raises(CatalogError, match="not valid JSON"):
            load_catalog(path)
