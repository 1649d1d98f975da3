"""Serialization tests: structured mask documents and binary bitmasks."""

import json

import numpy as np
import pytest

from specmask.errors import GridMismatch, ValidationError
from specmask.features import Spectrogram
from specmask.grid import make_grid
from specmask.maskfile import (
    BITMASK_MAGIC,
    MaskDoc,
    ScheduleStamp,
    bitmask_bytes,
    dumps_maskfile,
    load_maskfile,
    plan_to_doc,
    read_bitmask,
    regenerate,
    validate_doc,
    write_bitmask,
    write_maskfile,
)
from specmask.strategies import DwmConfig, RandomConfig, generate


def make_fixture(seed=0, strategy="dwm"):
    rng = np.random.default_rng(42)
    spec = Spectrogram(rng.normal(size=(8, 24)))
    grid = make_grid(spec, 2, 2)
    config = DwmConfig(mask_ratio=0.5, hint_ratio=0.25) if strategy == "dwm" else RandomConfig(mask_ratio=0.5)
    plan = generate(config, spec, grid, seed)
    return spec, grid, plan


class TestMaskDocument:
    def test_round_trip(self, tmp_path):
        spec, grid, plan = make_fixture()
        doc = plan_to_doc(plan, grid)
        path = tmp_path / "plan.json"
        write_maskfile(path, doc)
        loaded = load_maskfile(path)
        assert loaded.strategy == "dwm"
        assert loaded.seed == plan.seed
        assert loaded.grid == grid
        np.testing.assert_array_equal(loaded.masked, plan.masked)
        np.testing.assert_array_equal(loaded.visible, plan.visible)
        assert loaded.params["hint_ratio"] == 0.25

    def test_serialization_is_byte_stable(self, tmp_path):
        spec, grid, plan = make_fixture()
        doc = plan_to_doc(plan, grid)
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        write_maskfile(a, doc)
        write_maskfile(b, load_maskfile(a))
        assert a.read_bytes() == b.read_bytes()

    def test_schedule_stamp_round_trip(self, tmp_path):
        rng = np.random.default_rng(1)
        spec = Spectrogram(rng.normal(size=(8, 24)))
        grid = make_grid(spec, 2, 2)
        plan = generate(DwmConfig(mask_ratio=0.5, hint_ratio=0.75), spec, grid, 3)
        stamp = ScheduleStamp(gamma=2.0, total_epochs=300, epoch=150)
        path = tmp_path / "sched.json"
        write_maskfile(path, plan_to_doc(plan, grid, stamp))
        loaded = load_maskfile(path)
        assert loaded.schedule == stamp

    def test_plan_grid_disagreement_rejected(self):
        spec, grid, plan = make_fixture()
        other = make_grid(Spectrogram(np.zeros((8, 24)) + np.arange(24)), 4, 4)
        with pytest.raises(GridMismatch):
            plan_to_doc(plan, other)

    def test_regenerate_reproduces_plan(self):
        spec, grid, plan = make_fixture(seed=17)
        doc = plan_to_doc(plan, grid)
        again = regenerate(doc, spec)
        np.testing.assert_array_equal(again.masked, plan.masked)
        np.testing.assert_array_equal(again.visible, plan.visible)

    def test_regenerate_content_free_without_spectrogram(self):
        spec, grid, plan = make_fixture(seed=23, strategy="random")
        doc = plan_to_doc(plan, grid)
        again = regenerate(doc, None)
        np.testing.assert_array_equal(again.masked, plan.masked)

    def test_regenerate_rejects_wrong_spectrogram(self):
        spec, grid, plan = make_fixture()
        doc = plan_to_doc(plan, grid)
        small = Spectrogram(np.random.default_rng(2).normal(size=(4, 6)))
        with pytest.raises(GridMismatch):
            regenerate(doc, small)


class TestValidation:
    def base_doc(self):
        spec, grid, plan = make_fixture()
        return json.loads(dumps_maskfile(plan_to_doc(plan, grid)))

    def test_valid_document_accepted(self):
        doc = validate_doc(self.base_doc())
        assert isinstance(doc, MaskDoc)

    def test_empty_masked_list_rejected(self):
        raw = self.base_doc()
        raw["masked_indices"] = []
        with pytest.raises(ValidationError):
            validate_doc(raw)

    def test_wrong_count_rejected(self):
        raw = self.base_doc()
        raw["masked_indices"] = raw["masked_indices"][:-1]
        with pytest.raises(ValidationError):
            validate_doc(raw)

    def test_unsorted_indices_rejected(self):
        raw = self.base_doc()
        raw["masked_indices"][0], raw["masked_indices"][1] = (
            raw["masked_indices"][1],
            raw["masked_indices"][0],
        )
        with pytest.raises(ValidationError):
            validate_doc(raw)

    def test_duplicate_indices_rejected(self):
        raw = self.base_doc()
        raw["masked_indices"][1] = raw["masked_indices"][0]
        with pytest.raises(ValidationError):
            validate_doc(raw)

    def test_out_of_range_index_rejected(self):
        raw = self.base_doc()
        raw["masked_indices"][-1] = raw["grid"]["freq_patches"] * raw["grid"]["time_patches"]
        with pytest.raises(ValidationError):
            validate_doc(raw)

    def test_unknown_version_rejected(self):
        raw = self.base_doc()
        raw["version"] = 2
        with pytest.raises(ValidationError):
            validate_doc(raw)

    def test_missing_field_rejected(self):
        raw = self.base_doc()
        del raw["seed"]
        with pytest.raises(ValidationError):
            validate_doc(raw)

    def test_unknown_strategy_rejected(self):
        raw = self.base_doc()
        raw["strategy"] = "checkerboard"
        with pytest.raises(ValidationError):
            validate_doc(raw)

    def test_degenerate_ratio_rejected(self):
        raw = self.base_doc()
        raw["params"]["mask_ratio"] = 0.999
        with pytest.raises(ValidationError):
            validate_doc(raw)

    def test_schedule_hint_disagreement_rejected(self):
        raw = self.base_doc()
        raw["schedule"] = {"gamma": 2.0, "total_epochs": 300, "epoch": 150}
        raw["params"]["hint_ratio"] = 0.5  # schedule says 0.75
        with pytest.raises(ValidationError):
            validate_doc(raw)

    def test_non_json_rejected(self, tmp_path):
        path = tmp_path / "garbage.json"
        path.write_text("{not json")
        with pytest.raises(ValidationError):
            load_maskfile(path)


class TestBitmask:
    def test_round_trip_and_popcount(self, tmp_path):
        spec, grid, plan = make_fixture(seed=5)
        path = tmp_path / "plan.mskp"
        write_bitmask(path, plan)
        total, masked = read_bitmask(path)
        assert total == plan.total
        np.testing.assert_array_equal(masked, plan.masked)
        blob = path.read_bytes()
        popcount = bin(int.from_bytes(blob[12:], "little")).count("1")
        assert popcount == plan.n_masked

    def test_layout(self):
        blob = bitmask_bytes(12, np.array([0, 3, 8, 11]))
        assert blob[:8] == BITMASK_MAGIC
        assert int.from_bytes(blob[8:12], "little") == 12
        assert blob[12:] == bytes([0b00001001, 0b00001001])

    def test_byte_identical_for_same_plan(self, tmp_path):
        _, _, plan_a = make_fixture(seed=9)
        _, _, plan_b = make_fixture(seed=9)
        a, b = tmp_path / "a.mskp", tmp_path / "b.mskp"
        write_bitmask(a, plan_a)
        write_bitmask(b, plan_b)
        assert a.read_bytes() == b.read_bytes()

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "bad.mskp"
        path.write_bytes(b"NOTMAGIC" + b"\x00" * 6)
        with pytest.raises(ValidationError):
            read_bitmask(path)

    def test_wrong_payload_length_rejected(self, tmp_path):
        path = tmp_path / "short.mskp"
        blob = bitmask_bytes(12, np.array([0, 3]))
        path.write_bytes(blob[:-1])
        with pytest.raises(ValidationError):
            read_bitmask(path)

    def test_stray_high_bits_rejected(self, tmp_path):
        path = tmp_path / "stray.mskp"
        blob = bytearray(bitmask_bytes(12, np.array([0, 3])))
        blob[-1] |= 0b10000000  # bit 15 of a 12-bit mask
        path.write_bytes(bytes(blob))
        with pytest.raises(ValidationError):
            read_bitmask(path)
