"""Rendering tests: geometry, dimming, orientation, byte determinism."""

import numpy as np
import pytest
from PIL import Image

from specmask.errors import GridMismatch
from specmask.features import Spectrogram
from specmask.grid import make_grid
from specmask.strategies import MaskPlan, mask_random
from specmask.sampling import SeededRng
from specmask.viz import DIM_FACTOR, render_panel, render_panels, save_png


def plan_masking(total, masked):
    masked = np.asarray(masked, dtype=np.int64)
    visible = np.setdiff1d(np.arange(total, dtype=np.int64), masked)
    return MaskPlan(total=total, visible=visible, masked=masked, strategy="random")


class TestRenderPanel:
    def test_pixel_dimensions(self):
        spec = Spectrogram(np.random.default_rng(0).normal(size=(8, 12)))
        grid = make_grid(spec, 2, 2)
        plan = mask_random(grid.total, 0.5, SeededRng(0))
        for zoom in (1, 3):
            image = render_panel(spec, grid, plan, zoom=zoom)
            assert image.shape == (8 * zoom, 12 * zoom)
            assert image.dtype == np.uint8

    def test_masked_patches_dimmed(self):
        spec = Spectrogram(np.vstack([np.zeros((2, 4)), np.full((2, 4), 4.0)]))
        grid = make_grid(spec, 2, 2)
        nothing = render_panel(spec, grid, plan_masking(4, []), zoom=1)
        everything = render_panel(
            spec, grid, plan_masking(4, [0, 1, 2, 3]), zoom=1
        )
        assert nothing.max() == 255
        np.testing.assert_array_equal(
            everything, np.rint(nothing * DIM_FACTOR).astype(np.uint8)
        )

    def test_low_frequencies_at_bottom(self):
        data = np.zeros((4, 4))
        data[0, :] = 9.0  # lowest mel row is brightest
        spec = Spectrogram(data)
        grid = make_grid(spec, 2, 2)
        image = render_panel(spec, grid, plan_masking(4, []), zoom=1)
        assert image[-1].min() == 255 and image[0].max() == 0

    def test_dimming_footprint_matches_grid_cell(self):
        spec = Spectrogram(np.full((4, 6), 2.0) + np.diag(np.ones(4)) @ np.ones((4, 6)))
        grid = make_grid(spec, 2, 3)
        base = render_panel(spec, grid, plan_masking(4, []), zoom=1)
        one = render_panel(spec, grid, plan_masking(4, [1]), zoom=1)
        changed = np.flipud(base != one)  # back to spectrogram orientation
        expected = np.zeros((4, 6), dtype=bool)
        expected[0:2, 3:6] = True
        assert np.array_equal(changed & expected, changed)
        assert changed[0:2, 3:6].any()

    def test_constant_input_mid_gray(self):
        spec = Spectrogram(np.full((4, 4), 7.0))
        grid = make_grid(spec, 2, 2)
        image = render_panel(spec, grid, plan_masking(4, []), zoom=2)
        assert np.all(image == 128)

    def test_grid_mismatch_rejected(self):
        spec = Spectrogram(np.random.default_rng(1).normal(size=(8, 12)))
        grid = make_grid(spec, 2, 2)
        with pytest.raises(GridMismatch):
            render_panel(spec, grid, plan_masking(10, [0]), zoom=1)

    def test_bad_zoom_rejected(self):
        spec = Spectrogram(np.random.default_rng(2).normal(size=(4, 4)))
        grid = make_grid(spec, 2, 2)
        with pytest.raises(ValueError):
            render_panel(spec, grid, plan_masking(4, [0]), zoom=0)


class TestRenderPanels:
    def test_vertical_stack(self):
        spec = Spectrogram(np.random.default_rng(3).normal(size=(8, 12)))
        grid = make_grid(spec, 2, 2)
        plans = [mask_random(grid.total, 0.5, SeededRng(s)) for s in (0, 1, 2)]
        image = render_panels(spec, grid, plans, zoom=2)
        assert image.shape == (3 * 16, 24)
        top = render_panel(spec, grid, plans[0], zoom=2)
        np.testing.assert_array_equal(image[:16], top)

    def test_empty_plan_list_rejected(self):
        spec = Spectrogram(np.random.default_rng(4).normal(size=(4, 4)))
        with pytest.raises(ValueError):
            render_panels(spec, make_grid(spec, 2, 2), [], zoom=1)


class TestSavePng:
    def test_round_trip_and_determinism(self, tmp_path):
        spec = Spectrogram(np.random.default_rng(5).normal(size=(8, 12)))
        grid = make_grid(spec, 2, 2)
        image = render_panel(spec, grid, mask_random(grid.total, 0.7, SeededRng(1)))
        a, b = tmp_path / "a.png", tmp_path / "b.png"
        save_png(a, image)
        save_png(b, image)
        assert a.read_bytes() == b.read_bytes()
        np.testing.assert_array_equal(np.asarray(Image.open(a)), image)

    def test_rejects_non_uint8(self, tmp_path):
        with pytest.raises(ValueError):
            save_png(tmp_path / "x.png", np.zeros((4, 4)))
