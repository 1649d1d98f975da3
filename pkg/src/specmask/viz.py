"""Grayscale mask-plan rendering.

A panel shows the spectrogram (low frequencies at the bottom) with masked
patches dimmed; several plans stack vertically into one comparison image.
Output is a plain 8-bit PNG so identical inputs give identical bytes.
"""

from __future__ import annotations

import numpy as np
from PIL import Image

from .errors import GridMismatch, IoFailure
from .features import Spectrogram
from .grid import PatchGrid, check_grid
from .strategies import MaskPlan

DIM_FACTOR = 0.35
DEFAULT_ZOOM = 4


def _to_gray(data: np.ndarray) -> np.ndarray:
    lo = float(data.min())
    hi = float(data.max())
    if hi <= lo:
        return np.full(data.shape, 128, dtype=np.uint8)
    scaled = (data - lo) * (255.0 / (hi - lo))
    return np.rint(scaled).astype(np.uint8)


def _mask_map(spec: Spectrogram, grid: PatchGrid, plan: MaskPlan) -> np.ndarray:
    masked = np.zeros((spec.n_mels, spec.n_frames), dtype=bool)
    rows, cols = np.divmod(plan.masked, grid.time_patches)
    for r, c in zip(rows, cols):
        masked[
            r * grid.patch_h : (r + 1) * grid.patch_h,
            c * grid.patch_w : (c + 1) * grid.patch_w,
        ] = True
    return masked


def render_panel(
    spec: Spectrogram,
    grid: PatchGrid,
    plan: MaskPlan,
    zoom: int = DEFAULT_ZOOM,
) -> np.ndarray:
    """One (n_mels * zoom, n_frames * zoom) uint8 image for a single plan."""
    if zoom < 1:
        raise ValueError("zoom must be >= 1")
    check_grid(spec, grid)
    if plan.total != grid.total:
        raise GridMismatch(
            f"plan covers {plan.total} patches but grid has {grid.total}"
        )
    gray = _to_gray(spec.data).astype(np.float64)
    gray[_mask_map(spec, grid, plan)] *= DIM_FACTOR
    image = np.rint(gray).astype(np.uint8)
    image = np.flipud(image)  # render low frequencies at the bottom
    return np.repeat(np.repeat(image, zoom, axis=0), zoom, axis=1)


def render_panels(
    spec: Spectrogram,
    grid: PatchGrid,
    plans: list[MaskPlan],
    zoom: int = DEFAULT_ZOOM,
) -> np.ndarray:
    if not plans:
        raise ValueError("need at least one plan")
    return np.vstack([render_panel(spec, grid, p, zoom) for p in plans])


def save_png(path, image: np.ndarray) -> None:
    if image.dtype != np.uint8 or image.ndim != 2:
        raise ValueError("expected a 2-D uint8 image")
    try:
        Image.fromarray(image, mode="L").save(path, format="PNG")
    except OSError as exc:
        raise IoFailure(f"cannot write image {path}: {exc}") from exc
