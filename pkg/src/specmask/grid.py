"""Patch grids over spectrograms and per-patch dispersion statistics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .errors import PatchLargerThanInput
from .features import Spectrogram

METRICS = {"mad": kernels.MAD, "std": kernels.STD, "energy": kernels.ENERGY}


@dataclass(frozen=True)
class PatchGrid:
    freq_patches: int
    time_patches: int
    patch_h: int
    patch_w: int
    truncated: bool = False

    @property
    def total(self) -> int:
        """Total number of patches L."""
        return self.freq_patches * self.time_patches

    def flatten(self, row: int, col: int) -> int:
        return row * self.time_patches + col

    def unflatten(self, index: int) -> tuple[int, int]:
        return divmod(index, self.time_patches)


@dataclass(frozen=True)
class PatchStats:
    dispersion: np.ndarray  # length L, all finite and >= 0
    metric: str


def make_grid(spec: Spectrogram, patch_h: int, patch_w: int) -> PatchGrid:
    """Partition a spectrogram into equal patches; remainder bins/frames are
    dropped and flagged via ``truncated``."""
    patch_h, patch_w = int(patch_h), int(patch_w)
    if patch_h < 1 or patch_w < 1:
        raise ValueError("patch dimensions must be >= 1")
    if patch_h > spec.n_mels or patch_w > spec.n_frames:
        raise PatchLargerThanInput(
            f"patch {patch_h}x{patch_w} exceeds spectrogram {spec.n_mels}x{spec.n_frames}"
        )
    fp = spec.n_mels // patch_h
    tp = spec.n_frames // patch_w
    return PatchGrid(
        freq_patches=fp,
        time_patches=tp,
        patch_h=patch_h,
        patch_w=patch_w,
        truncated=(fp * patch_h < spec.n_mels) or (tp * patch_w < spec.n_frames),
    )


def check_grid(spec: Spectrogram, grid: PatchGrid) -> None:
    if (
        grid.freq_patches * grid.patch_h > spec.n_mels
        or grid.time_patches * grid.patch_w > spec.n_frames
    ):
        raise PatchLargerThanInput("grid does not fit the spectrogram")


def patch_matrix(spec: Spectrogram, grid: PatchGrid) -> np.ndarray:
    """Flattened patch vectors, shape (L, patch_h * patch_w), row-major cells."""
    check_grid(spec, grid)
    fp, tp, ph, pw = grid.freq_patches, grid.time_patches, grid.patch_h, grid.patch_w
    return (
        spec.data[: fp * ph, : tp * pw]
        .reshape(fp, ph, tp, pw)
        .transpose(0, 2, 1, 3)
        .reshape(fp * tp, ph * pw)
    )


def patch_dispersion(spec: Spectrogram, grid: PatchGrid, metric: str = "mad") -> PatchStats:
    """Per-patch dispersion: mean absolute deviation around the patch mean
    (default), population standard deviation, or mean squared value."""
    if metric not in METRICS:
        raise ValueError(f"metric must be one of {sorted(METRICS)}")
    check_grid(spec, grid)
    omega = kernels.patch_stats(
        np.ascontiguousarray(spec.data),
        grid.freq_patches,
        grid.time_patches,
        grid.patch_h,
        grid.patch_w,
        METRICS[metric],
    )
    return PatchStats(dispersion=omega, metric=metric)
