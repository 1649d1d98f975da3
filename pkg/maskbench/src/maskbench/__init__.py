"""Mask-plan bindings for training pipelines.

Two calls: :func:`generate_mask` plans one mask over a 2-D array, and
:func:`hint_ratio_schedule` tabulates the annealing curve. Feature
extraction is deliberately out of scope; pipelines already own their
spectrograms.

Configs are plain dicts with a ``kind`` key (``random``, ``ibm``, ``sgim``,
``dwm``) plus that strategy's keyword parameters, so callers never import
the core library. Core errors re-raise as this module's exception classes
of the same names; ordinary ``ValueError``/``TypeError`` pass through
unchanged. Everything here is reentrant: no global mutable state, safe to
call from multiple threads.
"""

from __future__ import annotations

import numpy as np

import specmask as _core

__version__ = "0.1.0"

__all__ = [
    "DegenerateRatio",
    "DisconnectedSimilarity",
    "EpochOutOfRange",
    "GridMismatch",
    "MaskbenchError",
    "NonFiniteValue",
    "PatchLargerThanInput",
    "generate_mask",
    "hint_ratio_schedule",
]


class MaskbenchError(Exception):
    """Base class for errors translated from the core library."""


class DegenerateRatio(MaskbenchError):
    """The requested ratio leaves nothing visible or nothing masked."""


class GridMismatch(MaskbenchError):
    """Array and patch geometry do not produce a usable grid."""


class PatchLargerThanInput(MaskbenchError):
    """A patch dimension exceeds the array in that direction."""


class DisconnectedSimilarity(MaskbenchError):
    """The similarity graph cannot support a spectral bipartition."""


class NonFiniteValue(MaskbenchError):
    """The input array contains NaN or infinity."""


class EpochOutOfRange(MaskbenchError):
    """An epoch index falls outside 0..total_epochs."""


_MIRRORS = {
    "DegenerateRatio": DegenerateRatio,
    "GridMismatch": GridMismatch,
    "PatchLargerThanInput": PatchLargerThanInput,
    "DisconnectedSimilarity": DisconnectedSimilarity,
    "NonFiniteValue": NonFiniteValue,
    "EpochOutOfRange": EpochOutOfRange,
}

_CONFIGS = {
    "random": _core.RandomConfig,
    "ibm": _core.IbmConfig,
    "sgim": _core.SgimConfig,
    "dwm": _core.DwmConfig,
}


def _build_config(config):
    if isinstance(config, tuple(_CONFIGS.values())):
        return config
    if not isinstance(config, dict):
        raise TypeError("config must be a dict with a 'kind' key or a core config object")
    params = dict(config)
    kind = params.pop("kind", None)
    if kind not in _CONFIGS:
        raise ValueError(f"kind must be one of {sorted(_CONFIGS)}, got {kind!r}")
    return _CONFIGS[kind](**params)


def generate_mask(array, config, patch, seed):
    """Plan one mask over ``array``; returns (masked_indices, visible_indices).

    ``array`` is any 2-D buffer acceptable to numpy; float64 input is read
    without copying. ``patch`` is an (height, width) pair; the grid is the
    largest whole-patch tiling anchored at the origin. Index lists are
    sorted, disjoint, and cover the grid.
    """
    patch_h, patch_w = patch
    try:
        spec = _core.Spectrogram(np.asarray(array))
        grid = _core.make_grid(spec, int(patch_h), int(patch_w))
        plan = _core.generate(_build_config(config), spec, grid, seed)
    except _core.SpecmaskError as exc:
        mirror = _MIRRORS.get(type(exc).__name__)
        if mirror is None:
            raise MaskbenchError(str(exc)) from exc
        raise mirror(str(exc)) from exc
    return plan.masked.tolist(), plan.visible.tolist()


def hint_ratio_schedule(gamma, total_epochs):
    """Hint ratios for epochs 0..total_epochs inclusive: starts at 1.0,
    anneals to 0.0 along 1 - (epoch/total)^gamma."""
    schedule = _core.HintSchedule(gamma=gamma, total_epochs=total_epochs)
    return [_core.hint_ratio(schedule, epoch) for epoch in range(total_epochs + 1)]
