"""Mask plan serialization.

Two formats:

* a structured JSON document carrying the full parameter snapshot, so any
  plan on disk can be audited and regenerated bit-for-bit, and
* a compact binary bitmask (magic ``MSKPLAN1``) for pipeline consumption.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass
from typing import Any

import numpy as np

from .errors import DegenerateRatio, GridMismatch, IoFailure, ValidationError
from .features import Spectrogram
from .grid import METRICS, PatchGrid, make_grid
from .strategies import (
    DwmConfig,
    HintSchedule,
    IbmConfig,
    MaskPlan,
    RandomConfig,
    SgimConfig,
    StrategyConfig,
    generate,
    hint_ratio,
    split_counts,
)

FORMAT_VERSION = 1
BITMASK_MAGIC = b"MSKPLAN1"

_STRATEGIES = ("random", "ibm", "sgim", "dwm")


@dataclass(frozen=True)
class ScheduleStamp:
    """Schedule provenance recorded when the hint ratio came from Eq.-style
    scheduling rather than an explicit flag."""

    gamma: float
    total_epochs: int
    epoch: int


@dataclass
class MaskDoc:
    version: int
    grid: PatchGrid
    strategy: str
    params: dict[str, Any]
    seed: int
    masked: np.ndarray
    schedule: ScheduleStamp | None = None

    @property
    def total(self) -> int:
        return self.grid.total

    @property
    def visible(self) -> np.ndarray:
        everything = np.arange(self.total, dtype=np.int64)
        return np.setdiff1d(everything, self.masked)


def plan_to_doc(
    plan: MaskPlan, grid: PatchGrid, schedule: ScheduleStamp | None = None
) -> MaskDoc:
    if plan.total != grid.total:
        raise GridMismatch(
            f"plan covers {plan.total} patches but grid has {grid.total}"
        )
    return MaskDoc(
        version=FORMAT_VERSION,
        grid=grid,
        strategy=plan.strategy,
        params=dict(plan.params),
        seed=plan.seed,
        masked=plan.masked.copy(),
        schedule=schedule,
    )


def _doc_to_json(doc: MaskDoc) -> dict[str, Any]:
    body: dict[str, Any] = {
        "version": doc.version,
        "grid": {
            "freq_patches": doc.grid.freq_patches,
            "time_patches": doc.grid.time_patches,
            "patch_h": doc.grid.patch_h,
            "patch_w": doc.grid.patch_w,
        },
        "strategy": doc.strategy,
        "params": doc.params,
        "seed": doc.seed,
        "masked_indices": [int(i) for i in doc.masked],
    }
    if doc.schedule is not None:
        body["schedule"] = {
            "gamma": doc.schedule.gamma,
            "total_epochs": doc.schedule.total_epochs,
            "epoch": doc.schedule.epoch,
        }
    return body


def dumps_maskfile(doc: MaskDoc) -> str:
    return json.dumps(_doc_to_json(doc), indent=2, sort_keys=True) + "\n"


def write_maskfile(path, doc: MaskDoc) -> None:
    text = dumps_maskfile(doc)
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoFailure(f"cannot write mask file {path}: {exc}") from exc


def _expect(cond: bool, message: str) -> None:
    if not cond:
        raise ValidationError(message)


def _as_int(value: Any, name: str) -> int:
    _expect(isinstance(value, int) and not isinstance(value, bool), f"{name} must be an integer")
    return value


def validate_doc(raw: dict[str, Any]) -> MaskDoc:
    """Check structural and semantic invariants of a parsed mask document.

    Rejects anything a correct writer could not have produced: bad counts,
    unsorted or out-of-range indices, parameter snapshots that disagree with
    the index list.
    """
    _expect(isinstance(raw, dict), "mask file must be a JSON object")
    _expect(raw.get("version") == FORMAT_VERSION, "unsupported mask file version")
    for key in ("grid", "strategy", "params", "seed", "masked_indices"):
        _expect(key in raw, f"missing field: {key}")

    grid_raw = raw["grid"]
    _expect(isinstance(grid_raw, dict), "grid must be an object")
    dims = {}
    for key in ("freq_patches", "time_patches", "patch_h", "patch_w"):
        _expect(key in grid_raw, f"grid missing field: {key}")
        dims[key] = _as_int(grid_raw[key], f"grid.{key}")
        _expect(dims[key] >= 1, f"grid.{key} must be positive")
    grid = PatchGrid(truncated=False, **dims)
    total = grid.total

    strategy = raw["strategy"]
    _expect(strategy in _STRATEGIES, f"unknown strategy: {strategy!r}")
    params = raw["params"]
    _expect(isinstance(params, dict), "params must be an object")
    _expect("mask_ratio" in params, "params missing mask_ratio")
    mask_ratio = params["mask_ratio"]
    _expect(
        isinstance(mask_ratio, (int, float)) and 0.0 < float(mask_ratio) < 1.0,
        "mask_ratio must be in (0, 1)",
    )
    seed = _as_int(raw["seed"], "seed")
    _expect(seed >= 0, "seed must be non-negative")

    indices = raw["masked_indices"]
    _expect(isinstance(indices, list), "masked_indices must be a list")
    masked = np.asarray([_as_int(i, "masked index") for i in indices], dtype=np.int64)
    if masked.size:
        _expect(bool(np.all(np.diff(masked) > 0)), "masked_indices must be strictly increasing")
        _expect(int(masked[0]) >= 0 and int(masked[-1]) < total, "masked index out of range")
    try:
        _, n_mask = split_counts(total, float(mask_ratio))
    except DegenerateRatio as exc:
        raise ValidationError(str(exc)) from exc
    _expect(
        masked.size == n_mask,
        f"masked_indices length {masked.size} does not match mask_ratio "
        f"(expected {n_mask} of {total})",
    )

    if strategy in ("sgim", "dwm"):
        _expect("hint_ratio" in params, "params missing hint_ratio")
        hint_value = params["hint_ratio"]
        _expect(
            isinstance(hint_value, (int, float)) and 0.0 <= float(hint_value) <= 1.0,
            "hint_ratio must be in [0, 1]",
        )
    if strategy == "ibm":
        for key in ("block_h", "block_w"):
            _expect(key in params, f"params missing {key}")
            _expect(_as_int(params[key], key) >= 1, f"{key} must be positive")
    if strategy == "dwm":
        _expect(params.get("metric") in METRICS, "unknown dispersion metric")
        eps = params.get("epsilon")
        _expect(isinstance(eps, (int, float)) and float(eps) > 0.0, "epsilon must be positive")
    if strategy == "sgim":
        sigma = params.get("sigma")
        _expect(
            isinstance(sigma, (int, float)) and float(sigma) > 0.0,
            "sigma must be positive",
        )

    schedule = None
    if "schedule" in raw:
        sched_raw = raw["schedule"]
        _expect(isinstance(sched_raw, dict), "schedule must be an object")
        for key in ("gamma", "total_epochs", "epoch"):
            _expect(key in sched_raw, f"schedule missing field: {key}")
        gamma = sched_raw["gamma"]
        _expect(isinstance(gamma, (int, float)) and float(gamma) > 0.0, "gamma must be positive")
        total_epochs = _as_int(sched_raw["total_epochs"], "total_epochs")
        epoch = _as_int(sched_raw["epoch"], "epoch")
        _expect(total_epochs >= 1, "total_epochs must be positive")
        _expect(0 <= epoch <= total_epochs, "epoch out of schedule range")
        schedule = ScheduleStamp(gamma=float(gamma), total_epochs=total_epochs, epoch=epoch)
        if "hint_ratio" in params:
            expected = hint_ratio(
                HintSchedule(gamma=schedule.gamma, total_epochs=schedule.total_epochs),
                schedule.epoch,
            )
            _expect(
                math.isclose(float(params["hint_ratio"]), expected, rel_tol=0.0, abs_tol=1e-12),
                "hint_ratio disagrees with recorded schedule",
            )

    return MaskDoc(
        version=FORMAT_VERSION,
        grid=grid,
        strategy=strategy,
        params=params,
        seed=seed,
        masked=masked,
        schedule=schedule,
    )


def load_maskfile(path) -> MaskDoc:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise IoFailure(f"cannot read mask file {path}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"mask file is not valid JSON: {exc}") from exc
    return validate_doc(raw)


def config_from_doc(doc: MaskDoc) -> StrategyConfig:
    params = doc.params
    mask_ratio = float(params["mask_ratio"])
    if doc.strategy == "random":
        return RandomConfig(mask_ratio=mask_ratio)
    if doc.strategy == "ibm":
        return IbmConfig(
            mask_ratio=mask_ratio,
            block_h=int(params["block_h"]),
            block_w=int(params["block_w"]),
        )
    if doc.strategy == "sgim":
        return SgimConfig(
            mask_ratio=mask_ratio,
            hint_ratio=float(params["hint_ratio"]),
            sigma=float(params["sigma"]),
        )
    return DwmConfig(
        mask_ratio=mask_ratio,
        hint_ratio=float(params["hint_ratio"]),
        metric=str(params["metric"]),
        epsilon=float(params["epsilon"]),
    )


def regenerate(doc: MaskDoc, spec: Spectrogram | None = None) -> MaskPlan:
    """Re-run the strategy from the stored parameter snapshot.

    For content-aware strategies the original spectrogram must be supplied
    and must produce the same patch grid."""
    config = config_from_doc(doc)
    grid = doc.grid
    if spec is not None:
        grid = make_grid(spec, doc.grid.patch_h, doc.grid.patch_w)
        if (grid.freq_patches, grid.time_patches) != (
            doc.grid.freq_patches,
            doc.grid.time_patches,
        ):
            raise GridMismatch(
                "spectrogram yields a "
                f"{grid.freq_patches}x{grid.time_patches} patch grid, mask file "
                f"records {doc.grid.freq_patches}x{doc.grid.time_patches}"
            )
    return generate(config, spec, grid, doc.seed)


def bitmask_bytes(plan_total: int, masked: np.ndarray) -> bytes:
    bits = np.zeros(plan_total, dtype=np.uint8)
    bits[np.asarray(masked, dtype=np.int64)] = 1
    packed = np.packbits(bits, bitorder="little")
    return BITMASK_MAGIC + struct.pack("<I", plan_total) + packed.tobytes()


def write_bitmask(path, plan: MaskPlan) -> None:
    try:
        with open(path, "wb") as fh:
            fh.write(bitmask_bytes(plan.total, plan.masked))
    except OSError as exc:
        raise IoFailure(f"cannot write bitmask {path}: {exc}") from exc


def read_bitmask(path) -> tuple[int, np.ndarray]:
    """Return (total, masked_indices) from a bitmask file."""
    try:
        with open(path, "rb") as fh:
            blob = fh.read()
    except OSError as exc:
        raise IoFailure(f"cannot read bitmask {path}: {exc}") from exc
    header = len(BITMASK_MAGIC) + 4
    if len(blob) < header or blob[: len(BITMASK_MAGIC)] != BITMASK_MAGIC:
        raise ValidationError("not a bitmask file (bad magic)")
    (total,) = struct.unpack("<I", blob[len(BITMASK_MAGIC) : header])
    n_bytes = (total + 7) // 8
    if len(blob) != header + n_bytes:
        raise ValidationError(
            f"bitmask payload is {len(blob) - header} bytes, expected {n_bytes}"
        )
    bits = np.unpackbits(
        np.frombuffer(blob, dtype=np.uint8, offset=header), bitorder="little"
    )
    if np.any(bits[total:]):
        raise ValidationError("bitmask has set bits beyond the patch count")
    return int(total), np.nonzero(bits[:total])[0].astype(np.int64)
