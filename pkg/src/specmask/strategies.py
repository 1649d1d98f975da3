"""The four masking strategies and the hint-ratio scheduler.

Every strategy returns a :class:`MaskPlan` whose visible and masked index
sets partition {0..L-1} with |masked| = L - floor(L * (1 - mask_ratio)).
The dispersion-weighted strategy follows the five-step procedure exactly:
patch dispersion is turned into sampling probabilities P(i) proportional to
(omega_i + epsilon), an initial mask is drawn without replacement, a hint
subset is returned to the visible side, and an equal-sized cover set is
re-masked from the enlarged visible pool to hold the ratio.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import ClassVar, Union

import numpy as np

from ._backend import kernels
from .errors import DegenerateRatio, DisconnectedSimilarity, EpochOutOfRange, GridMismatch
from .features import Spectrogram
from .grid import METRICS, PatchGrid, patch_dispersion, patch_matrix
from .sampling import SeededRng, sample_uniform, sample_weighted

SIMILARITY_FLOOR = 1e-12
_ANCHOR_CHUNK = 16


def _check_ratio(value: float, name: str = "mask_ratio") -> None:
    if not (0.0 < value < 1.0):
        raise ValueError(f"{name} must lie strictly between 0 and 1")


@dataclass(frozen=True)
class RandomConfig:
    kind: ClassVar[str] = "random"
    mask_ratio: float = 0.7

    def __post_init__(self):
        _check_ratio(self.mask_ratio)


@dataclass(frozen=True)
class IbmConfig:
    kind: ClassVar[str] = "ibm"
    mask_ratio: float = 0.7
    block_h: int = 5
    block_w: int = 5

    def __post_init__(self):
        _check_ratio(self.mask_ratio)
        if self.block_h < 1 or self.block_w < 1:
            raise ValueError("block dimensions must be >= 1")


@dataclass(frozen=True)
class SgimConfig:
    kind: ClassVar[str] = "sgim"
    mask_ratio: float = 0.7
    hint_ratio: float = 0.0
    sigma: float | None = None  # None: median pairwise distance heuristic

    def __post_init__(self):
        _check_ratio(self.mask_ratio)
        if not (0.0 <= self.hint_ratio <= 1.0):
            raise ValueError("hint_ratio must lie in [0, 1]")
        if self.sigma is not None and not self.sigma > 0:
            raise ValueError("sigma must be positive")


@dataclass(frozen=True)
class DwmConfig:
    kind: ClassVar[str] = "dwm"
    mask_ratio: float = 0.7
    hint_ratio: float = 0.0
    metric: str = "mad"
    epsilon: float = 1e-8

    def __post_init__(self):
        _check_ratio(self.mask_ratio)
        if not (0.0 <= self.hint_ratio <= 1.0):
            raise ValueError("hint_ratio must lie in [0, 1]")
        if self.metric not in METRICS:
            raise ValueError(f"metric must be one of {sorted(METRICS)}")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")


StrategyConfig = Union[RandomConfig, IbmConfig, SgimConfig, DwmConfig]


@dataclass
class MaskPlan:
    """Disjoint visible/masked index sets over a grid plus provenance."""

    total: int
    visible: np.ndarray  # sorted int64
    masked: np.ndarray  # sorted int64
    strategy: str
    params: dict = field(default_factory=dict)
    seed: int = 0

    @property
    def n_masked(self) -> int:
        return int(self.masked.size)


def split_counts(total: int, mask_ratio: float) -> tuple[int, int]:
    """(n_keep, n_mask) with n_keep = floor(L * (1 - mask_ratio)).

    Raises DegenerateRatio when either side would be empty: masked
    prediction is undefined with nothing visible or nothing masked.
    """
    n_keep = int(np.floor(total * (1.0 - mask_ratio)))
    n_mask = total - n_keep
    if n_keep == 0 or n_mask == 0:
        raise DegenerateRatio(
            f"mask_ratio {mask_ratio} on {total} patches leaves keep={n_keep}, mask={n_mask}"
        )
    return n_keep, n_mask


def _plan(total, visible, masked, strategy, params, rng) -> MaskPlan:
    return MaskPlan(
        total=total,
        visible=np.asarray(visible, dtype=np.int64),
        masked=np.asarray(masked, dtype=np.int64),
        strategy=strategy,
        params=params,
        seed=rng.seed,
    )


def hint_exchange(
    total: int, masked0: np.ndarray, visible0: np.ndarray, n_hint: int, rng: SeededRng
) -> tuple[np.ndarray, np.ndarray]:
    """Return ``n_hint`` masked patches to the visible side, then re-mask an
    equal count drawn uniformly from the enlarged visible pool (which may
    re-mask a just-returned hint)."""
    if n_hint == 0:
        return visible0, masked0
    hints = sample_uniform(masked0, n_hint, rng)
    v_temp = np.union1d(visible0, hints)
    cover = sample_uniform(v_temp, n_hint, rng)
    visible = np.setdiff1d(v_temp, cover)
    masked = np.setdiff1d(np.arange(total, dtype=np.int64), visible)
    return visible, masked


def mask_random(total: int, mask_ratio: float, rng: SeededRng) -> MaskPlan:
    """Uniformly random mask: every N_mask-subset equally probable."""
    _, n_mask = split_counts(total, mask_ratio)
    masked = sample_uniform(np.arange(total, dtype=np.int64), n_mask, rng)
    visible = np.setdiff1d(np.arange(total, dtype=np.int64), masked)
    return _plan(total, visible, masked, "random", {"mask_ratio": mask_ratio}, rng)


def _ibm_reveal(
    grid: PatchGrid, n_keep: int, block_h: int, block_w: int, rng: SeededRng
):
    """Start fully masked; reveal random blocks (anchors uniform over all
    cells, clipped at the edges) until at least n_keep cells are visible.
    Returns the visible map, the consumed anchors, and the overshoot."""
    fp, tp = grid.freq_patches, grid.time_patches
    visible = np.zeros((fp, tp), dtype=np.uint8)
    anchors: list[tuple[int, int]] = []
    count = 0
    while count < n_keep:
        u = rng.doubles(2 * _ANCHOR_CHUNK)
        rows = np.minimum((u[0::2] * fp).astype(np.int64), fp - 1)
        cols = np.minimum((u[1::2] * tp).astype(np.int64), tp - 1)
        count, used = kernels.reveal_blocks(
            visible, rows, cols, block_h, block_w, n_keep, count
        )
        anchors.extend(zip(rows[:used].tolist(), cols[:used].tolist()))
    return visible, anchors, count - n_keep


def mask_ibm(
    grid: PatchGrid, mask_ratio: float, block_h: int, block_w: int, rng: SeededRng
) -> MaskPlan:
    """Inverse block masking: reveal overlapping blocks until the visible
    budget is met, then re-mask uniformly chosen visible patches so the
    masked count is exact."""
    total = grid.total
    n_keep, _ = split_counts(total, mask_ratio)
    visible_map, _, overshoot = _ibm_reveal(grid, n_keep, block_h, block_w, rng)
    visible = np.flatnonzero(visible_map.reshape(-1)).astype(np.int64)
    if overshoot > 0:
        remask = sample_uniform(visible, overshoot, rng)
        visible = np.setdiff1d(visible, remask)
    masked = np.setdiff1d(np.arange(total, dtype=np.int64), visible)
    params = {"mask_ratio": mask_ratio, "block_h": block_h, "block_w": block_w}
    return _plan(total, visible, masked, "ibm", params, rng)


def _median_pairwise_distance(sq_dists: np.ndarray) -> float:
    iu = np.triu_indices(sq_dists.shape[0], k=1)
    return float(np.median(np.sqrt(sq_dists[iu])))


def relevance_from_similarity(similarity: np.ndarray, dispersion: np.ndarray) -> np.ndarray:
    """Signed relevance scores from a patch similarity matrix.

    Builds the symmetric-normalized Laplacian, takes the eigenvector of the
    second-smallest eigenvalue, and orients it so the sign-partition side
    with higher mean dispersion carries positive scores.
    """
    w = np.maximum(np.asarray(similarity, dtype=np.float64), SIMILARITY_FLOOR)
    degrees = w.sum(axis=1)
    if np.any(degrees <= 0):
        raise DisconnectedSimilarity("zero-degree node in similarity graph")
    inv_sqrt = 1.0 / np.sqrt(degrees)
    lap = np.eye(w.shape[0]) - (w * inv_sqrt[:, None]) * inv_sqrt[None, :]
    _, fiedler = kernels.fiedler_vector(np.ascontiguousarray(lap))

    # deterministic base orientation before the dispersion vote
    peak = int(np.argmax(np.abs(fiedler)))
    if fiedler[peak] < 0:
        fiedler = -fiedler
    pos = fiedler > 0
    if pos.any() and (~pos).any():
        if dispersion[~pos].mean() > dispersion[pos].mean():
            fiedler = -fiedler
    return fiedler


def _sgim_scores(
    spec: Spectrogram, grid: PatchGrid, sigma: float | None
) -> tuple[np.ndarray, float]:
    if grid.total < 2:
        raise ValueError("need at least 2 patches")
    vectors = patch_matrix(spec, grid)
    sq_norms = np.einsum("ij,ij->i", vectors, vectors)
    sq_dists = np.maximum(sq_norms[:, None] + sq_norms[None, :] - 2.0 * vectors @ vectors.T, 0.0)
    if not np.any(sq_dists > 0):
        raise DisconnectedSimilarity("all patch vectors identical; bipartition undefined")
    if sigma is None:
        sigma = _median_pairwise_distance(sq_dists)
        if sigma <= 0:
            raise DisconnectedSimilarity("median pairwise distance is zero")
    similarity = np.exp(-sq_dists / (2.0 * sigma * sigma))
    dispersion = patch_dispersion(spec, grid, "mad").dispersion
    return relevance_from_similarity(similarity, dispersion), float(sigma)


def sgim_relevance(
    spec: Spectrogram, grid: PatchGrid, sigma: float | None = None
) -> np.ndarray:
    """Object-relevance scores from a spectral bipartition of the patch
    similarity graph (Gaussian kernel over raw flattened patch vectors,
    bandwidth defaulting to the median pairwise distance)."""
    return _sgim_scores(spec, grid, sigma)[0]


def mask_sgim(
    spec: Spectrogram,
    grid: PatchGrid,
    mask_ratio: float,
    hint_ratio: float,
    sigma: float | None,
    rng: SeededRng,
) -> MaskPlan:
    """Rank patches by relevance score, mask the top N_mask (ties to the
    lower flat index), then apply the hint exchange."""
    total = grid.total
    _, n_mask = split_counts(total, mask_ratio)
    scores, resolved_sigma = _sgim_scores(spec, grid, sigma)
    order = np.argsort(-scores, kind="stable")
    masked0 = np.sort(order[:n_mask]).astype(np.int64)
    visible0 = np.setdiff1d(np.arange(total, dtype=np.int64), masked0)
    n_hint = int(np.floor(n_mask * hint_ratio))
    visible, masked = hint_exchange(total, masked0, visible0, n_hint, rng)
    params = {
        "mask_ratio": mask_ratio,
        "hint_ratio": hint_ratio,
        "sigma": resolved_sigma,
        "relevance_features": "raw_patch_pixels",  # stand-in for model features
    }
    return _plan(total, visible, masked, "sgim", params, rng)


def mask_dwm(
    spec: Spectrogram,
    grid: PatchGrid,
    mask_ratio: float,
    hint_ratio: float,
    metric: str,
    epsilon: float,
    rng: SeededRng,
) -> MaskPlan:
    """Dispersion-weighted masking.

    P(i) = (omega_i + epsilon) / sum_j (omega_j + epsilon); the initial mask
    is a weighted draw without replacement, followed by the hint exchange.
    """
    total = grid.total
    if total < 2:
        raise ValueError("need at least 2 patches")
    _, n_mask = split_counts(total, mask_ratio)
    omega = patch_dispersion(spec, grid, metric).dispersion
    masked0 = sample_weighted(omega + epsilon, n_mask, rng)
    visible0 = np.setdiff1d(np.arange(total, dtype=np.int64), masked0)
    n_hint = int(np.floor(n_mask * hint_ratio))
    visible, masked = hint_exchange(total, masked0, visible0, n_hint, rng)
    params = {
        "mask_ratio": mask_ratio,
        "hint_ratio": hint_ratio,
        "metric": metric,
        "epsilon": epsilon,
        "weighted_semantics": "successive_draws",
    }
    return _plan(total, visible, masked, "dwm", params, rng)


@dataclass(frozen=True)
class HintSchedule:
    gamma: float = 2.0
    total_epochs: int = 300

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if self.total_epochs < 1:
            raise ValueError("total_epochs must be >= 1")


def hint_ratio(schedule: HintSchedule, epoch: int) -> float:
    """Hint ratio at ``epoch``: 1 - (epoch / total_epochs) ** gamma,
    clamped to [0, 1]. Starts at 1.0, anneals to 0.0."""
    if not 0 <= epoch <= schedule.total_epochs:
        raise EpochOutOfRange(f"epoch {epoch} outside [0, {schedule.total_epochs}]")
    value = 1.0 - (epoch / schedule.total_epochs) ** schedule.gamma
    return min(1.0, max(0.0, value))


def generate(
    config: StrategyConfig,
    spec: Spectrogram | None,
    grid: PatchGrid,
    seed: int,
) -> MaskPlan:
    """Run a strategy with a fresh stream derived from ``seed``.

    ``spec`` may be None for the content-agnostic strategies (random, ibm);
    content-aware strategies require it and its shape must fit the grid.
    """
    rng = SeededRng(seed)
    if isinstance(config, RandomConfig):
        return mask_random(grid.total, config.mask_ratio, rng)
    if isinstance(config, IbmConfig):
        return mask_ibm(grid, config.mask_ratio, config.block_h, config.block_w, rng)
    if spec is None:
        raise GridMismatch(f"strategy {config.kind!r} needs a spectrogram")
    if isinstance(config, SgimConfig):
        return mask_sgim(spec, grid, config.mask_ratio, config.hint_ratio, config.sigma, rng)
    if isinstance(config, DwmConfig):
        return mask_dwm(
            spec, grid, config.mask_ratio, config.hint_ratio, config.metric, config.epsilon, rng
        )
    raise TypeError(f"unknown strategy config {type(config).__name__}")
