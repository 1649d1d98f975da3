"""Numpy fallback for the compiled kernels.

Same call signatures and semantics as ``specmask._kernels``; results agree
with the compiled module up to summation rounding order (ULP level) for the
statistics and exactly for the reveal loop.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"

MAD = 0
STD = 1
ENERGY = 2


def patch_stats(data: np.ndarray, fp: int, tp: int, ph: int, pw: int, metric: int) -> np.ndarray:
    """Per-patch dispersion over an (n_mels, n_frames) array.

    Patches are the fp x tp grid of ph x pw tiles anchored at the origin;
    trailing rows/columns outside the grid are ignored.
    """
    tiles = (
        data[: fp * ph, : tp * pw]
        .reshape(fp, ph, tp, pw)
        .transpose(0, 2, 1, 3)
        .reshape(fp * tp, ph * pw)
    )
    if metric == MAD:
        mean = tiles.mean(axis=1, keepdims=True)
        return np.abs(tiles - mean).mean(axis=1)
    if metric == STD:
        return tiles.std(axis=1)
    if metric == ENERGY:
        return np.mean(tiles * tiles, axis=1)
    raise ValueError(f"unknown metric id {metric}")


def fiedler_vector(matrix: np.ndarray) -> tuple[float, np.ndarray]:
    """Second-smallest eigenpair of a real symmetric matrix.

    Delegates to numpy's symmetric eigensolver; the compiled backend uses
    its own unblocked solver, so the two agree only to rounding error and
    the sign of the vector is unspecified in both.
    """
    mat = np.asarray(matrix, dtype=np.float64)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError("matrix must be square")
    if mat.shape[0] < 2:
        raise ValueError("need at least a 2x2 matrix")
    vals, vecs = np.linalg.eigh(mat)
    return float(vals[1]), np.ascontiguousarray(vecs[:, 1])


def reveal_blocks(
    visible: np.ndarray,
    rows: np.ndarray,
    cols: np.ndarray,
    block_h: int,
    block_w: int,
    n_keep: int,
    count: int,
) -> tuple[int, int]:
    """Reveal anchored blocks (clipped at the grid edge) until ``n_keep`` cells
    are visible or the anchor batch is exhausted.

    Mutates ``visible`` (uint8 F x T) in place. Returns the updated visible
    count and how many anchors were consumed.
    """
    fp, tp = visible.shape
    used = 0
    for i in range(rows.shape[0]):
        r0 = int(rows[i])
        c0 = int(cols[i])
        r1 = min(r0 + block_h, fp)
        c1 = min(c0 + block_w, tp)
        block = visible[r0:r1, c0:c1]
        count += int(block.size - np.count_nonzero(block))
        block[:] = 1
        used = i + 1
        if count >= n_keep:
            break
    return count, used
