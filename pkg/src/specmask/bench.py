"""Scaling benchmarks for mask generation.

Times each strategy on seeded Gaussian-noise spectrograms over a ladder of
grid sizes, then fits t ~ a * L^b on log-log axes. Reports medians and
interquartile ranges; BLAS thread pools are pinned to one thread while
timing so the fitted exponents reflect algorithmic cost, not parallelism.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from threadpoolctl import threadpool_limits

from .errors import InsufficientSizes, IoFailure, ValidationError
from .features import Spectrogram
from .grid import PatchGrid, make_grid
from .sampling import SeededRng, derive_seed
from .strategies import StrategyConfig, generate

DEFAULT_WARMUP = 10
DEFAULT_ITERS = 30
DEFAULT_PATCH = (4, 4)


@dataclass(frozen=True)
class BenchSample:
    strategy: str
    total: int
    median_ns: float
    iqr_ns: float


@dataclass(frozen=True)
class BenchFit:
    strategy: str
    exponent: float
    coefficient: float
    r2: float


@dataclass(frozen=True)
class BenchReport:
    samples: tuple[BenchSample, ...]
    fits: tuple[BenchFit, ...]
    warmup_iters: int
    measure_iters: int


def _noise_spectrogram(seed: int, n_mels: int, n_frames: int) -> Spectrogram:
    # Box-Muller over the seeded uniform stream keeps inputs hermetic.
    rng = SeededRng(seed)
    n = n_mels * n_frames
    half = (n + 1) // 2
    u1 = np.maximum(rng.doubles(half), 1e-300)
    u2 = rng.doubles(half)
    radius = np.sqrt(-2.0 * np.log(u1))
    angle = 2.0 * np.pi * u2
    values = np.concatenate([radius * np.cos(angle), radius * np.sin(angle)])[:n]
    return Spectrogram(values.reshape(n_mels, n_frames))


def _fit_loglog(totals: np.ndarray, medians: np.ndarray) -> tuple[float, float, float]:
    x = np.log(totals.astype(np.float64))
    y = np.log(medians.astype(np.float64))
    slope, intercept = np.polyfit(x, y, 1)
    predicted = slope * x + intercept
    ss_res = float(np.sum((y - predicted) ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return float(slope), float(np.exp(intercept)), r2


def run_bench(
    configs: list[StrategyConfig],
    sizes: list[tuple[int, int]],
    seed: int = 0,
    iters: int = DEFAULT_ITERS,
    warmup: int = DEFAULT_WARMUP,
    patch: tuple[int, int] = DEFAULT_PATCH,
    parallel: bool = False,
) -> BenchReport:
    """Time every (strategy, grid size) cell and fit per-strategy exponents.

    ``sizes`` lists (freq_patches, time_patches) pairs whose products must be
    strictly increasing, at least four of them. ``parallel`` fans out input
    preparation across sizes; timed regions always run sequentially.
    """
    if not configs:
        raise InsufficientSizes("no strategies to benchmark")
    kinds = [c.kind for c in configs]
    if len(set(kinds)) != len(kinds):
        raise ValueError("duplicate strategy kinds in benchmark")
    totals = [int(f) * int(t) for f, t in sizes]
    if len(totals) < 4 or len(set(totals)) != len(totals):
        raise InsufficientSizes("need at least 4 distinct grid sizes")
    if any(b <= a for a, b in zip(totals, totals[1:])):
        raise InsufficientSizes("grid sizes must be strictly increasing")
    if iters < 30:
        raise ValueError("iters must be >= 30")
    if warmup < 0:
        raise ValueError("warmup must be >= 0")

    patch_h, patch_w = patch

    def prepare(index: int) -> tuple[Spectrogram, PatchGrid]:
        fp, tp = sizes[index]
        spec = _noise_spectrogram(
            derive_seed(seed, index), fp * patch_h, tp * patch_w
        )
        return spec, make_grid(spec, patch_h, patch_w)

    if parallel:
        with ThreadPoolExecutor() as pool:
            inputs = list(pool.map(prepare, range(len(sizes))))
    else:
        inputs = [prepare(i) for i in range(len(sizes))]

    samples: list[BenchSample] = []
    fits: list[BenchFit] = []
    with threadpool_limits(limits=1):
        for strat_idx, config in enumerate(configs):
            medians = []
            for size_idx, (spec, grid) in enumerate(inputs):
                case_seed = derive_seed(derive_seed(seed, strat_idx + 1), size_idx)
                elapsed = np.empty(iters, dtype=np.int64)
                for i in range(warmup):
                    generate(config, spec, grid, derive_seed(case_seed, iters + i))
                for i in range(iters):
                    t0 = time.perf_counter_ns()
                    generate(config, spec, grid, derive_seed(case_seed, i))
                    elapsed[i] = time.perf_counter_ns() - t0
                median = float(np.median(elapsed))
                q25, q75 = np.percentile(elapsed, [25.0, 75.0])
                samples.append(
                    BenchSample(config.kind, grid.total, median, float(q75 - q25))
                )
                medians.append(median)
            exponent, coefficient, r2 = _fit_loglog(
                np.asarray(totals, dtype=np.float64), np.asarray(medians)
            )
            fits.append(BenchFit(config.kind, exponent, coefficient, r2))
    return BenchReport(
        samples=tuple(samples),
        fits=tuple(fits),
        warmup_iters=warmup,
        measure_iters=iters,
    )


def _table_lines(report: BenchReport) -> list[str]:
    lines = [f"{'strategy':10} {'L':>7} {'median_us':>12} {'iqr_us':>10}"]
    for s in report.samples:
        lines.append(
            f"{s.strategy:10} {s.total:7d} {s.median_ns / 1e3:12.2f} {s.iqr_ns / 1e3:10.2f}"
        )
    lines.append("")
    lines.append(f"{'strategy':10} {'exponent':>9} {'coeff_ns':>12} {'r2':>7}")
    for f in report.fits:
        lines.append(
            f"{f.strategy:10} {f.exponent:9.3f} {f.coefficient:12.4g} {f.r2:7.4f}"
        )
    lines.append(
        f"\nwarmup={report.warmup_iters} iters={report.measure_iters} "
        "(median of wall-clock ns, single BLAS thread)"
    )
    return lines


def emit_report(report: BenchReport, path) -> None:
    """Write the machine-readable record to ``path`` (one JSON object per
    line) and a human-readable table to ``path`` + ``.txt``."""
    if not report.samples or not report.fits:
        raise InsufficientSizes("empty benchmark report")
    lines = [
        json.dumps(
            {
                "warmup_iters": report.warmup_iters,
                "measure_iters": report.measure_iters,
            },
            sort_keys=True,
        )
    ]
    for s in report.samples:
        lines.append(
            json.dumps(
                {
                    "strategy": s.strategy,
                    "L": s.total,
                    "median_ns": s.median_ns,
                    "iqr_ns": s.iqr_ns,
                },
                sort_keys=True,
            )
        )
    for f in report.fits:
        lines.append(
            json.dumps(
                {
                    "strategy": f.strategy,
                    "exponent": f.exponent,
                    "coefficient": f.coefficient,
                    "r2": f.r2,
                },
                sort_keys=True,
            )
        )
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")
        with open(f"{path}.txt", "w", encoding="utf-8") as fh:
            fh.write("\n".join(_table_lines(report)) + "\n")
    except OSError as exc:
        raise IoFailure(f"cannot write benchmark report: {exc}") from exc


def parse_report(path) -> BenchReport:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            rows = [json.loads(line) for line in fh if line.strip()]
    except OSError as exc:
        raise IoFailure(f"cannot read benchmark report {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"malformed benchmark report: {exc}") from exc
    if not rows or "warmup_iters" not in rows[0]:
        raise ValidationError("benchmark report missing header line")
    header, body = rows[0], rows[1:]
    samples = [
        BenchSample(r["strategy"], int(r["L"]), float(r["median_ns"]), float(r["iqr_ns"]))
        for r in body
        if "median_ns" in r
    ]
    fits = [
        BenchFit(r["strategy"], float(r["exponent"]), float(r["coefficient"]), float(r["r2"]))
        for r in body
        if "exponent" in r
    ]
    if not samples or not fits:
        raise ValidationError("benchmark report has no samples or no fits")
    return BenchReport(
        samples=tuple(samples),
        fits=tuple(fits),
        warmup_iters=int(header["warmup_iters"]),
        measure_iters=int(header["measure_iters"]),
    )
