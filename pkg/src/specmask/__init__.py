"""Patch-masking plans for audio spectrograms.

Four strategies over a rectangular patch grid: uniform random masking,
inverse block masking (reveal blocks, mask the rest), relevance-guided
masking from a spectral bipartition of the patch similarity graph, and
dispersion-weighted masking with an annealed hint ratio.
"""

from ._backend import BACKEND
from .bench import BenchFit, BenchReport, BenchSample, emit_report, parse_report, run_bench
from .errors import (
    DegenerateRatio,
    GridMismatch,
    IoFailure,
    SpecmaskError,
    UsageError,
    ValidationError,
)
from .features import (
    AudioClip,
    MelParams,
    Spectrogram,
    load_raw_spectrogram,
    load_wav,
    logmel,
    write_raw_spectrogram,
)
from .grid import PatchGrid, PatchStats, make_grid, patch_dispersion
from .maskfile import (
    MaskDoc,
    ScheduleStamp,
    load_maskfile,
    plan_to_doc,
    read_bitmask,
    regenerate,
    write_bitmask,
    write_maskfile,
)
from .sampling import SeededRng, derive_seed, sample_uniform, sample_weighted
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
    sgim_relevance,
    split_counts,
)
from .viz import render_panel, render_panels, save_png

__version__ = "0.1.0"

__all__ = [
    "AudioClip",
    "BACKEND",
    "BenchFit",
    "BenchReport",
    "BenchSample",
    "DegenerateRatio",
    "DwmConfig",
    "GridMismatch",
    "HintSchedule",
    "IbmConfig",
    "IoFailure",
    "MaskDoc",
    "MaskPlan",
    "MelParams",
    "PatchGrid",
    "PatchStats",
    "RandomConfig",
    "ScheduleStamp",
    "SeededRng",
    "SgimConfig",
    "Spectrogram",
    "SpecmaskError",
    "StrategyConfig",
    "UsageError",
    "ValidationError",
    "derive_seed",
    "emit_report",
    "generate",
    "hint_ratio",
    "load_maskfile",
    "load_raw_spectrogram",
    "load_wav",
    "logmel",
    "make_grid",
    "parse_report",
    "patch_dispersion",
    "plan_to_doc",
    "read_bitmask",
    "regenerate",
    "render_panel",
    "render_panels",
    "run_bench",
    "sample_uniform",
    "sample_weighted",
    "save_png",
    "sgim_relevance",
    "split_counts",
    "write_bitmask",
    "write_maskfile",
    "write_raw_spectrogram",
]
