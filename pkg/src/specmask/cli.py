"""Command-line interface.

Subcommands: ``mask`` (generate a plan from a wav or raw spectrogram),
``viz`` (render plans over the input), ``schedule`` (hint-ratio table),
``stats`` (per-patch dispersion table), ``bench`` (scaling benchmark).

Exit codes: 2 usage, 3 I/O, 4 validation/content, 5 degenerate mask ratio.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .bench import DEFAULT_ITERS, DEFAULT_WARMUP, emit_report, run_bench
from .errors import GridMismatch, IoFailure, SpecmaskError, UsageError
from .features import MelParams, Spectrogram, load_raw_spectrogram, load_wav, logmel
from .grid import METRICS, make_grid, patch_dispersion
from .maskfile import (
    ScheduleStamp,
    load_maskfile,
    plan_to_doc,
    write_bitmask,
    write_maskfile,
)
from .sampling import derive_seed
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
)
from .viz import DEFAULT_ZOOM, render_panels, save_png

DEFAULT_PATCH = "16x16"
DEFAULT_BLOCK = "5x5"
DEFAULT_EPSILON = 1e-8


def _parse_pair(text: str, flag: str) -> tuple[int, int]:
    parts = text.lower().split("x")
    if len(parts) != 2:
        raise UsageError(f"{flag} expects HxW, got {text!r}")
    try:
        h, w = int(parts[0]), int(parts[1])
    except ValueError as exc:
        raise UsageError(f"{flag} expects HxW, got {text!r}") from exc
    if h < 1 or w < 1:
        raise UsageError(f"{flag} dimensions must be positive")
    return h, w


def _load_input(path, n_mels: int | None) -> Spectrogram:
    try:
        with open(path, "rb") as fh:
            head = fh.read(4)
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    if head == b"RIFF":
        return logmel(load_wav(path), MelParams())
    if n_mels is None:
        raise UsageError("raw spectrogram input requires --n-mels")
    return load_raw_spectrogram(path, n_mels)


def _resolve_hint(args) -> tuple[float, ScheduleStamp | None]:
    scheduled = args.epoch is not None or args.total_epochs is not None
    if args.hint_ratio is not None and scheduled:
        raise UsageError("--hint-ratio and --epoch/--total-epochs are mutually exclusive")
    if args.gamma is not None and not scheduled:
        raise UsageError("--gamma requires --epoch and --total-epochs")
    if scheduled:
        if args.epoch is None or args.total_epochs is None:
            raise UsageError("scheduling requires both --epoch and --total-epochs")
        gamma = 2.0 if args.gamma is None else args.gamma
        schedule = HintSchedule(gamma=gamma, total_epochs=args.total_epochs)
        return hint_ratio(schedule, args.epoch), ScheduleStamp(
            gamma=gamma, total_epochs=args.total_epochs, epoch=args.epoch
        )
    if args.hint_ratio is not None:
        return args.hint_ratio, None
    return 0.0, None


def _build_config(args, rh: float) -> StrategyConfig:
    hinted = args.hint_ratio is not None or args.epoch is not None
    if args.strategy in ("random", "ibm") and hinted:
        raise UsageError(f"strategy {args.strategy!r} takes no hint flags")
    if args.strategy != "ibm" and args.block is not None:
        raise UsageError("--block applies to the ibm strategy only")
    if args.strategy != "dwm" and args.metric is not None:
        raise UsageError("--metric applies to the dwm strategy only")
    if args.strategy == "random":
        return RandomConfig(mask_ratio=args.mask_ratio)
    if args.strategy == "ibm":
        bh, bw = _parse_pair(args.block or DEFAULT_BLOCK, "--block")
        return IbmConfig(mask_ratio=args.mask_ratio, block_h=bh, block_w=bw)
    if args.strategy == "sgim":
        return SgimConfig(mask_ratio=args.mask_ratio, hint_ratio=rh)
    return DwmConfig(
        mask_ratio=args.mask_ratio,
        hint_ratio=rh,
        metric=args.metric or "mad",
        epsilon=DEFAULT_EPSILON,
    )


def _generate_one(
    path, args, config: StrategyConfig, stamp: ScheduleStamp | None, seed: int, out, bitmask
) -> None:
    spec = _load_input(path, args.n_mels)
    grid = make_grid(spec, *_parse_pair(args.patch, "--patch"))
    plan = generate(config, spec, grid, seed)
    write_maskfile(out, plan_to_doc(plan, grid, stamp))
    if bitmask is not None:
        write_bitmask(bitmask, plan)


def cmd_mask(args) -> int:
    rh, stamp = _resolve_hint(args)
    config = _build_config(args, rh)
    if (args.input is None) == (args.batch is None):
        raise UsageError("exactly one of --input or --batch is required")
    if args.input is not None:
        _generate_one(args.input, args, config, stamp, args.seed, args.out, args.bitmask)
        return 0

    batch_dir = Path(args.batch)
    if not batch_dir.is_dir():
        raise IoFailure(f"--batch {args.batch} is not a directory")
    files = sorted(p for p in batch_dir.iterdir() if p.is_file())
    if not files:
        raise IoFailure(f"--batch {args.batch} contains no files")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    bitmask_dir = None
    if args.bitmask is not None:
        bitmask_dir = Path(args.bitmask)
        bitmask_dir.mkdir(parents=True, exist_ok=True)

    def one(item: tuple[int, Path]) -> None:
        index, path = item
        bm = None if bitmask_dir is None else bitmask_dir / f"{path.stem}.mskp"
        _generate_one(
            path,
            args,
            config,
            stamp,
            derive_seed(args.seed, index),
            out_dir / f"{path.stem}.mask.json",
            bm,
        )

    with ThreadPoolExecutor() as pool:
        list(pool.map(one, enumerate(files)))
    return 0


def cmd_viz(args) -> int:
    docs = [load_maskfile(p) for p in args.mask]
    first = docs[0].grid
    for doc in docs[1:]:
        if doc.grid != first:
            raise UsageError("all mask files must share one patch grid")
    spec = _load_input(args.input, args.n_mels)
    grid = make_grid(spec, first.patch_h, first.patch_w)
    if (grid.freq_patches, grid.time_patches) != (first.freq_patches, first.time_patches):
        raise GridMismatch(
            f"input yields a {grid.freq_patches}x{grid.time_patches} grid, mask "
            f"file records {first.freq_patches}x{first.time_patches}"
        )
    plans = [
        MaskPlan(
            total=doc.total,
            visible=doc.visible,
            masked=doc.masked,
            strategy=doc.strategy,
            params=doc.params,
            seed=doc.seed,
        )
        for doc in docs
    ]
    save_png(args.out, render_panels(spec, grid, plans, args.zoom))
    return 0


def cmd_schedule(args) -> int:
    schedule = HintSchedule(gamma=args.gamma, total_epochs=args.total_epochs)
    lines = ["epoch,hint_ratio"]
    for epoch in range(args.total_epochs + 1):
        lines.append(f"{epoch},{float(hint_ratio(schedule, epoch))!r}")
    _write_text(args.out, "\n".join(lines) + "\n")
    return 0


def cmd_stats(args) -> int:
    spec = _load_input(args.input, args.n_mels)
    grid = make_grid(spec, *_parse_pair(args.patch, "--patch"))
    columns = {m: patch_dispersion(spec, grid, m).dispersion for m in ("mad", "std", "energy")}
    weights = columns["mad"] + DEFAULT_EPSILON
    probs = weights / weights.sum()
    lines = ["row,col,omega_mad,omega_std,omega_energy,p"]
    for index in range(grid.total):
        row, col = grid.unflatten(index)
        lines.append(
            f"{row},{col},{float(columns['mad'][index])!r},{float(columns['std'][index])!r},"
            f"{float(columns['energy'][index])!r},{float(probs[index])!r}"
        )
    _write_text(args.out, "\n".join(lines) + "\n")
    return 0


_BENCH_CONFIGS: dict[str, StrategyConfig] = {
    "random": RandomConfig(),
    "ibm": IbmConfig(),
    "sgim": SgimConfig(),
    "dwm": DwmConfig(),
}


def cmd_bench(args) -> int:
    try:
        configs = [_BENCH_CONFIGS[name] for name in args.strategies.split(",")]
    except KeyError as exc:
        raise UsageError(f"unknown strategy {exc.args[0]!r}") from exc
    sizes = [_parse_pair(token, "--sizes") for token in args.sizes.split(",")]
    report = run_bench(
        configs,
        sizes,
        seed=args.seed,
        iters=args.iters,
        warmup=args.warmup,
        patch=_parse_pair(args.patch, "--patch"),
        parallel=args.parallel,
    )
    emit_report(report, args.out)
    return 0


def _write_text(path, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def _add_input_flags(sub, batch: bool = False) -> None:
    sub.add_argument("--input", help="wav file or raw float32 spectrogram")
    if batch:
        sub.add_argument("--batch", help="directory of inputs; seeds derived per file")
    sub.add_argument("--n-mels", type=int, help="mel-bin count of a raw input")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="specmask")
    commands = parser.add_subparsers(dest="command", required=True)

    mask = commands.add_parser("mask", help="generate a mask plan")
    _add_input_flags(mask, batch=True)
    mask.add_argument(
        "--strategy", required=True, choices=("random", "ibm", "sgim", "dwm")
    )
    mask.add_argument("--mask-ratio", type=float, default=0.7)
    mask.add_argument("--hint-ratio", type=float)
    mask.add_argument("--epoch", type=int)
    mask.add_argument("--total-epochs", type=int)
    mask.add_argument("--gamma", type=float)
    mask.add_argument("--block", help="ibm block as HxW (default 5x5)")
    mask.add_argument("--metric", choices=tuple(sorted(METRICS)))
    mask.add_argument("--patch", default=DEFAULT_PATCH, help="patch as HxW")
    mask.add_argument("--seed", type=int, default=0)
    mask.add_argument("--out", required=True)
    mask.add_argument("--bitmask", help="also write a compact binary mask")
    mask.set_defaults(func=cmd_mask)

    viz = commands.add_parser("viz", help="render mask plans over the input")
    viz.add_argument("--mask", nargs="+", required=True, help="mask file(s), one panel each")
    _add_input_flags(viz)
    viz.add_argument("--zoom", type=int, default=DEFAULT_ZOOM)
    viz.add_argument("--out", required=True)
    viz.set_defaults(func=cmd_viz)

    schedule = commands.add_parser("schedule", help="hint-ratio table over epochs")
    schedule.add_argument("--gamma", type=float, default=2.0)
    schedule.add_argument("--total-epochs", type=int, required=True)
    schedule.add_argument("--out", required=True)
    schedule.set_defaults(func=cmd_schedule)

    stats = commands.add_parser("stats", help="per-patch dispersion table")
    _add_input_flags(stats)
    stats.add_argument("--patch", default=DEFAULT_PATCH, help="patch as HxW")
    stats.add_argument("--out", required=True)
    stats.set_defaults(func=cmd_stats)

    bench = commands.add_parser("bench", help="scaling benchmark")
    bench.add_argument(
        "--strategies", default="random,ibm,sgim,dwm", help="comma-separated strategy list"
    )
    bench.add_argument(
        "--sizes",
        default="8x8,8x16,16x16,16x32",
        help="comma-separated freq_patches x time_patches pairs, increasing products",
    )
    bench.add_argument("--iters", type=int, default=DEFAULT_ITERS)
    bench.add_argument("--warmup", type=int, default=DEFAULT_WARMUP)
    bench.add_argument("--patch", default="4x4", help="patch as HxW")
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument(
        "--parallel", action="store_true", help="prepare inputs concurrently"
    )
    bench.add_argument("--out", required=True)
    bench.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SpecmaskError as exc:
        print(f"specmask: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:  # out-of-range flag values from config types
        print(f"specmask: {exc}", file=sys.stderr)
        return UsageError.exit_code


if __name__ == "__main__":
    sys.exit(main())
