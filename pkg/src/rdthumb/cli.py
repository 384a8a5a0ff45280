"""Command-line surface: encode, decode, train, finetune, eval, sweep,
bench, and toy-dataset generation."""

from __future__ import annotations

import argparse
import csv
import statistics
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .jpeg.codec import JpegBytes, jpeg_decode
from .metrics import RdReport, psnr_rgb, write_reports_csv
from .planar import PlanarImage
from .qpm import TableMode
from .rasters import load_image, save_png, save_ppm
from .rate import measured_bpp
from .rescaler import (TrainConfig, TrainedModel, bicubic_downsample,
                       decode_with_model, encode_with_model, load_model,
                       save_model, testtime_finetune, train_loop)
from .toydata import toy_corpus, toy_patches

__all__ = ["main", "run_eval", "run_sweep", "run_bench"]

# unit-scale rate weight -> byte-scale MSE units used by the table optimizer
_BYTE_SCALE = 255.0 ** 2

_MODES = {m.value: m for m in TableMode}


class CliError(Exception):
    pass


def _load_model_arg(path, needed: bool, scale: int) -> TrainedModel | None:
    if path is None:
        if needed:
            raise CliError("this mode requires --checkpoint")
        return None
    p = Path(path)
    if not p.exists():
        raise CliError(f"checkpoint not found: {p}")
    model = load_model(p)
    if model.cfg.scale != scale:
        raise CliError(f"checkpoint was trained for scale {model.cfg.scale}, "
                       f"requested {scale}")
    return model


def _load_input(path) -> PlanarImage:
    p = Path(path)
    if not p.exists():
        raise CliError(f"input not found: {p}")
    try:
        return load_image(p)
    except Exception as err:
        raise CliError(f"cannot read {p}: {err}") from err


def _report_line(r: RdReport) -> str:
    return (f"{r.image_id}: mode={r.mode} q={r.quality_scale:g} "
            f"bpp={r.bpp:.4f} lr_psnr={r.lr_psnr_db:.2f}dB "
            f"hr_psnr={r.hr_psnr_db:.2f}dB "
            f"enc={r.encode_ms:.1f}ms dec={r.decode_ms:.1f}ms")


def _process_one(img: PlanarImage, image_id: str, model, mode: TableMode,
                 args) -> tuple[RdReport, JpegBytes, PlanarImage]:
    if args.finetune_iters and mode is TableMode.QPM_PREDICT:
        enc, tuned = testtime_finetune(img, model, model.cfg,
                                       iterations=args.finetune_iters,
                                       quality_factor=args.quality_scale)
        dec_model = tuned
    else:
        enc = encode_with_model(
            img, model, mode, args.scale, quality_factor=args.quality_scale,
            lambda2_tables=args.lambda2 * _BYTE_SCALE,
            opt_iterations=args.opt_iters)
        dec_model = model

    if dec_model is not None:
        dec = decode_with_model(enc.jpeg, dec_model, args.scale,
                                use_freq=not getattr(args, "no_freq_features", False))
        hr = dec.hr
        thumb = dec.thumbnail
        decode_ms = dec.decode_ms
    else:
        t0 = time.perf_counter()
        res = jpeg_decode(enc.jpeg)
        thumb = res.pixels
        up = bicubic_upsample_image(thumb, args.scale)
        hr = up
        decode_ms = (time.perf_counter() - t0) * 1e3

    report = RdReport(
        image_id=image_id, mode=mode.value, quality_scale=args.quality_scale,
        bpp=measured_bpp(enc.jpeg, img.height, img.width),
        lr_psnr_db=psnr_rgb(thumb, enc.y_ref),
        hr_psnr_db=psnr_rgb(hr, img),
        encode_ms=enc.encode_ms, decode_ms=decode_ms)
    return report, enc.jpeg, hr


def bicubic_upsample_image(img: PlanarImage, s: int) -> PlanarImage:
    """Plain bicubic upscaling of a byte-range image (baseline path)."""
    import rdthumb.autodiff as ad
    from .rescaler.bicubic import bicubic_upsample_graph

    t = ad.Tensor(img.to_byte_range().samples[None])
    up = bicubic_upsample_graph(t, s).data[0]
    return PlanarImage(np.clip(np.floor(up + 0.5), 0, 255))


# ---------------------------------------------------------------------------
# subcommands

def cmd_encode(args) -> int:
    mode = _MODES[args.mode]
    model = _load_model_arg(args.checkpoint, mode is not TableMode.FIXED_ANNEX_K,
                            args.scale)
    img = _load_input(args.input)
    report, jpeg, _ = _process_one(img, Path(args.input).stem, model, mode, args)
    Path(args.output).write_bytes(jpeg.data)
    print(_report_line(report))
    return 0


def cmd_decode(args) -> int:
    model = _load_model_arg(args.checkpoint, True, args.scale)
    p = Path(args.input)
    if not p.exists():
        raise CliError(f"input not found: {p}")
    data = p.read_bytes()
    res = jpeg_decode(data)
    jb = JpegBytes(data, res.pixels.height * args.scale,
                   res.pixels.width * args.scale)
    dec = decode_with_model(jb, model, args.scale,
                            use_freq=not args.no_freq_features)
    if Path(args.output).suffix.lower() in (".ppm", ".pnm"):
        save_ppm(args.output, dec.hr)
    else:
        save_png(args.output, dec.hr)
    print(f"{p.name}: decoded {dec.hr.width}x{dec.hr.height} "
          f"total={dec.decode_ms:.1f}ms "
          f"(jpeg+features={dec.extractor_ms:.1f}ms trunk={dec.trunk_ms:.1f}ms)")
    return 0


def _patches_from_dir(data_dir: Path, patch: int) -> np.ndarray:
    files = sorted(p for p in data_dir.iterdir()
                   if p.suffix.lower() in (".png", ".ppm", ".pnm"))
    if not files:
        raise CliError(f"no PNG/PPM images found in {data_dir}")
    tiles = []
    for f in files:
        img = load_image(f)
        if img.height < patch or img.width < patch:
            raise CliError(f"{f.name}: smaller than the patch size {patch}")
        for y in range(0, img.height - patch + 1, patch):
            for x in range(0, img.width - patch + 1, patch):
                tiles.append(img.samples[:, y:y + patch, x:x + patch] / 255.0)
    return np.stack(tiles)


def cmd_train(args) -> int:
    cfg = TrainConfig(scale=args.scale, lambda1=args.lambda1, lambda2=args.lambda2,
                      patch=args.patch, batch=args.batch, iterations=args.iters,
                      lr=args.lr, seed=args.seed)
    patches = _patches_from_dir(Path(args.data), cfg.patch)
    model = TrainedModel(cfg)
    rows = []

    def log(report):
        rows.append(report)
        print(f"step {report.step:6d}  total={report.total:.4f} "
              f"recon={report.recon:.4f} guide={report.guide:.4f} "
              f"bpp={report.bpp:.4f} aux={report.aux:.4f}")

    train_loop(model, patches, cfg, log_every=args.log_every, on_step=log)
    save_model(args.output, model)
    if args.loss_log:
        with open(args.loss_log, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["step", "total", "recon", "guide", "bpp", "aux"])
            for r in rows:
                w.writerow([r.step, r.total, r.recon, r.guide, r.bpp, r.aux])
    print(f"checkpoint written to {args.output}")
    return 0


def cmd_finetune(args) -> int:
    model = _load_model_arg(args.checkpoint, True, args.scale)
    img = _load_input(args.input)
    enc, tuned = testtime_finetune(img, model, model.cfg, iterations=args.iters,
                                   lr=args.lr, quality_factor=args.quality_scale)
    Path(args.output).write_bytes(enc.jpeg.data)
    dec = decode_with_model(enc.jpeg, tuned, args.scale)
    report = RdReport(
        image_id=Path(args.input).stem, mode="qpm+finetune",
        quality_scale=args.quality_scale,
        bpp=measured_bpp(enc.jpeg, img.height, img.width),
        lr_psnr_db=psnr_rgb(dec.thumbnail, enc.y_ref),
        hr_psnr_db=psnr_rgb(dec.hr, img),
        encode_ms=enc.encode_ms, decode_ms=dec.decode_ms)
    print(_report_line(report))
    return 0


def run_eval(data_dir: Path, model, mode: TableMode, args) -> list[RdReport]:
    files = sorted(p for p in data_dir.iterdir()
                   if p.suffix.lower() in (".png", ".ppm", ".pnm"))
    if not files:
        raise CliError(f"no PNG/PPM images found in {data_dir}")

    def work(f):
        return _process_one(load_image(f), f.stem, model, mode, args)[0]

    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            return list(pool.map(work, files))
    return [work(f) for f in files]


def cmd_eval(args) -> int:
    mode = _MODES[args.mode]
    model = _load_model_arg(args.checkpoint, mode is not TableMode.FIXED_ANNEX_K,
                            args.scale)
    reports = run_eval(Path(args.data), model, mode, args)
    write_reports_csv(args.output, reports)
    for r in reports:
        print(_report_line(r))
    print(f"{len(reports)} rows -> {args.output}")
    return 0


def run_sweep(data_dir: Path, model, mode: TableMode, factors, args) -> list[dict]:
    rows = []
    for factor in factors:
        args.quality_scale = factor
        reports = run_eval(data_dir, model, mode, args)
        rows.append({
            "factor": factor,
            "bpp": statistics.mean(r.bpp for r in reports),
            "lr_psnr": statistics.mean(r.lr_psnr_db for r in reports),
            "hr_psnr": statistics.mean(r.hr_psnr_db for r in reports),
        })
    return rows


def cmd_sweep(args) -> int:
    mode = _MODES[args.mode]
    model = _load_model_arg(args.checkpoint, mode is not TableMode.FIXED_ANNEX_K,
                            args.scale)
    factors = [float(f) for f in args.factors.split(",")]
    rows = run_sweep(Path(args.data), model, mode, factors, args)
    with open(args.output, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=["factor", "bpp", "lr_psnr", "hr_psnr"])
        w.writeheader()
        w.writerows(rows)
    for row in rows:
        print(f"factor={row['factor']:g} bpp={row['bpp']:.4f} "
              f"lr={row['lr_psnr']:.2f}dB hr={row['hr_psnr']:.2f}dB")
    return 0


def run_bench(model, lr_size: int, scale: int, runs: int, warmup: int):
    """Median decode timings at a given thumbnail size; returns a dict."""
    from .jpeg import annex_k_tables, jpeg_encode
    from .toydata import toy_image

    rng = np.random.default_rng(0)
    thumb = toy_image(rng, lr_size, lr_size)
    jb = jpeg_encode(thumb, annex_k_tables())
    jb = JpegBytes(jb.data, lr_size * scale, lr_size * scale)
    for _ in range(warmup):
        decode_with_model(jb, model, scale)
    totals, extract, trunk = [], [], []
    for _ in range(runs):
        dec = decode_with_model(jb, model, scale)
        totals.append(dec.decode_ms)
        extract.append(dec.extractor_ms)
        trunk.append(dec.trunk_ms)
    return {
        "lr_size": lr_size, "hr_size": lr_size * scale,
        "decode_ms": statistics.median(totals),
        "extractor_ms": statistics.median(extract),
        "trunk_ms": statistics.median(trunk),
        "fps": 1000.0 / statistics.median(totals),
    }


def cmd_bench(args) -> int:
    model = _load_model_arg(args.checkpoint, True, args.scale)
    stats = run_bench(model, args.lr_size, args.scale, args.runs, args.warmup)
    print(f"decode {stats['lr_size']}->{stats['hr_size']}: "
          f"{stats['decode_ms']:.1f}ms ({stats['fps']:.2f} fps); "
          f"features={stats['extractor_ms']:.1f}ms "
          f"trunk={stats['trunk_ms']:.1f}ms")
    return 0


def cmd_make_toy(args) -> int:
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    for i, img in enumerate(toy_corpus(args.count, args.size, args.size,
                                       seed=args.seed)):
        save_png(out / f"toy_{i:03d}.png", img)
    print(f"{args.count} images of {args.size}x{args.size} -> {out}")
    return 0


# ---------------------------------------------------------------------------

def _add_common_encode_args(p):
    p.add_argument("--mode", choices=sorted(_MODES), default="fixed")
    p.add_argument("--scale", type=int, default=4)
    p.add_argument("--lambda2", type=float, default=0.01,
                   help="rate weight (unit-scale) for table optimization")
    p.add_argument("--checkpoint", default=None)
    p.add_argument("--quality-scale", type=float, default=1.0,
                   help="table multiplier; >1 is coarser and smaller")
    p.add_argument("--finetune-iters", type=int, default=0)
    p.add_argument("--opt-iters", type=int, default=120,
                   help="iterations for mode=opt table optimization")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--no-freq-features", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="rdthumb",
        description="Rate-distortion-aware image rescaling into JPEG thumbnails")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", help="embed an HR image into a JPEG thumbnail")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", dest="output", required=True)
    _add_common_encode_args(p)
    p.set_defaults(fn=cmd_encode)

    p = sub.add_parser("decode", help="reconstruct the HR image from a thumbnail")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", dest="output", required=True)
    p.add_argument("--scale", type=int, default=4)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--no-freq-features", action="store_true",
                   help="zero the frequency features (ablation)")
    p.set_defaults(fn=cmd_decode)

    p = sub.add_parser("train", help="train a model on a directory of images")
    p.add_argument("--data", required=True)
    p.add_argument("--out", dest="output", required=True)
    p.add_argument("--iters", type=int, default=2000)
    p.add_argument("--batch", type=int, default=8)
    p.add_argument("--patch", type=int, default=64)
    p.add_argument("--scale", type=int, default=4)
    p.add_argument("--lambda1", type=float, default=0.6)
    p.add_argument("--lambda2", type=float, default=0.01)
    p.add_argument("--lr", type=float, default=2e-4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--log-every", type=int, default=50)
    p.add_argument("--loss-log", default=None, help="CSV file for the loss trace")
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("finetune", help="per-image test-time optimization")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", dest="output", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--scale", type=int, default=4)
    p.add_argument("--iters", type=int, default=100)
    p.add_argument("--lr", type=float, default=2e-4)
    p.add_argument("--quality-scale", type=float, default=1.0)
    p.set_defaults(fn=cmd_finetune)

    p = sub.add_parser("eval", help="RD report CSV over a dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--out", dest="output", required=True)
    _add_common_encode_args(p)
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("sweep", help="RD curve over quality-scale factors")
    p.add_argument("--data", required=True)
    p.add_argument("--out", dest="output", required=True)
    p.add_argument("--factors", default="0.5,1,2,4")
    _add_common_encode_args(p)
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("bench", help="decode throughput benchmark")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--scale", type=int, default=4)
    p.add_argument("--lr-size", type=int, default=64,
                   help="thumbnail side length; HR is lr-size x scale")
    p.add_argument("--runs", type=int, default=20)
    p.add_argument("--warmup", type=int, default=3)
    p.set_defaults(fn=cmd_bench)

    p = sub.add_parser("make-toy", help="generate a synthetic dataset")
    p.add_argument("--out", dest="output", required=True)
    p.add_argument("--count", type=int, default=20)
    p.add_argument("--size", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_make_toy)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except CliError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except (ValueError, KeyError, FileNotFoundError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
