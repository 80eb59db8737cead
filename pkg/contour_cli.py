#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
═══════════════════════════════════════════════════════════════════════════
واجهة سطر الأوامر - Contour Codec Command Line
═══════════════════════════════════════════════════════════════════════════

الأوامر الفرعية:
    encode          ترميز مضلع إلى معاملات فورييه (أو قطبية) وطباعة SEC
    decode          فك ترميز واصف إلى svg / geojson / csv
    fit             ملاءمة واصف بالانحدار التدرجي (CSV للخسارة + SVG)
    sweep           تجربة تصفير المعاملات على ملف COCO
    chebyshev-demo  ملاءمة Chebyshev لـ ρ(θ) وقيمة فجوة الدورية
    oes             حساب OES لصفوف (method, map, fps, sec)
    config          عرض config.json أو تعديله بـ --set KEY=VALUE

رموز الخروج: 0 نجاح، 1 إدخال/إخراج، 2 تحقق، 3 فشل عددي.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from contour_config import CodecSettings, ConfigManager, LoggerFactory, resolve_thread_count
from contour_errors import EXIT_OK, ContourValidationError, exit_code_for
from contour_geometry import (
    ContourSamples, Polygon, contains_point, count_self_intersections, perimeter, resample, winding_count,
)
from fourier_codec import (
    PolarDescriptor, decode, decode_polar, dump_descriptor, encode, encode_polar,
    load_descriptor, sparsify,
)
from shape_losses import LossConfig, fit_descriptor
from chebyshev_analysis import fit_rho_series
from efficiency_metrics import (
    compute_sec, default_bits_for, efficiency_csv, load_annotations, parse_efficiency_csv,
    reconstruction_sweep, reference_rows, sample_count_ablation, score_rows,
)
from contour_renderers import (
    contour_csv, contour_geojson, contours_svg, FIT_STYLE, line_chart_svg, overlay_svg,
    read_bytes_sync, write_outputs_sync,
)

logger = LoggerFactory.get_logger("ContourCLI")

OUTPUT_FORMATS = ("svg", "geojson", "csv")


# ═══════════════════════════════════════════════════════════════════════════
# أدوات الإدخال (Input helpers)
# ═══════════════════════════════════════════════════════════════════════════

def parse_polygon_text(text: str) -> Polygon:
    """سطر لكل نقطة: "x y" أو "x,y"؛ الأسطر الفارغة و # ورأس "x,y" تُتجاهل"""
    pts = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.replace(",", " ").split()
        if not pts and [p.lower() for p in parts] == ["x", "y"]:
            continue
        if len(parts) != 2:
            raise ContourValidationError(f"line {line_no}: expected 'x y'")
        try:
            pts.append((float(parts[0]), float(parts[1])))
        except ValueError as e:
            raise ContourValidationError(f"line {line_no}: {e}") from e
    return Polygon(np.array(pts, dtype=float).reshape(-1, 2))


def read_polygon(path: str, ann_id: Optional[int] = None, part: int = 0) -> Polygon:
    """ملف نقاط نصي، أو ملف COCO مع --ann-id"""
    if Path(path).suffix.lower() == ".json":
        annotations = load_annotations(path)
        if ann_id is None:
            raise ContourValidationError("--ann-id is required for COCO input")
        return annotations.find(ann_id, part).polygon
    return parse_polygon_text(read_bytes_sync(path).decode("utf-8"))


def default_output(source: str, suffix: str) -> Path:
    return Path(Path(source).stem + suffix)


def parse_cutoffs(value: str) -> List[int]:
    try:
        return [int(v) for v in value.split(",") if v.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"invalid cutoff list: {value!r}") from e


def resolve_center(polygon: Polygon, center: Optional[Sequence[float]]) -> Tuple[float, float]:
    """--center إن أُعطي، وإلا متوسط الرؤوس بشرط وقوعه داخل المضلع"""
    if center is not None:
        return float(center[0]), float(center[1])
    mean = polygon.points.mean(axis=0)
    fallback = (float(mean[0]), float(mean[1]))
    if not contains_point(polygon, fallback):
        raise ContourValidationError(
            f"vertex mean ({fallback[0]:.6g}, {fallback[1]:.6g}) lies outside the contour; "
            f"pass --center X Y")
    return fallback


def resolve_bits(value: Optional[str], settings: CodecSettings) -> int:
    """عدد صحيح موجب أو نوع القيمة: float / integer / mask"""
    if value is None:
        return settings.bits_per_value
    text = value.strip()
    if text.isdigit():
        bits = int(text)
        if bits <= 0:
            raise ContourValidationError("--bits must be positive")
        return bits
    return default_bits_for(text)


def precision_label(bits: int) -> str:
    return f"fp{bits}"


# ═══════════════════════════════════════════════════════════════════════════
# الأوامر (Commands)
# ═══════════════════════════════════════════════════════════════════════════

def cmd_encode(args, settings: CodecSettings) -> int:
    polygon = read_polygon(args.input, args.ann_id, args.part)
    bits = resolve_bits(args.bits, settings)
    harmonics = args.harmonics if args.harmonics is not None else settings.default_harmonics
    output = Path(args.output) if args.output else default_output(args.input, ".bin" if args.binary else ".fd")

    if args.polar:
        center = resolve_center(polygon, args.center)
        descriptor = encode_polar(polygon, center, harmonics, args.rays or settings.polar_rays,
                                  ray_mode=args.ray_mode)
        full_count = 2 * (2 * descriptor.m + 1)
        table_count = descriptor.n_real_coeffs
        if descriptor.non_star:
            print("warning: contour is not star-shaped about the center")
    else:
        if args.as_samples:
            samples = ContourSamples(polygon.complex_points)
        else:
            samples = resample(polygon, args.n_pts or settings.default_n_pts)
        descriptor = encode(samples, harmonics)
        if args.sparsify is not None:
            descriptor = sparsify(descriptor, args.sparsify)
        full_count = table_count = descriptor.n_real_coeffs

    write_outputs_sync({output: dump_descriptor(descriptor, binary=args.binary)})
    print(f"SEC: {compute_sec(full_count, bits)} bits @ {precision_label(bits)}")
    if args.drop_conjugates:
        print(f"SEC (stored values only): {compute_sec(table_count, bits)} bits @ {precision_label(bits)}"
              f" ({table_count} real values)")
    print(f"descriptor written to {output}")
    return EXIT_OK


def _decoded_points(descriptor, m_pts: int):
    if isinstance(descriptor, PolarDescriptor):
        return decode_polar(descriptor, m_pts)
    return decode(descriptor, m_pts)


def cmd_decode(args, settings: CodecSettings) -> int:
    binary = True if Path(args.descriptor).suffix.lower() == ".bin" else None
    descriptor = load_descriptor(read_bytes_sync(args.descriptor), binary=binary)
    fmt = args.format
    if fmt is None:
        suffix = Path(args.output).suffix.lower().lstrip(".") if args.output else ""
        fmt = suffix if suffix in OUTPUT_FORMATS else "svg"
    output = Path(args.output) if args.output else default_output(args.descriptor, f".{fmt}")

    m_pts = args.m_pts or settings.default_n_pts
    contour = _decoded_points(descriptor, m_pts)
    if fmt == "svg":
        content = contours_svg([(contour, FIT_STYLE)])
    elif fmt == "geojson":
        content = contour_geojson(contour, {"points": len(contour), "flags": sorted(contour.flags)})
    else:
        content = contour_csv(contour)

    write_outputs_sync({output: content})
    for flag in sorted(contour.flags):
        print(f"warning: {flag}")
    print(f"{len(contour)} points written to {output}")
    return EXIT_OK


def _loss_config(args) -> LossConfig:
    decay = None if args.no_decay else args.decay_at
    return LossConfig(
        lambda_cd=args.lambda_cd,
        lambda_perim=args.lambda_perim,
        lambda_coeff=args.lambda_coeff,
        perim_decay_iteration=decay,
        n_c=args.n_c,
        perimeter_mode=args.perimeter_mode,
        plateau_detection=args.plateau,
        momentum=args.momentum,
        l1_update=args.l1_update,
        frame=args.frame,
        init=args.init,
        init_noise=args.init_noise,
        seed=args.seed,
    )


def cmd_fit(args, settings: CodecSettings) -> int:
    polygon = read_polygon(args.input, args.ann_id, args.part)
    n = args.harmonics if args.harmonics is not None else settings.default_harmonics
    n_pts = args.n_pts or settings.default_n_pts
    cfg = _loss_config(args)

    result = fit_descriptor(polygon, n, n_pts, cfg,
                            steps=args.steps or settings.fit_steps,
                            step_size=args.step_size or settings.fit_step_size)
    fitted = decode(result.descriptor, n_pts)
    target = resample(polygon, n_pts)

    out_dir = Path(args.out_dir)
    stem = Path(args.input).stem
    outputs = {
        out_dir / f"{stem}_fit_trace.csv": result.trace_to_csv(),
        out_dir / f"{stem}_fit.svg": overlay_svg(target, fitted, title=f"fit n={n}"),
        out_dir / f"{stem}_fit.fd": dump_descriptor(result.descriptor),
    }
    write_outputs_sync(outputs)

    print(f"final chamfer: {result.final_chamfer:.6g}")
    print(f"self-intersections: {count_self_intersections(fitted)}")
    print(f"winding: {winding_count(fitted):.3f}")
    print(f"perimeter: {perimeter(fitted):.4f} (target {perimeter(polygon):.4f})")
    if result.perimeter_disabled_at is not None:
        print(f"perimeter penalty disabled at iteration {result.perimeter_disabled_at}")
    return EXIT_OK


def cmd_sweep(args, settings: CodecSettings) -> int:
    annotations = load_annotations(args.input, limit=args.limit)
    cutoffs = args.cutoffs or list(settings.sweep_cutoffs)
    workers = resolve_thread_count(args.workers, settings)
    n_pts = args.n_pts or [None]
    if len(n_pts) > 1:
        if args.svg:
            raise ContourValidationError("--svg needs a single --n-pts value")
        report = sample_count_ablation(annotations, n_pts, cutoffs=args.cutoffs, workers=workers)
    else:
        report = reconstruction_sweep(annotations, n_pts=n_pts[0], cutoffs=cutoffs, workers=workers)

    outputs = {}
    csv_text = report.to_csv()
    if args.output:
        outputs[Path(args.output)] = csv_text
    else:
        sys.stdout.write(csv_text)
    if args.svg:
        outputs[Path(args.svg)] = line_chart_svg(
            [r.n_real_coeffs for r in report.rows], [r.mean_chamfer for r in report.rows],
            x_label="real coefficients", y_label="mean chamfer (px²)")
    if outputs:
        write_outputs_sync(outputs)
    if annotations.skipped_total:
        print(f"skipped: {dict(sorted(annotations.skipped.items()))}", file=sys.stderr)
    return EXIT_OK


def cmd_chebyshev_demo(args, settings: CodecSettings) -> int:
    polygon = read_polygon(args.input, args.ann_id, args.part)
    center = resolve_center(polygon, args.center)
    fit = fit_rho_series(polygon, center,
                         degree=args.degree if args.degree is not None else settings.chebyshev_degree,
                         n_samples=args.samples or settings.chebyshev_samples,
                         constrained=args.constrained)
    output = Path(args.output) if args.output else default_output(args.input, "_chebyshev.csv")
    write_outputs_sync({output: fit.to_csv()})
    print(f"gap: {fit.gap!r}")
    print(f"residual: {fit.residual!r}")
    print(f"mean rho: {float(np.mean(fit.rho))!r}")
    return EXIT_OK


def cmd_oes(args, settings: CodecSettings) -> int:
    if args.input:
        rows = parse_efficiency_csv(read_bytes_sync(args.input).decode("utf-8"))
    else:
        rows = [(r.method, r.map_percent, r.fps, r.sec_bits) for r in reference_rows(args.table)]
    if not rows:
        raise ContourValidationError("no efficiency rows")
    text = efficiency_csv(score_rows(rows))
    if args.output:
        write_outputs_sync({Path(args.output): text})
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_config(args, settings: CodecSettings) -> int:
    manager = ConfigManager(args.config)
    if args.set:
        manager.apply_assignments(args.set)
        manager.save()
    sys.stdout.write(json.dumps(manager.config.to_dict(), ensure_ascii=False, indent=2) + "\n")
    return EXIT_OK


# ═══════════════════════════════════════════════════════════════════════════
# المحلل (Argument parser)
# ═══════════════════════════════════════════════════════════════════════════

def _add_polygon_input(p: argparse.ArgumentParser):
    p.add_argument("input", help="ملف نقاط (x y لكل سطر) أو ملف COCO JSON")
    p.add_argument("--ann-id", type=int, default=None, help="معرّف التعليق عند إدخال COCO")
    p.add_argument("--part", type=int, default=0, help="رقم الجزء في التقسيم متعدد الأجزاء")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="contour-codec", description="ترميز المحيطات المغلقة بمعاملات فورييه")
    parser.add_argument("--config", default=None, help="مسار config.json")
    parser.add_argument("--log-level", default=None, choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    parser.add_argument("--seed", type=int, default=0, help="البذرة للعمليات العشوائية")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", help="ترميز مضلع")
    _add_polygon_input(p)
    p.add_argument("-n", "--harmonics", type=int, default=None)
    p.add_argument("--n-pts", type=int, default=None)
    p.add_argument("-o", "--output", default=None)
    p.add_argument("--binary", action="store_true", help="سجل ثنائي float64")
    p.add_argument("--bits", default=None, help="بت لكل قيمة حقيقية: عدد أو float / integer / mask")
    p.add_argument("--as-samples", action="store_true", help="استخدام النقاط كما هي دون إعادة العينات")
    p.add_argument("--sparsify", type=float, default=None, help="تصفير |F_k| تحت العتبة")
    p.add_argument("--polar", action="store_true", help="الترميز القطبي ρ(θ)")
    p.add_argument("--center", type=float, nargs=2, default=None, metavar=("X", "Y"))
    p.add_argument("--rays", type=int, default=None)
    p.add_argument("--ray-mode", choices=["farthest", "nearest"], default="farthest")
    p.add_argument("--drop-conjugates", action="store_true", help="طباعة عدد القيم المخزنة فعلياً أيضاً")
    p.set_defaults(handler=cmd_encode)

    p = sub.add_parser("decode", help="فك ترميز واصف")
    p.add_argument("descriptor")
    p.add_argument("--m-pts", type=int, default=None)
    p.add_argument("--format", choices=OUTPUT_FORMATS, default=None)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(handler=cmd_decode)

    p = sub.add_parser("fit", help="ملاءمة واصف بالانحدار التدرجي")
    _add_polygon_input(p)
    p.add_argument("-n", "--harmonics", type=int, default=None)
    p.add_argument("--n-pts", type=int, default=None)
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--step-size", type=float, default=None)
    p.add_argument("--lambda-cd", type=float, default=1.0)
    p.add_argument("--lambda-perim", type=float, default=0.01)
    p.add_argument("--lambda-coeff", type=float, default=500.0)
    p.add_argument("--n-c", type=int, default=None)
    p.add_argument("--decay-at", type=int, default=2000)
    p.add_argument("--no-decay", action="store_true")
    p.add_argument("--perimeter-mode", choices=["l2", "true"], default="l2")
    p.add_argument("--plateau", action="store_true", help="إيقاف عقوبة المحيط عند الاستقرار")
    p.add_argument("--momentum", type=float, default=0.0)
    p.add_argument("--l1-update", choices=["proximal", "subgradient"], default="subgradient")
    p.add_argument("--frame", choices=["normalized", "pixel"], default="normalized",
                   help="إطار حدود المحيط وL1: مُطبّع بقطر الصندوق أو بالبكسل")
    p.add_argument("--init", choices=["warm", "circle", "random"], default="warm")
    p.add_argument("--init-noise", type=float, default=0.1)
    p.add_argument("--out-dir", default=".")
    p.set_defaults(handler=cmd_fit)

    p = sub.add_parser("sweep", help="تجربة تصفير المعاملات")
    p.add_argument("input", help="ملف COCO JSON")
    p.add_argument("--n-pts", type=int, nargs="+", default=None, help="أكثر من قيمة تعطي جدول مقارنة N_pts")
    p.add_argument("--cutoffs", type=parse_cutoffs, default=None, help="مثال: 1,2,4,8,16,32")
    p.add_argument("--limit", type=int, default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("-o", "--output", default=None)
    p.add_argument("--svg", default=None, help="مخطط المتوسط مقابل عدد المعاملات")
    p.set_defaults(handler=cmd_sweep)

    p = sub.add_parser("chebyshev-demo", help="فجوة الدورية لملاءمة Chebyshev")
    _add_polygon_input(p)
    p.add_argument("--degree", type=int, default=None)
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--center", type=float, nargs=2, default=None, metavar=("X", "Y"))
    p.add_argument("--constrained", action="store_true", help="فرض Σ α_odd = 0")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(handler=cmd_chebyshev_demo)

    p = sub.add_parser("oes", help="حساب OES")
    p.add_argument("input", nargs="?", default=None, help="CSV بالأعمدة method,map,fps,sec")
    p.add_argument("--table", type=int, choices=[2, 3, 4], default=None, help="صفوف الجداول المرجعية")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(handler=cmd_oes)

    p = sub.add_parser("config", help="عرض التكوين أو تعديله")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="تعديل مفتاح وحفظ الملف؛ قابل للتكرار")
    p.set_defaults(handler=cmd_config)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """الدالة الرئيسية؛ تعيد رمز الخروج"""
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        settings = ConfigManager(args.config).config
        level = args.log_level or settings.log_level
        LoggerFactory.setup(getattr(logging, str(level).upper(), logging.INFO))
        return args.handler(args, settings)
    except Exception as e:
        code = exit_code_for(e)
        logger.error(f"❌ {type(e).__name__}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
