#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
═══════════════════════════════════════════════════════════════════════════
مقاييس الكفاءة وتجربة إعادة البناء - Efficiency Metrics & Reconstruction Sweep
═══════════════════════════════════════════════════════════════════════════

- تحميل مضلعات COCO (JSON) مع عدّ المُتجاهَل وأسبابه
- تجربة تصفير المعاملات: الخطأ مقابل عدد المعاملات
- SEC (بت لكل كائن) و OES = 100·mAP·FPS/SEC
- مقارنة الترميز المعقد بالترميز القطبي عند نفس الميزانية
"""

import csv
import io
import json
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, computed_field

from contour_config import LoggerFactory
from contour_errors import AnnotationParseError, AnnotationSchemaError, ContourValidationError
from contour_geometry import ContourSamples, Polygon, chamfer_distance, resample
from fourier_codec import (
    FourierDescriptor, decode, decode_polar, encode, encode_polar, truncate, truncate_polar,
)

logger = LoggerFactory.get_logger("EfficiencyMetrics")

DEFAULT_CUTOFFS: Tuple[int, ...] = (1, 2, 4, 8, 16, 32)
SWEEP_HEADER = "n_keep,n_real_coeffs,mean_chamfer,median_chamfer,count"

SKIP_RLE = "rle-unsupported"
SKIP_CROWD = "crowd"
SKIP_TOO_FEW = "too-few-points"
SKIP_INVALID = "invalid-polygon"


# ═══════════════════════════════════════════════════════════════════════════
# تحميل التعليقات (COCO ingestion)
# ═══════════════════════════════════════════════════════════════════════════

class CocoAnnotation(BaseModel):
    """حقول التعليق المطلوبة فقط؛ الباقي يُتجاهل"""
    model_config = ConfigDict(extra="ignore")

    id: int
    image_id: int
    category_id: int
    segmentation: Union[List[float], List[List[float]], Dict[str, Any]]
    iscrowd: int = 0


@dataclass(frozen=True)
class AnnotationEntry:
    ann_id: int
    image_id: int
    category_id: int
    polygon: Polygon
    part: int = 0


@dataclass
class AnnotationSet:
    """المدخلات الصالحة بترتيب المعرّف تصاعدياً مع عدّاد أسباب التجاهل"""
    entries: List[AnnotationEntry] = field(default_factory=list)
    skipped: Counter = field(default_factory=Counter)

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def skipped_total(self) -> int:
        return sum(self.skipped.values())

    @property
    def polygons(self) -> List[Polygon]:
        return [e.polygon for e in self.entries]

    def find(self, ann_id: int, part: int = 0) -> AnnotationEntry:
        for entry in self.entries:
            if entry.ann_id == ann_id and entry.part == part:
                return entry
        raise ContourValidationError(f"annotation {ann_id} (part {part}) not found")


def _byte_offset(doc: str, pos: int) -> int:
    return len(doc[:pos].encode("utf-8"))


def _schema_field(index: int, err: ValidationError) -> str:
    first = err.errors()[0]
    loc = [str(p) for p in first.get("loc", ()) if not isinstance(p, int)]
    # union branches add their type name to loc
    name = loc[0] if loc else "?"
    return f"annotations[{index}].{name}"


def _polygon_or_reason(flat: List[float]) -> Tuple[Optional[Polygon], Optional[str]]:
    if len(flat) < 6:
        return None, SKIP_TOO_FEW
    if len(flat) % 2 != 0:
        return None, SKIP_INVALID
    pts = np.asarray(flat, dtype=float).reshape(-1, 2)
    if not np.all(np.isfinite(pts)):
        return None, SKIP_INVALID
    try:
        poly = Polygon(pts)
    except ContourValidationError:
        return None, SKIP_TOO_FEW
    return poly, None


def parse_annotations(text: str, limit: Optional[int] = None) -> AnnotationSet:
    """تحليل نص JSON بصيغة COCO إلى AnnotationSet"""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        offset = _byte_offset(e.doc, e.pos)
        raise AnnotationParseError(f"malformed JSON at byte {offset}: {e.msg}", offset) from e

    if not isinstance(data, dict) or not isinstance(data.get("annotations"), list):
        raise AnnotationSchemaError("missing 'annotations' list", "annotations")

    records: List[CocoAnnotation] = []
    for index, raw in enumerate(data["annotations"]):
        if not isinstance(raw, dict):
            raise AnnotationSchemaError(f"annotation {index} is not an object", f"annotations[{index}]")
        try:
            records.append(CocoAnnotation.model_validate(raw))
        except ValidationError as e:
            name = _schema_field(index, e)
            raise AnnotationSchemaError(f"missing or ill-typed field {name}", name) from e

    records.sort(key=lambda r: r.id)
    result = AnnotationSet()
    for rec in records:
        if limit is not None and len(result.entries) >= limit:
            break
        if isinstance(rec.segmentation, dict):
            result.skipped[SKIP_RLE] += 1
            continue
        if rec.iscrowd:
            result.skipped[SKIP_CROWD] += 1
            continue
        seg = rec.segmentation
        parts = [seg] if (not seg or not isinstance(seg[0], list)) else seg
        for part_index, flat in enumerate(parts):
            if limit is not None and len(result.entries) >= limit:
                break
            poly, reason = _polygon_or_reason(list(flat))
            if reason:
                result.skipped[reason] += 1
                continue
            result.entries.append(AnnotationEntry(rec.id, rec.image_id, rec.category_id, poly, part_index))
    return result


def load_annotations(path: Union[str, Path], limit: Optional[int] = None) -> AnnotationSet:
    """
    تحميل ملف COCO.

    Raises:
        OSError: الملف غير موجود أو غير قابل للقراءة
        AnnotationParseError: JSON غير صالح (مع byte_offset)
        AnnotationSchemaError: حقل مفقود (مع اسم الحقل)
    """
    if limit is not None and limit < 0:
        raise ContourValidationError("limit must be nonnegative")
    raw = Path(path).read_bytes()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as e:
        raise AnnotationParseError(f"annotation file is not UTF-8 at byte {e.start}", e.start) from e
    result = parse_annotations(text, limit)
    logger.info(f"📂 loaded {len(result)} polygons from {path}, skipped {dict(result.skipped)}")
    return result


# ═══════════════════════════════════════════════════════════════════════════
# تجربة إعادة البناء (Reconstruction sweep)
# ═══════════════════════════════════════════════════════════════════════════

@dataclass(frozen=True)
class SweepRow:
    n_keep: int
    n_real_coeffs: int
    mean_chamfer: float
    median_chamfer: float
    count: int


@dataclass
class SweepReport:
    rows: List[SweepRow]
    n_pts: int

    def csv_rows(self) -> List[str]:
        return [f"{r.n_keep},{r.n_real_coeffs},{r.mean_chamfer:.6f},{r.median_chamfer:.6f},{r.count}"
                for r in self.rows]

    def to_csv(self) -> str:
        return "\n".join([SWEEP_HEADER] + self.csv_rows()) + "\n"


def _polygon_errors(polygon: Polygon, n_pts: int, cutoffs: Sequence[int]) -> np.ndarray:
    samples = resample(polygon, n_pts)
    full = encode(samples, (n_pts - 1) // 2)
    return np.array([
        chamfer_distance(decode(truncate(full, c), n_pts).samples, samples.samples) for c in cutoffs
    ])


def reconstruction_sweep(a: AnnotationSet, n_pts: Optional[int] = None,
                         cutoffs: Sequence[int] = DEFAULT_CUTOFFS, workers: int = 1) -> SweepReport:
    """
    لكل مضلع: إعادة العينات ← ترميز كامل ← قطع ← فك ← Chamfer مقابل العينات.
    الترتيب حسب مؤشر الإدخال لذا النتيجة مطابقة بايتياً لأي عدد عمال.
    """
    if len(a) == 0:
        raise ContourValidationError("empty annotation set")
    cutoffs = [int(c) for c in cutoffs]
    if not cutoffs:
        raise ContourValidationError("at least one cutoff is required")
    if any(c < 0 for c in cutoffs) or any(b <= a_ for a_, b in zip(cutoffs, cutoffs[1:])):
        raise ContourValidationError("cutoffs must be nonnegative and strictly ascending")
    if n_pts is None:
        n_pts = 2 * cutoffs[-1] + 1
    if n_pts < 2 * cutoffs[-1] + 1 or n_pts < 4:
        raise ContourValidationError(f"n_pts={n_pts} too small for cutoff {cutoffs[-1]}")

    polygons = a.polygons
    logger.info(f"🔄 sweep over {len(polygons)} polygons, n_pts={n_pts}, cutoffs={cutoffs}, workers={workers}")
    if workers <= 1:
        per_polygon = [_polygon_errors(p, n_pts, cutoffs) for p in polygons]
    else:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            per_polygon = list(executor.map(lambda p: _polygon_errors(p, n_pts, cutoffs), polygons))

    errors = np.vstack(per_polygon)
    rows = [
        SweepRow(n_keep=c, n_real_coeffs=2 * (2 * c + 1),
                 mean_chamfer=float(np.mean(errors[:, i])),
                 median_chamfer=float(np.median(errors[:, i])),
                 count=len(polygons))
        for i, c in enumerate(cutoffs)
    ]
    logger.info("✓ sweep finished")
    return SweepReport(rows=rows, n_pts=n_pts)


def sample_count_ablation(a: AnnotationSet, sample_counts: Sequence[int] = (60, 128),
                          cutoffs: Optional[Sequence[int]] = None, workers: int = 1) -> "AblationReport":
    """
    نفس تجربة إعادة البناء عند عدة أعداد عينات N_pts.
    القطوع الافتراضية: قيم DEFAULT_CUTOFFS التي يتسع لها أصغر N_pts.
    """
    counts = [int(n) for n in sample_counts]
    if not counts:
        raise ContourValidationError("at least one sample count is required")
    if cutoffs is None:
        cutoffs = [c for c in DEFAULT_CUTOFFS if 2 * c + 1 <= min(counts)]
    return AblationReport([reconstruction_sweep(a, n, cutoffs, workers) for n in counts])


@dataclass
class AblationReport:
    reports: List[SweepReport]

    def to_csv(self) -> str:
        lines = ["n_pts," + SWEEP_HEADER]
        for report in self.reports:
            lines.extend(f"{report.n_pts},{line}" for line in report.csv_rows())
        return "\n".join(lines) + "\n"


# ═══════════════════════════════════════════════════════════════════════════
# SEC / OES
# ═══════════════════════════════════════════════════════════════════════════

BITS_PER_KIND = {"float": 32, "integer": 16, "mask": 1}


def default_bits_for(kind: str) -> int:
    """32 للأعداد العشرية، 16 لإحداثيات البكسل الصحيحة، 1 لبكسل القناع"""
    key = {"int": "integer", "coords": "integer", "pixel": "mask"}.get(kind, kind)
    if key not in BITS_PER_KIND:
        raise ContourValidationError(f"unknown value kind: {kind}")
    return BITS_PER_KIND[key]


def compute_sec(n_real_coeffs: int, bits_per_value: int) -> int:
    if n_real_coeffs <= 0 or bits_per_value <= 0:
        raise ContourValidationError("SEC inputs must be positive")
    return int(n_real_coeffs) * int(bits_per_value)


def compute_oes(map_percent: float, fps: float, sec_bits: int) -> float:
    """OES = 100 × mAP × FPS / SEC"""
    if map_percent <= 0 or fps <= 0 or sec_bits <= 0:
        raise ContourValidationError("OES inputs must be positive")
    return 100.0 * map_percent * fps / sec_bits


class EfficiencyScore(BaseModel):
    """(mAP, FPS, SEC, OES) لطريقة واحدة"""
    model_config = ConfigDict(frozen=True)

    method: str = ""
    map_percent: float = Field(gt=0)
    fps: float = Field(gt=0)
    sec_bits: int = Field(gt=0)

    @computed_field
    @property
    def oes(self) -> float:
        return compute_oes(self.map_percent, self.fps, self.sec_bits)

    @classmethod
    def score(cls, method: str, map_percent: float, fps: float, sec_bits: int) -> "EfficiencyScore":
        return cls(method=method, map_percent=map_percent, fps=fps, sec_bits=sec_bits)


@dataclass(frozen=True)
class ReferenceRow:
    """صف من جداول المقارنة المنشورة مع دقة التقريب للقيمة المنشورة"""
    table: int
    method: str
    map_percent: float
    fps: float
    n_values: int
    bits_per_value: int
    reported_oes: float
    decimals: int

    @property
    def sec_bits(self) -> int:
        return compute_sec(self.n_values, self.bits_per_value)


REFERENCE_TABLE_ROWS: Tuple[ReferenceRow, ...] = (
    ReferenceRow(2, "PolarMask", 32.9, 4.1, 36, 32, 11.7, 1),
    ReferenceRow(2, "FourierNet-Cartesian", 22.9, 4.9, 16, 32, 21.9, 1),
    ReferenceRow(2, "FourierNet", 23.3, 4.9, 16, 32, 22.3, 1),
    ReferenceRow(2, "ComplexFourier-RX101", 27.3, 4.2, 16, 32, 22.4, 1),
    ReferenceRow(3, "ESE-Seg", 21.6, 38.5, 20, 32, 130, 0),
    ReferenceRow(3, "ComplexFourier-D53", 21.2, 39.1, 16, 32, 162, 0),
    ReferenceRow(4, "DeepSnake", 31.0, 6.68, 256, 16, 5, 0),
    ReferenceRow(4, "DANCE", 34.6, 7.6, 196, 16, 8, 0),
    ReferenceRow(4, "Mask R-CNN", 33.6, 10.8, 784, 1, 46, 0),
    ReferenceRow(4, "PANet", 38.2, 4.5, 784, 1, 22, 0),
    ReferenceRow(4, "SOLOv2", 38.8, 12.4, 64000, 1, 0.75, 2),
    ReferenceRow(4, "ComplexFourier-R50", 24.2, 10.7, 16, 32, 51, 0),
)


def reference_rows(table: Optional[int] = None) -> List[ReferenceRow]:
    return [r for r in REFERENCE_TABLE_ROWS if table is None or r.table == table]


def score_rows(rows: Iterable[Tuple[str, float, float, int]]) -> List[EfficiencyScore]:
    """(method, map, fps, sec) → EfficiencyScore"""
    scores = []
    for method, map_percent, fps, sec in rows:
        try:
            scores.append(EfficiencyScore.score(method, float(map_percent), float(fps), int(sec)))
        except (ValidationError, ValueError) as e:
            raise ContourValidationError(f"invalid efficiency row for {method!r}: {e}") from e
    return scores


def parse_efficiency_csv(text: str) -> List[Tuple[str, float, float, int]]:
    """
    قراءة CSV بالأعمدة method,map,fps,sec (عمود oes إن وُجد يُتجاهل).
    """
    reader = csv.DictReader(io.StringIO(text))
    required = {"method", "map", "fps", "sec"}
    if reader.fieldnames is None or not required.issubset({f.strip() for f in reader.fieldnames}):
        raise ContourValidationError("efficiency CSV needs the columns method,map,fps,sec")
    rows = []
    for line_no, raw in enumerate(reader, start=2):
        row = {k.strip(): (v or "").strip() for k, v in raw.items() if k is not None}
        try:
            rows.append((row["method"], float(row["map"]), float(row["fps"]), int(float(row["sec"]))))
        except ValueError as e:
            raise ContourValidationError(f"line {line_no}: {e}") from e
    return rows


def efficiency_csv(scores: Sequence[EfficiencyScore]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["method", "map", "fps", "sec", "oes"])
    for s in scores:
        writer.writerow([s.method, f"{s.map_percent:g}", f"{s.fps:g}", s.sec_bits, f"{s.oes:.4f}"])
    return buf.getvalue()


# ═══════════════════════════════════════════════════════════════════════════
# مقارنة الترميزين (Complex vs polar at equal budgets)
# ═══════════════════════════════════════════════════════════════════════════

@dataclass(frozen=True)
class CodecComparison:
    budget: int
    complex_n: int
    complex_coeffs: int
    complex_chamfer: float
    polar_m: int
    polar_chamfer: float
    non_star: bool


def complex_harmonics_for(budget: int) -> int:
    """أكبر n بحيث 2(2n+1) ≤ budget"""
    n = (budget // 2 - 1) // 2
    if n < 1:
        raise ContourValidationError(f"budget {budget} too small for a complex descriptor")
    return n


def polar_harmonics_for(budget: int) -> int:
    """أكبر m بحيث (2m+1) + 2 (المركز) ≤ budget"""
    m = (budget - 3) // 2
    if m < 0:
        raise ContourValidationError(f"budget {budget} too small for a polar descriptor")
    return m


def budget_descriptor(samples: ContourSamples, budget: int) -> FourierDescriptor:
    """
    واصف معقد يملأ ميزانية budget قيمة حقيقية بالكامل.

    K = budget // 2 معاملاً: النطاق المتماثل [−n, n] مع n = (K − 1) // 2،
    وإن كان K زوجياً يُضاف التردد ±(n+1) الأكبر مقداراً (التعادل لصالح +).
    الناتج واصف بحجم n+1 صُفِّر فيه التردد الآخر.
    """
    n = complex_harmonics_for(budget)
    if (budget // 2) % 2 == 1:
        return encode(samples, n)
    full = encode(samples, n + 1)
    plus, minus = full.coefficient(n + 1), full.coefficient(-(n + 1))
    dropped = -(n + 1) if abs(plus) >= abs(minus) else n + 1
    coeffs = np.array(full.coeffs)
    coeffs[full.frequencies == dropped] = 0
    return full.with_coeffs(coeffs)


def compare_codecs(polygon: Polygon, center: Tuple[float, float], budgets: Sequence[int],
                   n_pts: int = 256, n_rays: int = 360) -> List[CodecComparison]:
    """
    خطأ إعادة البناء (Chamfer مقابل العينات) للترميزين عند نفس عدد القيم الحقيقية.
    الترميز المعقد يملأ الميزانية (budget_descriptor)، والقطبي يستخدم أفضل ρ
    بالمربعات الصغرى عند كل ميزانية.
    """
    samples = resample(polygon, n_pts)
    m_max = max(polar_harmonics_for(b) for b in budgets)
    if n_rays < 2 * m_max + 1:
        raise ContourValidationError("n_rays too small for the largest budget")
    polar_full = encode_polar(polygon, center, m_max, n_rays)

    results = []
    for budget in budgets:
        n = complex_harmonics_for(budget)
        m = polar_harmonics_for(budget)
        if 2 * n + 3 > n_pts or 2 * m + 1 > n_pts:
            raise ContourValidationError(f"n_pts={n_pts} too small for budget {budget}")
        complex_d = budget_descriptor(samples, budget)
        complex_err = chamfer_distance(decode(complex_d, n_pts).samples, samples.samples)
        polar_err = chamfer_distance(decode_polar(truncate_polar(polar_full, m), n_pts).samples,
                                     samples.samples)
        results.append(CodecComparison(budget, n, budget // 2, complex_err, m, polar_err,
                                       polar_full.non_star))
    return results
