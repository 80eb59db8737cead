#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
═══════════════════════════════════════════════════════════════════════════
هندسة المضلعات - Contour Geometry Primitives
═══════════════════════════════════════════════════════════════════════════

- Polygon: مضلع مغلق (الحقيقة الأرضية)
- ContourSamples: نقاط معقدة متساوية التباعد على طول المحيط
- إعادة العينات بتباعد ثابت، المحيط، مسافة Chamfer،
  عدّ التقاطعات الذاتية، الصندوق المحيط
"""

import math
from dataclasses import dataclass, field
from typing import FrozenSet, Literal, Tuple, Union

import numpy as np

from contour_config import LoggerFactory
from contour_errors import ContourValidationError

logger = LoggerFactory.get_logger("ContourGeometry")

DUPLICATE_EPS = 1e-12
ORIENTATION_EPS = 1e-12


# ═══════════════════════════════════════════════════════════════════════════
# نماذج البيانات (Domain Models)
# ═══════════════════════════════════════════════════════════════════════════

def _drop_consecutive_duplicates(pts: np.ndarray) -> np.ndarray:
    keep = [0]
    for i in range(1, len(pts)):
        if np.hypot(*(pts[i] - pts[keep[-1]])) >= DUPLICATE_EPS:
            keep.append(i)
    # closing pair
    while len(keep) > 1 and np.hypot(*(pts[keep[-1]] - pts[keep[0]])) < DUPLICATE_EPS:
        keep.pop()
    return pts[keep]


@dataclass(frozen=True, eq=False)
class Polygon:
    """
    مضلع مغلق ضمنياً: آخر نقطة تتصل بالأولى.
    النقاط المتتالية المكررة تُحذف عند الإنشاء.
    """
    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ContourValidationError("polygon points must be (x, y) pairs")
        if not np.all(np.isfinite(pts)):
            raise ContourValidationError("polygon coordinates must be finite")
        pts = _drop_consecutive_duplicates(pts) if len(pts) else pts
        if len(pts) < 3:
            raise ContourValidationError("polygon needs at least 3 distinct points")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def complex_points(self) -> np.ndarray:
        return self.points[:, 0] + 1j * self.points[:, 1]


@dataclass(frozen=True, eq=False)
class ContourSamples:
    """
    N نقطة معقدة z = x + iy بوحدات البكسل (N ≥ 4).
    flags: تنبيهات فك الترميز مثل "negative-rho".
    """
    samples: np.ndarray
    flags: FrozenSet[str] = field(default_factory=frozenset)

    def __post_init__(self):
        z = np.array(self.samples, dtype=complex).ravel()
        if len(z) < 4:
            raise ContourValidationError("contour samples need at least 4 points")
        if not np.all(np.isfinite(z)):
            raise ContourValidationError("contour samples must be finite")
        z.setflags(write=False)
        object.__setattr__(self, "samples", z)
        object.__setattr__(self, "flags", frozenset(self.flags))

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def n(self) -> int:
        return len(self.samples)

    def as_points(self) -> np.ndarray:
        return np.column_stack([self.samples.real, self.samples.imag])


PointsLike = Union[Polygon, ContourSamples, np.ndarray, list, tuple]


def as_points(x: PointsLike) -> np.ndarray:
    """Coerce a polygon, contour or array (complex (N,) or real (N, 2)) to an (N, 2) float array."""
    if isinstance(x, Polygon):
        return np.asarray(x.points, dtype=float)
    if isinstance(x, ContourSamples):
        return x.as_points()
    arr = np.asarray(x)
    if np.iscomplexobj(arr):
        arr = arr.ravel()
        return np.column_stack([arr.real, arr.imag]).astype(float)
    arr = np.asarray(arr, dtype=float)
    if arr.ndim == 1 and arr.size == 2:
        arr = arr.reshape(1, 2)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ContourValidationError("expected a set of (x, y) points")
    return arr


def as_complex(x: PointsLike) -> np.ndarray:
    if isinstance(x, ContourSamples):
        return np.asarray(x.samples)
    if isinstance(x, Polygon):
        return x.complex_points
    pts = as_points(x)
    return pts[:, 0] + 1j * pts[:, 1]


# ═══════════════════════════════════════════════════════════════════════════
# العمليات الأساسية (Operations)
# ═══════════════════════════════════════════════════════════════════════════

def _closed_edges(pts: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    closed = np.vstack([pts, pts[:1]])
    seg = np.diff(closed, axis=0)
    return closed, seg


def perimeter(p: PointsLike) -> float:
    """مجموع أطوال الأضلاع بما فيها الضلع الخاتم"""
    pts = as_points(p)
    _, seg = _closed_edges(pts)
    return float(np.hypot(seg[:, 0], seg[:, 1]).sum())


def signed_area(c: PointsLike) -> float:
    """Shoelace area; positive for counter-clockwise loops in (x, y) axes."""
    pts = as_points(c)
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def resample(p: Polygon, n_pts: int) -> ContourSamples:
    """
    إعادة العينات بتباعد ثابت على طول المحيط.

    تبدأ من الرأس 0 وتحافظ على اتجاه الدوران؛ المسافات القوسية بين
    العينات المتتالية متساوية.
    """
    if n_pts < 4:
        raise ContourValidationError("n_pts must be at least 4")
    closed, seg = _closed_edges(np.asarray(p.points, dtype=float))
    seg_len = np.hypot(seg[:, 0], seg[:, 1])
    total = float(seg_len.sum())
    if not total > 0.0:
        raise ContourValidationError("degenerate contour")

    cum = np.concatenate([[0.0], np.cumsum(seg_len)])
    targets = np.arange(n_pts) * (total / n_pts)
    idx = np.searchsorted(cum, targets, side="right") - 1
    idx = np.clip(idx, 0, len(seg) - 1)
    frac = (targets - cum[idx]) / seg_len[idx]
    xy = closed[idx] + frac[:, None] * seg[idx]
    return ContourSamples(xy[:, 0] + 1j * xy[:, 1])


def bounding_box(p: PointsLike) -> Tuple[float, float, float, float]:
    """(min_x, min_y, max_x, max_y)"""
    pts = as_points(p)
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    return float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1])


def shape_scale(c: PointsLike) -> float:
    """
    طول قطر الصندوق المحيط: وحدة الإطار المُطبَّع.
    الإطار المُطبَّع = (z − F0) / shape_scale؛ الإزاحة لا تؤثر على المحيط
    ولا على |F_k| لـ k ≠ 0، لذا يكفي القسمة على المقياس.

    Raises:
        ContourValidationError: جميع النقاط متطابقة
    """
    min_x, min_y, max_x, max_y = bounding_box(c)
    scale = math.hypot(max_x - min_x, max_y - min_y)
    if not scale > 0.0:
        raise ContourValidationError("contour has zero extent")
    return scale


def contains_point(p: PointsLike, point: Tuple[float, float]) -> bool:
    """Even-odd test; points on an edge count as inside."""
    pts = as_points(p)
    x, y = float(point[0]), float(point[1])
    a, b = pts, np.roll(pts, -1, axis=0)
    ax, ay, bx, by = a[:, 0], a[:, 1], b[:, 0], b[:, 1]
    cross = (bx - ax) * (y - ay) - (by - ay) * (x - ax)
    on_edge = (np.abs(cross) <= 1e-9 * np.maximum(np.hypot(bx - ax, by - ay), 1.0)) \
        & (np.minimum(ax, bx) - 1e-9 <= x) & (x <= np.maximum(ax, bx) + 1e-9) \
        & (np.minimum(ay, by) - 1e-9 <= y) & (y <= np.maximum(ay, by) + 1e-9)
    if on_edge.any():
        return True
    straddles = (ay > y) != (by > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        x_cross = ax + (y - ay) * (bx - ax) / (by - ay)
    return bool(np.count_nonzero(straddles & (x < x_cross)) % 2)


def regular_polygon(n: int, radius: float, center: Tuple[float, float] = (0.0, 0.0),
                    phase: float = 0.0, clockwise: bool = False) -> Polygon:
    """مضلع منتظم (يُستخدم كدائرة في التجارب)"""
    sign = -1.0 if clockwise else 1.0
    t = phase + sign * 2.0 * np.pi * np.arange(n) / n
    return Polygon(np.column_stack([center[0] + radius * np.cos(t),
                                    center[1] + radius * np.sin(t)]))


def total_turning(c: PointsLike) -> float:
    """
    Signed sum of exterior angles of the closed loop.

    Equals 2π times the winding count of a simple loop; a contour that
    circles its object twice turns by about 4π.
    """
    pts = as_points(c)
    _, seg = _closed_edges(pts)
    nxt = np.roll(seg, -1, axis=0)
    cross = seg[:, 0] * nxt[:, 1] - seg[:, 1] * nxt[:, 0]
    dot = (seg * nxt).sum(axis=1)
    return float(np.arctan2(cross, dot).sum())


# ═══════════════════════════════════════════════════════════════════════════
# مسافة Chamfer
# ═══════════════════════════════════════════════════════════════════════════

@dataclass(frozen=True)
class ChamferConfig:
    """
    squared: مربعات المسافات (الافتراضي) أو المسافات نفسها
    reduction: "mean" لكل اتجاه (الافتراضي) أو "sum"
    """
    squared: bool = True
    reduction: Literal["mean", "sum"] = "mean"


DEFAULT_CHAMFER = ChamferConfig()


def nearest_neighbors(a: PointsLike, b: PointsLike) -> Tuple[np.ndarray, np.ndarray]:
    """
    For each point of a: index of its nearest point in b and the squared distance.
    Ties go to the lowest index.
    """
    pa, pb = as_points(a), as_points(b)
    if len(pa) == 0 or len(pb) == 0:
        raise ContourValidationError("empty point set")
    diff = pa[:, None, :] - pb[None, :, :]
    d2 = (diff ** 2).sum(axis=2)
    idx = np.argmin(d2, axis=1)
    return idx, d2[np.arange(len(pa)), idx]


@dataclass(frozen=True)
class ChamferTerms:
    value: float
    a_to_b: np.ndarray
    b_to_a: np.ndarray


def chamfer_terms(a: PointsLike, b: PointsLike, config: ChamferConfig = DEFAULT_CHAMFER) -> ChamferTerms:
    """Chamfer value together with both nearest-neighbour assignments."""
    pa, pb = as_points(a), as_points(b)
    if len(pa) == 0 or len(pb) == 0:
        raise ContourValidationError("empty point set")
    if not (np.all(np.isfinite(pa)) and np.all(np.isfinite(pb))):
        raise ContourValidationError("point coordinates must be finite")
    idx_ab, d2_ab = nearest_neighbors(pa, pb)
    idx_ba, d2_ba = nearest_neighbors(pb, pa)
    d_ab = d2_ab if config.squared else np.sqrt(d2_ab)
    d_ba = d2_ba if config.squared else np.sqrt(d2_ba)
    if config.reduction == "mean":
        value = float(d_ab.mean()) + float(d_ba.mean())
    else:
        value = float(d_ab.sum()) + float(d_ba.sum())
    return ChamferTerms(value=value, a_to_b=idx_ab, b_to_a=idx_ba)


def chamfer_distance(a: PointsLike, b: PointsLike, config: ChamferConfig = DEFAULT_CHAMFER) -> float:
    """
    مسافة Chamfer المتماثلة: مجموع متوسطي مربعات المسافات في الاتجاهين.
    """
    return chamfer_terms(a, b, config).value


# ═══════════════════════════════════════════════════════════════════════════
# التقاطعات الذاتية
# ═══════════════════════════════════════════════════════════════════════════

def _orientation(ax, ay, bx, by, cx, cy) -> np.ndarray:
    cross = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
    return np.where(np.abs(cross) <= ORIENTATION_EPS, 0, np.sign(cross)).astype(int)


def _on_segment(ax, ay, bx, by, cx, cy) -> np.ndarray:
    # c collinear with a-b: inside the bounding box of a-b
    return ((np.minimum(ax, bx) - ORIENTATION_EPS <= cx) & (cx <= np.maximum(ax, bx) + ORIENTATION_EPS) &
            (np.minimum(ay, by) - ORIENTATION_EPS <= cy) & (cy <= np.maximum(ay, by) + ORIENTATION_EPS))


def count_self_intersections(c: PointsLike) -> int:
    """
    عدد أزواج الأضلاع غير المتجاورة التي تتقاطع (التماس يُحتسب).
    """
    pts = as_points(c)
    n = len(pts)
    if n < 4:
        return 0
    i, j = np.triu_indices(n, k=2)
    keep = ~((i == 0) & (j == n - 1))
    i, j = i[keep], j[keep]

    p1, p2 = pts[i], pts[(i + 1) % n]
    q1, q2 = pts[j], pts[(j + 1) % n]
    args_p = (p1[:, 0], p1[:, 1], p2[:, 0], p2[:, 1])
    args_q = (q1[:, 0], q1[:, 1], q2[:, 0], q2[:, 1])

    o1 = _orientation(*args_p, q1[:, 0], q1[:, 1])
    o2 = _orientation(*args_p, q2[:, 0], q2[:, 1])
    o3 = _orientation(*args_q, p1[:, 0], p1[:, 1])
    o4 = _orientation(*args_q, p2[:, 0], p2[:, 1])

    proper = (o1 * o2 < 0) & (o3 * o4 < 0)
    touching = (
        ((o1 == 0) & _on_segment(*args_p, q1[:, 0], q1[:, 1])) |
        ((o2 == 0) & _on_segment(*args_p, q2[:, 0], q2[:, 1])) |
        ((o3 == 0) & _on_segment(*args_q, p1[:, 0], p1[:, 1])) |
        ((o4 == 0) & _on_segment(*args_q, p2[:, 0], p2[:, 1]))
    )
    return int(np.count_nonzero(proper | touching))


def winding_count(c: PointsLike) -> float:
    """|total turning| / 2π"""
    return abs(total_turning(c)) / (2.0 * math.pi)
