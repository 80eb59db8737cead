"""
أدوات الاختبار المشتركة - Shared fixtures

أشكال الاختبار (مربع، شكل L، حدوة، زرافة بساقين، نجمة غير متناظرة، دوائر)
ومجموعة COCO محفوظة من 50 مضلعاً مقعراً ونجمياً.
"""

import json
from pathlib import Path

import numpy as np
import pytest

from contour_geometry import Polygon, regular_polygon

FIXTURES = Path(__file__).parent / "fixtures"


def l_shape() -> Polygon:
    return Polygon([(0, 0), (60, 0), (60, 20), (20, 20), (20, 60), (0, 60)])


def horseshoe(outer: float = 60.0, inner: float = 20.0, opening_deg: float = 90.0, arc_pts: int = 40) -> Polygon:
    """حدوة سميكة مفتوحة إلى اليمين"""
    half = np.radians(opening_deg) / 2.0
    t = np.linspace(half, 2.0 * np.pi - half, arc_pts)
    outer_arc = np.column_stack([outer * np.cos(t), outer * np.sin(t)])
    inner_arc = np.column_stack([inner * np.cos(t[::-1]), inner * np.sin(t[::-1])])
    return Polygon(np.vstack([outer_arc, inner_arc]))


def giraffe_legs() -> Polygon:
    """جسم مستطيل بساقين طويلتين"""
    return Polygon([(0, 40), (10, 40), (10, 0), (25, 0), (25, 40), (75, 40), (75, 0), (90, 0),
                    (90, 40), (100, 40), (100, 70), (0, 70)])


def asymmetric_star(n_vertices: int = 180) -> Polygon:
    """ρ(θ) = 40 + نتوء غاوسي قرب 0.5 rad + 8·cos 3θ"""
    theta = 2.0 * np.pi * np.arange(n_vertices) / n_vertices
    d = np.angle(np.exp(1j * (theta - 0.5)))
    rho = 40.0 + 25.0 * np.exp(-d ** 2 / (2 * 0.3 ** 2)) + 8.0 * np.cos(3 * theta)
    return Polygon(np.column_stack([rho * np.cos(theta), rho * np.sin(theta)]))


def random_star_polygon(rng: np.random.Generator) -> Polygon:
    n = int(rng.integers(8, 31))
    theta = np.sort(rng.uniform(0, 2 * np.pi, n))
    base = rng.uniform(30, 70)
    rho = base * (1.0 + rng.uniform(-0.25, 0.25, n))
    center = rng.uniform(100, 400, 2)
    return Polygon(np.column_stack([center[0] + rho * np.cos(theta), center[1] + rho * np.sin(theta)]))


def coco_document(polygons, start_id: int = 1) -> dict:
    annotations = []
    for i, poly in enumerate(polygons):
        annotations.append({
            "id": start_id + i,
            "image_id": 1 + i // 5,
            "category_id": 1 + i % 3,
            "iscrowd": 0,
            "segmentation": [[float(v) for v in np.asarray(poly.points).ravel()]],
        })
    return {"images": [], "categories": [], "annotations": annotations}


def write_points(path: Path, polygon: Polygon) -> Path:
    path.write_text("\n".join(f"{x!r} {y!r}" for x, y in polygon.points) + "\n", encoding="utf-8")
    return path


@pytest.fixture
def unit_square() -> Polygon:
    return Polygon([(0, 0), (1, 0), (1, 1), (0, 1)])


@pytest.fixture
def concave_fixtures():
    return {"l_shape": l_shape(), "horseshoe": horseshoe(), "giraffe": giraffe_legs()}


@pytest.fixture
def circle64() -> Polygon:
    return regular_polygon(64, 50.0, center=(100.0, 100.0))


@pytest.fixture
def coco_corpus() -> Path:
    """
    50 مضلعاً محفوظاً: أشكال L وحدوات ونجوم وأمشاط وكتل، نصفها بعكس عقارب الساعة.
    sweep_golden.csv هو ناتج التجربة الافتراضية عليها.
    """
    return FIXTURES / "coco_corpus.json"


@pytest.fixture
def circle_corpus(tmp_path) -> Path:
    # vertex count equals the default sweep resolution so the samples are the vertices
    polygons = [regular_polygon(65, r, center=(r + 10, 2 * r)) for r in (15.0, 30.0, 45.0)]
    path = tmp_path / "circles.json"
    path.write_text(json.dumps(coco_document(polygons)), encoding="utf-8")
    return path
