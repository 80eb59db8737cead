#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
مولّدات المخرجات - Contour Output Renderers

CSV و SVG (مكتوب يدوياً) و GeoJSON، والكتابة غير المتزامنة عبر aiofiles.
"""

import asyncio
import json
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import aiofiles
import numpy as np

from contour_config import LoggerFactory
from contour_geometry import as_complex, PointsLike

logger = LoggerFactory.get_logger("ContourRenderers")

SVG_HEADER = '<?xml version="1.0" encoding="UTF-8"?>\n'

TARGET_STYLE = {"stroke": "#1f77b4", "stroke-width": "1.5", "fill": "none", "stroke-dasharray": "4 2"}
FIT_STYLE = {"stroke": "#d62728", "stroke-width": "1.5", "fill": "none"}


def _fmt(v: float) -> str:
    return f"{float(v):.6f}"


# ═══════════════════════════════════════════════════════════════════════════
# CSV / GeoJSON
# ═══════════════════════════════════════════════════════════════════════════

def contour_csv(points: PointsLike) -> str:
    z = as_complex(points)
    rows = ["x,y"] + [f"{_fmt(p.real)},{_fmt(p.imag)}" for p in z]
    return "\n".join(rows) + "\n"


def contour_geojson(points: PointsLike, properties: Optional[dict] = None) -> str:
    """Feature بهندسة Polygon؛ الحلقة مغلقة (النقطة الأولى مكررة في النهاية)"""
    z = as_complex(points)
    ring = [[float(p.real), float(p.imag)] for p in z]
    ring.append(list(ring[0]))
    feature = {
        "type": "Feature",
        "geometry": {"type": "Polygon", "coordinates": [ring]},
        "properties": properties or {},
    }
    return json.dumps(feature, indent=2) + "\n"


# ═══════════════════════════════════════════════════════════════════════════
# SVG
# ═══════════════════════════════════════════════════════════════════════════

def contour_path_data(points: PointsLike) -> str:
    """M x y L … Z  (مسار واحد مغلق)"""
    z = as_complex(points)
    head = f"M {_fmt(z[0].real)} {_fmt(z[0].imag)}"
    body = " ".join(f"L {_fmt(p.real)} {_fmt(p.imag)}" for p in z[1:])
    return f"{head} {body} Z" if body else f"{head} Z"


def _attrs(style: Dict[str, str]) -> str:
    return " ".join(f'{k}="{v}"' for k, v in style.items())


def contours_svg(layers: Sequence[Tuple[PointsLike, Dict[str, str]]], padding: float = 10.0,
                 title: Optional[str] = None) -> str:
    """
    رسم طبقات من المحيطات في ملف SVG واحد؛ كل محيط عنصر path واحد.
    viewBox يغطي جميع النقاط مع هامش.
    """
    all_pts = np.concatenate([as_complex(pts) for pts, _ in layers])
    min_x, max_x = all_pts.real.min() - padding, all_pts.real.max() + padding
    min_y, max_y = all_pts.imag.min() - padding, all_pts.imag.max() + padding
    width, height = max_x - min_x, max_y - min_y

    lines = [
        SVG_HEADER.rstrip("\n"),
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{_fmt(min_x)} {_fmt(min_y)} {_fmt(width)} {_fmt(height)}">',
    ]
    if title:
        lines.append(f"  <title>{title}</title>")
    for pts, style in layers:
        lines.append(f'  <path d="{contour_path_data(pts)}" {_attrs(style)}/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def overlay_svg(target: PointsLike, fitted: PointsLike, title: Optional[str] = None) -> str:
    """الهدف بخط متقطع والمحيط الملائم بخط متصل"""
    return contours_svg([(target, TARGET_STYLE), (fitted, FIT_STYLE)], title=title)


def line_chart_svg(xs: Sequence[float], ys: Sequence[float], x_label: str, y_label: str,
                   width: int = 480, height: int = 320, margin: int = 48) -> str:
    """مخطط خطي بسيط (polyline) مع محورين وعلامات للقيم"""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    x_lo, x_hi = float(xs.min()), float(xs.max())
    y_lo, y_hi = min(0.0, float(ys.min())), float(ys.max())
    x_span = (x_hi - x_lo) or 1.0
    y_span = (y_hi - y_lo) or 1.0

    px = margin + (xs - x_lo) / x_span * (width - 2 * margin)
    py = height - margin - (ys - y_lo) / y_span * (height - 2 * margin)
    polyline = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in zip(px, py))

    base_y = height - margin
    lines = [
        SVG_HEADER.rstrip("\n"),
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'  <line x1="{margin}" y1="{base_y}" x2="{width - margin}" y2="{base_y}" stroke="black"/>',
        f'  <line x1="{margin}" y1="{margin}" x2="{margin}" y2="{base_y}" stroke="black"/>',
        f'  <polyline points="{polyline}" fill="none" stroke="#1f77b4" stroke-width="2"/>',
    ]
    for x, y, xv, yv in zip(px, py, xs, ys):
        lines.append(f'  <circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="3" fill="#1f77b4"/>')
        lines.append(f'  <text x="{_fmt(x)}" y="{base_y + 16}" font-size="10" text-anchor="middle">{xv:g}</text>')
    lines.append(f'  <text x="{width / 2:g}" y="{height - 8}" font-size="12" text-anchor="middle">{x_label}</text>')
    lines.append(f'  <text x="12" y="{height / 2:g}" font-size="12" transform="rotate(-90 12 {height / 2:g})" '
                 f'text-anchor="middle">{y_label}</text>')
    lines.append(f'  <text x="{margin}" y="{margin - 8}" font-size="10">max {y_hi:.4g}</text>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


# ═══════════════════════════════════════════════════════════════════════════
# الكتابة والقراءة غير المتزامنة (aiofiles)
# ═══════════════════════════════════════════════════════════════════════════

async def write_text(path: Union[str, Path], content: Union[str, bytes]) -> Path:
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(content, bytes):
        async with aiofiles.open(path, "wb") as f:
            await f.write(content)
    else:
        async with aiofiles.open(path, "w", encoding="utf-8", newline="\n") as f:
            await f.write(content)
    logger.info(f"✅ تم حفظ {path}")
    return path


async def write_outputs(outputs: Dict[Union[str, Path], Union[str, bytes]]) -> List[Path]:
    """كتابة عدة ملفات بالتوازي"""
    return list(await asyncio.gather(*(write_text(p, c) for p, c in outputs.items())))


def write_outputs_sync(outputs: Dict[Union[str, Path], Union[str, bytes]]) -> List[Path]:
    return asyncio.run(write_outputs(outputs))


async def read_bytes(path: Union[str, Path]) -> bytes:
    async with aiofiles.open(path, "rb") as f:
        return await f.read()


def read_bytes_sync(path: Union[str, Path]) -> bytes:
    return asyncio.run(read_bytes(path))
