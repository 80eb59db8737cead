"""
اختبارات مولّدات المخرجات والكتابة غير المتزامنة
Tests for contour_renderers
"""

import json

import numpy as np
import pytest

from contour_renderers import (
    contour_csv, contour_geojson, contour_path_data, line_chart_svg, overlay_svg, read_bytes,
    write_outputs, write_outputs_sync, write_text,
)


class TestBuilders:

    def setup_method(self):
        self.z = np.array([0, 1, 1 + 1j, 1j])

    def test_csv(self):
        assert contour_csv(self.z).splitlines() == [
            "x,y", "0.000000,0.000000", "1.000000,0.000000", "1.000000,1.000000", "0.000000,1.000000",
        ]

    def test_path_data(self):
        d = contour_path_data(self.z)
        assert d == "M 0.000000 0.000000 L 1.000000 0.000000 L 1.000000 1.000000 L 0.000000 1.000000 Z"

    def test_geojson(self):
        feature = json.loads(contour_geojson(self.z, {"points": 4}))
        ring = feature["geometry"]["coordinates"][0]
        assert feature["type"] == "Feature"
        assert ring[0] == ring[-1] == [0.0, 0.0]
        assert feature["properties"] == {"points": 4}

    def test_overlay_styles(self):
        svg = overlay_svg(self.z, self.z * 0.9, title="t")
        assert svg.count("<path ") == 2
        assert "stroke-dasharray" in svg
        assert "<title>t</title>" in svg

    def test_line_chart(self):
        svg = line_chart_svg([6, 10, 18], [3.0, 1.0, 0.5], "x", "y")
        assert svg.count("<circle ") == 3
        assert "<polyline" in svg


class TestAsyncWriters:
    """الكتابة عبر aiofiles"""

    @pytest.mark.asyncio
    async def test_write_and_read_back(self, tmp_path):
        path = await write_text(tmp_path / "nested" / "a.txt", "hello\n")
        assert path.read_text() == "hello\n"
        assert await read_bytes(path) == b"hello\n"

    @pytest.mark.asyncio
    async def test_write_many(self, tmp_path):
        outputs = {tmp_path / f"{i}.bin": bytes([i]) * 4 for i in range(5)}
        written = await write_outputs(outputs)
        assert written == list(outputs)
        assert (tmp_path / "3.bin").read_bytes() == b"\x03" * 4

    def test_sync_wrapper(self, tmp_path):
        write_outputs_sync({tmp_path / "x.csv": "x,y\n"})
        assert (tmp_path / "x.csv").read_text() == "x,y\n"
