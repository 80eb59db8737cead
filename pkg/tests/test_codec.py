"""
اختبارات ترميز فورييه والترميز القطبي
Tests for fourier_codec
"""

import json
import logging

import numpy as np
import pytest

from contour_errors import ContourValidationError
from contour_geometry import ContourSamples, Polygon, chamfer_distance, regular_polygon, resample
from fourier_codec import (
    FourierDescriptor, PolarDescriptor, cast_rays, circle_descriptor, decode, decode_adjoint,
    decode_batch, decode_polar, descriptor_from_bytes, descriptor_from_text, descriptor_to_bytes,
    descriptor_to_text, encode, encode_batch, encode_polar, frequency_order, load_descriptor,
    polar_from_text, polar_to_text, sparsify, truncate, truncate_polar,
)
from tests.conftest import FIXTURES, asymmetric_star, horseshoe, l_shape, random_star_polygon


def direct_dft(z: np.ndarray, n: int) -> np.ndarray:
    """مرجع: جمع مباشر بحلقات بدون FFT"""
    big_n = len(z)
    out = []
    for k in range(-n, n + 1):
        acc = 0j
        for j in range(big_n):
            acc += z[j] * np.exp(-2j * np.pi * j * k / big_n)
        out.append(acc / big_n)
    return np.array(out)


def direct_synthesis(coeffs: np.ndarray, m_pts: int) -> np.ndarray:
    n = (len(coeffs) - 1) // 2
    t = np.arange(m_pts)
    return sum(coeffs[k + n] * np.exp(2j * np.pi * k * t / m_pts) for k in range(-n, n + 1))


def brute_rays(points: np.ndarray, center, angles) -> np.ndarray:
    """مرجع: تقاطع شعاع/قطعة لكل زوج مع أخذ الأبعد"""
    out = []
    n = len(points)
    for a in angles:
        u = (np.cos(a), np.sin(a))
        best = None
        for i in range(n):
            p, q = points[i], points[(i + 1) % n]
            e = (q[0] - p[0], q[1] - p[1])
            w = (p[0] - center[0], p[1] - center[1])
            den = u[0] * e[1] - u[1] * e[0]
            if abs(den) < 1e-15:
                continue
            s = (w[0] * e[1] - w[1] * e[0]) / den
            t = (w[0] * u[1] - w[1] * u[0]) / den
            if s >= 0 and -1e-12 <= t <= 1 + 1e-12:
                best = s if best is None else max(best, s)
        out.append(best)
    return np.array(out)


class TestEncodeDecode:
    """اختبارات الترميز وفك الترميز"""

    def setup_method(self):
        self.rng = np.random.default_rng(42)

    def test_circle_spectrum(self):
        c, r, big_n = 3 - 2j, 7.5, 32
        z = c + r * np.exp(2j * np.pi * np.arange(big_n) / big_n)
        d = encode(ContourSamples(z), 2)
        assert d.coefficient(0) == pytest.approx(c, abs=1e-9)
        assert d.coefficient(1) == pytest.approx(r, abs=1e-9)
        for k in (-2, -1, 2):
            assert abs(d.coefficient(k)) < 1e-9

    def test_constant_samples(self):
        d = encode(np.full(9, 4 + 1j), 3)
        assert d.coefficient(0) == pytest.approx(4 + 1j)
        assert np.all(np.abs(d.coeffs[np.arange(7) != 3]) < 1e-12)

    def test_square_against_direct_sum(self):
        square = Polygon([(0, 0), (100, 0), (100, 100), (0, 100)])
        samples = resample(square, 64)
        d = encode(samples, 8)
        np.testing.assert_allclose(d.coeffs, direct_dft(samples.samples, 8), atol=1e-9)

    def test_fft_path_agrees_with_direct(self):
        """n·N ≥ 2^14 يستخدم FFT"""
        z = self.rng.normal(size=1024) * 50 + 1j * self.rng.normal(size=1024) * 50
        n = 20
        j = np.arange(1024)
        expected = np.array([(z * np.exp(-2j * np.pi * k * j / 1024)).sum() / 1024 for k in range(-n, n + 1)])
        np.testing.assert_allclose(encode(z, n).coeffs, expected, atol=1e-9)

    def test_harmonics_exceed_samples(self):
        with pytest.raises(ContourValidationError, match="harmonics exceed samples"):
            encode(np.arange(8) + 0j, 4)

    def test_decode_circle(self):
        d = FourierDescriptor.from_mapping({0: 5 + 5j, 1: 2.0})
        pts = decode(d, 16).samples
        np.testing.assert_allclose(np.abs(pts - (5 + 5j)), 2.0, atol=1e-12)
        assert len(pts) == 16

    def test_decode_against_direct_synthesis(self):
        square = Polygon([(0, 0), (100, 0), (100, 100), (0, 100)])
        d = encode(resample(square, 64), 8)
        np.testing.assert_allclose(decode(d, 120).samples, direct_synthesis(d.coeffs, 120), atol=1e-9)

    def test_decode_too_few_points(self):
        d = circle_descriptor(0, 1.0, 5)
        with pytest.raises(ContourValidationError):
            decode(d, 10)

    def test_round_trip_random_polygons(self):
        """1000 مضلع عشوائي بعدد رؤوس بين 5 و 200"""
        for _ in range(1000):
            n_vertices = int(self.rng.integers(5, 201))
            theta = np.sort(self.rng.uniform(0, 2 * np.pi, n_vertices))
            rho = self.rng.uniform(10, 100, n_vertices)
            p = Polygon(np.column_stack([rho * np.cos(theta), rho * np.sin(theta)]))
            big_n = 2 * int(self.rng.integers(2, 100)) + 1
            samples = resample(p, big_n)
            back = decode(encode(samples, (big_n - 1) // 2), big_n)
            assert np.max(np.abs(back.samples - samples.samples)) < 1e-6

    def test_resolution_freedom(self):
        d = encode(resample(l_shape(), 41), 15)
        coarse = decode(d, 37).samples
        fine = decode(d, 3700).samples
        dist = np.min(np.abs(coarse[:, None] - fine[None, :]), axis=1)
        assert dist.max() < 1e-6

    def test_translation_and_scale_equivariance(self):
        samples = resample(asymmetric_star(), 61).samples
        d = encode(samples, 10)
        shifted = encode(samples + (7 - 3j), 10)
        np.testing.assert_allclose(np.delete(shifted.coeffs, 10), np.delete(d.coeffs, 10), atol=1e-9)
        assert shifted.coefficient(0) == pytest.approx(d.coefficient(0) + 7 - 3j)
        np.testing.assert_allclose(encode(2.5 * samples, 10).coeffs, 2.5 * d.coeffs, atol=1e-9)

    def test_encode_decode_encode_idempotent(self):
        d = encode(resample(Polygon([(0, 0), (100, 0), (100, 100), (0, 100)]), 60), 8)
        again = encode(decode(d, 60), 8)
        np.testing.assert_allclose(again.coeffs, d.coeffs, atol=1e-9)

    def test_real_coefficient_count(self):
        assert encode(resample(l_shape(), 60), 8).n_real_coeffs == 34

    def test_batch_preserves_order(self):
        contours = [resample(random_star_polygon(self.rng), 33) for _ in range(12)]
        sequential = [encode(c, 5) for c in contours]
        parallel = encode_batch(contours, 5, workers=4)
        for a, b in zip(sequential, parallel):
            np.testing.assert_array_equal(a.coeffs, b.coeffs)
        decoded = decode_batch(parallel, 33, workers=3)
        for a, c in zip(decoded, sequential):
            np.testing.assert_array_equal(a.samples, decode(c, 33).samples)


class TestDecodeAdjoint:
    """صحة المرافق: ⟨g, Dδ⟩ = ⟨Dᵀg, δ⟩"""

    def test_inner_products_agree(self):
        rng = np.random.default_rng(5)
        for n, m_pts in ((3, 7), (8, 60), (12, 101)):
            delta = rng.normal(size=2 * n + 1) + 1j * rng.normal(size=2 * n + 1)
            g = rng.normal(size=m_pts) + 1j * rng.normal(size=m_pts)
            lhs = np.real(np.vdot(g, decode(FourierDescriptor(delta), m_pts).samples))
            rhs = np.real(np.vdot(decode_adjoint(g, n, m_pts), delta))
            assert lhs == pytest.approx(rhs, rel=1e-9)

    def test_length_mismatch(self):
        with pytest.raises(ContourValidationError):
            decode_adjoint(np.zeros(5), 2, 6)


class TestTruncateSparsify:
    """اختبارات القطع والتصفير"""

    def setup_method(self):
        self.square = Polygon([(0, 0), (100, 0), (100, 100), (0, 100)])
        self.samples = resample(self.square, 64)
        self.d = encode(self.samples, 31)

    def test_truncate_identity(self):
        np.testing.assert_array_equal(truncate(self.d, 31).coeffs, self.d.coeffs)

    def test_truncate_circle(self):
        d = circle_descriptor(1 + 1j, 4.0, 6)
        np.testing.assert_array_equal(truncate(d, 1).coeffs, d.coeffs)

    def test_truncate_keeps_range(self):
        t = truncate(self.d, 3)
        assert t.n == 31
        assert np.all(t.coeffs[np.abs(t.frequencies) > 3] == 0)

    def test_truncation_error_non_increasing(self):
        """خطأ Chamfer والمربعات الصغرى لا يزيدان مع زيادة الترددات المحفوظة"""
        decoded = [decode(truncate(self.d, k), 64).samples for k in range(0, 32)]
        chamfer = [chamfer_distance(z, self.samples.samples) for z in decoded]
        mse = [np.mean(np.abs(z - self.samples.samples) ** 2) for z in decoded]
        assert all(b <= a + 1e-9 for a, b in zip(chamfer, chamfer[1:]))
        assert all(b <= a + 1e-9 for a, b in zip(mse, mse[1:]))
        assert chamfer[-1] < 1e-9

    def test_truncated_square_chamfer(self):
        cd = [chamfer_distance(decode(truncate(self.d, k), 64).samples, self.samples.samples) for k in (1, 3)]
        assert 0.0 < cd[1] < cd[0]

    def test_sparsify_identity(self):
        np.testing.assert_array_equal(sparsify(self.d, 0.0).coeffs, self.d.coeffs)

    def test_sparsify_small_coefficient(self):
        d = FourierDescriptor.from_mapping({0: 1.0, 1: 1e-9, 2: 1e-9, -3: 0.5})
        s = sparsify(d, 1e-6)
        assert s.coefficient(2) == 0
        assert s.coefficient(1) == 1e-9
        assert s.coefficient(-3) == 0.5

    def test_sparsify_scan(self):
        threshold = 0.01 * abs(self.d.coefficient(1))
        s = sparsify(self.d, threshold)
        expected = sum(1 for k in range(-31, 32)
                       if abs(k) > 1 and 0 < abs(self.d.coefficient(k)) < threshold)
        assert int(np.sum((s.coeffs == 0) & (np.abs(self.d.coeffs) > 0))) == expected

    def test_negative_threshold(self):
        with pytest.raises(ContourValidationError):
            sparsify(self.d, -1.0)


class TestFrozenSpectrum:
    """قيم محفوظة لمربع الوحدة: 64 عينة و n=8"""

    def setup_method(self):
        self.expected = json.loads((FIXTURES / "square_spectrum.json").read_text(encoding="utf-8"))
        samples = resample(Polygon(self.expected["polygon"]), self.expected["n_pts"])
        self.samples = samples
        self.d = encode(samples, self.expected["n"])

    def test_coefficients(self):
        expected = np.array([complex(re, im) for re, im in self.expected["coeffs"]])
        np.testing.assert_allclose(self.d.coeffs, expected, atol=1e-9)

    def test_four_fold_symmetry_leaves_one_mod_four(self):
        nonzero = [k for k in range(-8, 9) if abs(self.d.coefficient(k)) > 1e-9]
        assert nonzero == [-7, -3, 0, 1, 5]

    def test_decoded_points(self):
        z = decode(self.d, self.expected["decode_m_pts"]).samples
        expected = np.array([complex(x, y) for x, y in self.expected["decoded"]])
        np.testing.assert_allclose(z, expected, atol=1e-9)

    def test_truncated_chamfer(self):
        t = truncate(self.d, self.expected["truncate_n_keep"])
        value = chamfer_distance(decode(t, self.expected["n_pts"]).samples, self.samples.samples)
        assert value == pytest.approx(self.expected["truncate_chamfer"], rel=1e-6)

    def test_sparsify_count(self):
        threshold = self.expected["sparsify_fraction"] * abs(self.d.coefficient(1))
        s = sparsify(self.d, threshold)
        zeroed = int(np.sum((s.coeffs == 0) & (np.abs(s.frequencies) > 1)))
        assert zeroed == self.expected["sparsify_zeroed"]


class TestPolar:
    """اختبارات الترميز القطبي"""

    def test_circle_is_constant(self):
        p = regular_polygon(256, 30.0, center=(5.0, 5.0))
        d = encode_polar(p, (5.0, 5.0), 4, 256)
        assert d.coefficient(0).real == pytest.approx(30.0, abs=1e-9)
        for k in range(1, 5):
            assert abs(d.coefficient(k)) < 1e-9
        assert not d.non_star

    def test_square_diagonal_rays(self, unit_square):
        d = encode_polar(unit_square, (0.5, 0.5), 1, 4, angle_offset=np.pi / 4)
        assert d.coefficient(0).real == pytest.approx(np.sqrt(2) / 2, abs=1e-12)
        assert abs(d.coefficient(1)) < 1e-12

    def test_l_shape_against_brute_force(self):
        p = l_shape()
        angles = 0.01 + 2 * np.pi * np.arange(72) / 72
        cast = cast_rays(p, (10.0, 10.0), angles)
        np.testing.assert_allclose(cast.rho, brute_rays(p.points, (10.0, 10.0), angles), atol=1e-9)
        d = encode_polar(p, (10.0, 10.0), 10, 72, angle_offset=0.01)
        np.testing.assert_allclose(d.rho_coeffs, direct_dft(cast.rho.astype(complex), 10), atol=1e-9)

    def test_conjugate_symmetry(self):
        d = encode_polar(l_shape(), (10.0, 10.0), 6, 40)
        np.testing.assert_allclose(d.rho_coeffs, np.conj(d.rho_coeffs[::-1]), atol=1e-12)

    def test_non_star_flag(self):
        assert encode_polar(horseshoe(), (-40.0, 0.0), 4, 72).non_star
        assert not encode_polar(asymmetric_star(), (0.0, 0.0), 4, 72).non_star

    def test_nearest_mode(self):
        far = cast_rays(horseshoe(), (-40.0, 0.0), [0.3], "farthest").rho[0]
        near = cast_rays(horseshoe(), (-40.0, 0.0), [0.3], "nearest").rho[0]
        assert near < far

    def test_center_outside(self):
        with pytest.raises(ContourValidationError, match="center outside contour"):
            encode_polar(l_shape(), (40.0, 40.0), 2, 16)

    def test_star_round_trip(self):
        p = asymmetric_star()
        angles = 2 * np.pi * np.arange(181) / 181
        hits = cast_rays(p, (0.0, 0.0), angles).rho * np.exp(1j * angles)
        d = encode_polar(p, (0.0, 0.0), 90, 181)
        assert chamfer_distance(decode_polar(d, 181).samples, hits) < 1e-6

    def test_negative_rho_flag(self, caplog):
        d = PolarDescriptor(center=(0.0, 0.0), rho_coeffs=[2.0, 1.0, 2.0])
        with caplog.at_level(logging.WARNING):
            out = decode_polar(d, 16)
        assert "negative-rho" in out.flags
        assert any("negative" in r.message for r in caplog.records)

    def test_asymmetric_coefficients_rejected(self):
        with pytest.raises(ContourValidationError):
            PolarDescriptor(center=(0.0, 0.0), rho_coeffs=[1j, 3.0, 1j])

    def test_truncate_polar(self):
        d = encode_polar(asymmetric_star(), (0.0, 0.0), 12, 72)
        t = truncate_polar(d, 3)
        assert t.m == 3
        np.testing.assert_array_equal(t.rho_coeffs, d.rho_coeffs[9:16])


class TestSerialization:
    """اختبارات التخزين النصي والثنائي"""

    def setup_method(self):
        rng = np.random.default_rng(9)
        self.d = FourierDescriptor(rng.normal(size=9) * 1e3 + 1j * rng.normal(size=9) / 7)

    def test_frequency_order(self):
        assert frequency_order(2) == [0, 1, -1, 2, -2]

    def test_text_layout(self):
        lines = descriptor_to_text(self.d).splitlines()
        assert lines[0] == "4"
        assert [int(line.split()[0]) for line in lines[1:]] == [0, 1, -1, 2, -2, 3, -3, 4, -4]

    def test_text_round_trip_bit_exact(self):
        back = descriptor_from_text(descriptor_to_text(self.d))
        np.testing.assert_array_equal(back.coeffs, self.d.coeffs)

    def test_binary_round_trip_bit_exact(self):
        data = descriptor_to_bytes(self.d)
        assert len(data) == 16 * 9
        np.testing.assert_array_equal(descriptor_from_bytes(data).coeffs, self.d.coeffs)

    def test_binary_is_little_endian_in_frequency_order(self):
        data = descriptor_to_bytes(self.d)
        values = np.frombuffer(data, dtype="<f8")
        assert values[0] == self.d.coefficient(0).real
        assert values[3] == self.d.coefficient(1).imag
        assert values[4] == self.d.coefficient(-1).real

    def test_polar_round_trip(self):
        d = encode_polar(l_shape(), (10.0, 10.0), 5, 40, angle_offset=0.25)
        back = polar_from_text(polar_to_text(d))
        np.testing.assert_array_equal(back.rho_coeffs, d.rho_coeffs)
        assert back.center == d.center and back.angle_offset == 0.25

    def test_load_descriptor_detects_kind(self):
        assert isinstance(load_descriptor(descriptor_to_text(self.d).encode()), FourierDescriptor)
        assert isinstance(load_descriptor(descriptor_to_bytes(self.d), binary=True), FourierDescriptor)
        polar = encode_polar(l_shape(), (10.0, 10.0), 2, 16)
        assert isinstance(load_descriptor(polar_to_text(polar).encode()), PolarDescriptor)

    def test_malformed_text(self):
        with pytest.raises(ContourValidationError):
            descriptor_from_text("2\n0 1.0 0.0\n1 1.0\n")
        with pytest.raises(ContourValidationError):
            descriptor_from_text("1\n0 1 0\n5 1 0\n-1 0 0\n")
