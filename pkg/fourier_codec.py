#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
═══════════════════════════════════════════════════════════════════════════
ترميز فورييه للمحيطات المغلقة - Complex Fourier Contour Codec
═══════════════════════════════════════════════════════════════════════════

المحيط المغلق دالة دورية معقدة C(t) = X(t) + iY(t)، ويُخزَّن كمعاملات
F_k لـ k ∈ [−n, n]. المعاملات مطبّعة على جانب الترميز (1/N) لذلك فك
الترميز مستقل عن الدقة: استدعاء واحد لـ IFFT بأي عدد نقاط.

يحتوي أيضاً على الترميز القطبي ρ(θ) حول مركز (خط الأساس للمقارنة)
وصيغ التخزين النصية والثنائية.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Literal, Optional, Sequence, Tuple, Union

import numpy as np

from contour_config import LoggerFactory
from contour_errors import ContourValidationError
from contour_geometry import ContourSamples, Polygon, as_complex, bounding_box

logger = LoggerFactory.get_logger("FourierCodec")

DIRECT_SUM_LIMIT = 2 ** 14
RAY_PARAM_EPS = 1e-12
RAY_DEDUP_EPS = 1e-9
SYMMETRY_TOL = 1e-9

RayMode = Literal["farthest", "nearest"]


# ═══════════════════════════════════════════════════════════════════════════
# نماذج البيانات (Descriptors)
# ═══════════════════════════════════════════════════════════════════════════

def frequency_order(n: int) -> List[int]:
    """ترتيب التخزين: 0, 1, −1, 2, −2, …  (القطع حسب |k| قطع للبادئة)"""
    order = [0]
    for k in range(1, n + 1):
        order.extend((k, -k))
    return order


@dataclass(frozen=True, eq=False)
class FourierDescriptor:
    """
    معاملات F_k لـ k ∈ [−n, n] بالترتيب الطبيعي (الفهرس k + n).
    convention = "series": F_0 هو مركز العينات.
    """
    coeffs: np.ndarray
    convention: str = "series"

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex).ravel()
        if len(c) % 2 == 0:
            raise ContourValidationError("descriptor needs an odd coefficient count 2n+1")
        if not np.all(np.isfinite(c)):
            raise ContourValidationError("descriptor coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def n(self) -> int:
        return (len(self.coeffs) - 1) // 2

    @property
    def frequencies(self) -> np.ndarray:
        return np.arange(-self.n, self.n + 1)

    @property
    def n_real_coeffs(self) -> int:
        """معامل معقد واحد = قيمتان حقيقيتان"""
        return 2 * len(self.coeffs)

    def coefficient(self, k: int) -> complex:
        if abs(k) > self.n:
            return 0j
        return complex(self.coeffs[k + self.n])

    def with_coeffs(self, coeffs: np.ndarray) -> "FourierDescriptor":
        return FourierDescriptor(coeffs, convention=self.convention)

    @classmethod
    def from_mapping(cls, mapping: dict) -> "FourierDescriptor":
        """Build from {k: F_k}; missing frequencies inside [−n, n] are zero."""
        n = max((abs(int(k)) for k in mapping), default=0)
        c = np.zeros(2 * n + 1, dtype=complex)
        for k, v in mapping.items():
            c[int(k) + n] = v
        return cls(c)


@dataclass(frozen=True, eq=False)
class PolarDescriptor:
    """
    ρ(θ) = Σ c_k exp(ik(θ − angle_offset)) حول center.
    non_star: شعاع واحد على الأقل قطع الحدود أكثر من مرتين.
    """
    center: Tuple[float, float]
    rho_coeffs: np.ndarray
    angle_offset: float = 0.0
    non_star: bool = False
    ray_mode: str = "farthest"

    def __post_init__(self):
        c = np.array(self.rho_coeffs, dtype=complex).ravel()
        if len(c) % 2 == 0:
            raise ContourValidationError("polar descriptor needs 2m+1 coefficients")
        if not np.all(np.isfinite(c)):
            raise ContourValidationError("polar coefficients must be finite")
        scale = max(1.0, float(np.abs(c).max()))
        if np.abs(c - np.conj(c[::-1])).max() > SYMMETRY_TOL * scale:
            raise ContourValidationError("polar coefficients are not conjugate symmetric")
        c.setflags(write=False)
        object.__setattr__(self, "rho_coeffs", c)
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))

    @property
    def m(self) -> int:
        return (len(self.rho_coeffs) - 1) // 2

    @property
    def n_real_coeffs(self) -> int:
        """الأعداد الحقيقية المخزنة فعلياً: ρ حقيقية لذا 2m+1 (بدون المركز)"""
        return 2 * self.m + 1

    def coefficient(self, k: int) -> complex:
        if abs(k) > self.m:
            return 0j
        return complex(self.rho_coeffs[k + self.m])


def _symmetrize(c: np.ndarray) -> np.ndarray:
    return 0.5 * (c + np.conj(c[::-1]))


# ═══════════════════════════════════════════════════════════════════════════
# الترميز وفك الترميز (Encode / Decode)
# ═══════════════════════════════════════════════════════════════════════════

def _analysis(z: np.ndarray, n: int) -> np.ndarray:
    """(1/N) Σ_j z_j exp(−2πi jk/N) for k = −n..n."""
    big_n = len(z)
    ks = np.arange(-n, n + 1)
    if n * big_n < DIRECT_SUM_LIMIT:
        j = np.arange(big_n)
        kernel = np.exp(-2j * np.pi * np.outer(ks, j) / big_n)
        return kernel @ z / big_n
    return np.fft.fft(z)[ks % big_n] / big_n


def encode(c: Union[ContourSamples, np.ndarray], n: int) -> FourierDescriptor:
    """
    ترميز العينات إلى معاملات فورييه (تطبيع السلسلة 1/N).

    Raises:
        ContourValidationError: "harmonics exceed samples" عندما 2n+1 > N
    """
    z = as_complex(c)
    if n < 0:
        raise ContourValidationError("n must be nonnegative")
    if 2 * n + 1 > len(z):
        raise ContourValidationError("harmonics exceed samples")
    return FourierDescriptor(_analysis(z, n))


def _synthesis(coeffs: np.ndarray, m_pts: int) -> np.ndarray:
    n = (len(coeffs) - 1) // 2
    buf = np.zeros(m_pts, dtype=complex)
    buf[np.arange(-n, n + 1) % m_pts] = coeffs
    return np.fft.ifft(buf) * m_pts


def decode(d: FourierDescriptor, m_pts: int) -> ContourSamples:
    """z_t = Σ F_k exp(2πi kt/m_pts) باستدعاء IFFT واحد"""
    if m_pts < 2 * d.n + 1:
        raise ContourValidationError(f"m_pts={m_pts} below 2n+1={2 * d.n + 1}")
    return ContourSamples(_synthesis(d.coeffs, m_pts))


def decode_adjoint(g: np.ndarray, n: int, m_pts: int) -> np.ndarray:
    """
    Adjoint of decode under Re⟨·,·⟩: maps point cotangents g (length m_pts)
    to coefficient cotangents G_k = Σ_t g_t exp(−2πi kt/m_pts).
    """
    g = np.asarray(g, dtype=complex).ravel()
    if len(g) != m_pts:
        raise ContourValidationError("cotangent length must equal m_pts")
    if m_pts < 2 * n + 1:
        raise ContourValidationError(f"m_pts={m_pts} below 2n+1={2 * n + 1}")
    return np.fft.fft(g)[np.arange(-n, n + 1) % m_pts]


def truncate(d: FourierDescriptor, n_keep: int) -> FourierDescriptor:
    """تصفير الترددات |k| > n_keep مع الإبقاء على نطاق الترددات"""
    if n_keep < 0 or n_keep > d.n:
        raise ContourValidationError(f"n_keep must lie in [0, {d.n}]")
    c = np.array(d.coeffs)
    c[np.abs(d.frequencies) > n_keep] = 0
    return d.with_coeffs(c)


def sparsify(d: FourierDescriptor, threshold: float) -> FourierDescriptor:
    """
    تصفير المعاملات الصغيرة |F_k| < threshold؛ الترددات −1 و 0 و 1 لا تُصفَّر أبداً.
    """
    if threshold < 0:
        raise ContourValidationError("threshold must be nonnegative")
    c = np.array(d.coeffs)
    mask = (np.abs(c) < threshold) & (np.abs(d.frequencies) > 1)
    c[mask] = 0
    return d.with_coeffs(c)


def circle_descriptor(center: complex, radius: float, n: int, phase: float = 0.0,
                      clockwise: bool = False) -> FourierDescriptor:
    """واصف الدائرة التحليلي: F_0 = center و F_{±1} = R·e^{iφ}"""
    if n < 1:
        raise ContourValidationError("a circle needs n >= 1")
    c = np.zeros(2 * n + 1, dtype=complex)
    c[n] = complex(center)
    c[n + (-1 if clockwise else 1)] = radius * np.exp(1j * phase)
    return FourierDescriptor(c)


def encode_batch(contours: Sequence[ContourSamples], n: int,
                 workers: int = 1) -> List[FourierDescriptor]:
    """ترميز متوازٍ؛ الخرج بترتيب الإدخال"""
    if workers <= 1:
        return [encode(c, n) for c in contours]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(lambda c: encode(c, n), contours))


def decode_batch(descriptors: Sequence[FourierDescriptor], m_pts: int,
                 workers: int = 1) -> List[ContourSamples]:
    if workers <= 1:
        return [decode(d, m_pts) for d in descriptors]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(lambda d: decode(d, m_pts), descriptors))


# ═══════════════════════════════════════════════════════════════════════════
# الترميز القطبي (Polar baseline)
# ═══════════════════════════════════════════════════════════════════════════

@dataclass(frozen=True)
class RayCast:
    """نتيجة رمي الأشعة: المسافة المختارة وعدد التقاطعات لكل شعاع"""
    angles: np.ndarray
    rho: np.ndarray
    crossings: np.ndarray

    @property
    def non_star(self) -> bool:
        return bool(np.any(self.crossings > 2))


def cast_rays(p: Polygon, center: Tuple[float, float], angles: np.ndarray,
              ray_mode: RayMode = "farthest") -> RayCast:
    """
    رمي أشعة من center بالزوايا المعطاة وحساب تقاطعها مع أضلاع المضلع.

    Raises:
        ContourValidationError: "center outside contour" إذا لم يصب شعاع أي ضلع
    """
    if ray_mode not in ("farthest", "nearest"):
        raise ContourValidationError(f"unknown ray mode: {ray_mode}")
    angles = np.asarray(angles, dtype=float).ravel()
    pts = np.asarray(p.points, dtype=float)
    a = pts
    e = np.roll(pts, -1, axis=0) - pts
    cx, cy = float(center[0]), float(center[1])

    ux, uy = np.cos(angles)[:, None], np.sin(angles)[:, None]
    wx, wy = (a[:, 0] - cx)[None, :], (a[:, 1] - cy)[None, :]
    ex, ey = e[:, 0][None, :], e[:, 1][None, :]

    denom = ux * ey - uy * ex
    parallel = np.abs(denom) < 1e-15
    safe = np.where(parallel, 1.0, denom)
    s = (wx * ey - wy * ex) / safe
    t = (wx * uy - wy * ux) / safe
    valid = (~parallel) & (s >= 0.0) & (t >= -RAY_PARAM_EPS) & (t <= 1.0 + RAY_PARAM_EPS)

    rho = np.empty(len(angles))
    crossings = np.zeros(len(angles), dtype=int)
    for i in range(len(angles)):
        hits = np.sort(s[i][valid[i]])
        if hits.size == 0:
            raise ContourValidationError("center outside contour")
        # a vertex hit shows up once per adjacent edge
        crossings[i] = 1 + int(np.count_nonzero(np.diff(hits) > RAY_DEDUP_EPS))
        rho[i] = hits[-1] if ray_mode == "farthest" else hits[0]
    return RayCast(angles=angles, rho=rho, crossings=crossings)


def encode_polar(p: Polygon, center: Tuple[float, float], m: int, n_rays: int,
                 ray_mode: RayMode = "farthest", angle_offset: float = 0.0) -> PolarDescriptor:
    """
    الترميز القطبي: n_rays شعاعاً بزوايا offset + 2πj/n_rays، ثم معاملات
    فورييه لعينات ρ مع فرض التناظر المرافق.
    """
    if m < 0:
        raise ContourValidationError("m must be nonnegative")
    if n_rays < 2 * m + 1:
        raise ContourValidationError("n_rays must be at least 2m+1")
    min_x, min_y, max_x, max_y = bounding_box(p)
    cx, cy = float(center[0]), float(center[1])
    if not (min_x < cx < max_x and min_y < cy < max_y):
        raise ContourValidationError("center outside contour")

    angles = angle_offset + 2.0 * np.pi * np.arange(n_rays) / n_rays
    cast = cast_rays(p, (cx, cy), angles, ray_mode)
    coeffs = _symmetrize(_analysis(cast.rho.astype(complex), m))
    if cast.non_star:
        logger.debug(f"non-star-shaped contour about ({cx:.3f}, {cy:.3f})")
    return PolarDescriptor(center=(cx, cy), rho_coeffs=coeffs, angle_offset=float(angle_offset),
                           non_star=cast.non_star, ray_mode=ray_mode)


def polar_rho(d: PolarDescriptor, m_pts: int) -> np.ndarray:
    """قيم ρ الحقيقية عند θ_t = offset + 2πt/m_pts"""
    if m_pts < 2 * d.m + 1:
        raise ContourValidationError(f"m_pts={m_pts} below 2m+1={2 * d.m + 1}")
    return _synthesis(d.rho_coeffs, m_pts).real


def decode_polar(d: PolarDescriptor, m_pts: int) -> ContourSamples:
    """
    z_t = center + ρ(θ_t)·exp(iθ_t).
    ρ سالبة لا يمكن تمثيلها هندسياً: تُضاف العلامة "negative-rho" ويُسجَّل تحذير.
    """
    rho = polar_rho(d, m_pts)
    theta = d.angle_offset + 2.0 * np.pi * np.arange(m_pts) / m_pts
    flags = set()
    if np.any(rho < 0):
        flags.add("negative-rho")
        logger.warning(f"⚠️ reconstructed rho is negative at {int(np.sum(rho < 0))} of {m_pts} angles")
    z = complex(*d.center) + rho * np.exp(1j * theta)
    return ContourSamples(z, flags=frozenset(flags))


def truncate_polar(d: PolarDescriptor, m_keep: int) -> PolarDescriptor:
    """
    Best ρ in the least-squares sense at a smaller harmonic budget: on a
    uniform ray grid the truncated coefficients are the least-squares fit.
    """
    if m_keep < 0 or m_keep > d.m:
        raise ContourValidationError(f"m_keep must lie in [0, {d.m}]")
    c = d.rho_coeffs[d.m - m_keep: d.m + m_keep + 1]
    return PolarDescriptor(center=d.center, rho_coeffs=c, angle_offset=d.angle_offset,
                           non_star=d.non_star, ray_mode=d.ray_mode)


# ═══════════════════════════════════════════════════════════════════════════
# التخزين (Serialization)
# ═══════════════════════════════════════════════════════════════════════════

def _coeff_lines(getter, n: int) -> List[str]:
    lines = []
    for k in frequency_order(n):
        v = getter(k)
        lines.append(f"{k} {float(v.real)!r} {float(v.imag)!r}")
    return lines


def descriptor_to_text(d: FourierDescriptor) -> str:
    """n ثم 2n+1 سطراً "k re im" بالترتيب 0, 1, −1, …"""
    return "\n".join([str(d.n)] + _coeff_lines(d.coefficient, d.n)) + "\n"


def _parse_coeff_lines(lines: List[str], n: int) -> np.ndarray:
    if len(lines) != 2 * n + 1:
        raise ContourValidationError(f"expected {2 * n + 1} coefficient lines, got {len(lines)}")
    c = np.zeros(2 * n + 1, dtype=complex)
    seen = set()
    for line in lines:
        parts = line.split()
        if len(parts) != 3:
            raise ContourValidationError(f"malformed coefficient line: {line!r}")
        k = int(parts[0])
        if abs(k) > n or k in seen:
            raise ContourValidationError(f"unexpected frequency {k}")
        seen.add(k)
        c[k + n] = complex(float(parts[1]), float(parts[2]))
    return c


def _content_lines(text: str) -> List[str]:
    return [ln.strip() for ln in text.splitlines() if ln.strip()]


def descriptor_from_text(text: str) -> FourierDescriptor:
    lines = _content_lines(text)
    if not lines:
        raise ContourValidationError("empty descriptor record")
    try:
        n = int(lines[0])
        return FourierDescriptor(_parse_coeff_lines(lines[1:], n))
    except ValueError as e:
        if isinstance(e, ContourValidationError):
            raise
        raise ContourValidationError(f"malformed descriptor record: {e}") from e


def descriptor_to_bytes(d: FourierDescriptor) -> bytes:
    """float64 little-endian: (re, im) لكل تردد بترتيب التخزين"""
    ordered = np.array([d.coefficient(k) for k in frequency_order(d.n)], dtype=complex)
    pairs = np.column_stack([ordered.real, ordered.imag]).ravel()
    return pairs.astype("<f8").tobytes()


def descriptor_from_bytes(data: bytes) -> FourierDescriptor:
    if len(data) % 16 != 0 or (len(data) // 16) % 2 == 0:
        raise ContourValidationError("binary record length is not a whole descriptor")
    pairs = np.frombuffer(data, dtype="<f8").reshape(-1, 2)
    n = (len(pairs) - 1) // 2
    c = np.zeros(2 * n + 1, dtype=complex)
    for (re, im), k in zip(pairs, frequency_order(n)):
        c[k + n] = complex(re, im)
    return FourierDescriptor(c)


def polar_to_text(d: PolarDescriptor) -> str:
    """السطر الأول: polar cx cy offset ray_mode non_star"""
    head = (f"polar {d.center[0]!r} {d.center[1]!r} {float(d.angle_offset)!r} "
            f"{d.ray_mode} {int(d.non_star)}")
    return "\n".join([head, str(d.m)] + _coeff_lines(d.coefficient, d.m)) + "\n"


def polar_from_text(text: str) -> PolarDescriptor:
    lines = _content_lines(text)
    if len(lines) < 2:
        raise ContourValidationError("empty polar record")
    head = lines[0].split()
    if head[0] != "polar" or len(head) < 4:
        raise ContourValidationError("polar record must start with 'polar cx cy offset'")
    try:
        center = (float(head[1]), float(head[2]))
        offset = float(head[3])
        ray_mode = head[4] if len(head) > 4 else "farthest"
        non_star = bool(int(head[5])) if len(head) > 5 else False
        m = int(lines[1])
        coeffs = _parse_coeff_lines(lines[2:], m)
    except ValueError as e:
        if isinstance(e, ContourValidationError):
            raise
        raise ContourValidationError(f"malformed polar record: {e}") from e
    return PolarDescriptor(center=center, rho_coeffs=coeffs, angle_offset=offset,
                           non_star=non_star, ray_mode=ray_mode)


def load_descriptor(data: bytes, binary: Optional[bool] = None) -> Union[FourierDescriptor, PolarDescriptor]:
    """
    قراءة أي سجل: نص قطبي، نص معقد، أو ثنائي.
    binary=None: الكشف التلقائي
    """
    if binary:
        return descriptor_from_bytes(data)
    if binary is False:
        text = data.decode("ascii")
        if text.lstrip().startswith("polar"):
            return polar_from_text(text)
        return descriptor_from_text(text)
    try:
        text = data.decode("ascii")
    except UnicodeDecodeError:
        return descriptor_from_bytes(data)
    stripped = text.lstrip()
    if stripped.startswith("polar"):
        return polar_from_text(text)
    if stripped[:1].isdigit():
        return descriptor_from_text(text)
    return descriptor_from_bytes(data)


def dump_descriptor(d: Union[FourierDescriptor, PolarDescriptor], binary: bool = False) -> bytes:
    if isinstance(d, PolarDescriptor):
        if binary:
            raise ContourValidationError("polar descriptors only have a text record")
        return polar_to_text(d).encode("ascii")
    if binary:
        return descriptor_to_bytes(d)
    return descriptor_to_text(d).encode("ascii")
