#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
═══════════════════════════════════════════════════════════════════════════
دوال الخسارة والملاءمة - Shape Losses & Descriptor Fitting
═══════════════════════════════════════════════════════════════════════════

الخسارة الكلية:
    L = λ_CD·L_CD + λ_perim(it)·L_perim + L_coeff

- L_CD: مسافة Chamfer المتماثلة بين النقاط المفكوكة والهدف (بكسل²)
- L_perim: √(Σ |ẑ_i − ẑ_{i+1}|²) مع الضلع الخاتم
- L_coeff: (λ_coeff / N_c)·Σ |F̂_k| لـ |k| ≥ 2

حدّا التنظيم يُحسبان في الإطار المُطبَّع ẑ = (z − F0) / s حيث s قطر
الصندوق المحيط بالهدف، قبل أي تحجيم إلى البكسل؛ لذلك لا تتغير الأوزان
الافتراضية مع حجم الشكل. frame="pixel" يعيد الحساب بوحدات البكسل.

التدرجات بصيغة معقدة: g = ∂L/∂x + i·∂L/∂y، وتُنقل من النقاط إلى
المعاملات عبر المرافق (adjoint) لفك الترميز.
"""

from collections import deque
from dataclasses import dataclass, field
from typing import Deque, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from contour_config import LoggerFactory
from contour_errors import ContourValidationError, DivergenceError
from contour_geometry import (
    ChamferConfig, ContourSamples, Polygon, as_complex, chamfer_terms, resample, shape_scale, signed_area,
)
from fourier_codec import FourierDescriptor, circle_descriptor, decode, decode_adjoint, encode

logger = LoggerFactory.get_logger("ShapeLosses")

PointGrad = Tuple[float, np.ndarray]


# ═══════════════════════════════════════════════════════════════════════════
# التكوين (Loss configuration)
# ═══════════════════════════════════════════════════════════════════════════

class LossConfig(BaseModel):
    """
    أوزان الخسارة وجدول إيقاف عقوبة المحيط وخيارات المُحسِّن
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    lambda_cd: float = Field(default=1.0, ge=0.0)
    lambda_perim: float = Field(default=0.01, ge=0.0)
    lambda_coeff: float = Field(default=500.0, ge=0.0)
    perim_decay_iteration: Optional[int] = Field(default=2000, ge=1)
    n_c: Optional[int] = Field(default=None, ge=1, description="L1 normalizer, defaults to 2n+1")

    perimeter_mode: Literal["l2", "true"] = "l2"
    chamfer_squared: bool = True
    chamfer_reduction: Literal["mean", "sum"] = "mean"

    plateau_detection: bool = False
    plateau_window: int = Field(default=200, ge=1)
    plateau_tolerance: float = Field(default=1e-4, ge=0.0)

    momentum: float = Field(default=0.0, ge=0.0, lt=1.0)
    l1_update: Literal["proximal", "subgradient"] = "subgradient"
    frame: Literal["normalized", "pixel"] = "normalized"
    init: Literal["warm", "circle", "random"] = "warm"
    init_noise: float = Field(default=0.1, ge=0.0)
    seed: int = 0

    @property
    def chamfer(self) -> ChamferConfig:
        return ChamferConfig(squared=self.chamfer_squared, reduction=self.chamfer_reduction)

    def normalizer(self, n: int) -> int:
        return self.n_c if self.n_c is not None else 2 * n + 1

    def scale_for(self, target: Union[ContourSamples, np.ndarray]) -> float:
        """مقياس الإطار المُطبَّع للهدف (1 في إطار البكسل)"""
        return shape_scale(target) if self.frame == "normalized" else 1.0


def perimeter_weight(cfg: LossConfig, iteration: int, disabled_at: Optional[int] = None) -> float:
    """λ_perim(it): القيمة الكاملة قبل تكرار الإيقاف وصفر بعده"""
    if cfg.perim_decay_iteration is not None and iteration >= cfg.perim_decay_iteration:
        return 0.0
    if disabled_at is not None and iteration >= disabled_at:
        return 0.0
    return cfg.lambda_perim


class PlateauDetector:
    """
    Moving-average plateau test: fires once the mean of the latest window
    differs from the mean of the window before it by less than `tolerance`
    (relative).
    """

    def __init__(self, window: int = 200, tolerance: float = 1e-4):
        self.window = window
        self.tolerance = tolerance
        self._values: Deque[float] = deque(maxlen=2 * window)

    def update(self, value: float) -> bool:
        self._values.append(float(value))
        if len(self._values) < 2 * self.window:
            return False
        values = np.fromiter(self._values, dtype=float)
        previous = values[:self.window].mean()
        latest = values[self.window:].mean()
        scale = max(abs(previous), 1e-12)
        return abs(latest - previous) / scale < self.tolerance


# ═══════════════════════════════════════════════════════════════════════════
# حدود الخسارة (Loss terms)
# ═══════════════════════════════════════════════════════════════════════════

def loss_chamfer(decoded: Union[ContourSamples, np.ndarray], target: Union[ContourSamples, np.ndarray],
                 config: ChamferConfig = ChamferConfig()) -> PointGrad:
    """
    Chamfer value and its exact gradient with respect to each decoded point.
    Ties resolve to the lowest-index neighbour.
    """
    a = as_complex(decoded)
    b = as_complex(target)
    terms = chamfer_terms(a, b, config)

    na, nb = len(a), len(b)
    diff_ab = a - b[terms.a_to_b]
    diff_ba = a[terms.b_to_a] - b
    if config.squared:
        g_ab = 2.0 * diff_ab
        g_ba = 2.0 * diff_ba
    else:
        g_ab = _unit(diff_ab)
        g_ba = _unit(diff_ba)
    if config.reduction == "mean":
        g_ab = g_ab / na
        g_ba = g_ba / nb

    grad = g_ab.astype(complex)
    np.add.at(grad, terms.b_to_a, g_ba)
    return terms.value, grad


def _unit(z: np.ndarray) -> np.ndarray:
    mag = np.abs(z)
    return np.divide(z, mag, out=np.zeros_like(z), where=mag > 0)


def loss_perimeter(decoded: Union[ContourSamples, np.ndarray], lam: float,
                   mode: Literal["l2", "true"] = "l2", scale: float = 1.0) -> PointGrad:
    """
    l2:   λ·√(Σ |ẑ_{i+1} − ẑ_i|²)
    true: λ·Σ |ẑ_{i+1} − ẑ_i|

    ẑ = (z − mean) / scale. التدرج المُعاد بالنسبة لنقاط البكسل z.
    جميع النقاط متطابقة → القيمة والتدرج صفر.
    """
    z = as_complex(decoded)
    if len(z) < 3:
        raise ContourValidationError("perimeter needs at least 3 points")
    if not scale > 0.0:
        raise ContourValidationError("frame scale must be positive")
    if lam == 0.0:
        return 0.0, np.zeros_like(z)

    zn = (z - z.mean()) / scale
    edges = np.roll(zn, -1) - zn
    if mode == "l2":
        s = float(np.sum(np.abs(edges) ** 2))
        if s == 0.0:
            return 0.0, np.zeros_like(z)
        root = np.sqrt(s)
        grad = lam * (2.0 * zn - np.roll(zn, 1) - np.roll(zn, -1)) / root
        return lam * root, grad / scale

    unit = _unit(edges)
    grad = lam * (np.roll(unit, 1) - unit)
    return lam * float(np.abs(edges).sum()), grad / scale


def _penalized_mask(d: FourierDescriptor) -> np.ndarray:
    return np.abs(d.frequencies) >= 2


def loss_coeff(d: FourierDescriptor, cfg: LossConfig, scale: float = 1.0) -> Tuple[float, np.ndarray]:
    """(λ_coeff/N_c)·Σ_{|k|≥2} |F_k / scale|؛ التدرج F/(|F|·scale) وصفر عند F = 0"""
    if not scale > 0.0:
        raise ContourValidationError("frame scale must be positive")
    weight = cfg.lambda_coeff / cfg.normalizer(d.n)
    mask = _penalized_mask(d)
    coeffs = np.asarray(d.coeffs)
    value = weight * float(np.abs(coeffs[mask]).sum()) / scale
    grad = np.where(mask, weight * _unit(coeffs) / scale, 0.0).astype(complex)
    return value, grad


def soft_threshold(coeffs: np.ndarray, tau: float, mask: np.ndarray) -> np.ndarray:
    """Proximal step of τ·Σ|F_k| over the masked frequencies."""
    mag = np.abs(coeffs)
    shrink = np.where(mag > tau, 1.0 - tau / np.where(mag > 0, mag, 1.0), 0.0)
    return np.where(mask, coeffs * shrink, coeffs)


@dataclass
class ShapeLossTerms:
    """جميع حدود الخسارة مع تدرجاتها في فضاء النقاط وفضاء المعاملات"""
    l_cd: float
    l_perim: float
    l_coeff: float
    perim_weight: float
    point_grad: np.ndarray
    smooth_grad: np.ndarray
    coeff_grad: np.ndarray

    @property
    def total(self) -> float:
        return self.l_cd + self.l_perim + self.l_coeff

    @property
    def grad(self) -> np.ndarray:
        return self.smooth_grad + self.coeff_grad


def evaluate_shape_loss(d: FourierDescriptor, target: ContourSamples, cfg: LossConfig,
                        iteration: int, disabled_at: Optional[int] = None,
                        scale: Optional[float] = None) -> ShapeLossTerms:
    """
    فك الترميز عند |target| نقطة ثم تقييم الحدود الثلاثة.
    l_cd و l_perim مضروبة في أوزانها. scale الافتراضي: cfg.scale_for(target).
    """
    m_pts = len(as_complex(target))
    decoded = decode(d, m_pts)
    if scale is None:
        scale = cfg.scale_for(target)

    cd_value, cd_grad = loss_chamfer(decoded, target, cfg.chamfer)
    lam_p = perimeter_weight(cfg, iteration, disabled_at)
    perim_value, perim_grad = loss_perimeter(decoded, lam_p, cfg.perimeter_mode, scale)
    coeff_value, coeff_grad = loss_coeff(d, cfg, scale)

    point_grad = cfg.lambda_cd * cd_grad + perim_grad
    return ShapeLossTerms(
        l_cd=cfg.lambda_cd * cd_value,
        l_perim=perim_value,
        l_coeff=coeff_value,
        perim_weight=lam_p,
        point_grad=point_grad,
        smooth_grad=decode_adjoint(point_grad, d.n, m_pts),
        coeff_grad=coeff_grad,
    )


def total_shape_loss(d: FourierDescriptor, target: ContourSamples, cfg: LossConfig,
                     iteration: int) -> Tuple[float, np.ndarray]:
    """القيمة الكلية والتدرج بالنسبة لكل معامل F_k"""
    terms = evaluate_shape_loss(d, target, cfg, iteration)
    return terms.total, terms.grad


# ═══════════════════════════════════════════════════════════════════════════
# الملاءمة بالانحدار التدرجي (Descriptor fitting)
# ═══════════════════════════════════════════════════════════════════════════

@dataclass(frozen=True)
class LossRecord:
    iteration: int
    l_cd: float
    l_perim: float
    l_coeff: float

    @property
    def total(self) -> float:
        return self.l_cd + self.l_perim + self.l_coeff


@dataclass
class FitResult:
    """نتيجة الملاءمة: الواصف النهائي وسجل الخسارة لكل تكرار"""
    descriptor: FourierDescriptor
    loss_trace: List[LossRecord] = field(default_factory=list)
    iterations: int = 0
    final_chamfer: float = 0.0
    perimeter_disabled_at: Optional[int] = None

    def trace_to_csv(self) -> str:
        rows = ["iter,l_cd,l_perim,l_coeff,total"]
        for r in self.loss_trace:
            rows.append(f"{r.iteration},{r.l_cd!r},{r.l_perim!r},{r.l_coeff!r},{r.total!r}")
        return "\n".join(rows) + "\n"


def circle_fit_descriptor(samples: Union[ContourSamples, np.ndarray], n: int) -> FourierDescriptor:
    """
    بداية باردة: دائرة بمركز العينات ومتوسط نصف القطر، بنفس اتجاه
    الدوران وطور العينة الأولى.
    """
    z = as_complex(samples)
    center = complex(z.mean())
    radius = float(np.abs(z - center).mean())
    phase = float(np.angle(z[0] - center))
    clockwise = signed_area(z) < 0
    return circle_descriptor(center, radius, n, phase=phase, clockwise=clockwise)


def _initial_descriptor(samples: ContourSamples, n: int, cfg: LossConfig) -> FourierDescriptor:
    if cfg.init == "warm":
        return encode(samples, n)
    base = circle_fit_descriptor(samples, n)
    if cfg.init == "circle":
        return base
    rng = np.random.default_rng(cfg.seed)
    radius = abs(base.coefficient(1)) + abs(base.coefficient(-1))
    noise = rng.normal(size=2 * n + 1) + 1j * rng.normal(size=2 * n + 1)
    noise[n] = 0
    return base.with_coeffs(base.coeffs + cfg.init_noise * radius * noise / np.sqrt(2.0))


def fit_descriptor(target: Union[Polygon, ContourSamples], n: int, n_pts: int,
                   cfg: Optional[LossConfig] = None, steps: int = 3000, step_size: float = 0.05,
                   initial: Optional[FourierDescriptor] = None) -> FitResult:
    """
    انحدار تدرجي بخطوة ثابتة على الخسارة الكلية.

    حد L1 يُعالج كتدرج فرعي افتراضياً، أو بخطوة proximal (عتبة ناعمة)
    عند l1_update="proximal". المتغير هو معاملات البكسل، ومقياس الإطار
    المُطبَّع يُحسب مرة واحدة من العينات الهدف.

    Raises:
        DivergenceError: قيمة غير منتهية للخسارة أو للمعاملات
    """
    cfg = cfg or LossConfig()
    if steps < 1:
        raise ContourValidationError("steps must be at least 1")
    if not step_size > 0:
        raise ContourValidationError("step_size must be positive")

    if 2 * n + 1 > n_pts:
        raise ContourValidationError("harmonics exceed samples")
    samples = target if isinstance(target, ContourSamples) else resample(target, n_pts)
    if len(samples) != n_pts:
        raise ContourValidationError("target samples must number n_pts")
    if initial is not None:
        if initial.n != n:
            raise ContourValidationError("initial descriptor has a different harmonic count")
        d = initial
    else:
        d = _initial_descriptor(samples, n, cfg)

    mask = np.abs(d.frequencies) >= 2
    scale = cfg.scale_for(samples)
    l1_tau = step_size * cfg.lambda_coeff / (cfg.normalizer(n) * scale)
    proximal = cfg.l1_update == "proximal"
    detector = PlateauDetector(cfg.plateau_window, cfg.plateau_tolerance) if cfg.plateau_detection else None
    disabled_at: Optional[int] = None
    velocity = np.zeros(2 * n + 1, dtype=complex)
    coeffs = np.array(d.coeffs)
    trace: List[LossRecord] = []

    logger.info(f"🚀 fitting n={n} on {n_pts} points for {steps} steps "
                f"(init={cfg.init if initial is None else 'given'}, frame scale {scale:.4g})")

    for it in range(steps):
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                terms = evaluate_shape_loss(d, samples, cfg, it, disabled_at, scale)
        except ContourValidationError as e:
            raise DivergenceError(f"divergence at iteration {it}", iteration=it) from e
        if not np.isfinite(terms.total):
            raise DivergenceError(f"divergence at iteration {it}", iteration=it)
        trace.append(LossRecord(it, terms.l_cd, terms.l_perim, terms.l_coeff))

        grad = terms.smooth_grad if proximal else terms.grad
        with np.errstate(over="ignore", invalid="ignore"):
            if cfg.momentum > 0.0:
                velocity = cfg.momentum * velocity - step_size * grad
                coeffs = coeffs + velocity
            else:
                coeffs = coeffs - step_size * grad
            if proximal and l1_tau > 0.0:
                coeffs = soft_threshold(coeffs, l1_tau, mask)
        if not np.all(np.isfinite(coeffs)):
            raise DivergenceError(f"divergence at iteration {it}", iteration=it)
        d = d.with_coeffs(coeffs)

        if detector is not None and disabled_at is None and terms.perim_weight > 0.0:
            if detector.update(terms.l_perim):
                disabled_at = it + 1
                logger.warning(f"⚠️ perimeter penalty reached a plateau, disabled from iteration {disabled_at}")

        if it % 500 == 0:
            logger.debug(f"it={it} l_cd={terms.l_cd:.6g} l_perim={terms.l_perim:.6g} l_coeff={terms.l_coeff:.6g}")

    final_chamfer = chamfer_terms(decode(d, n_pts).samples, samples.samples, cfg.chamfer).value
    logger.info(f"✓ fit finished: final chamfer {final_chamfer:.6g}")
    return FitResult(descriptor=d, loss_trace=trace, iterations=len(trace),
                     final_chamfer=final_chamfer, perimeter_disabled_at=disabled_at)
