#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
═══════════════════════════════════════════════════════════════════════════
تحليل Chebyshev للدالة القطبية - Chebyshev Periodicity Analysis
═══════════════════════════════════════════════════════════════════════════

ρ(x) = Σ α_n T_n(x) على [−1, 1] حيث x = θ/π − 1.

بما أن T_n(1) = 1 و T_n(−1) = (−1)^n فإن:
    ρ(1) − ρ(−1) = 2·Σ α_odd

الملاءمة بالمربعات الصغرى بدون قيد لا تحقق Σ α_odd = 0 عموماً،
فيظهر انقطاع في المحيط المُعاد بناؤه عند θ = 2π.
"""

from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np
from numpy.polynomial import chebyshev as npcheb

from contour_config import LoggerFactory
from contour_errors import ChebyshevDomainError, ContourValidationError
from contour_geometry import Polygon
from fourier_codec import cast_rays

logger = LoggerFactory.get_logger("ChebyshevAnalysis")

DOMAIN_EPS = 1e-12

ArrayOrScalar = Union[float, np.ndarray]


@dataclass(frozen=True, eq=False)
class ChebyshevSeries:
    """المعاملات الحقيقية α_0 … α_N"""
    alphas: np.ndarray

    def __post_init__(self):
        a = np.array(self.alphas, dtype=float).ravel()
        if a.size < 1:
            raise ContourValidationError("a Chebyshev series needs at least one coefficient")
        if not np.all(np.isfinite(a)):
            raise ContourValidationError("Chebyshev coefficients must be finite")
        a.setflags(write=False)
        object.__setattr__(self, "alphas", a)

    @property
    def degree(self) -> int:
        return len(self.alphas) - 1


def _checked_domain(x: ArrayOrScalar) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if np.any(np.abs(arr) > 1.0 + DOMAIN_EPS):
        raise ChebyshevDomainError("Chebyshev argument outside [-1, 1]")
    return arr


def _as_output(values: np.ndarray, x: ArrayOrScalar) -> ArrayOrScalar:
    return float(values) if np.ndim(x) == 0 else values


def cheb_eval(s: ChebyshevSeries, x: ArrayOrScalar) -> ArrayOrScalar:
    """Clenshaw summation of Σ α_n T_n(x)."""
    xa = _checked_domain(x)
    b1 = np.zeros_like(xa)
    b2 = np.zeros_like(xa)
    for alpha in s.alphas[:0:-1]:
        b1, b2 = alpha + 2.0 * xa * b1 - b2, b1
    return _as_output(s.alphas[0] + xa * b1 - b2, x)


def cheb_eval_recurrence(s: ChebyshevSeries, x: ArrayOrScalar) -> ArrayOrScalar:
    """T_{n+1} = 2x·T_n − T_{n−1}"""
    xa = _checked_domain(x)
    t_prev, t_cur = np.ones_like(xa), xa
    total = s.alphas[0] * t_prev
    for alpha in s.alphas[1:]:
        total = total + alpha * t_cur
        t_prev, t_cur = t_cur, 2.0 * xa * t_cur - t_prev
    return _as_output(total, x)


def periodicity_gap(s: ChebyshevSeries) -> float:
    """ρ(1) − ρ(−1) = 2·Σ α_n للقيم الفردية n"""
    return 2.0 * float(np.sum(s.alphas[1::2]))


# ═══════════════════════════════════════════════════════════════════════════
# الملاءمة بالمربعات الصغرى (Least squares fits of ρ)
# ═══════════════════════════════════════════════════════════════════════════

@dataclass(frozen=True, eq=False)
class ChebyshevFit:
    """نتيجة الملاءمة مع العينات المستخدمة"""
    series: ChebyshevSeries
    gap: float
    residual: float
    theta: np.ndarray
    rho: np.ndarray
    fitted: np.ndarray
    constrained: bool = False

    def to_csv(self) -> str:
        rows = ["theta,rho_true,rho_cheb_fit"]
        for t, r, f in zip(self.theta, self.rho, self.fitted):
            rows.append(f"{float(t)!r},{float(r)!r},{float(f)!r}")
        return "\n".join(rows) + "\n"


def sample_rho(p: Polygon, center: Tuple[float, float], n_samples: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    عينات ρ بزوايا منتظمة تشمل الطرفين θ = 0 و θ = 2π.
    """
    theta = 2.0 * np.pi * np.arange(n_samples) / (n_samples - 1)
    cast = cast_rays(p, center, theta, "farthest")
    return theta, cast.rho


def _solve(design: np.ndarray, rho: np.ndarray) -> np.ndarray:
    if np.linalg.matrix_rank(design) < design.shape[1]:
        raise ContourValidationError("rank-deficient Chebyshev least-squares system")
    solution, *_ = np.linalg.lstsq(design, rho, rcond=None)
    return solution


def fit_rho_series(p: Polygon, center: Tuple[float, float], degree: int, n_samples: int,
                   constrained: bool = False) -> ChebyshevFit:
    """
    ملاءمة ρ(θ) بسلسلة Chebyshev من الدرجة degree.

    constrained=True يفرض Σ α_odd = 0 بحذف α_1 = −Σ_{k≥3 فردي} α_k.
    """
    if degree < 0:
        raise ContourValidationError("degree must be nonnegative")
    if n_samples <= degree:
        raise ContourValidationError("n_samples must exceed degree")
    if n_samples < 2:
        raise ContourValidationError("n_samples must be at least 2")

    theta, rho = sample_rho(p, center, n_samples)
    x = np.clip(theta / np.pi - 1.0, -1.0, 1.0)
    vander = npcheb.chebvander(x, degree)

    if constrained and degree >= 1:
        free = [k for k in range(degree + 1) if k != 1]
        design = np.column_stack([
            vander[:, k] - vander[:, 1] if k % 2 == 1 else vander[:, k] for k in free
        ])
        beta = _solve(design, rho)
        alphas = np.zeros(degree + 1)
        alphas[free] = beta
        alphas[1] = -float(np.sum(alphas[3::2]))
    else:
        alphas = _solve(vander, rho)

    series = ChebyshevSeries(alphas)
    fitted = vander @ series.alphas
    residual = float(np.sum((fitted - rho) ** 2))
    gap = periodicity_gap(series)
    logger.info(f"Chebyshev fit degree={degree} constrained={constrained}: gap={gap:.6g} residual={residual:.6g}")
    return ChebyshevFit(series=series, gap=gap, residual=residual, theta=theta, rho=rho,
                        fitted=fitted, constrained=constrained)


def cheb_fit_rho(p: Polygon, center: Tuple[float, float], degree: int, n_samples: int,
                 constrained: bool = False) -> Tuple[ChebyshevSeries, float]:
    """(series, gap) لملاءمة ρ من رمي الأشعة"""
    fit = fit_rho_series(p, center, degree, n_samples, constrained)
    return fit.series, fit.gap
