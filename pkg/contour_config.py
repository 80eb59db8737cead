#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
═══════════════════════════════════════════════════════════════════════════
إعدادات النظام والتسجيل - Contour Codec Configuration & Logging
═══════════════════════════════════════════════════════════════════════════

- LoggerFactory: إعداد مركزي لنظام logging مرة واحدة فقط
- CodecSettings: القيم الافتراضية للمشروع
- ConfigManager: قراءة وكتابة وتحديث config.json
- resolve_thread_count: حد العمال من متغير البيئة CONTOUR_CODEC_THREADS
"""

import os
import json
import logging
from dataclasses import dataclass, field, asdict, fields
from pathlib import Path
from typing import List, Optional

from dotenv import load_dotenv

from contour_errors import ContourValidationError


THREADS_ENV_VAR = "CONTOUR_CODEC_THREADS"
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


# ═══════════════════════════════════════════════════════════════════════════
# إعداد نظام التسجيل (Logging Configuration)
# ═══════════════════════════════════════════════════════════════════════════

class LoggerFactory:
    """
    مصنع مركزي لإنشاء وإدارة loggers
    """
    _configured = False

    @classmethod
    def setup(cls, level: int = logging.INFO):
        """
        إعداد نظام logging مرة واحدة فقط
        """
        if not cls._configured:
            logging.basicConfig(
                level=level,
                format='%(asctime)s | %(levelname)-8s | %(name)s | %(message)s',
                datefmt='%H:%M:%S'
            )
            cls._configured = True
        else:
            logging.getLogger().setLevel(level)

    @classmethod
    def get_logger(cls, name: str) -> logging.Logger:
        """
        الحصول على logger بالاسم المطلوب
        """
        if not cls._configured:
            cls.setup()
        return logging.getLogger(name)


logger = LoggerFactory.get_logger("ContourConfig")


# ═══════════════════════════════════════════════════════════════════════════
# التكوين (Settings)
# ═══════════════════════════════════════════════════════════════════════════

@dataclass
class CodecSettings:
    """
    إعدادات المشروع الافتراضية
    """
    # الترميز
    default_n_pts: int = 60
    default_harmonics: int = 8
    bits_per_value: int = 32
    polar_rays: int = 72

    # تجربة إعادة البناء
    sweep_cutoffs: List[int] = field(default_factory=lambda: [1, 2, 4, 8, 16, 32])
    max_workers: int = 4

    # الملاءمة
    fit_steps: int = 3000
    fit_step_size: float = 0.05

    # Chebyshev
    chebyshev_degree: int = 8
    chebyshev_samples: int = 256

    log_level: str = "INFO"

    def validate(self):
        """
        Raises:
            ContourValidationError: قيمة عددية غير موجبة أو مستوى تسجيل غير معروف
        """
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, (int, float)) and not value > 0:
                raise ContourValidationError(f"{f.name} must be positive")
        if self.default_n_pts < 4:
            raise ContourValidationError("default_n_pts must be at least 4")
        if not self.sweep_cutoffs or any(b <= a for a, b in zip(self.sweep_cutoffs, self.sweep_cutoffs[1:])):
            raise ContourValidationError("sweep_cutoffs must be a nonempty ascending list")
        if self.log_level.upper() not in LOG_LEVELS:
            raise ContourValidationError(f"unknown log level: {self.log_level}")

    def to_dict(self) -> dict:
        """تحويل التكوين إلى قاموس"""
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> 'CodecSettings':
        """إنشاء تكوين من قاموس (المفاتيح غير المعروفة تُتجاهل)"""
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            logger.warning(f"مفاتيح تكوين غير معروفة تم تجاهلها: {unknown}")
        return cls(**{k: v for k, v in data.items() if k in known})


class ConfigManager:
    """
    مدير التكوين المركزي للنظام
    يدير قراءة وكتابة وتحديث الإعدادات
    """

    def __init__(self, config_path: Optional[Path] = None):
        """
        Args:
            config_path: مسار ملف التكوين (اختياري)
        """
        self.config_path = Path(config_path) if config_path else Path("config.json")
        self.logger = LoggerFactory.get_logger("ConfigManager")
        self.config = self._load_or_create_default()

    def _load_or_create_default(self) -> CodecSettings:
        """
        تحميل التكوين من الملف أو إنشاء تكوين افتراضي
        """
        if self.config_path.exists():
            try:
                with open(self.config_path, 'r', encoding='utf-8') as f:
                    data = json.load(f)
                return CodecSettings.from_dict(data)
            except (OSError, ValueError, TypeError) as e:
                self.logger.warning(f"فشل تحميل التكوين من {self.config_path}: {e}")
                self.logger.info("استخدام التكوين الافتراضي")

        return CodecSettings()

    def save(self):
        """
        حفظ التكوين الحالي إلى الملف
        """
        self.config_path.write_text(json.dumps(self.config.to_dict(), ensure_ascii=False, indent=2) + "\n",
                                    encoding="utf-8")
        self.logger.info(f"✓ تم حفظ التكوين في {self.config_path}")

    def update(self, **kwargs) -> CodecSettings:
        """
        تحديث قيم محددة في التكوين؛ القيم النصية تُحوَّل إلى نوع الحقل.

        Raises:
            ContourValidationError: مفتاح غير معروف أو قيمة غير صالحة
        """
        values = self.config.to_dict()
        unknown = sorted(set(kwargs) - set(values))
        if unknown:
            raise ContourValidationError(f"unknown configuration keys: {unknown}")
        for key, value in kwargs.items():
            values[key] = _coerce_setting(key, value, values[key])
        settings = CodecSettings(**values)
        settings.validate()
        self.config = settings
        for key in kwargs:
            self.logger.info(f"✓ تم تحديث {key} = {values[key]}")
        return settings

    def apply_assignments(self, assignments: List[str]) -> CodecSettings:
        """قائمة "KEY=VALUE" كما تأتي من سطر الأوامر"""
        parsed = {}
        for item in assignments:
            key, sep, value = item.partition("=")
            if not sep or not key.strip():
                raise ContourValidationError(f"expected KEY=VALUE, got {item!r}")
            parsed[key.strip()] = value.strip()
        return self.update(**parsed)


def _coerce_setting(key: str, value, current):
    try:
        if isinstance(current, list):
            if isinstance(value, str):
                return [int(v) for v in value.split(",") if v.strip()]
            return [int(v) for v in value]
        if isinstance(current, int):
            return int(value)
        if isinstance(current, float):
            return float(value)
        return str(value)
    except (TypeError, ValueError) as e:
        raise ContourValidationError(f"invalid value for {key}: {value!r}") from e


def resolve_thread_count(requested: Optional[int], settings: Optional[CodecSettings] = None) -> int:
    """
    عدد العمال الفعلي للتجربة المتوازية.

    القيمة المطلوبة (أو max_workers من الإعدادات) محدودة بالمتغير
    CONTOUR_CODEC_THREADS إن وُجد، ولا تقل عن 1.
    """
    load_dotenv()
    settings = settings or CodecSettings()
    count = requested if requested is not None else settings.max_workers
    cap = os.getenv(THREADS_ENV_VAR)
    if cap:
        try:
            count = min(count, int(cap))
        except ValueError:
            logger.warning(f"قيمة غير صالحة لـ {THREADS_ENV_VAR}: {cap!r}")
    return max(1, int(count))
