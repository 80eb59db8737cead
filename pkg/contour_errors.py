#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
أخطاء النظام
Contour codec error hierarchy

كل خطأ يُترجم إلى رمز خروج ثابت في واجهة سطر الأوامر:
    1 → OSError (I/O)
    2 → ContourValidationError
    3 → DivergenceError
"""

from typing import Optional


class ContourError(Exception):
    """الخطأ الأساسي لجميع أخطاء المكتبة"""


class ContourValidationError(ContourError, ValueError):
    """Precondition violation on an input value."""


class ChebyshevDomainError(ContourValidationError):
    """Evaluation point outside [-1, 1]."""


class AnnotationParseError(ContourValidationError):
    """ملف JSON غير صالح"""

    def __init__(self, message: str, byte_offset: int):
        super().__init__(message)
        self.byte_offset = byte_offset


class AnnotationSchemaError(ContourValidationError):
    """حقل مفقود أو بنوع خاطئ في ملف COCO"""

    def __init__(self, message: str, field: str):
        super().__init__(message)
        self.field = field


class DivergenceError(ContourError, ArithmeticError):
    """Non-finite loss or coefficients during gradient descent."""

    def __init__(self, message: str, iteration: Optional[int] = None):
        super().__init__(message)
        self.iteration = iteration


EXIT_OK = 0
EXIT_IO = 1
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


def exit_code_for(exc: BaseException) -> int:
    """رمز الخروج المناسب لنوع الخطأ"""
    if isinstance(exc, DivergenceError):
        return EXIT_NUMERICAL
    if isinstance(exc, OSError):
        return EXIT_IO
    if isinstance(exc, (ContourValidationError, ValueError)):
        return EXIT_VALIDATION
    if isinstance(exc, ArithmeticError):
        return EXIT_NUMERICAL
    return EXIT_VALIDATION
