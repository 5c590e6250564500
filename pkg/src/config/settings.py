"""Настройки sqzkit из переменных окружения."""

import logging
import os

logger = logging.getLogger(__name__)


def _get_int(name: str, default: int, minimum: int = 0) -> int:
    """
    Читает целое значение из окружения.

    Returns:
        Значение переменной или default, если она не задана или некорректна
    """
    raw = os.getenv(name)
    if raw is None or raw == "":
        return default
    try:
        value = int(raw)
    except ValueError:
        logger.warning("%s должен быть целым числом, получено: %s", name, raw)
        return default
    if value < minimum:
        logger.warning("%s должен быть >= %d, получено: %d", name, minimum, value)
        return default
    return value


def _get_float(name: str, default: float, low: float = 0.0, high: float = float("inf")) -> float:
    """
    Читает вещественное значение из окружения.

    Returns:
        Значение переменной или default, если она не задана или вне (low, high]
    """
    raw = os.getenv(name)
    if raw is None or raw == "":
        return default
    try:
        value = float(raw)
    except ValueError:
        logger.warning("%s должен быть числом, получено: %s", name, raw)
        return default
    if not (low < value <= high):
        logger.warning("%s вне диапазона (%g, %g]: %g", name, low, high, value)
        return default
    return value


def get_max_iterations() -> int:
    """Максимум итераций решателя на один старт (по умолчанию 500)"""
    return _get_int("SQZKIT_MAX_ITER", 500, minimum=1)


def get_multistart_count() -> int:
    """Число стартов мультистарта (по умолчанию 8)"""
    return _get_int("SQZKIT_STARTS", 8, minimum=1)


def get_gradient_tolerance() -> float:
    """Порог нормы градиента (по умолчанию 1e-12)"""
    return _get_float("SQZKIT_GRAD_TOL", 1e-12)


def get_step_tolerance() -> float:
    """Порог относительного шага параметров (по умолчанию 1e-10)"""
    return _get_float("SQZKIT_STEP_TOL", 1e-10)


def get_default_seed() -> int:
    """Seed по умолчанию для мультистарта и симуляции"""
    return _get_int("SQZKIT_SEED", 0)


def get_clip_ratio() -> float:
    """Предел отсечки P/P_th вблизи порога (по умолчанию 0.99)"""
    return _get_float("SQZKIT_CLIP_RATIO", 0.99, low=0.0, high=0.999999)
