"""
Иерархия исключений sqzkit
"""
from typing import Any, Optional


class SqzkitError(Exception):
    """Базовое исключение пакета"""

    def __init__(self, message: str, **details: Any):
        """
        :param message: Человекочитаемое описание ошибки
        :param details: Структурированные детали (для --json и логов)
        """
        self.message = message
        self.details = details
        super().__init__(message)


class DomainError(SqzkitError, ValueError):
    """Аргумент вне области определения модели"""


class AboveThresholdError(DomainError):
    """Накачка на пороге или выше него (P/P_th >= 1)"""

    def __init__(self, pump_ratio: float):
        super().__init__(
            f"Накачка выше порога: pump_ratio={pump_ratio:.6g} >= 1",
            pump_ratio=pump_ratio,
        )
        self.pump_ratio = pump_ratio


class NonPhysicalPairError(DomainError):
    """Пара сжатие/антисжатие не описывается моделью ниже порога"""

    def __init__(self, condition: str, sqz_db: float, antisqz_db: float, code: str = "nonphysical"):
        """
        :param condition: Описание нарушенного условия
        :param code: Машинный код: no_squeezing, no_antisqueezing, asymmetry, efficiency
        """
        super().__init__(
            f"Нефизичная пара ({sqz_db:.4g} дБ, {antisqz_db:.4g} дБ): {condition}",
            condition=condition,
            code=code,
            sqz_db=sqz_db,
            antisqz_db=antisqz_db,
        )
        self.condition = condition
        self.code = code


class ConfigError(SqzkitError):
    """Ошибка конфигурации с путём к полю"""

    def __init__(self, message: str, path: Optional[str] = None):
        full = f"{path}: {message}" if path else message
        super().__init__(full, path=path)
        self.path = path


class SchemaVersionError(ConfigError):
    """Несовпадение версии схемы конфигурации"""

    def __init__(self, found: Any, expected: int):
        super().__init__(f"версия схемы {found!r}, ожидается {expected}", path="schema")
        self.found = found
        self.expected = expected


class DataFormatError(SqzkitError):
    """Ошибка формата входного файла (CSV/JSON) с позицией"""

    def __init__(
        self,
        message: str,
        source: Optional[str] = None,
        line: Optional[int] = None,
        column: Optional[int] = None,
    ):
        where = []
        if source:
            where.append(str(source))
        if line is not None:
            where.append(f"строка {line}")
        if column is not None:
            where.append(f"столбец {column}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(f"{prefix}{message}", source=source, line=line, column=column)
        self.source = source
        self.line = line
        self.column = column

    @classmethod
    def from_decode_error(cls, error: UnicodeDecodeError, data: bytes, source: Optional[str] = None) -> "DataFormatError":
        """Позиция первого байта, который не декодируется как UTF-8 (столбец в байтах)"""
        line_start = data.rfind(b"\n", 0, error.start) + 1
        return cls(
            f"файл не в кодировке UTF-8: байт 0x{data[error.start]:02x}",
            source=source,
            line=data.count(b"\n", 0, error.start) + 1,
            column=error.start - line_start + 1,
        )


class FitConvergenceError(SqzkitError):
    """Подгонка не сошлась; несёт FitResult для отчёта"""

    def __init__(self, fit_result: Any):
        """
        :param fit_result: FitResult с converged=False и диагностикой
        """
        self.fit_result = fit_result
        diagnostic = getattr(fit_result, "diagnostic", None) or "нет сходимости"
        super().__init__(f"Подгонка не сошлась: {diagnostic}")


class InfeasibleDesignError(SqzkitError):
    """В сетке перебора нет допустимых точек (строгий режим)"""


class UsageError(SqzkitError):
    """Неверные аргументы командной строки"""
