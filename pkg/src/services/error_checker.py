"""
Сервис для классификации ошибок и выбора кода завершения
"""
from pydantic import ValidationError

from ..common.errors import ConfigError, FitConvergenceError, SqzkitError

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_NOT_CONVERGED = 2


class ErrorChecker:
    """Класс для проверки различных типов ошибок"""

    @staticmethod
    def exit_code(error: BaseException) -> int:
        """
        Код завершения CLI: 1 - ошибка входа, 2 - подгонка не сошлась

        :param error: Исключение
        :return: Код завершения процесса
        """
        if isinstance(error, FitConvergenceError):
            return EXIT_NOT_CONVERGED
        return EXIT_INPUT_ERROR

    @staticmethod
    def as_config_error(error: ValidationError, prefix: str = "") -> ConfigError:
        """
        Первая ошибка pydantic как ConfigError с путём к полю (cavity.r_out)

        :param prefix: Путь секции, к которой относилась модель
        """
        first = error.errors()[0]
        path = ".".join(str(part) for part in first["loc"])
        if prefix:
            path = f"{prefix}.{path}" if path else prefix
        return ConfigError(first["msg"], path=path or None)

    @staticmethod
    def describe(error: BaseException) -> str:
        """Короткое сообщение для stderr"""
        if isinstance(error, ValidationError):
            return ErrorChecker.as_config_error(error).message
        if isinstance(error, SqzkitError):
            return error.message
        return f"{type(error).__name__}: {error}"
